#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

Outcome run(const std::string& args) {
    const std::string cmd = std::string(ECE_CLI_PATH) + " " + args + " 2>/dev/null";
    Outcome o;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return o;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, n);
    const int status = pclose(pipe);
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

fs::path workdir() {
    const fs::path dir = fs::path(ECE_TEST_TMP) / "cli";
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& s) {
    std::ofstream out(p);
    out << s;
}

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("rank").code, 1);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, GenerateValidateStats) {
    const auto dir = workdir();
    const auto corpus = dir / "ivf.jsonl";
    ASSERT_EQ(run("generate --profile ivf --seed 3 --out " + corpus.string()).code, 0);
    EXPECT_EQ(run("validate " + corpus.string()).code, 0);
    const auto stats = run("stats --json " + corpus.string());
    EXPECT_EQ(stats.code, 0);
    const auto j = nlohmann::json::parse(stats.out);
    EXPECT_EQ(j.at("posts").get<std::size_t>(), 1321u);
    const auto again = run("generate --profile ivf --seed 3");
    std::ifstream in(corpus);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(again.out, ss.str());
}

TEST(Cli, ValidationErrorsExitTwo) {
    const auto dir = workdir();
    const auto bad = dir / "bad.jsonl";
    write(bad, R"({"thread_id":"t","post_index":0,"author_id":"a","label_a":"joy","label_b":"factual"})" "\n");
    EXPECT_EQ(run("validate " + bad.string()).code, 2);
    EXPECT_EQ(run("validate " + (dir / "missing.jsonl").string()).code, 2);
    EXPECT_EQ(run("generate --profile nosuch").code, 2);
    const auto cfg = dir / "bad_config.json";
    write(cfg, R"({"corpus":"x.jsonl","unknown":1})");
    EXPECT_EQ(run("run --quiet --config " + cfg.string()).code, 2);
}

TEST(Cli, TasksAndExtract) {
    const auto dir = workdir();
    const auto corpus = dir / "small.jsonl";
    auto profile = ece::ivf_profile();
    profile.thread_count = 6;
    profile.total_posts = 0;
    profile.author_count = 30;
    profile.starter_count = 6;
    ece::save_corpus(corpus.string(), ece::generate_corpus(profile));
    const auto tasks = run("tasks " + corpus.string());
    EXPECT_EQ(tasks.code, 0);
    EXPECT_EQ(tasks.out.rfind("task,class,count\n", 0), 0u);
    const auto ex = run("extract --model IX " + corpus.string());
    EXPECT_EQ(ex.code, 0);
    std::size_t lines = 0;
    for (char c : ex.out) lines += c == '\n';
    EXPECT_EQ(lines, ece::load_corpus(corpus.string()).post_count() + 1);
    EXPECT_EQ(run("extract --model XX " + corpus.string()).code, 1);  // unknown model id is a usage error
}

TEST(Cli, RankOnPublishedMarginTable) {
    const auto dir = workdir();
    const auto csv = dir / "margin_precision.csv";
    std::string s = "task";
    for (auto m : ece::kAllModels) s += "," + std::string(ece::to_string(m));
    s += "\n";
    const char* tasks[] = {"6-class", "5-class", "4-class", "3-class"};
    for (std::size_t r = 0; r < 4; ++r) {
        s += tasks[r];
        for (double v : ece::reference::kMarginPrecision[r]) s += "," + ece::format_fixed(v, 3);
        s += "\n";
    }
    write(csv, s);
    const auto out = run("rank --precisions " + csv.string() + " --exclude BoW");
    EXPECT_EQ(out.code, 0);
    EXPECT_NE(out.out.find("6-class,2,9,7.5,7.5,10.5,10.5,5,4,3,1,15,14,6,13,12\n"), std::string::npos);
    EXPECT_NE(out.out.find("best,IX\n"), std::string::npos);
    write(dir / "broken.csv", "task,I\n3-class,abc\n");
    EXPECT_EQ(run("rank --precisions " + (dir / "broken.csv").string()).code, 2);
}

TEST(Cli, RunAndReport) {
    const auto dir = workdir() / "run";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto profile = ece::ivf_profile();
    profile.thread_count = 12;
    profile.total_posts = 0;
    profile.author_count = 50;
    profile.starter_count = 10;
    ece::save_corpus((dir / "c.jsonl").string(), ece::generate_corpus(profile));
    write(dir / "ok.json",
          R"({"corpus":"c.jsonl","output":"ok","tasks":["3-class"],"models":["I"],"classifiers":["crf"],"folds":3})");
    EXPECT_EQ(run("run --quiet --config " + (dir / "ok.json").string()).code, 0);
    EXPECT_TRUE(fs::exists(dir / "ok" / "report.md"));
    fs::remove(dir / "ok" / "report.md");
    EXPECT_EQ(run("report " + (dir / "ok").string()).code, 0);
    EXPECT_TRUE(fs::exists(dir / "ok" / "report.md"));
    write(dir / "fail.json",
          R"({"corpus":"c.jsonl","output":"fail","tasks":["3-class"],"models":["I"],"classifiers":["crf"],"folds":3,
              "crf":{"max_iterations":1,"tolerance":1e-12}})");
    EXPECT_EQ(run("run --quiet --config " + (dir / "fail.json").string()).code, 3);
    EXPECT_EQ(run("report " + (dir / "nowhere").string()).code, 2);
}
