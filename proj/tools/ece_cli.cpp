// ece: command-line front end for corpus generation, inspection and experiment runs.
//
// Exit codes: 0 success, 1 usage error, 2 validation error, 3 experiment-cell failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>

#include <CLI11.hpp>

#include "ece/ece.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kCellFailure = 3;

std::string percent(double v) { return ece::format_fixed(100.0 * v, 1) + "%"; }

int cmd_generate(const std::string& profile_name, std::uint64_t seed, bool seed_given, const std::string& out) {
    auto profile = ece::load_profile(profile_name);
    if (seed_given) profile.seed = seed;
    const auto corpus = ece::generate_corpus(profile);
    if (out == "-") {
        ece::write_corpus(std::cout, corpus);
    } else {
        ece::save_corpus(out, corpus);
        std::cerr << "wrote " << corpus.post_count() << " posts in " << corpus.threads.size() << " threads to "
                  << out << "\n";
    }
    return kOk;
}

int cmd_validate(const std::string& path) {
    const auto corpus = ece::load_corpus(path);
    std::cout << "ok: " << corpus.threads.size() << " threads, " << corpus.post_count() << " posts\n";
    return kOk;
}

int cmd_stats(const std::string& path, bool as_json) {
    const auto corpus = ece::load_corpus(path);
    const auto s = ece::corpus_stats(corpus);
    std::optional<double> kappa;
    try {
        kappa = ece::fleiss_kappa(corpus);
    } catch (const ece::CorpusError&) {
    }
    if (as_json) {
        nlohmann::ordered_json j;
        j["threads"] = s.thread_count;
        j["posts"] = s.post_count;
        j["authors"] = s.author_count;
        j["first_authors"] = s.first_author_count;
        j["mean_thread_length"] = s.mean_thread_length;
        j["std_thread_length"] = s.std_thread_length;
        j["top_k"] = s.top_k;
        j["top_k_share"] = s.top_k_share;
        j["starter_share"] = s.starter_share;
        j["newcomer_share"] = s.newcomer_share;
        j["ambiguity_rate"] = s.ambiguity_rate;
        j["first_post_ambiguity"] = s.first_post_ambiguity;
        j["last_post_ambiguity"] = s.last_post_ambiguity;
        j["fleiss_kappa"] = kappa ? nlohmann::ordered_json(*kappa) : nlohmann::ordered_json(nullptr);
        for (std::size_t r = 0; r < ece::kResolvedCount; ++r)
            j["resolved"][std::string(ece::to_string(static_cast<ece::ResolvedLabel>(r)))] = s.resolved_distribution[r];
        for (const auto& [n, authors] : s.author_post_histogram) j["author_post_histogram"][std::to_string(n)] = authors;
        std::cout << j.dump(2) << "\n";
        return kOk;
    }
    std::cout << "threads               " << s.thread_count << "\n"
              << "posts                 " << s.post_count << "\n"
              << "authors               " << s.author_count << " (" << s.first_author_count << " thread starters)\n"
              << "thread length         mean " << ece::format_fixed(s.mean_thread_length, 2) << ", std "
              << ece::format_fixed(s.std_thread_length, 2) << "\n"
              << "top " << s.top_k << " authors        " << percent(s.top_k_share) << " of posts\n"
              << "starter share         " << percent(s.starter_share) << " of each thread on average\n"
              << "newcomer posts        " << percent(s.newcomer_share) << "\n"
              << "ambiguous posts       " << percent(s.ambiguity_rate) << " (first " << percent(s.first_post_ambiguity)
              << ", last " << percent(s.last_post_ambiguity) << ")\n"
              << "fleiss kappa          " << (kappa ? ece::format_fixed(*kappa, 4) : std::string("undefined")) << "\n"
              << "resolved labels      ";
    for (std::size_t r = 0; r < ece::kResolvedCount; ++r)
        std::cout << " " << ece::to_string(static_cast<ece::ResolvedLabel>(r)) << "=" << s.resolved_distribution[r];
    std::cout << "\n";
    return kOk;
}

int cmd_tasks(const std::string& path, bool with_baseline) {
    const auto corpus = ece::load_corpus(path);
    std::cout << "task,class,count\n";
    for (auto t : ece::kAllTasks) {
        const auto ds = ece::build_task(corpus, t);
        const auto counts = ece::class_distribution(ds);
        for (std::size_t k = 0; k < counts.size(); ++k)
            std::cout << ece::to_string(t) << "," << ds.classes[k] << "," << counts[k] << "\n";
    }
    if (!with_baseline) return kOk;
    std::cerr << "task,majority_class,macro_p,macro_r,macro_f\n";
    for (auto t : ece::kAllTasks) {
        const auto ds = ece::build_task(corpus, t);
        if (ds.size() == 0) continue;
        const auto base = ece::majority_baseline(ds);
        std::cerr << ece::to_string(t) << "," << ds.classes[ece::majority_class(ece::class_distribution(ds), ds.classes)]
                  << "," << ece::format_fixed(base.macro_precision, 6) << "," << ece::format_fixed(base.macro_recall, 6)
                  << "," << ece::format_fixed(base.macro_f, 6) << "\n";
    }
    return kOk;
}

std::string feature_text(const ece::FeatureValue& v) {
    if (const auto* l = std::get_if<ece::NeighborLabel>(&v)) return std::string(ece::to_string(*l));
    if (const auto* b = std::get_if<bool>(&v)) return *b ? "1" : "0";
    return ece::format_fixed(std::get<double>(v), 6);
}

int cmd_extract(const std::string& model_name, const std::string& path, std::size_t min_count) {
    const auto model = ece::parse_model(model_name);
    if (!model) {
        std::cerr << "unknown model '" << model_name << "'\n";
        return kUsage;
    }
    const auto corpus = ece::load_corpus(path);
    if (*model == ece::ModelId::BoW) {
        const auto vocab = ece::build_vocabulary(corpus, min_count);
        std::cout << "thread_id,post_index,active_tokens,dimension\n";
        for (const auto& thread : corpus.threads)
            for (const auto& post : thread.posts)
                std::cout << thread.thread_id << "," << post.index << "," << ece::bow_vector(post, vocab).active.size()
                          << "," << vocab.size() << "\n";
        return kOk;
    }
    const auto stats = ece::author_stats(corpus);
    const auto schema = ece::schema(*model);
    std::cout << "thread_id,post_index";
    for (const auto& d : schema.descriptors) std::cout << "," << d.name;
    std::cout << "\n";
    for (std::size_t t = 0; t < corpus.threads.size(); ++t) {
        const auto& thread = corpus.threads[t];
        for (std::size_t p = 0; p < thread.posts.size(); ++p) {
            const auto fv = ece::extract(*model, thread, t, p, stats);
            std::cout << thread.thread_id << "," << p;
            for (const auto& v : fv.values) std::cout << "," << feature_text(v);
            std::cout << "\n";
        }
    }
    return kOk;
}

int cmd_run(const std::string& config_path, std::size_t jobs, bool quiet) {
    auto cfg = ece::load_config(config_path);
    if (jobs > 0) cfg.jobs = jobs;
    const auto summary = ece::run_experiments(cfg, quiet ? nullptr : &std::cerr);
    std::cout << summary.cells - summary.failed << " of " << summary.cells << " cells completed; results in "
              << summary.output.string() << "\n";
    return summary.failed == 0 ? kOk : kCellFailure;
}

int cmd_rank(const std::string& csv_path, const std::vector<std::string>& exclude_list) {
    std::ifstream in(csv_path);
    if (!in) throw ece::ReportError("cannot open '" + csv_path + "'");
    const auto scores = ece::read_score_csv(in);
    const auto ranks = ece::rank_table(scores);
    std::cout << ece::rank_csv(ranks);
    if (scores.complete()) {
        const std::set<std::string> exclude(exclude_list.begin(), exclude_list.end());
        const auto totals = ece::total_ranks(ranks, exclude);
        std::cout << "best";
        for (const auto& b : totals.best) std::cout << "," << b;
        std::cout << "\n";
    }
    return kOk;
}

int cmd_report(const std::string& dir) {
    const auto s = ece::emit_report(dir);
    std::cout << s.ok_cells << " of " << s.expected_cells << " cells present";
    if (s.failed_cells) std::cout << ", " << s.failed_cells << " failed";
    if (s.missing_cells) std::cout << ", " << s.missing_cells << " missing";
    std::cout << "; report written to " << (std::filesystem::path(dir) / "report.md").string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forum sentiment models: corpus tools and experiment runner"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "Generate a synthetic corpus");
    std::string profile = "ivf", out = "-";
    std::uint64_t seed = 1;
    gen->add_option("--profile", profile, "Built-in profile (ivf, independent) or JSON profile file")
        ->capture_default_str();
    auto* seed_opt = gen->add_option("--seed", seed, "Random seed");
    gen->add_option("--out", out, "Output JSONL path, '-' for stdout")->capture_default_str();

    std::string corpus_path;
    auto* val = app.add_subcommand("validate", "Check a corpus file");
    val->add_option("corpus", corpus_path, "Corpus JSONL file")->required();

    auto* st = app.add_subcommand("stats", "Descriptive corpus statistics");
    bool as_json = false;
    st->add_option("corpus", corpus_path, "Corpus JSONL file")->required();
    st->add_flag("--json", as_json, "Print JSON");

    auto* tk = app.add_subcommand("tasks", "Class distribution CSV per task");
    bool with_baseline = false;
    tk->add_option("corpus", corpus_path, "Corpus JSONL file")->required();
    tk->add_flag("--baseline", with_baseline, "Also print majority baselines (to stderr)");

    auto* ex = app.add_subcommand("extract", "Print feature vectors of one model as CSV");
    std::string model;
    std::size_t min_count = 3;
    ex->add_option("--model", model, "Model id: BoW, I .. XIV")->required();
    ex->add_option("--min-count", min_count, "BoW vocabulary threshold")->capture_default_str();
    ex->add_option("corpus", corpus_path, "Corpus JSONL file")->required();

    auto* run = app.add_subcommand("run", "Run an experiment grid");
    std::string config;
    std::size_t jobs = 0;
    bool quiet = false;
    run->add_option("--config", config, "Experiment config JSON")->required();
    run->add_option("--jobs", jobs, "Parallel workers (overrides the config)");
    run->add_flag("--quiet", quiet, "Suppress per-cell progress");

    auto* rk = app.add_subcommand("rank", "Rank models from a precision CSV");
    std::string precisions;
    std::vector<std::string> exclude;
    rk->add_option("--precisions", precisions, "CSV with header task,<model>...")->required();
    rk->add_option("--exclude", exclude, "Models left out of the best-model search");

    auto* rp = app.add_subcommand("report", "Rebuild CSV tables and report.md from a results directory");
    std::string dir;
    rp->add_option("dir", dir, "Results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) return cmd_generate(profile, seed, seed_opt->count() > 0, out);
        if (*val) return cmd_validate(corpus_path);
        if (*st) return cmd_stats(corpus_path, as_json);
        if (*tk) return cmd_tasks(corpus_path, with_baseline);
        if (*ex) return cmd_extract(model, corpus_path, min_count);
        if (*run) return cmd_run(config, jobs, quiet);
        if (*rk) return cmd_rank(precisions, exclude);
        if (*rp) return cmd_report(dir);
    } catch (const ece::CorpusError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const ece::ProfileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const ece::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const ece::ReportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    }
    return kUsage;
}
