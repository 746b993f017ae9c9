// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracles.hpp"

using namespace ece;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Verdict {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& why) {
        if (!ok) {
            if (pass) detail = why;
            pass = false;
        }
    }
};

std::vector<double> row_of(const reference::Grid& g, std::size_t r) { return {g[r].begin(), g[r].end()}; }

ScoreTable table_of(const reference::Grid& g) {
    ScoreTable t{{"6-class", "5-class", "4-class", "3-class"}, {}, {}};
    for (auto m : kAllModels) t.columns.emplace_back(to_string(m));
    for (const auto& row : g) t.cells.emplace_back(row.begin(), row.end());
    return t;
}

Verdict criterion1() {
    Verdict v;
    const auto t0 = Clock::now();
    for (std::size_t r = 0; r < 4; ++r) {
        v.require(rank_row(row_of(reference::kMarginPrecision, r)) == row_of(reference::kMarginRanks, r),
                  "margin rank row " + std::to_string(r) + " differs");
        v.require(rank_row(row_of(reference::kCrfPrecision, r)) == row_of(reference::kCrfRanks, r),
                  "CRF rank row " + std::to_string(r) + " differs");
    }
    const auto margin = total_ranks(rank_table(table_of(reference::kMarginPrecision)));
    const auto crf = total_ranks(rank_table(table_of(reference::kCrfPrecision)));
    v.require(margin.totals[static_cast<std::size_t>(ModelId::IX)] == 8.0, "margin total of IX is not 8");
    v.require(margin.best == std::vector<std::string>{"IX"}, "margin best is not IX");
    v.require(crf.totals[static_cast<std::size_t>(ModelId::I)] == 7.0 &&
                  crf.totals[static_cast<std::size_t>(ModelId::XII)] == 7.0,
              "CRF totals of I and XII are not 7");
    v.require(crf.best == std::vector<std::string>{"I", "XII"}, "CRF best is not the I/XII tie");
    const double secs = seconds_since(t0);
    v.require(secs < 1.0, "took " + std::to_string(secs) + " s");
    if (v.pass) v.detail = "both rank tables match; IX = 8, I = XII = 7; " + format_fixed(secs * 1000.0, 2) + " ms";
    return v;
}

Verdict criterion2() {
    Verdict v;
    const std::vector<std::size_t> expected = {4, 7, 7, 10, 8, 11, 11, 14, 3, 3, 6, 5, 5, 5};
    std::vector<std::size_t> got;
    for (auto m : kAllModels)
        if (m != ModelId::BoW) got.push_back(schema(m).descriptors.size());
    v.require(got == expected, "descriptor counts differ");
    if (v.pass) v.detail = "descriptor counts (4,7,7,10,8,11,11,14,3,3,6,5,5,5)";
    return v;
}

Verdict criterion3() {
    Verdict v;
    const auto c = oracle::published_distribution_corpus();
    v.require(class_distribution(build_task(c, TaskId::SixClass)) ==
                  std::vector<std::size_t>{117, 310, 162, 124, 433, 175},
              "constructed corpus has the wrong 6-class distribution");
    v.require(build_task(c, TaskId::FiveClass).size() == 1146, "5-class size is not 1146");
    v.require(class_distribution(build_task(c, TaskId::FourClass)) == std::vector<std::size_t>{596, 117, 433, 175},
              "4-class distribution differs");
    v.require(class_distribution(build_task(c, TaskId::ThreeClass)) == std::vector<std::size_t>{596, 117, 433},
              "3-class distribution differs");
    if (v.pass) v.detail = "1146 / (596,117,433,175) / (596,117,433)";
    return v;
}

Verdict criterion4() {
    Verdict v;
    const auto t0 = Clock::now();
    Rng rng(derive_seed(1, "acceptance/crf-oracle"));
    double worst = 0.0;
    const int chains = 200;
    for (int trial = 0; trial < chains; ++trial) {
        const std::size_t L = 1 + rng.index(3), D = 1 + rng.index(4), n = 1 + rng.index(4);
        const auto chain = oracle::random_chain(rng, L, D, 2.0);
        std::vector<std::vector<double>> x(n, std::vector<double>(D));
        for (auto& row : x)
            for (auto& val : row) val = 2.0 * rng.uniform() - 1.0;
        const auto ref = oracle::enumerate(chain, x);
        CrfModel model;
        for (std::size_t j = 0; j < D; ++j) model.layout.coordinates.push_back("f" + std::to_string(j));
        for (std::size_t y = 0; y < L; ++y) model.classes.push_back("l" + std::to_string(y));
        model.shape = CrfShape{L, D};
        model.weights = chain.flat();
        std::vector<SparseVector> xs;
        for (const auto& row : x) xs.push_back(from_dense(row));
        const auto inf = crf_inference(model, xs);
        worst = std::max(worst, oracle::relative_error(inf.partition(), ref.z, 1e-300));
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t y = 0; y < L; ++y)
                worst = std::max(worst, oracle::relative_error(inf.marginals[t][y], ref.marginals[t][y], 1e-300));
        const double viterbi_score = oracle::dense_path_score(chain, x, inf.viterbi);
        v.require(oracle::relative_error(viterbi_score, ref.best_score, 1e-12) <= 1e-12,
                  "Viterbi path misses the maximum on chain " + std::to_string(trial));
    }
    v.require(worst <= 1e-8, "max relative error " + std::to_string(worst));
    const double secs = seconds_since(t0);
    v.require(secs < 10.0, "took " + std::to_string(secs) + " s");
    if (v.pass) {
        std::ostringstream d;
        d << chains << " chains, max relative error " << worst << ", " << format_fixed(secs, 3) << " s";
        v.detail = d.str();
    }
    return v;
}

Verdict criterion5() {
    Verdict v;
    Rng rng(derive_seed(1, "acceptance/gradient"));
    double worst = 0.0;
    const int problems = 30;
    for (int trial = 0; trial < problems; ++trial) {
        const std::size_t L = 2 + rng.index(3), D = 1 + rng.index(5);
        const CrfShape shape{L, D};
        std::vector<LabeledSequence> data;
        const std::size_t count = 1 + rng.index(4);
        for (std::size_t s = 0; s < count; ++s) {
            LabeledSequence seq;
            const std::size_t n = 1 + rng.index(6);
            for (std::size_t t = 0; t < n; ++t) {
                std::vector<double> x(D);
                for (auto& val : x) val = rng.bernoulli(0.5) ? 1.0 : 0.0;
                seq.x.push_back(from_dense(x));
                seq.y.push_back(rng.index(L));
            }
            data.push_back(std::move(seq));
        }
        std::vector<double> w(shape.size());
        for (auto& val : w) val = rng.normal(0.0, 1.0);
        const double sigma2 = 0.5 + 10.0 * rng.uniform();
        std::vector<double> grad(w.size());
        crf_log_likelihood(w, shape, data, sigma2, grad);
        const double h = 1e-5;
        for (std::size_t k = 0; k < w.size(); ++k) {
            auto wp = w, wm = w;
            wp[k] += h;
            wm[k] -= h;
            const double numeric =
                (crf_log_likelihood(wp, shape, data, sigma2) - crf_log_likelihood(wm, shape, data, sigma2)) /
                (2.0 * h);
            worst = std::max(worst, oracle::relative_error(grad[k], numeric, 1e-6));
        }
    }
    v.require(worst <= 1e-4, "max relative error " + std::to_string(worst));
    if (v.pass) {
        std::ostringstream d;
        d << problems << " problems, max relative error " << worst;
        v.detail = d.str();
    }
    return v;
}

Verdict criterion6() {
    Verdict v;
    Rng rng(derive_seed(1, "acceptance/margin"));
    double worst_obj = 0.0, worst_balance = 0.0, worst_box = 0.0;
    const int problems = 100;
    for (int trial = 0; trial < problems; ++trial) {
        const std::size_t m = 2 + rng.index(5), D = 2 + rng.index(4);
        const int degree = 1 + static_cast<int>(rng.index(5));
        std::vector<std::vector<double>> xs(m, std::vector<double>(D));
        for (auto& x : xs)
            for (auto& val : x) val = rng.bernoulli(0.5) ? 1.0 : 0.0;
        BinaryProblem p;
        for (std::size_t i = 0; i < m; ++i) {
            p.y.push_back(i == 0 ? 1.0 : (i == 1 ? -1.0 : (rng.bernoulli(0.5) ? 1.0 : -1.0)));
            p.upper.push_back(static_cast<double>(1 + rng.index(5)));
        }
        p.kernel.resize(m * m);
        std::vector<std::vector<double>> K(m, std::vector<double>(m));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) K[i][j] = p.kernel[i * m + j] = normalized_poly_kernel(xs[i], xs[j], degree);
        const auto s = solve_binary_dual(p, 1e-9, 10'000'000);
        const auto ref = oracle::projected_gradient_dual(K, p.y, p.upper);
        worst_obj = std::max(worst_obj, std::abs(s.objective - ref.objective));
        double balance = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            balance += s.alpha[i] * p.y[i];
            worst_box = std::max({worst_box, -s.alpha[i], s.alpha[i] - p.upper[i]});
        }
        worst_balance = std::max(worst_balance, std::abs(balance));
    }
    v.require(worst_obj <= 1e-5, "objective gap " + std::to_string(worst_obj));
    v.require(worst_balance <= 1e-6, "pair balance " + std::to_string(worst_balance));
    v.require(worst_box <= 0.0, "box violation " + std::to_string(worst_box));
    if (v.pass) {
        std::ostringstream d;
        d << problems << " problems, max objective gap " << worst_obj << ", max |sum a y| " << worst_balance;
        v.detail = d.str();
    }
    return v;
}

Verdict criterion7() {
    Verdict v;
    ConfusionMatrix cm(2);
    cm.add(0, 0, 3);
    cm.add(0, 1, 1);
    cm.add(1, 0, 2);
    cm.add(1, 1, 4);
    const auto m = macro_metrics(cm);
    v.require(std::abs(m.macro_precision - 0.7) <= 1e-4, "macro P " + std::to_string(m.macro_precision));
    v.require(std::abs(m.macro_recall - 0.7083) <= 1e-4, "macro R " + std::to_string(m.macro_recall));
    v.require(std::abs(m.macro_f - 0.6970) <= 1e-4, "macro F " + std::to_string(m.macro_f));
    ConfusionMatrix perfect(3);
    perfect.add(0, 0, 4);
    perfect.add(1, 1, 2);
    perfect.add(2, 2, 7);
    const auto p = macro_metrics(perfect);
    v.require(p.macro_precision == 1.0 && p.macro_recall == 1.0 && p.macro_f == 1.0, "perfect matrix is not 1.0");
    if (v.pass)
        v.detail = "P " + format_fixed(m.macro_precision, 4) + ", R " + format_fixed(m.macro_recall, 4) + ", F " +
                   format_fixed(m.macro_f, 4) + "; perfect = 1";
    return v;
}

struct GridRun {
    fs::path dir;
    double seconds = 0.0;
    RunSummary summary;
};

GridRun run_full_grid(const fs::path& corpus, const fs::path& out) {
    fs::remove_all(out);
    ExperimentConfig cfg;
    cfg.corpus = corpus.string();
    cfg.output = out.string();
    cfg.folds = 10;
    cfg.seed = 1;
    const auto t0 = Clock::now();
    auto summary = run_experiments(cfg, &std::cerr);
    return {out, seconds_since(t0), summary};
}

Verdict criterion8(const GridRun& run) {
    Verdict v;
    v.require(run.summary.cells == 120, "grid has " + std::to_string(run.summary.cells) + " cells");
    v.require(run.summary.failed == 0, std::to_string(run.summary.failed) + " cells failed");
    v.require(run.seconds < 1800.0, "grid took " + std::to_string(run.seconds) + " s");
    if (!v.pass) return v;
    const auto rs = load_results(run.dir);
    std::ostringstream d;
    d << "grid " << format_fixed(run.seconds, 0) << " s;";
    for (const auto& b : rs.manifest.at("baselines")) {
        const auto task = parse_task(b.at("task").get<std::string>()).value();
        const double base_f = b.at("macro_f").get<double>();
        auto crf = [&](ModelId m) { return macro_metrics(rs.find_ok(task, m, Classifier::crf)->pooled); };
        const auto one = crf(ModelId::I), twelve = crf(ModelId::XII);
        v.require(one.macro_f >= base_f + 0.05, std::string(to_string(task)) + ": Model I F too close to baseline");
        v.require(twelve.macro_f >= base_f + 0.05,
                  std::string(to_string(task)) + ": Model XII F too close to baseline");
        double unlabeled = 0.0;
        for (auto m : {ModelId::IX, ModelId::X, ModelId::XI}) unlabeled = std::max(unlabeled, crf(m).macro_precision);
        const double labeled = std::min(one.macro_precision, twelve.macro_precision);
        v.require(unlabeled < labeled, std::string(to_string(task)) + ": IX-XI not below I/XII in macro P");
        d << " " << to_string(task) << " base F " << format_fixed(base_f, 3) << ", I F " << format_fixed(one.macro_f, 3)
          << ", XII F " << format_fixed(twelve.macro_f, 3) << ", max(IX-XI) P " << format_fixed(unlabeled, 3)
          << " < min(I,XII) P " << format_fixed(labeled, 3) << ";";
    }
    if (v.pass) v.detail = d.str();
    return v;
}

Verdict criterion9(const GridRun& a, const GridRun& b) {
    Verdict v;
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a.dir)) {
        if (entry.path().extension() != ".csv") continue;
        const auto other = b.dir / entry.path().filename();
        v.require(fs::exists(other), entry.path().filename().string() + " missing in second run");
        v.require(slurp(entry.path()) == slurp(other), entry.path().filename().string() + " differs");
        ++compared;
    }
    v.require(compared >= 10, "only " + std::to_string(compared) + " CSV files compared");
    if (v.pass) v.detail = std::to_string(compared) + " CSV files byte-identical across two full runs";
    return v;
}

Verdict criterion10(const GridRun& run) {
    Verdict v;
    const auto report = slurp(run.dir / "report.md");
    const auto disclosure = report.find("## Disclosure");
    v.require(disclosure != std::string::npos && disclosure < report.find("## ", disclosure + 3),
              "report does not open with a disclosure section");
    v.require(report.find("not reproducible") != std::string::npos, "no non-reproducibility statement");
    v.require(report.find("available only on request") != std::string::npos, "corpus availability not stated");
    v.require(report.find("0.644") != std::string::npos, "published 0.644 missing");
    v.require(report.find("Published values on the original corpus") != std::string::npos,
              "published tables missing");
    v.require(report.find("| crf | 6-class | XII | 0.644 |") != std::string::npos,
              "benchmark comparison row missing");
    if (v.pass) v.detail = "disclosure, published tables and benchmark comparison present in report.md";
    return v;
}

}  // namespace

int main() {
    const fs::path work = fs::path(ECE_TEST_TMP) / "acceptance";
    fs::create_directories(work);
    int failures = 0;
    auto print = [&](int n, const Verdict& v) {
        std::cout << "CRITERION " << n << ": " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail << "\n"
                  << std::flush;
        failures += v.pass ? 0 : 1;
    };
    auto guarded = [&](int n, const std::function<Verdict()>& fn) {
        try {
            print(n, fn());
        } catch (const std::exception& e) {
            print(n, Verdict{false, std::string("exception: ") + e.what()});
        }
    };

    guarded(1, criterion1);
    guarded(2, criterion2);
    guarded(3, criterion3);
    guarded(4, criterion4);
    guarded(5, criterion5);
    guarded(6, criterion6);
    guarded(7, criterion7);

    const auto corpus = work / "ivf.jsonl";
    std::optional<GridRun> first, second;
    try {
        save_corpus(corpus.string(), generate_corpus(ivf_profile()));
        first = run_full_grid(corpus, work / "run_a");
    } catch (const std::exception& e) {
        std::cerr << "grid run failed: " << e.what() << "\n";
    }
    guarded(8, [&] { return first ? criterion8(*first) : Verdict{false, "grid run did not complete"}; });
    try {
        if (first) second = run_full_grid(corpus, work / "run_b");
    } catch (const std::exception& e) {
        std::cerr << "second grid run failed: " << e.what() << "\n";
    }
    guarded(9, [&] {
        return first && second ? criterion9(*first, *second) : Verdict{false, "second grid run did not complete"};
    });
    guarded(10, [&] { return first ? criterion10(*first) : Verdict{false, "no report to inspect"}; });

    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << "\n";
    return failures == 0 ? 0 : 1;
}
