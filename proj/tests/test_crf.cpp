#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace ece;

namespace {

std::vector<std::vector<double>> random_dense_sequence(Rng& rng, std::size_t n, std::size_t dim) {
    std::vector<std::vector<double>> x(n, std::vector<double>(dim));
    for (auto& row : x)
        for (auto& v : row) v = rng.bernoulli(0.5) ? (rng.bernoulli(0.3) ? 0.5 : 1.0) : 0.0;
    return x;
}

std::vector<SparseVector> to_sparse(const std::vector<std::vector<double>>& x) {
    std::vector<SparseVector> out;
    for (const auto& row : x) out.push_back(from_dense(row));
    return out;
}

std::vector<std::string> label_names(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < n; ++k) names.push_back("l" + std::to_string(k));
    return names;
}

Layout layout_of(std::size_t dim) {
    Layout l{ModelId::I, {}};
    for (std::size_t j = 0; j < dim; ++j) l.coordinates.push_back("f" + std::to_string(j));
    return l;
}

CrfModel model_of(const oracle::DenseChain& chain) {
    CrfModel m;
    m.layout = layout_of(chain.dimension);
    m.classes = label_names(chain.labels);
    m.shape = CrfShape{chain.labels, chain.dimension};
    m.weights = chain.flat();
    return m;
}

LabeledSequence random_labeled(Rng& rng, std::size_t n, std::size_t dim, std::size_t labels) {
    const auto x = random_dense_sequence(rng, n, dim);
    LabeledSequence s{to_sparse(x), {}};
    for (std::size_t t = 0; t < n; ++t) s.y.push_back(rng.index(labels));
    return s;
}

}  // namespace

TEST(CrfInference, MatchesEnumeration) {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t L = 2 + rng.index(3), D = 1 + rng.index(4), n = 1 + rng.index(5);
        const auto chain = oracle::random_chain(rng, L, D);
        const auto x = random_dense_sequence(rng, n, D);
        const auto ref = oracle::enumerate(chain, x);
        const auto model = model_of(chain);
        const auto inf = crf_inference(model, to_sparse(x));
        EXPECT_LE(oracle::relative_error(inf.partition(), ref.z), 1e-9);
        for (std::size_t t = 0; t < n; ++t) {
            double row = 0.0;
            for (std::size_t y = 0; y < L; ++y) {
                EXPECT_NEAR(inf.marginals[t][y], ref.marginals[t][y], 1e-9);
                row += inf.marginals[t][y];
            }
            EXPECT_NEAR(row, 1.0, 1e-9);
        }
        EXPECT_NEAR(oracle::dense_path_score(chain, x, inf.viterbi), ref.best_score, 1e-9);
        EXPECT_NEAR(crf_path_score(model.weights, model.shape, to_sparse(x), inf.viterbi), ref.best_score, 1e-9);
    }
}

TEST(CrfInference, LikelihoodMatchesEnumeration) {
    Rng rng(29);
    const std::size_t L = 3, D = 3;
    const auto chain = oracle::random_chain(rng, L, D);
    const auto x = random_dense_sequence(rng, 4, D);
    const std::vector<std::size_t> y = {2, 0, 0, 1};
    const auto ref = oracle::enumerate(chain, x);
    const std::vector<LabeledSequence> data = {{to_sparse(x), y}};
    const auto w = chain.flat();
    double sq = 0.0;
    for (double v : w) sq += v * v;
    const double sigma2 = 3.0;
    const double expected = oracle::dense_path_score(chain, x, y) - std::log(ref.z) - sq / (2.0 * sigma2);
    EXPECT_NEAR(crf_log_likelihood(w, CrfShape{L, D}, data, sigma2), expected, 1e-9);
}

TEST(CrfInference, ZeroWeightsGiveUniformMarginals) {
    oracle::DenseChain chain;
    chain.labels = 4;
    chain.dimension = 2;
    chain.state.assign(4, std::vector<double>(2, 0.0));
    chain.trans.assign(4, std::vector<double>(4, 0.0));
    chain.start.assign(4, 0.0);
    chain.end.assign(4, 0.0);
    Rng rng(1);
    const auto inf = crf_inference(model_of(chain), to_sparse(random_dense_sequence(rng, 5, 2)));
    for (const auto& row : inf.marginals)
        for (double p : row) EXPECT_NEAR(p, 0.25, 1e-12);
    EXPECT_NEAR(inf.log_partition, 5.0 * std::log(4.0), 1e-12);
    // every path ties, so the smallest label name wins everywhere
    EXPECT_EQ(inf.viterbi, (std::vector<std::size_t>(5, 0)));
}

TEST(CrfInference, EmptySequence) {
    Rng rng(2);
    const auto inf = crf_inference(model_of(oracle::random_chain(rng, 3, 2)), {});
    EXPECT_TRUE(inf.viterbi.empty());
    EXPECT_TRUE(inf.marginals.empty());
}

TEST(CrfGradient, CentralDifferences) {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t L = 2 + rng.index(3), D = 1 + rng.index(4);
        const CrfShape shape{L, D};
        std::vector<LabeledSequence> data;
        for (int s = 0; s < 3; ++s) data.push_back(random_labeled(rng, 1 + rng.index(5), D, L));
        std::vector<double> w(shape.size());
        for (auto& v : w) v = rng.normal(0.0, 1.0);
        std::vector<double> grad(w.size());
        crf_log_likelihood(w, shape, data, 2.0, grad);
        const double h = 1e-5;
        for (std::size_t k = 0; k < w.size(); ++k) {
            auto wp = w, wm = w;
            wp[k] += h;
            wm[k] -= h;
            const double numeric =
                (crf_log_likelihood(wp, shape, data, 2.0) - crf_log_likelihood(wm, shape, data, 2.0)) / (2.0 * h);
            EXPECT_LE(oracle::relative_error(grad[k], numeric, 1e-4), 1e-6) << k;
        }
    }
}

namespace {

// Multinomial logistic regression with per-class bias, maximized by plain gradient ascent.
double logistic_optimum(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                        std::size_t L, double weight_var, double bias_var) {
    const std::size_t D = x[0].size();
    std::vector<std::vector<double>> w(L, std::vector<double>(D, 0.0));
    std::vector<double> b(L, 0.0);
    auto value = [&](std::vector<std::vector<double>>* gw, std::vector<double>* gb) {
        double ll = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::vector<double> s(L);
            for (std::size_t c = 0; c < L; ++c) {
                s[c] = b[c];
                for (std::size_t j = 0; j < D; ++j) s[c] += w[c][j] * x[i][j];
            }
            const double mx = *std::max_element(s.begin(), s.end());
            double z = 0.0;
            for (double v : s) z += std::exp(v - mx);
            ll += s[y[i]] - mx - std::log(z);
            if (gw) {
                for (std::size_t c = 0; c < L; ++c) {
                    const double p = std::exp(s[c] - mx) / z;
                    const double r = (c == y[i] ? 1.0 : 0.0) - p;
                    (*gb)[c] += r;
                    for (std::size_t j = 0; j < D; ++j) (*gw)[c][j] += r * x[i][j];
                }
            }
        }
        for (std::size_t c = 0; c < L; ++c) {
            ll -= b[c] * b[c] / (2.0 * bias_var);
            if (gw) (*gb)[c] -= b[c] / bias_var;
            for (std::size_t j = 0; j < D; ++j) {
                ll -= w[c][j] * w[c][j] / (2.0 * weight_var);
                if (gw) (*gw)[c][j] -= w[c][j] / weight_var;
            }
        }
        return ll;
    };
    const double step = 1.0 / (static_cast<double>(x.size()) * (1.0 + static_cast<double>(D)));
    for (int it = 0; it < 200000; ++it) {
        std::vector<std::vector<double>> gw(L, std::vector<double>(D, 0.0));
        std::vector<double> gb(L, 0.0);
        value(&gw, &gb);
        double norm = 0.0;
        for (std::size_t c = 0; c < L; ++c) {
            b[c] += step * gb[c];
            norm = std::max(norm, std::abs(gb[c]));
            for (std::size_t j = 0; j < D; ++j) {
                w[c][j] += step * gw[c][j];
                norm = std::max(norm, std::abs(gw[c][j]));
            }
        }
        if (norm < 1e-10) break;
    }
    return value(nullptr, nullptr);
}

}  // namespace

TEST(CrfTraining, LengthOneSequencesReduceToLogisticRegression) {
    // start and end each carry prior variance sigma2, so their sum acts as a bias with variance 2 sigma2.
    Rng rng(41);
    const std::size_t L = 3, D = 3;
    const double sigma2 = 1.5;
    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> ys;
    std::vector<LabeledSequence> data;
    for (int i = 0; i < 30; ++i) {
        auto x = random_dense_sequence(rng, 1, D);
        const std::size_t y = rng.index(L);
        xs.push_back(x[0]);
        ys.push_back(y);
        data.push_back({to_sparse(x), {y}});
    }
    CrfConfig cfg;
    cfg.sigma2 = sigma2;
    cfg.tolerance = 1e-6;
    const auto model = train_crf(data, layout_of(D), label_names(L), cfg);
    const double crf_value = crf_log_likelihood(model.weights, model.shape, data, sigma2);
    EXPECT_NEAR(crf_value, logistic_optimum(xs, ys, L, sigma2, 2.0 * sigma2), 1e-6);
    for (std::size_t a = 0; a < L; ++a)
        for (std::size_t b = 0; b < L; ++b) EXPECT_NEAR(model.weights[model.shape.trans(a, b)], 0.0, 1e-9);
}

TEST(CrfTraining, StrongPriorGivesNearUniformMarginals) {
    Rng rng(43);
    std::vector<LabeledSequence> data;
    for (int s = 0; s < 10; ++s) data.push_back(random_labeled(rng, 5, 4, 3));
    CrfConfig cfg;
    cfg.sigma2 = 1e-6;
    const auto model = train_crf(data, layout_of(4), label_names(3), cfg);
    const auto inf = crf_inference(model, data[0].x);
    for (const auto& row : inf.marginals)
        for (double p : row) EXPECT_NEAR(p, 1.0 / 3.0, 1e-3);
}

TEST(CrfTraining, SeparableDataRecoversGoldLabels) {
    Rng rng(47);
    std::vector<LabeledSequence> data;
    for (int s = 0; s < 15; ++s) {
        LabeledSequence seq;
        const std::size_t n = 2 + rng.index(6);
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t y = rng.index(3);
            std::vector<double> x(5, 0.0);
            x[y] = 1.0;
            x[3 + rng.index(2)] = 1.0;
            seq.x.push_back(from_dense(x));
            seq.y.push_back(y);
        }
        data.push_back(std::move(seq));
    }
    const auto model = train_crf(data, layout_of(5), label_names(3), CrfConfig{});
    for (const auto& seq : data) EXPECT_EQ(predict(model, seq.x), seq.y);
    ASSERT_GE(model.objective_trace.size(), 2u);
    for (std::size_t k = 1; k < model.objective_trace.size(); ++k)
        EXPECT_GE(model.objective_trace[k], model.objective_trace[k - 1]);
    EXPECT_LE(model.gradient_norm, 1e-5);
}

TEST(CrfTraining, Deterministic) {
    Rng rng(53);
    std::vector<LabeledSequence> data;
    for (int s = 0; s < 8; ++s) data.push_back(random_labeled(rng, 4, 3, 3));
    const auto a = train_crf(data, layout_of(3), label_names(3), CrfConfig{});
    const auto b = train_crf(data, layout_of(3), label_names(3), CrfConfig{});
    EXPECT_EQ(a.weights, b.weights);
}

TEST(CrfTraining, IterationCapRaises) {
    Rng rng(59);
    std::vector<LabeledSequence> data;
    for (int s = 0; s < 8; ++s) data.push_back(random_labeled(rng, 4, 3, 3));
    CrfConfig cfg;
    cfg.max_iterations = 1;
    cfg.tolerance = 1e-12;
    EXPECT_THROW(train_crf(data, layout_of(3), label_names(3), cfg), CrfConvergenceError);
}

TEST(CrfTraining, InputErrors) {
    Rng rng(61);
    std::vector<LabeledSequence> data = {random_labeled(rng, 3, 2, 3)};
    data[0].y[1] = 5;
    EXPECT_THROW(train_crf(data, layout_of(2), label_names(3), CrfConfig{}), LabelSetMismatch);
    const std::vector<LabeledSequence> empty = {LabeledSequence{}};
    EXPECT_THROW(train_crf(empty, layout_of(2), label_names(3), CrfConfig{}), std::invalid_argument);
    CrfConfig bad;
    bad.sigma2 = 0.0;
    const std::vector<LabeledSequence> fine = {random_labeled(rng, 3, 2, 3)};
    EXPECT_THROW(train_crf(fine, layout_of(2), label_names(3), bad), std::invalid_argument);
}

TEST(CrfTraining, PredictRejectsOtherLabelSet) {
    const auto c = oracle::make_corpus({{{"a", Sentiment::factual, Sentiment::factual},
                                         {"b", Sentiment::gratitude, Sentiment::gratitude},
                                         {"a", Sentiment::confusion, Sentiment::confusion}}});
    const auto stats = author_stats(c);
    const auto three = encode_model(c, stats, build_task(c, TaskId::ThreeClass), ModelId::I);
    const auto six = encode_model(c, stats, build_task(c, TaskId::SixClass), ModelId::I);
    const auto model = train_crf(three, CrfConfig{});
    EXPECT_NO_THROW(predict(model, three));
    EXPECT_THROW(predict(model, six), LabelSetMismatch);
    const auto other = encode_model(c, stats, build_task(c, TaskId::ThreeClass), ModelId::IX);
    EXPECT_THROW(predict(model, other), LayoutMismatch);
}
