#pragma once

// Linear-chain conditional random field.
//
// score(y | x) = start[y_0] + sum_t state[y_t] . x_t + sum_{t>0} trans[y_{t-1}, y_t] + end[y_{n-1}]
//
// Every encoded coordinate is conjoined with every label; numeric coordinates
// scale their indicator. Training maximizes the L2-penalized conditional
// log-likelihood  sum log p(y | x) - |w|^2 / (2 sigma^2)  with L-BFGS; all
// sums over label paths are done in log space.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ece/encoding.hpp"
#include "ece/lbfgs.hpp"

namespace ece {

struct CrfConfig {
    double sigma2 = 10.0;
    double tolerance = 1e-5;  // gradient max-norm
    std::size_t max_iterations = 500;
    std::size_t history = 10;
};

class CrfConvergenceError : public std::runtime_error {
public:
    CrfConvergenceError(double gradient_norm, std::size_t iterations)
        : std::runtime_error("CRF training did not converge after " + std::to_string(iterations) +
                             " iterations (gradient max-norm " + std::to_string(gradient_norm) + ")"),
          gradient_norm_(gradient_norm) {}
    double gradient_norm() const noexcept { return gradient_norm_; }

private:
    double gradient_norm_;
};

class LabelSetMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct LabeledSequence {
    std::vector<SparseVector> x;
    std::vector<std::size_t> y;
};

/// Parameter block offsets inside the flat weight vector.
struct CrfShape {
    std::size_t labels = 0;
    std::size_t dimension = 0;

    std::size_t state(std::size_t y, std::size_t j) const { return y * dimension + j; }
    std::size_t trans(std::size_t from, std::size_t to) const {
        return labels * dimension + from * labels + to;
    }
    std::size_t start(std::size_t y) const { return labels * dimension + labels * labels + y; }
    std::size_t end(std::size_t y) const { return labels * dimension + labels * labels + labels + y; }
    std::size_t size() const { return labels * dimension + labels * labels + 2 * labels; }
};

namespace detail {

inline double log_sum_exp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

struct Lattice {
    std::size_t n = 0, labels = 0;
    std::vector<double> emit;   // n x L state scores (start/end not included)
    std::vector<double> alpha;  // n x L forward log scores
    std::vector<double> beta;   // n x L backward log scores
    double log_z = 0.0;

    double a(std::size_t t, std::size_t y) const { return alpha[t * labels + y]; }
    double b(std::size_t t, std::size_t y) const { return beta[t * labels + y]; }
    double e(std::size_t t, std::size_t y) const { return emit[t * labels + y]; }
};

inline Lattice forward_backward(std::span<const double> w, const CrfShape& shape,
                                std::span<const SparseVector> xs) {
    const std::size_t n = xs.size(), L = shape.labels;
    Lattice lat;
    lat.n = n;
    lat.labels = L;
    if (n == 0) return lat;
    lat.emit.assign(n * L, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const auto& x = xs[t];
        for (std::size_t y = 0; y < L; ++y) {
            double s = 0.0;
            for (std::size_t k = 0; k < x.index.size(); ++k) {
                if (x.index[k] >= shape.dimension)
                    throw LayoutMismatch("feature coordinate outside CRF dimension");
                s += w[shape.state(y, x.index[k])] * x.value[k];
            }
            lat.emit[t * L + y] = s;
        }
    }
    std::vector<double> buf(L);
    lat.alpha.assign(n * L, 0.0);
    for (std::size_t y = 0; y < L; ++y) lat.alpha[y] = w[shape.start(y)] + lat.e(0, y);
    for (std::size_t t = 1; t < n; ++t) {
        for (std::size_t y = 0; y < L; ++y) {
            for (std::size_t p = 0; p < L; ++p) buf[p] = lat.a(t - 1, p) + w[shape.trans(p, y)];
            lat.alpha[t * L + y] = log_sum_exp(buf) + lat.e(t, y);
        }
    }
    lat.beta.assign(n * L, 0.0);
    for (std::size_t y = 0; y < L; ++y) lat.beta[(n - 1) * L + y] = w[shape.end(y)];
    for (std::size_t t = n - 1; t-- > 0;) {
        for (std::size_t y = 0; y < L; ++y) {
            for (std::size_t q = 0; q < L; ++q)
                buf[q] = w[shape.trans(y, q)] + lat.e(t + 1, q) + lat.b(t + 1, q);
            lat.beta[t * L + y] = log_sum_exp(buf);
        }
    }
    for (std::size_t y = 0; y < L; ++y) buf[y] = lat.a(n - 1, y) + w[shape.end(y)];
    lat.log_z = log_sum_exp(buf);
    return lat;
}

}  // namespace detail

/// Unnormalized log score of one label path.
inline double crf_path_score(std::span<const double> w, const CrfShape& shape,
                             std::span<const SparseVector> xs, std::span<const std::size_t> ys) {
    if (xs.empty()) return 0.0;
    double s = w[shape.start(ys[0])] + w[shape.end(ys.back())];
    for (std::size_t t = 0; t < xs.size(); ++t) {
        for (std::size_t k = 0; k < xs[t].index.size(); ++k)
            s += w[shape.state(ys[t], xs[t].index[k])] * xs[t].value[k];
        if (t > 0) s += w[shape.trans(ys[t - 1], ys[t])];
    }
    return s;
}

/// Penalized log-likelihood; writes its gradient into `grad` when non-empty.
inline double crf_log_likelihood(std::span<const double> w, const CrfShape& shape,
                                 std::span<const LabeledSequence> data, double sigma2,
                                 std::span<double> grad = {}) {
    const std::size_t L = shape.labels;
    const bool want_grad = !grad.empty();
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
    double ll = 0.0;
    for (const auto& seq : data) {
        const std::size_t n = seq.x.size();
        if (n == 0) continue;
        for (auto y : seq.y)
            if (y >= L) throw LabelSetMismatch("gold label outside the CRF label set");
        const auto lat = detail::forward_backward(w, shape, seq.x);
        ll += crf_path_score(w, shape, seq.x, seq.y) - lat.log_z;
        if (!want_grad) continue;

        // Observed minus expected feature counts.
        grad[shape.start(seq.y[0])] += 1.0;
        grad[shape.end(seq.y[n - 1])] += 1.0;
        for (std::size_t t = 0; t < n; ++t) {
            const auto& x = seq.x[t];
            for (std::size_t k = 0; k < x.index.size(); ++k)
                grad[shape.state(seq.y[t], x.index[k])] += x.value[k];
            if (t > 0) grad[shape.trans(seq.y[t - 1], seq.y[t])] += 1.0;
            for (std::size_t y = 0; y < L; ++y) {
                const double p = std::exp(lat.a(t, y) + lat.b(t, y) - lat.log_z);
                for (std::size_t k = 0; k < x.index.size(); ++k)
                    grad[shape.state(y, x.index[k])] -= p * x.value[k];
                if (t == 0) grad[shape.start(y)] -= p;
                if (t + 1 == n) grad[shape.end(y)] -= p;
            }
            if (t > 0) {
                for (std::size_t a = 0; a < L; ++a)
                    for (std::size_t b = 0; b < L; ++b)
                        grad[shape.trans(a, b)] -= std::exp(lat.a(t - 1, a) + w[shape.trans(a, b)] +
                                                            lat.e(t, b) + lat.b(t, b) - lat.log_z);
            }
        }
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        sq += w[i] * w[i];
        if (want_grad) grad[i] -= w[i] / sigma2;
    }
    return ll - sq / (2.0 * sigma2);
}

struct CrfModel {
    Layout layout;
    std::vector<std::string> classes;
    CrfShape shape;
    std::vector<double> weights;
    CrfConfig config;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    std::vector<double> objective_trace;  // penalized log-likelihood per accepted step
};

struct CrfInference {
    std::vector<std::vector<double>> marginals;  // per position, per label
    double log_partition = 0.0;
    std::vector<std::size_t> viterbi;

    double partition() const { return std::exp(log_partition); }
};

/// Forward-backward marginals, log partition and the best path. Exact score
/// ties in the Viterbi recursion resolve to the lexicographically smallest label name.
inline CrfInference crf_inference(const CrfModel& model, std::span<const SparseVector> xs) {
    const auto& shape = model.shape;
    const std::size_t n = xs.size(), L = shape.labels;
    CrfInference out;
    if (n == 0) return out;
    const auto lat = detail::forward_backward(model.weights, shape, xs);
    out.log_partition = lat.log_z;
    out.marginals.assign(n, std::vector<double>(L));
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t y = 0; y < L; ++y)
            out.marginals[t][y] = std::exp(lat.a(t, y) + lat.b(t, y) - lat.log_z);

    std::vector<std::size_t> by_name(L);
    std::iota(by_name.begin(), by_name.end(), 0);
    std::stable_sort(by_name.begin(), by_name.end(), [&](std::size_t a, std::size_t b) {
        return model.classes[a] < model.classes[b];
    });
    const auto& w = model.weights;
    std::vector<double> delta(n * L);
    std::vector<std::size_t> back(n * L, 0);
    for (std::size_t y = 0; y < L; ++y) delta[y] = w[shape.start(y)] + lat.e(0, y);
    for (std::size_t t = 1; t < n; ++t) {
        for (std::size_t y = 0; y < L; ++y) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t arg = by_name[0];
            for (auto p : by_name) {
                const double v = delta[(t - 1) * L + p] + w[shape.trans(p, y)];
                if (v > best) {
                    best = v;
                    arg = p;
                }
            }
            delta[t * L + y] = best + lat.e(t, y);
            back[t * L + y] = arg;
        }
    }
    double best = -std::numeric_limits<double>::infinity();
    std::size_t last = by_name[0];
    for (auto y : by_name) {
        const double v = delta[(n - 1) * L + y] + w[shape.end(y)];
        if (v > best) {
            best = v;
            last = y;
        }
    }
    out.viterbi.assign(n, 0);
    out.viterbi[n - 1] = last;
    for (std::size_t t = n - 1; t > 0; --t) out.viterbi[t - 1] = back[t * L + out.viterbi[t]];
    return out;
}

inline std::vector<std::size_t> predict(const CrfModel& model, std::span<const SparseVector> xs) {
    return crf_inference(model, xs).viterbi;
}

inline CrfModel train_crf(std::span<const LabeledSequence> data, Layout layout,
                          std::vector<std::string> classes, const CrfConfig& cfg) {
    if (!(cfg.sigma2 > 0.0) || !(cfg.tolerance > 0.0) || cfg.max_iterations == 0)
        throw std::invalid_argument("CRF configuration values must be positive");
    bool any = false;
    for (const auto& seq : data) {
        if (seq.x.size() != seq.y.size())
            throw std::invalid_argument("sequence features and labels differ in length");
        any = any || !seq.x.empty();
        for (auto y : seq.y)
            if (y >= classes.size()) throw LabelSetMismatch("gold label outside the CRF label set");
    }
    if (!any) throw std::invalid_argument("CRF training needs at least one non-empty sequence");

    CrfModel model;
    model.shape = CrfShape{classes.size(), layout.dimension()};
    model.layout = std::move(layout);
    model.classes = std::move(classes);
    model.config = cfg;
    const CrfShape shape = model.shape;
    auto objective = [&](std::span<const double> w, std::span<double> g) {
        const double v = crf_log_likelihood(w, shape, data, cfg.sigma2, g);
        for (double& x : g) x = -x;
        return -v;
    };
    LbfgsOptions opt;
    opt.history = cfg.history;
    opt.gradient_tolerance = cfg.tolerance;
    opt.max_iterations = cfg.max_iterations;
    auto result = minimize_lbfgs(objective, std::vector<double>(shape.size(), 0.0), opt);
    if (!result.converged) throw CrfConvergenceError(result.gradient_norm, result.iterations);
    model.weights = std::move(result.x);
    model.iterations = result.iterations;
    model.gradient_norm = result.gradient_norm;
    for (double v : result.trace) model.objective_trace.push_back(-v);
    return model;
}

/// Collects the sequences of `ds` restricted to `keep` (sorted instance ids).
inline std::vector<LabeledSequence> labeled_sequences(const EncodedDataset& ds,
                                                      std::span<const std::size_t> keep) {
    std::vector<bool> use(ds.size(), keep.empty());
    for (auto i : keep) use.at(i) = true;
    std::vector<LabeledSequence> out;
    for (const auto& seq : ds.sequences) {
        LabeledSequence s;
        for (std::size_t i = seq.begin; i < seq.end; ++i) {
            if (!use[i]) continue;
            s.x.push_back(ds.instances[i].x);
            s.y.push_back(ds.instances[i].label);
        }
        if (!s.x.empty()) out.push_back(std::move(s));
    }
    return out;
}

inline CrfModel train_crf(const EncodedDataset& ds, const CrfConfig& cfg) {
    const auto data = labeled_sequences(ds, {});
    return train_crf(data, ds.layout, ds.classes, cfg);
}

/// Viterbi labels for every instance of `ds`, sequence by sequence.
inline std::vector<std::size_t> predict(const CrfModel& model, const EncodedDataset& ds) {
    require_same_layout(model.layout, ds.layout);
    if (model.classes != ds.classes) throw LabelSetMismatch("dataset classes differ from model labels");
    std::vector<std::size_t> out(ds.size(), 0);
    for (const auto& seq : ds.sequences) {
        std::vector<SparseVector> xs;
        for (std::size_t i = seq.begin; i < seq.end; ++i) xs.push_back(ds.instances[i].x);
        const auto labels = predict(model, xs);
        for (std::size_t k = 0; k < labels.size(); ++k) out[seq.begin + k] = labels[k];
    }
    return out;
}

}  // namespace ece
