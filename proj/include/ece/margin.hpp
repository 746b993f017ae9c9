#pragma once

// Kernel soft-margin classifier.
//
// Each unordered class pair gets its own binary dual problem
//
//   max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K'(x_i, x_j)
//   s.t.   0 <= a_i <= C,  sum_i a_i y_i = 0
//
// solved by sequential minimal optimization with second-order working-set
// selection. Multiclass prediction is one-vs-one voting.
//
// Identical training points with the same label are merged into one point
// whose box bound is C times its multiplicity; the merged problem has the same
// optimum and decision function.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ece/encoding.hpp"
#include "ece/folds.hpp"
#include "ece/kernel.hpp"
#include "ece/metrics.hpp"

namespace ece {

struct MarginConfig {
    KernelSpec kernel{1};
    double cost = 1.0;
    double tolerance = 1e-3;
    std::size_t max_iterations = 10'000'000;
};

class MarginConvergenceError : public std::runtime_error {
public:
    MarginConvergenceError(double gap, std::size_t iterations)
        : std::runtime_error("margin solver did not converge after " + std::to_string(iterations) +
                             " iterations (best KKT gap " + std::to_string(gap) + ")"),
          gap_(gap) {}
    double gap() const noexcept { return gap_; }

private:
    double gap_;
};

// ---------------------------------------------------------------------------
// Binary dual
// ---------------------------------------------------------------------------

struct BinaryProblem {
    std::vector<double> kernel;  // dense m x m, row-major
    std::vector<double> y;       // +1 / -1
    std::vector<double> upper;   // per-point box bound

    std::size_t size() const { return y.size(); }
    double k(std::size_t i, std::size_t j) const { return kernel[i * y.size() + j]; }
};

struct BinarySolution {
    std::vector<double> alpha;
    double rho = 0.0;        // decision f(x) = sum_i alpha_i y_i K(x_i, x) - rho
    double objective = 0.0;  // dual objective (maximized)
    double gap = 0.0;        // final KKT violation m(a) - M(a)
    std::size_t iterations = 0;
    std::vector<double> trace;  // objective after every iteration, when requested
};

inline double dual_objective(const BinaryProblem& p, std::span<const double> alpha) {
    const std::size_t m = p.size();
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (alpha[i] == 0.0) continue;
        linear += alpha[i];
        for (std::size_t j = 0; j < m; ++j)
            quad += alpha[i] * alpha[j] * p.y[i] * p.y[j] * p.k(i, j);
    }
    return linear - 0.5 * quad;
}

inline BinarySolution solve_binary_dual(const BinaryProblem& p, double tolerance,
                                        std::size_t max_iterations, bool record_trace = false) {
    constexpr double tau = 1e-12;
    const std::size_t m = p.size();
    BinarySolution s;
    s.alpha.assign(m, 0.0);
    std::vector<double> grad(m, -1.0);  // gradient of 1/2 a'Qa - e'a
    auto& a = s.alpha;
    const auto& y = p.y;
    const auto& c = p.upper;

    auto in_up = [&](std::size_t t) { return (y[t] > 0 && a[t] < c[t]) || (y[t] < 0 && a[t] > 0); };
    auto in_low = [&](std::size_t t) { return (y[t] > 0 && a[t] > 0) || (y[t] < 0 && a[t] < c[t]); };
    auto objective = [&] {
        double v = 0.0;
        for (std::size_t t = 0; t < m; ++t) v += a[t] * (1.0 - grad[t]);
        return 0.5 * v;
    };

    double best_gap = std::numeric_limits<double>::infinity();
    for (;;) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = m;
        for (std::size_t t = 0; t < m; ++t) {
            if (in_up(t) && -y[t] * grad[t] >= gmax) {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::size_t j = m;
        double best = std::numeric_limits<double>::infinity();
        if (i < m) {
            for (std::size_t t = 0; t < m; ++t) {
                if (!in_low(t)) continue;
                gmax2 = std::max(gmax2, y[t] * grad[t]);
                const double b = gmax + y[t] * grad[t];
                if (b > 0) {
                    double quad = p.k(i, i) + p.k(t, t) - 2.0 * p.k(i, t);
                    if (quad <= 0) quad = tau;
                    const double obj = -(b * b) / quad;
                    if (obj <= best) {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        const double gap = (i < m && std::isfinite(gmax2)) ? gmax + gmax2 : 0.0;
        best_gap = std::min(best_gap, gap);
        if (gap < tolerance || j == m) {
            s.gap = std::max(gap, 0.0);
            break;
        }
        if (s.iterations >= max_iterations) throw MarginConvergenceError(best_gap, s.iterations);
        ++s.iterations;

        const double ci = c[i], cj = c[j];
        const double old_i = a[i], old_j = a[j];
        const double qij = y[i] * y[j] * p.k(i, j);
        if (y[i] != y[j]) {
            double quad = p.k(i, i) + p.k(j, j) + 2.0 * qij;
            if (quad <= 0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0) {
                if (a[j] < 0) { a[j] = 0; a[i] = diff; }
            } else {
                if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
            }
            if (diff > ci - cj) {
                if (a[i] > ci) { a[i] = ci; a[j] = ci - diff; }
            } else {
                if (a[j] > cj) { a[j] = cj; a[i] = cj + diff; }
            }
        } else {
            double quad = p.k(i, i) + p.k(j, j) - 2.0 * qij;
            if (quad <= 0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > ci) {
                if (a[i] > ci) { a[i] = ci; a[j] = sum - ci; }
            } else {
                if (a[j] < 0) { a[j] = 0; a[i] = sum; }
            }
            if (sum > cj) {
                if (a[j] > cj) { a[j] = cj; a[i] = sum - cj; }
            } else {
                if (a[i] < 0) { a[i] = 0; a[j] = sum; }
            }
        }
        const double di = a[i] - old_i, dj = a[j] - old_j;
        for (std::size_t t = 0; t < m; ++t)
            grad[t] += y[t] * (y[i] * p.k(t, i) * di + y[j] * p.k(t, j) * dj);
        if (record_trace) s.trace.push_back(objective());
    }

    // Offset from free support vectors, or the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < m; ++t) {
        const double yg = y[t] * grad[t];
        if (a[t] >= c[t]) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (a[t] <= 0) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    if (free_count > 0) {
        s.rho = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(ub) && std::isfinite(lb)) {
        s.rho = 0.5 * (ub + lb);
    } else {
        s.rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
    }
    s.objective = objective();
    return s;
}

// ---------------------------------------------------------------------------
// One-vs-one multiclass over a Gram cache
// ---------------------------------------------------------------------------

struct PairMachine {
    std::size_t positive = 0;  // class voted for when f(x) > 0
    std::size_t negative = 0;
    std::vector<std::size_t> support;  // point ids (meaning depends on the owner)
    std::vector<double> coef;          // alpha_i * y_i
    double rho = 0.0;
    double objective = 0.0;
    double gap = 0.0;
    double balance = 0.0;  // sum alpha_i y_i
    double max_alpha_excess = 0.0;  // max(alpha_i - C_i, -alpha_i, 0)
};

/// Winner of one-vs-one voting; ties go to the lexicographically smallest class name.
inline std::size_t vote_winner(std::span<const std::size_t> votes, std::span<const std::string> names) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best] || (votes[c] == votes[best] && names[c] < names[best])) best = c;
    return best;
}

/// A trained one-vs-one machine whose support ids are rows of a GramCache.
struct IndexedMarginModel {
    MarginConfig config;
    std::vector<std::string> classes;
    std::vector<PairMachine> machines;

    double decision(const PairMachine& pm, const GramCache& gram, std::size_t point) const {
        double f = -pm.rho;
        for (std::size_t k = 0; k < pm.support.size(); ++k)
            f += pm.coef[k] * gram(pm.support[k], point, config.kernel.degree);
        return f;
    }

    std::size_t predict(const GramCache& gram, std::size_t point) const {
        std::vector<std::size_t> votes(classes.size(), 0);
        for (const auto& pm : machines) ++votes[decision(pm, gram, point) > 0 ? pm.positive : pm.negative];
        return vote_winner(votes, classes);
    }
};

/// Trains on the instances `train` where instance i sits at Gram row point_of[i]
/// and has class labels[i].
inline IndexedMarginModel train_margin_indexed(const GramCache& gram,
                                               std::span<const std::size_t> point_of,
                                               std::span<const std::size_t> labels,
                                               std::span<const std::size_t> train,
                                               std::span<const std::string> classes,
                                               const MarginConfig& cfg) {
    cfg.kernel.check();
    if (!(cfg.cost > 0.0)) throw std::invalid_argument("soft-margin cost must be positive");
    // (point, class) -> multiplicity
    std::vector<std::map<std::size_t, std::size_t>> members(classes.size());
    for (auto i : train) ++members.at(labels[i])[point_of[i]];
    std::vector<std::size_t> present;
    for (std::size_t c = 0; c < classes.size(); ++c)
        if (!members[c].empty()) present.push_back(c);
    if (present.size() < 2)
        throw std::invalid_argument("margin training needs at least two classes, got " +
                                    std::to_string(present.size()));

    IndexedMarginModel model{cfg, {classes.begin(), classes.end()}, {}};
    const int d = cfg.kernel.degree;
    for (std::size_t u = 0; u < present.size(); ++u) {
        for (std::size_t v = u + 1; v < present.size(); ++v) {
            const std::size_t cp = present[u], cn = present[v];
            std::vector<std::size_t> pts;
            BinaryProblem prob;
            for (const auto& [pt, n] : members[cp]) {
                pts.push_back(pt);
                prob.y.push_back(1.0);
                prob.upper.push_back(cfg.cost * static_cast<double>(n));
            }
            for (const auto& [pt, n] : members[cn]) {
                pts.push_back(pt);
                prob.y.push_back(-1.0);
                prob.upper.push_back(cfg.cost * static_cast<double>(n));
            }
            const std::size_t m = pts.size();
            prob.kernel.resize(m * m);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t s = r; s < m; ++s)
                    prob.kernel[r * m + s] = prob.kernel[s * m + r] = gram(pts[r], pts[s], d);
            const BinarySolution sol = solve_binary_dual(prob, cfg.tolerance, cfg.max_iterations);
            PairMachine pm{cp, cn, {}, {}, sol.rho, sol.objective, sol.gap, 0.0, 0.0};
            for (std::size_t r = 0; r < m; ++r) {
                pm.balance += sol.alpha[r] * prob.y[r];
                pm.max_alpha_excess = std::max(
                    {pm.max_alpha_excess, sol.alpha[r] - prob.upper[r], -sol.alpha[r]});
                if (sol.alpha[r] > 0.0) {
                    pm.support.push_back(pts[r]);
                    pm.coef.push_back(sol.alpha[r] * prob.y[r]);
                }
            }
            model.machines.push_back(std::move(pm));
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
// Grid search over kernel degree and cost
// ---------------------------------------------------------------------------

struct GridCell {
    int degree = 1;
    double cost = 1.0;
    double score = 0.0;  // inner cross-validation macro precision
    bool failed = false;
    std::string error;
};

struct GridSearchResult {
    MarginConfig best;
    double best_score = 0.0;
    std::vector<GridCell> cells;  // evaluation order: degree-major, ascending
};

/// Picks (degree, cost) by inner stratified cross-validation macro precision on
/// `train` only. Ties go to the smaller degree, then the smaller cost. A cell
/// whose training fails scores 0.
inline GridSearchResult grid_search_margin(const GramCache& gram, std::span<const std::size_t> point_of,
                                           std::span<const std::size_t> labels,
                                           std::span<const std::size_t> train,
                                           std::span<const std::string> classes,
                                           std::span<const int> degrees,
                                           std::span<const double> costs, std::size_t inner_folds,
                                           std::uint64_t seed, const MarginConfig& base = {}) {
    if (degrees.empty() || costs.empty()) throw std::invalid_argument("empty hyperparameter grid");
    std::vector<std::size_t> train_labels;
    for (auto i : train) train_labels.push_back(labels[i]);
    const auto inner = stratified_assignment(train_labels, inner_folds, seed);
    std::vector<std::vector<std::size_t>> fold_train(inner_folds), fold_test(inner_folds);
    for (std::size_t k = 0; k < train.size(); ++k)
        for (std::size_t f = 0; f < inner_folds; ++f)
            (inner[k] == f ? fold_test[f] : fold_train[f]).push_back(train[k]);

    GridSearchResult result;
    bool have_best = false;
    for (int d : degrees) {
        for (double c : costs) {
            GridCell cell{d, c, 0.0, false, {}};
            MarginConfig cfg = base;
            cfg.kernel.degree = d;
            cfg.cost = c;
            try {
                ConfusionMatrix cm(classes.size());
                for (std::size_t f = 0; f < inner_folds; ++f) {
                    const auto model = train_margin_indexed(gram, point_of, labels, fold_train[f], classes, cfg);
                    std::map<std::size_t, std::size_t> cache;
                    for (auto i : fold_test[f]) {
                        auto [it, fresh] = cache.try_emplace(point_of[i], 0);
                        if (fresh) it->second = model.predict(gram, point_of[i]);
                        cm.add(labels[i], it->second);
                    }
                }
                cell.score = macro_metrics(cm).macro_precision;
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
                cell.score = 0.0;
            }
            const bool smaller = d < result.best.kernel.degree ||
                                 (d == result.best.kernel.degree && c < result.best.cost);
            if (!have_best || cell.score > result.best_score ||
                (cell.score == result.best_score && smaller)) {
                have_best = true;
                result.best_score = cell.score;
                result.best = cfg;
            }
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Self-contained model over encoded vectors
// ---------------------------------------------------------------------------

struct MarginModel {
    Layout layout;
    std::vector<std::string> classes;
    MarginConfig config;
    std::vector<SparseVector> points;  // support vectors referenced by the machines
    std::vector<PairMachine> machines;

    double decision(const PairMachine& pm, const SparseVector& x) const {
        double f = -pm.rho;
        for (std::size_t k = 0; k < pm.support.size(); ++k)
            f += pm.coef[k] * normalized_poly_kernel(points[pm.support[k]], x, config.kernel.degree);
        return f;
    }

    std::size_t predict(const SparseVector& x) const {
        std::vector<std::size_t> votes(classes.size(), 0);
        for (const auto& pm : machines) ++votes[decision(pm, x) > 0 ? pm.positive : pm.negative];
        return vote_winner(votes, classes);
    }
};

/// Distinct feature vectors of a dataset, indexed by EncodedDataset::pattern.
inline std::vector<SparseVector> pattern_points(const EncodedDataset& ds) {
    std::vector<SparseVector> pts(ds.pattern_count);
    for (std::size_t i = 0; i < ds.size(); ++i) pts[ds.pattern[i]] = ds.instances[i].x;
    return pts;
}

inline std::vector<std::size_t> instance_labels(const EncodedDataset& ds) {
    std::vector<std::size_t> labels;
    labels.reserve(ds.size());
    for (const auto& inst : ds.instances) labels.push_back(inst.label);
    return labels;
}

inline MarginModel train_margin(const EncodedDataset& ds, const MarginConfig& cfg) {
    const auto pts = pattern_points(ds);
    const GramCache gram(pts);
    const auto labels = instance_labels(ds);
    std::vector<std::size_t> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto indexed = train_margin_indexed(gram, ds.pattern, labels, all, ds.classes, cfg);

    MarginModel model{ds.layout, ds.classes, cfg, {}, {}};
    std::map<std::size_t, std::size_t> remap;
    for (auto& pm : indexed.machines) {
        for (auto& id : pm.support) {
            auto [it, fresh] = remap.try_emplace(id, model.points.size());
            if (fresh) model.points.push_back(pts[id]);
            id = it->second;
        }
        model.machines.push_back(std::move(pm));
    }
    return model;
}

inline GridSearchResult grid_search_margin(const EncodedDataset& train, std::span<const int> degrees,
                                           std::span<const double> costs, std::size_t inner_folds,
                                           std::uint64_t seed, const MarginConfig& base = {}) {
    const auto pts = pattern_points(train);
    const GramCache gram(pts);
    const auto labels = instance_labels(train);
    std::vector<std::size_t> all(train.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return grid_search_margin(gram, train.pattern, labels, all, train.classes, degrees, costs,
                              inner_folds, seed, base);
}

inline std::vector<std::size_t> predict(const MarginModel& model, const EncodedDataset& ds) {
    require_same_layout(model.layout, ds.layout);
    std::vector<std::size_t> out;
    out.reserve(ds.size());
    for (const auto& inst : ds.instances) out.push_back(model.predict(inst.x));
    return out;
}

}  // namespace ece
