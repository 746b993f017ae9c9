#pragma once

// Limited-memory BFGS minimizer with backtracking (Armijo) line search.

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <span>
#include <vector>

namespace ece {

struct LbfgsOptions {
    std::size_t history = 10;
    double gradient_tolerance = 1e-5;  // on the max-norm of the gradient
    std::size_t max_iterations = 500;
    double armijo = 1e-4;
    std::size_t max_backtracks = 60;
};

struct LbfgsResult {
    std::vector<double> x;
    double value = 0.0;
    double gradient_norm = 0.0;  // max-norm
    std::size_t iterations = 0;
    bool converged = false;
    bool line_search_failed = false;
    std::vector<double> trace;  // objective value after each accepted step (first entry: start)
};

namespace detail {

inline double max_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double inner(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace detail

/// `f(x, grad)` returns the objective at x and writes its gradient into grad.
template <typename Objective>
LbfgsResult minimize_lbfgs(Objective&& f, std::vector<double> x, const LbfgsOptions& opt = {}) {
    const std::size_t n = x.size();
    LbfgsResult r;
    std::vector<double> g(n), g_new(n), x_new(n), dir(n);
    double fx = f(std::span<const double>(x), std::span<double>(g));
    r.trace.push_back(fx);

    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    std::deque<Pair> memory;
    std::vector<double> alpha_buf;

    while (true) {
        r.gradient_norm = detail::max_norm(g);
        if (r.gradient_norm <= opt.gradient_tolerance) {
            r.converged = true;
            break;
        }
        if (r.iterations >= opt.max_iterations) break;

        // Two-loop recursion: dir = -H g.
        dir = g;
        alpha_buf.assign(memory.size(), 0.0);
        for (std::size_t k = memory.size(); k-- > 0;) {
            alpha_buf[k] = memory[k].rho * detail::inner(memory[k].s, dir);
            for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha_buf[k] * memory[k].y[i];
        }
        if (!memory.empty()) {
            const auto& last = memory.back();
            const double gamma = detail::inner(last.s, last.y) / detail::inner(last.y, last.y);
            for (double& d : dir) d *= gamma;
        }
        for (std::size_t k = 0; k < memory.size(); ++k) {
            const double beta = memory[k].rho * detail::inner(memory[k].y, dir);
            for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha_buf[k] - beta) * memory[k].s[i];
        }
        for (double& d : dir) d = -d;

        double slope = detail::inner(g, dir);
        if (!(slope < 0.0)) {
            memory.clear();
            for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
            slope = detail::inner(g, dir);
        }
        double step = memory.empty() ? 1.0 / std::max(1.0, std::sqrt(detail::inner(g, g))) : 1.0;

        bool accepted = false;
        double f_new = fx;
        for (std::size_t b = 0; b < opt.max_backtracks; ++b) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * dir[i];
            f_new = f(std::span<const double>(x_new), std::span<double>(g_new));
            if (std::isfinite(f_new) && f_new <= fx + opt.armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            r.line_search_failed = true;
            break;
        }

        Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            p.s[i] = x_new[i] - x[i];
            p.y[i] = g_new[i] - g[i];
        }
        const double sy = detail::inner(p.s, p.y);
        if (sy > 1e-12 * detail::inner(p.y, p.y)) {
            p.rho = 1.0 / sy;
            memory.push_back(std::move(p));
            if (memory.size() > opt.history) memory.pop_front();
        }
        x.swap(x_new);
        g.swap(g_new);
        fx = f_new;
        r.trace.push_back(fx);
        ++r.iterations;
    }
    r.x = std::move(x);
    r.value = fx;
    return r;
}

}  // namespace ece
