#pragma once

// Normalized polynomial kernel
//
//   K(x, y)  = (x.y + 1)^d
//   K'(x, y) = K(x, y) / sqrt(K(x, x) K(y, y))
//
// which factors as K'(x, y) = c(x, y)^d with
// c(x, y) = (x.y + 1) / sqrt((x.x + 1)(y.y + 1)). The Gram cache below stores
// c once per dataset and raises it to the requested degree on access.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ece/encoding.hpp"

namespace ece {

struct KernelSpec {
    int degree = 1;

    void check() const {
        if (degree < 1 || degree > 5)
            throw std::invalid_argument("kernel degree must be in [1, 5], got " +
                                        std::to_string(degree));
    }
};

inline double int_pow(double base, int d) {
    double r = base;
    for (int k = 1; k < d; ++k) r *= base;
    return r;
}

inline double normalized_poly_kernel(std::span<const double> x, std::span<const double> y, int d) {
    if (x.size() != y.size()) throw std::invalid_argument("kernel arguments differ in dimension");
    KernelSpec{d}.check();
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        xy += x[k] * y[k];
        xx += x[k] * x[k];
        yy += y[k] * y[k];
    }
    return int_pow((xy + 1.0) / std::sqrt((xx + 1.0) * (yy + 1.0)), d);
}

inline double normalized_poly_kernel(const SparseVector& x, const SparseVector& y, int d) {
    KernelSpec{d}.check();
    return int_pow((dot(x, y) + 1.0) / std::sqrt((dot(x, x) + 1.0) * (dot(y, y) + 1.0)), d);
}

/// Degree-one normalized kernel between every pair of points.
class GramCache {
public:
    explicit GramCache(std::span<const SparseVector> points) : n_(points.size()), base_(n_ * n_) {
        std::vector<double> self(n_);
        for (std::size_t i = 0; i < n_; ++i) self[i] = dot(points[i], points[i]) + 1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            base_[i * n_ + i] = 1.0;
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double c = (dot(points[i], points[j]) + 1.0) / std::sqrt(self[i] * self[j]);
                base_[i * n_ + j] = c;
                base_[j * n_ + i] = c;
            }
        }
    }

    std::size_t size() const noexcept { return n_; }
    double base(std::size_t i, std::size_t j) const { return base_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j, int degree) const {
        return int_pow(base_[i * n_ + j], degree);
    }

private:
    std::size_t n_;
    std::vector<double> base_;
};

}  // namespace ece
