#pragma once

// Two-sided paired Student t-test.
//
// Degenerate convention: when every paired difference is identical the
// statistic is undefined; p = 1 if that common difference is 0, else p = 0.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace ece {

struct PairedTest {
    double mean_difference = 0.0;
    double t = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    bool degenerate = false;
};

inline PairedTest paired_significance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
    if (a.size() < 2) throw std::invalid_argument("paired t-test needs at least two pairs");
    const double n = static_cast<double>(a.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i] - mean;
        ss += d * d;
    }
    PairedTest r;
    r.mean_difference = mean;
    r.degrees_of_freedom = n - 1.0;
    const double sd = std::sqrt(ss / (n - 1.0));
    // Differences equal up to rounding count as constant.
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
        r.degenerate = true;
        r.t = mean == 0.0 ? 0.0
                          : std::copysign(std::numeric_limits<double>::infinity(), mean);
        r.p_value = std::abs(mean) <= 1e-15 ? 1.0 : 0.0;
        return r;
    }
    r.t = mean / (sd / std::sqrt(n));
    const boost::math::students_t dist(r.degrees_of_freedom);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    return r;
}

}  // namespace ece
