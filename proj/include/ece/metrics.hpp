#pragma once

// Confusion matrices and macro-averaged Precision / Recall / F-score.
//
// Conventions: per-class ratios with a zero denominator count as 0, macro
// values are unweighted means over the full class set (including classes that
// were never predicted or never occur), and macro F is the mean of the
// per-class F values.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ece {

class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t classes) : l_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const noexcept { return l_; }

    /// Row = gold class, column = predicted class.
    void add(std::size_t gold, std::size_t predicted, std::size_t n = 1) {
        if (gold >= l_ || predicted >= l_) throw std::out_of_range("class index out of range");
        counts_[gold * l_ + predicted] += n;
    }

    std::size_t at(std::size_t gold, std::size_t predicted) const {
        return counts_.at(gold * l_ + predicted);
    }

    std::size_t total() const {
        std::size_t t = 0;
        for (auto c : counts_) t += c;
        return t;
    }

    std::size_t true_positives(std::size_t i) const { return at(i, i); }

    std::size_t false_positives(std::size_t i) const {
        std::size_t col = 0;
        for (std::size_t g = 0; g < l_; ++g) col += at(g, i);
        return col - at(i, i);
    }

    std::size_t gold_count(std::size_t i) const {
        std::size_t row = 0;
        for (std::size_t p = 0; p < l_; ++p) row += at(i, p);
        return row;
    }

    ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
        if (other.l_ != l_) throw std::invalid_argument("confusion matrix size mismatch");
        for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
        return *this;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t l_ = 0;
    std::vector<std::size_t> counts_;
};

struct MetricsReport {
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f_score;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f = 0.0;
    double accuracy = 0.0;  // micro-averaged P = R = F for single-label data
    std::size_t classes = 0;
};

inline MetricsReport macro_metrics(const ConfusionMatrix& cm) {
    const std::size_t l = cm.classes();
    MetricsReport r;
    r.classes = l;
    r.precision.resize(l);
    r.recall.resize(l);
    r.f_score.resize(l);
    auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
    std::size_t correct = 0;
    for (std::size_t i = 0; i < l; ++i) {
        const double tp = static_cast<double>(cm.true_positives(i));
        correct += cm.true_positives(i);
        r.precision[i] = ratio(tp, tp + static_cast<double>(cm.false_positives(i)));
        r.recall[i] = ratio(tp, static_cast<double>(cm.gold_count(i)));
        r.f_score[i] = ratio(2.0 * r.precision[i] * r.recall[i], r.precision[i] + r.recall[i]);
        r.macro_precision += r.precision[i];
        r.macro_recall += r.recall[i];
        r.macro_f += r.f_score[i];
    }
    if (l > 0) {
        r.macro_precision /= static_cast<double>(l);
        r.macro_recall /= static_cast<double>(l);
        r.macro_f /= static_cast<double>(l);
    }
    r.accuracy = ratio(static_cast<double>(correct), static_cast<double>(cm.total()));
    return r;
}

}  // namespace ece
