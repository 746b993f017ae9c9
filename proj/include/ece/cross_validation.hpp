#pragma once

// k-fold evaluation of the two learners on an encoded task dataset.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ece/crf.hpp"
#include "ece/encoding.hpp"
#include "ece/folds.hpp"
#include "ece/kernel.hpp"
#include "ece/margin.hpp"
#include "ece/metrics.hpp"
#include "ece/rng.hpp"

namespace ece {

enum class Classifier : std::uint8_t { margin, crf };

constexpr std::string_view to_string(Classifier c) { return c == Classifier::margin ? "margin" : "crf"; }

inline std::optional<Classifier> parse_classifier(std::string_view s) {
    if (s == "margin" || s == "svm") return Classifier::margin;
    if (s == "crf") return Classifier::crf;
    return std::nullopt;
}

/// Fold unit each learner is evaluated with.
constexpr FoldUnit fold_unit_for(Classifier c) {
    return c == Classifier::margin ? FoldUnit::message : FoldUnit::thread;
}

struct MarginSearch {
    std::vector<int> degrees{1, 2, 3, 4, 5};
    std::vector<double> costs{1, 2, 3, 4, 5};
    std::size_t inner_folds = 3;
    MarginConfig base{};
};

struct LearnerSettings {
    MarginSearch margin;
    CrfConfig crf;
};

struct CvResult {
    ConfusionMatrix pooled;
    std::vector<ConfusionMatrix> fold_matrices;
    std::vector<MetricsReport> folds;
    std::vector<MarginConfig> chosen;  // margin path: selected (degree, cost) per fold
};

class CrossValidationError : public std::runtime_error {
public:
    CrossValidationError(std::size_t fold, const std::string& what)
        : std::runtime_error("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}
    std::size_t fold() const noexcept { return fold_; }

private:
    std::size_t fold_;
};

/// Generic driver. `train_predict(train_ids, test_ids, fold)` returns one
/// predicted class per test id.
template <typename TrainPredict>
CvResult cross_validate_with(const EncodedDataset& ds, const FoldPlan& plan, TrainPredict&& train_predict) {
    if (plan.fold_of.size() != ds.size())
        throw std::invalid_argument("fold plan was built for a different dataset");
    CvResult result;
    result.pooled = ConfusionMatrix(ds.class_count());
    for (std::size_t f = 0; f < plan.k; ++f) {
        const auto train = plan.train_indices(f);
        const auto test = plan.test_indices(f);
        ConfusionMatrix cm(ds.class_count());
        if (!test.empty()) {
            std::vector<std::size_t> predicted;
            try {
                predicted = train_predict(std::span<const std::size_t>(train),
                                          std::span<const std::size_t>(test), f);
            } catch (const std::exception& e) {
                throw CrossValidationError(f, e.what());
            }
            if (predicted.size() != test.size())
                throw CrossValidationError(f, "learner returned wrong number of predictions");
            for (std::size_t k = 0; k < test.size(); ++k) cm.add(ds.instances[test[k]].label, predicted[k]);
        }
        result.pooled += cm;
        result.folds.push_back(macro_metrics(cm));
        result.fold_matrices.push_back(std::move(cm));
    }
    return result;
}

inline CvResult cross_validate(const EncodedDataset& ds, Classifier classifier, const FoldPlan& plan,
                               const LearnerSettings& settings) {
    if (classifier == Classifier::crf) {
        if (plan.unit != FoldUnit::thread)
            throw std::invalid_argument("the CRF must be evaluated with thread-unit folds");
        return cross_validate_with(ds, plan, [&](auto train, auto test, std::size_t) {
            const auto sequences = labeled_sequences(ds, train);
            const auto model = train_crf(sequences, ds.layout, ds.classes, settings.crf);
            std::vector<bool> is_test(ds.size(), false);
            for (auto i : test) is_test[i] = true;
            std::map<std::size_t, std::size_t> prediction;
            for (const auto& seq : ds.sequences) {
                std::vector<SparseVector> xs;
                std::vector<std::size_t> ids;
                for (std::size_t i = seq.begin; i < seq.end; ++i) {
                    if (!is_test[i]) continue;
                    xs.push_back(ds.instances[i].x);
                    ids.push_back(i);
                }
                if (xs.empty()) continue;
                const auto labels = predict(model, xs);
                for (std::size_t k = 0; k < ids.size(); ++k) prediction[ids[k]] = labels[k];
            }
            std::vector<std::size_t> out;
            for (auto i : test) out.push_back(prediction.at(i));
            return out;
        });
    }

    const auto points = pattern_points(ds);
    const GramCache gram(points);
    const auto labels = instance_labels(ds);
    std::vector<MarginConfig> chosen(plan.k);
    auto result = cross_validate_with(ds, plan, [&](auto train, auto test, std::size_t fold) {
        const auto search = grid_search_margin(
            gram, ds.pattern, labels, train, ds.classes, settings.margin.degrees,
            settings.margin.costs, settings.margin.inner_folds,
            derive_seed(plan.seed, "inner-" + std::to_string(fold)), settings.margin.base);
        chosen[fold] = search.best;
        const auto model = train_margin_indexed(gram, ds.pattern, labels, train, ds.classes, search.best);
        std::map<std::size_t, std::size_t> cache;
        std::vector<std::size_t> out;
        for (auto i : test) {
            auto [it, fresh] = cache.try_emplace(ds.pattern[i], 0);
            if (fresh) it->second = model.predict(gram, ds.pattern[i]);
            out.push_back(it->second);
        }
        return out;
    });
    result.chosen = std::move(chosen);
    return result;
}

}  // namespace ece
