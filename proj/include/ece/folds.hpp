#pragma once

// k-fold partitions. Message-unit plans are class-stratified; thread-unit
// plans keep whole threads together (required by the sequence learner).

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ece/rng.hpp"
#include "ece/tasks.hpp"

namespace ece {

enum class FoldUnit : std::uint8_t { message, thread };

constexpr std::string_view to_string(FoldUnit u) {
    return u == FoldUnit::message ? "message" : "thread";
}

struct FoldPlan {
    std::size_t k = 10;
    FoldUnit unit = FoldUnit::message;
    std::uint64_t seed = 0;
    std::vector<std::size_t> fold_of;  // per instance

    std::vector<std::size_t> test_indices(std::size_t fold) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] == fold) out.push_back(i);
        return out;
    }
    std::vector<std::size_t> train_indices(std::size_t fold) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] != fold) out.push_back(i);
        return out;
    }
    friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
};

class FoldError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Stratified round-robin assignment: labels[i] -> fold in [0, k).
/// Each fold holds floor or ceil of n_c / k items of every class c.
inline std::vector<std::size_t> stratified_assignment(std::span<const std::size_t> labels,
                                                      std::size_t k, std::uint64_t seed) {
    if (k < 2) throw FoldError("need at least 2 folds");
    if (labels.size() < k)
        throw FoldError("only " + std::to_string(labels.size()) + " units for " +
                        std::to_string(k) + " folds");
    std::size_t classes = 0;
    for (auto y : labels) classes = std::max(classes, y + 1);
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    Rng rng(seed);
    std::vector<std::size_t> fold(labels.size(), 0);
    std::size_t pos = 0;
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (auto i : members) fold[i] = pos++ % k;
    }
    return fold;
}

inline FoldPlan make_folds(std::span<const std::size_t> labels, std::span<const Sequence> sequences,
                           std::size_t k, FoldUnit unit, std::uint64_t seed) {
    FoldPlan plan{k, unit, seed, {}};
    if (unit == FoldUnit::message) {
        plan.fold_of = stratified_assignment(labels, k, seed);
        return plan;
    }
    if (k < 2) throw FoldError("need at least 2 folds");
    if (sequences.size() < k)
        throw FoldError("only " + std::to_string(sequences.size()) + " threads for " +
                        std::to_string(k) + " folds");
    std::vector<std::size_t> order(sequences.size());
    for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
    Rng rng(seed);
    rng.shuffle(order);
    plan.fold_of.assign(labels.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto& seq = sequences[order[pos]];
        for (std::size_t i = seq.begin; i < seq.end; ++i) plan.fold_of.at(i) = pos % k;
    }
    return plan;
}

inline FoldPlan make_folds(const TaskDataset& ds, std::size_t k, FoldUnit unit, std::uint64_t seed) {
    std::vector<std::size_t> labels;
    labels.reserve(ds.size());
    for (const auto& inst : ds.instances) labels.push_back(inst.class_label);
    return make_folds(labels, ds.sequences, k, unit, seed);
}

}  // namespace ece
