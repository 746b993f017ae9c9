#pragma once

// The four multi-class sentiment settings built from one annotated corpus.
//
//   6-class: five categories + ambiguous      (every post)
//   5-class: five categories                  (ambiguous posts dropped)
//   4-class: positive/negative/factual + ambiguous
//   3-class: positive/negative/factual        (ambiguous posts dropped)
//
// Ambiguity is decided on the raw annotation pair before categories are
// merged, so (encouragement, gratitude) stays ambiguous in every setting.

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ece/corpus.hpp"
#include "ece/metrics.hpp"

namespace ece {

enum class TaskId : std::uint8_t { SixClass, FiveClass, FourClass, ThreeClass };

inline constexpr std::array<TaskId, 4> kAllTasks = {TaskId::SixClass, TaskId::FiveClass,
                                                    TaskId::FourClass, TaskId::ThreeClass};

constexpr std::string_view to_string(TaskId t) {
    switch (t) {
        case TaskId::SixClass: return "6-class";
        case TaskId::FiveClass: return "5-class";
        case TaskId::FourClass: return "4-class";
        case TaskId::ThreeClass: return "3-class";
    }
    return "?";
}

inline std::optional<TaskId> parse_task(std::string_view name) {
    for (TaskId t : kAllTasks)
        if (to_string(t) == name || to_string(t).substr(0, 1) == name) return t;
    return std::nullopt;
}

inline std::vector<std::string> class_names(TaskId task) {
    switch (task) {
        case TaskId::SixClass:
            return {"confusion", "encouragement", "endorsement", "gratitude", "factual", "ambiguous"};
        case TaskId::FiveClass:
            return {"confusion", "encouragement", "endorsement", "gratitude", "factual"};
        case TaskId::FourClass: return {"positive", "negative", "factual", "ambiguous"};
        case TaskId::ThreeClass: return {"positive", "negative", "factual"};
    }
    return {};
}

constexpr bool drops_ambiguous(TaskId t) {
    return t == TaskId::FiveClass || t == TaskId::ThreeClass;
}

/// Class index of a post in the given task, or nullopt when the task drops it.
constexpr std::optional<std::size_t> task_class(TaskId task, const AnnotationPair& pair) {
    const ResolvedLabel r = resolve_label(pair);
    if (r == ResolvedLabel::ambiguous) {
        if (drops_ambiguous(task)) return std::nullopt;
        return task == TaskId::SixClass ? 5 : 3;
    }
    if (task == TaskId::SixClass || task == TaskId::FiveClass) return static_cast<std::size_t>(r);
    switch (r) {
        case ResolvedLabel::encouragement:
        case ResolvedLabel::endorsement:
        case ResolvedLabel::gratitude: return 0;  // positive
        case ResolvedLabel::confusion: return 1;  // negative
        case ResolvedLabel::factual: return 2;
        case ResolvedLabel::ambiguous: break;
    }
    return std::nullopt;
}

struct Instance {
    std::string thread_id;
    std::size_t post_index = 0;
    std::size_t thread_pos = 0;  // position of the thread in Corpus::threads
    std::size_t class_label = 0;
};

struct Sequence {
    std::size_t begin = 0;  // half-open range into TaskDataset::instances
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

struct TaskDataset {
    TaskId task = TaskId::SixClass;
    std::vector<std::string> classes;
    std::vector<Instance> instances;  // grouped by thread, post order kept
    std::vector<Sequence> sequences;  // one per thread with at least one retained post

    std::size_t size() const { return instances.size(); }
};

inline TaskDataset build_task(const Corpus& corpus, TaskId task) {
    TaskDataset ds;
    ds.task = task;
    ds.classes = class_names(task);
    for (std::size_t t = 0; t < corpus.threads.size(); ++t) {
        const auto& thread = corpus.threads[t];
        Sequence seq{ds.instances.size(), ds.instances.size()};
        for (const auto& post : thread.posts) {
            if (auto c = task_class(task, post.annotations))
                ds.instances.push_back({thread.thread_id, post.index, t, *c});
        }
        seq.end = ds.instances.size();
        if (seq.size() > 0) ds.sequences.push_back(seq);
    }
    return ds;
}

inline std::vector<std::size_t> class_distribution(const TaskDataset& ds) {
    std::vector<std::size_t> counts(ds.classes.size(), 0);
    for (const auto& inst : ds.instances) ++counts.at(inst.class_label);
    return counts;
}

/// Most frequent class; ties go to the lexicographically smallest class name.
inline std::size_t majority_class(std::span<const std::size_t> counts,
                                  std::span<const std::string> names) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best] || (counts[c] == counts[best] && names[c] < names[best]))
            best = c;
    }
    return best;
}

/// Metrics of the constant classifier that always predicts the majority class,
/// macro-averaged over every class in `names`.
inline MetricsReport majority_baseline(std::span<const std::size_t> labels,
                                       std::span<const std::string> names) {
    if (labels.empty()) throw std::invalid_argument("majority baseline of an empty dataset");
    std::vector<std::size_t> counts(names.size(), 0);
    for (auto y : labels) ++counts.at(y);
    const std::size_t majority = majority_class(counts, names);
    ConfusionMatrix cm(names.size());
    for (auto y : labels) cm.add(y, majority);
    return macro_metrics(cm);
}

inline MetricsReport majority_baseline(const TaskDataset& ds) {
    std::vector<std::size_t> labels;
    labels.reserve(ds.size());
    for (const auto& inst : ds.instances) labels.push_back(inst.class_label);
    return majority_baseline(labels, ds.classes);
}

}  // namespace ece
