#pragma once

// Numeric encoding of feature vectors for the learners.
//
// Categorical descriptors expand to one-hot blocks over their value set,
// binary descriptors to a single 0/1 coordinate and numeric descriptors to
// their raw value. Bag-of-words vectors map one coordinate per vocabulary
// token. Zero coordinates are not stored.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ece/corpus.hpp"
#include "ece/features.hpp"
#include "ece/tasks.hpp"

namespace ece {

struct SparseVector {
    std::vector<std::uint32_t> index;  // strictly increasing
    std::vector<double> value;

    std::size_t nnz() const { return index.size(); }
    friend auto operator<=>(const SparseVector&, const SparseVector&) = default;
};

inline double dot(const SparseVector& a, const SparseVector& b) {
    double s = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.index.size() && j < b.index.size()) {
        if (a.index[i] == b.index[j]) {
            s += a.value[i++] * b.value[j++];
        } else if (a.index[i] < b.index[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return s;
}

inline std::vector<double> to_dense(const SparseVector& v, std::size_t dimension) {
    std::vector<double> d(dimension, 0.0);
    for (std::size_t k = 0; k < v.index.size(); ++k) d.at(v.index[k]) = v.value[k];
    return d;
}

inline SparseVector from_dense(std::span<const double> d) {
    SparseVector v;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d[k] != 0.0) {
            v.index.push_back(static_cast<std::uint32_t>(k));
            v.value.push_back(d[k]);
        }
    }
    return v;
}

class LayoutMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Coordinate layout shared by training and prediction.
struct Layout {
    ModelId model = ModelId::I;
    std::vector<std::string> coordinates;  // one name per coordinate

    std::size_t dimension() const { return coordinates.size(); }
    friend bool operator==(const Layout&, const Layout&) = default;
};

inline void require_same_layout(const Layout& a, const Layout& b) {
    if (!(a == b))
        throw LayoutMismatch("encoding layout mismatch: model " + std::string(to_string(a.model)) +
                             " (" + std::to_string(a.dimension()) + " coordinates) vs model " +
                             std::string(to_string(b.model)) + " (" +
                             std::to_string(b.dimension()) + " coordinates)");
}

inline Layout layout_for(const FeatureSchema& schema) {
    Layout layout{schema.model, {}};
    for (const auto& d : schema.descriptors) {
        if (d.kind == FeatureKind::categorical) {
            for (const auto& v : d.values) layout.coordinates.push_back(d.name + "=" + v);
        } else {
            layout.coordinates.push_back(d.name);
        }
    }
    return layout;
}

inline Layout layout_for(const Vocabulary& vocab) {
    return Layout{ModelId::BoW, vocab.tokens};
}

inline SparseVector encode_vector(const FeatureVector& fv, const FeatureSchema& schema) {
    if (fv.model != schema.model || fv.values.size() != schema.size())
        throw LayoutMismatch("feature vector does not match schema of model " +
                             std::string(to_string(schema.model)));
    SparseVector out;
    std::uint32_t offset = 0;
    for (std::size_t k = 0; k < schema.size(); ++k) {
        const auto& d = schema.descriptors[k];
        const auto& v = fv.values[k];
        switch (d.kind) {
            case FeatureKind::categorical: {
                const auto* label = std::get_if<NeighborLabel>(&v);
                if (!label) throw LayoutMismatch("descriptor '" + d.name + "' expects a category");
                const auto token = to_string(*label);
                const auto it = std::find(d.values.begin(), d.values.end(), token);
                if (it == d.values.end())
                    throw LayoutMismatch("value '" + std::string(token) + "' not in value set of '" +
                                         d.name + "'");
                out.index.push_back(offset + static_cast<std::uint32_t>(it - d.values.begin()));
                out.value.push_back(1.0);
                offset += static_cast<std::uint32_t>(d.values.size());
                break;
            }
            case FeatureKind::binary: {
                const auto* flag = std::get_if<bool>(&v);
                if (!flag) throw LayoutMismatch("descriptor '" + d.name + "' expects a boolean");
                if (*flag) {
                    out.index.push_back(offset);
                    out.value.push_back(1.0);
                }
                ++offset;
                break;
            }
            case FeatureKind::numeric: {
                const auto* num = std::get_if<double>(&v);
                if (!num) throw LayoutMismatch("descriptor '" + d.name + "' expects a number");
                if (*num != 0.0) {
                    out.index.push_back(offset);
                    out.value.push_back(*num);
                }
                ++offset;
                break;
            }
        }
    }
    return out;
}

inline SparseVector encode_vector(const BowVector& bv) {
    SparseVector out;
    out.index.assign(bv.active.begin(), bv.active.end());
    out.value.assign(bv.active.size(), 1.0);
    return out;
}

struct EncodedInstance {
    SparseVector x;
    std::size_t label = 0;
};

struct EncodedDataset {
    Layout layout;
    std::vector<std::string> classes;
    std::vector<EncodedInstance> instances;
    std::vector<Sequence> sequences;
    /// Identical feature vectors share a pattern id (dense, 0-based).
    std::vector<std::size_t> pattern;
    std::size_t pattern_count = 0;

    std::size_t size() const { return instances.size(); }
    std::size_t class_count() const { return classes.size(); }
};

namespace detail {

inline void assign_patterns(EncodedDataset& out) {
    std::map<SparseVector, std::size_t> ids;
    out.pattern.clear();
    for (const auto& inst : out.instances) {
        auto [it, inserted] = ids.emplace(inst.x, ids.size());
        out.pattern.push_back(it->second);
    }
    out.pattern_count = ids.size();
}

}  // namespace detail

/// Encodes one feature vector per dataset instance (same order).
inline EncodedDataset encode(const TaskDataset& ds, std::span<const FeatureVector> vectors,
                             const FeatureSchema& schema) {
    if (vectors.size() != ds.size())
        throw LayoutMismatch("expected one feature vector per instance");
    EncodedDataset out{layout_for(schema), ds.classes, {}, ds.sequences, {}, 0};
    out.instances.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        out.instances.push_back({encode_vector(vectors[i], schema), ds.instances[i].class_label});
    detail::assign_patterns(out);
    return out;
}

inline EncodedDataset encode(const TaskDataset& ds, std::span<const BowVector> vectors,
                             const Vocabulary& vocab) {
    if (vectors.size() != ds.size())
        throw LayoutMismatch("expected one bag-of-words vector per instance");
    EncodedDataset out{layout_for(vocab), ds.classes, {}, ds.sequences, {}, 0};
    out.instances.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (vectors[i].dimension != vocab.size())
            throw LayoutMismatch("bag-of-words vector built from another vocabulary");
        out.instances.push_back({encode_vector(vectors[i]), ds.instances[i].class_label});
    }
    detail::assign_patterns(out);
    return out;
}

/// Extracts and encodes the given representation for every instance of `ds`.
/// `vocab` is required for BoW only.
inline EncodedDataset encode_model(const Corpus& corpus, const AuthorStats& stats,
                                   const TaskDataset& ds, ModelId model,
                                   const Vocabulary* vocab = nullptr) {
    if (model == ModelId::BoW) {
        if (!vocab) throw std::invalid_argument("BoW encoding needs a vocabulary");
        std::vector<BowVector> vectors;
        vectors.reserve(ds.size());
        for (const auto& inst : ds.instances)
            vectors.push_back(bow_vector(corpus.threads[inst.thread_pos].posts[inst.post_index], *vocab));
        return encode(ds, vectors, *vocab);
    }
    const FeatureSchema s = schema(model);
    std::vector<FeatureVector> vectors;
    vectors.reserve(ds.size());
    for (const auto& inst : ds.instances)
        vectors.push_back(extract(model, corpus.threads[inst.thread_pos], inst.thread_pos,
                                  inst.post_index, stats));
    return encode(ds, vectors, s);
}

}  // namespace ece
