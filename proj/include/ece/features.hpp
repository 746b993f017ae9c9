#pragma once

// The fourteen lexicon-independent post representations and the unigram
// (bag-of-words) benchmark.
//
// Each representation combines up to three factor groups of a post:
//   - neighbour sentiment labels: both raters' labels of the previous and
//     next post (depth 1) or of the two previous and two next posts (depth 2)
//   - posting options: whether the post opens, continues or closes its thread
//   - author activity: thread starter (f), newcomer to thread (n),
//     corpus-wide prolificity (pr)

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ece/corpus.hpp"

namespace ece {

enum class ModelId : std::uint8_t { BoW, I, II, III, IV, V, VI, VII, VIII, IX, X, XI, XII, XIII, XIV };

inline constexpr std::array<ModelId, 15> kAllModels = {
    ModelId::BoW, ModelId::I,   ModelId::II, ModelId::III, ModelId::IV,
    ModelId::V,   ModelId::VI,  ModelId::VII, ModelId::VIII, ModelId::IX,
    ModelId::X,   ModelId::XI,  ModelId::XII, ModelId::XIII, ModelId::XIV};

constexpr std::string_view to_string(ModelId m) {
    constexpr std::array<std::string_view, 15> names = {"BoW", "I",  "II", "III", "IV",
                                                        "V",   "VI", "VII", "VIII", "IX",
                                                        "X",   "XI", "XII", "XIII", "XIV"};
    return names[static_cast<std::size_t>(m)];
}

inline std::optional<ModelId> parse_model(std::string_view name) {
    std::string upper;
    for (char c : name) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "BOW") return ModelId::BoW;
    for (ModelId m : kAllModels)
        if (to_string(m) == upper) return m;
    return std::nullopt;
}

/// Neighbour label; nullopt stands for "none" (no post at that offset).
using NeighborLabel = std::optional<Sentiment>;

constexpr std::string_view to_string(NeighborLabel l) { return l ? to_string(*l) : "none"; }

// ---------------------------------------------------------------------------
// Schemas
// ---------------------------------------------------------------------------

enum class FeatureKind : std::uint8_t { categorical, binary, numeric };

struct FeatureDescriptor {
    std::string name;
    FeatureKind kind;
    /// Value set for categorical features; empty otherwise.
    std::vector<std::string> values;
};

struct FeatureSchema {
    ModelId model;
    std::vector<FeatureDescriptor> descriptors;

    std::size_t size() const { return descriptors.size(); }
};

/// Neighbour categorical value set: the five categories plus "none".
inline std::vector<std::string> neighbor_value_set() {
    std::vector<std::string> v;
    for (Sentiment s : kSentiments) v.emplace_back(to_string(s));
    v.emplace_back("none");
    return v;
}

namespace detail {

struct Composition {
    int label_depth;  // 0, 1 or 2
    bool posting;
    bool first_author;
    bool newcomer;
    bool prolificity;
};

constexpr Composition composition(ModelId m) {
    switch (m) {
        case ModelId::I: return {1, false, false, false, false};
        case ModelId::II: return {1, true, false, false, false};
        case ModelId::III: return {1, false, true, true, true};
        case ModelId::IV: return {1, true, true, true, true};
        case ModelId::V: return {2, false, false, false, false};
        case ModelId::VI: return {2, true, false, false, false};
        case ModelId::VII: return {2, false, true, true, true};
        case ModelId::VIII: return {2, true, true, true, true};
        case ModelId::IX: return {0, true, false, false, false};
        case ModelId::X: return {0, false, true, true, true};
        case ModelId::XI: return {0, true, true, true, true};
        case ModelId::XII: return {1, false, true, false, false};
        case ModelId::XIII: return {1, false, false, true, false};
        case ModelId::XIV: return {1, false, false, false, true};
        case ModelId::BoW: break;
    }
    throw std::invalid_argument("BoW has no fixed schema; use build_vocabulary");
}

}  // namespace detail

inline FeatureSchema schema(ModelId model) {
    const auto c = detail::composition(model);
    FeatureSchema s{model, {}};
    const auto values = neighbor_value_set();
    auto add_label = [&](const std::string& slot) {
        s.descriptors.push_back({slot + "_a", FeatureKind::categorical, values});
        s.descriptors.push_back({slot + "_b", FeatureKind::categorical, values});
    };
    for (int k = c.label_depth; k >= 1; --k) add_label("prev" + std::to_string(k));
    for (int k = 1; k <= c.label_depth; ++k) add_label("next" + std::to_string(k));
    if (c.posting) {
        s.descriptors.push_back({"is_first", FeatureKind::binary, {}});
        s.descriptors.push_back({"is_middle", FeatureKind::binary, {}});
        s.descriptors.push_back({"is_last", FeatureKind::binary, {}});
    }
    if (c.first_author) s.descriptors.push_back({"first_author", FeatureKind::binary, {}});
    if (c.newcomer) s.descriptors.push_back({"newcomer", FeatureKind::binary, {}});
    if (c.prolificity) s.descriptors.push_back({"prolificity", FeatureKind::numeric, {}});
    return s;
}

// ---------------------------------------------------------------------------
// Factor groups
// ---------------------------------------------------------------------------

/// [prev_depth_a, prev_depth_b, ..., prev1_a, prev1_b, next1_a, next1_b, ..., next_depth_b]
inline std::vector<NeighborLabel> neighbor_labels(const Thread& thread, std::size_t index,
                                                  int depth) {
    if (depth != 1 && depth != 2) throw std::invalid_argument("neighbour depth must be 1 or 2");
    if (index >= thread.posts.size()) throw std::out_of_range("post index outside thread");
    std::vector<NeighborLabel> out;
    out.reserve(4 * static_cast<std::size_t>(depth));
    auto push = [&](std::ptrdiff_t pos) {
        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(thread.posts.size())) {
            out.push_back(std::nullopt);
            out.push_back(std::nullopt);
        } else {
            const auto& a = thread.posts[static_cast<std::size_t>(pos)].annotations;
            out.push_back(a.label_a);
            out.push_back(a.label_b);
        }
    };
    const auto i = static_cast<std::ptrdiff_t>(index);
    for (int k = depth; k >= 1; --k) push(i - k);
    for (int k = 1; k <= depth; ++k) push(i + k);
    return out;
}

struct PositionFlags {
    bool is_first;
    bool is_middle;
    bool is_last;
    friend bool operator==(const PositionFlags&, const PositionFlags&) = default;
};

inline PositionFlags position_flags(const Thread& thread, std::size_t index) {
    if (index >= thread.posts.size()) throw std::out_of_range("post index outside thread");
    const bool first = index == 0;
    const bool last = index + 1 == thread.posts.size();
    return {first, !first && !last, last};
}

struct AuthorFlags {
    bool first_author;  // f
    bool newcomer;      // n
    double prolificity; // pr
};

/// `thread_pos` is the thread's position in the corpus the stats were computed from.
inline AuthorFlags author_flags(const Post& post, std::size_t thread_pos, const AuthorStats& stats) {
    return {post.author_id == stats.first_author.at(thread_pos),
            stats.newcomer.at(thread_pos).at(post.index), stats.prolificity_of(post.author_id)};
}

// ---------------------------------------------------------------------------
// Feature vectors
// ---------------------------------------------------------------------------

using FeatureValue = std::variant<NeighborLabel, bool, double>;

struct FeatureVector {
    ModelId model;
    std::vector<FeatureValue> values;
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline FeatureVector extract(ModelId model, const Thread& thread, std::size_t thread_pos,
                             std::size_t index, const AuthorStats& stats) {
    const auto c = detail::composition(model);
    FeatureVector v{model, {}};
    if (c.label_depth > 0)
        for (const auto& l : neighbor_labels(thread, index, c.label_depth)) v.values.emplace_back(l);
    if (c.posting) {
        const auto p = position_flags(thread, index);
        v.values.emplace_back(p.is_first);
        v.values.emplace_back(p.is_middle);
        v.values.emplace_back(p.is_last);
    }
    if (c.first_author || c.newcomer || c.prolificity) {
        const auto a = author_flags(thread.posts.at(index), thread_pos, stats);
        if (c.first_author) v.values.emplace_back(a.first_author);
        if (c.newcomer) v.values.emplace_back(a.newcomer);
        if (c.prolificity) v.values.emplace_back(a.prolificity);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Bag of words
// ---------------------------------------------------------------------------

/// Lowercases ASCII letters and splits on every ASCII character that is not
/// a letter or digit. Bytes >= 0x80 are kept inside tokens so UTF-8 words stay whole.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (u >= 0x80 || std::isalnum(u)) {
            current += static_cast<char>(std::tolower(u));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

struct Vocabulary {
    std::vector<std::string> tokens;      // lexicographic
    std::vector<std::size_t> frequencies; // corpus occurrence counts, parallel to tokens
    std::size_t min_count = 3;
    std::map<std::string, std::size_t, std::less<>> index;

    std::size_t size() const { return tokens.size(); }
};

inline Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_count = 3) {
    std::map<std::string, std::size_t> counts;
    for (const auto& thread : corpus.threads) {
        for (const auto& post : thread.posts) {
            if (!post.text)
                throw ValidationError("thread '" + thread.thread_id + "' post " +
                                      std::to_string(post.index) + " has no text");
            for (auto& tok : tokenize(*post.text)) ++counts[tok];
        }
    }
    Vocabulary vocab;
    vocab.min_count = min_count;
    for (const auto& [tok, n] : counts) {
        if (n < min_count) continue;
        vocab.index.emplace(tok, vocab.tokens.size());
        vocab.tokens.push_back(tok);
        vocab.frequencies.push_back(n);
    }
    return vocab;
}

/// Sorted indices of vocabulary tokens present in the post (binary presence).
struct BowVector {
    std::vector<std::uint32_t> active;
    std::size_t dimension = 0;

    std::vector<bool> dense() const {
        std::vector<bool> d(dimension, false);
        for (auto i : active) d[i] = true;
        return d;
    }
};

inline BowVector bow_vector(const Post& post, const Vocabulary& vocab) {
    if (!post.text)
        throw ValidationError("thread '" + post.thread_id + "' post " + std::to_string(post.index) +
                              " has no text");
    BowVector v;
    v.dimension = vocab.size();
    for (const auto& tok : tokenize(*post.text)) {
        auto it = vocab.index.find(tok);
        if (it != vocab.index.end()) v.active.push_back(static_cast<std::uint32_t>(it->second));
    }
    std::sort(v.active.begin(), v.active.end());
    v.active.erase(std::unique(v.active.begin(), v.active.end()), v.active.end());
    return v;
}

}  // namespace ece
