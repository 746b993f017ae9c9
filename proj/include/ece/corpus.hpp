#pragma once

// Corpus data model: threads of doubly-annotated posts, author activity
// statistics, and inter-annotator agreement.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ece {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input line. line() is 1-based.
class ParseError : public CorpusError {
public:
    ParseError(std::size_t line, const std::string& what)
        : CorpusError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public CorpusError {
public:
    using CorpusError::CorpusError;
};

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

enum class Sentiment : std::uint8_t { confusion, encouragement, endorsement, gratitude, factual };

inline constexpr std::size_t kSentimentCount = 5;
inline constexpr std::array<Sentiment, kSentimentCount> kSentiments = {
    Sentiment::confusion, Sentiment::encouragement, Sentiment::endorsement, Sentiment::gratitude,
    Sentiment::factual};

constexpr std::string_view to_string(Sentiment s) {
    switch (s) {
        case Sentiment::confusion: return "confusion";
        case Sentiment::encouragement: return "encouragement";
        case Sentiment::endorsement: return "endorsement";
        case Sentiment::gratitude: return "gratitude";
        case Sentiment::factual: return "factual";
    }
    return "?";
}

inline std::optional<Sentiment> parse_sentiment(std::string_view name) {
    for (Sentiment s : kSentiments)
        if (to_string(s) == name) return s;
    return std::nullopt;
}

struct AnnotationPair {
    Sentiment label_a;
    Sentiment label_b;
    friend bool operator==(const AnnotationPair&, const AnnotationPair&) = default;
};

/// A base category when both raters agree, otherwise ambiguous.
enum class ResolvedLabel : std::uint8_t {
    confusion,
    encouragement,
    endorsement,
    gratitude,
    factual,
    ambiguous
};

inline constexpr std::size_t kResolvedCount = 6;

constexpr std::string_view to_string(ResolvedLabel r) {
    if (r == ResolvedLabel::ambiguous) return "ambiguous";
    return to_string(static_cast<Sentiment>(r));
}

constexpr ResolvedLabel resolve_label(const AnnotationPair& pair) {
    return pair.label_a == pair.label_b ? static_cast<ResolvedLabel>(pair.label_a)
                                        : ResolvedLabel::ambiguous;
}

// ---------------------------------------------------------------------------
// Corpus structure
// ---------------------------------------------------------------------------

struct Post {
    std::string thread_id;
    std::size_t index = 0;
    std::string author_id;
    AnnotationPair annotations{Sentiment::factual, Sentiment::factual};
    std::optional<std::string> text;
    friend bool operator==(const Post&, const Post&) = default;
};

struct Thread {
    std::string thread_id;
    std::vector<Post> posts;

    const std::string& first_author() const { return posts.front().author_id; }
    friend bool operator==(const Thread&, const Thread&) = default;
};

struct Corpus {
    std::vector<Thread> threads;

    std::size_t post_count() const {
        std::size_t n = 0;
        for (const auto& t : threads) n += t.posts.size();
        return n;
    }
    friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Throws ValidationError naming the offending thread/post.
inline void validate(const Corpus& corpus) {
    std::set<std::string> seen;
    for (const auto& thread : corpus.threads) {
        if (thread.thread_id.empty()) throw ValidationError("thread with empty thread_id");
        if (!seen.insert(thread.thread_id).second)
            throw ValidationError("duplicate thread_id '" + thread.thread_id + "'");
        if (thread.posts.empty())
            throw ValidationError("thread '" + thread.thread_id + "' has no posts");
        for (std::size_t i = 0; i < thread.posts.size(); ++i) {
            const Post& p = thread.posts[i];
            if (p.thread_id != thread.thread_id)
                throw ValidationError("post " + std::to_string(i) + " of thread '" +
                                      thread.thread_id + "' carries thread_id '" + p.thread_id +
                                      "'");
            if (p.index != i)
                throw ValidationError("thread '" + thread.thread_id +
                                      "': post indices not contiguous (expected " +
                                      std::to_string(i) + ", found " + std::to_string(p.index) +
                                      ")");
            if (p.author_id.empty())
                throw ValidationError("thread '" + thread.thread_id + "' post " +
                                      std::to_string(i) + ": empty author_id");
        }
    }
}

// ---------------------------------------------------------------------------
// Author activity
// ---------------------------------------------------------------------------

struct AuthorStats {
    std::map<std::string, std::size_t> post_count;
    std::map<std::string, double> prolificity;
    /// Indexed like Corpus::threads.
    std::vector<std::string> first_author;
    /// newcomer[t][p]: post p is its author's first post in thread t.
    std::vector<std::vector<bool>> newcomer;

    double prolificity_of(const std::string& author) const {
        auto it = prolificity.find(author);
        if (it == prolificity.end()) throw std::out_of_range("unknown author '" + author + "'");
        return it->second;
    }
};

inline AuthorStats author_stats(const Corpus& corpus) {
    AuthorStats stats;
    for (const auto& thread : corpus.threads) {
        std::set<std::string> seen_in_thread;
        std::vector<bool> fresh;
        fresh.reserve(thread.posts.size());
        for (const auto& post : thread.posts) {
            ++stats.post_count[post.author_id];
            fresh.push_back(seen_in_thread.insert(post.author_id).second);
        }
        stats.first_author.push_back(thread.posts.empty() ? std::string{} : thread.first_author());
        stats.newcomer.push_back(std::move(fresh));
    }
    std::size_t max_count = 0;
    for (const auto& [author, n] : stats.post_count) max_count = std::max(max_count, n);
    for (const auto& [author, n] : stats.post_count)
        // n == max_count yields exactly 1.0.
        stats.prolificity[author] = static_cast<double>(n) / static_cast<double>(max_count);
    return stats;
}

// ---------------------------------------------------------------------------
// Agreement
// ---------------------------------------------------------------------------

/// Fleiss' kappa for two ratings per post over the five base categories.
/// Throws CorpusError when the statistic is undefined.
inline double fleiss_kappa(const Corpus& corpus) {
    constexpr double raters = 2.0;
    std::array<double, kSentimentCount> category_totals{};
    double agreement_sum = 0.0;
    std::size_t items = 0;
    for (const auto& thread : corpus.threads) {
        for (const auto& post : thread.posts) {
            std::array<double, kSentimentCount> counts{};
            counts[static_cast<std::size_t>(post.annotations.label_a)] += 1.0;
            counts[static_cast<std::size_t>(post.annotations.label_b)] += 1.0;
            double sq = 0.0;
            for (std::size_t j = 0; j < kSentimentCount; ++j) {
                sq += counts[j] * counts[j];
                category_totals[j] += counts[j];
            }
            agreement_sum += (sq - raters) / (raters * (raters - 1.0));
            ++items;
        }
    }
    if (items == 0) throw CorpusError("undefined kappa: corpus has no posts");
    const double n = static_cast<double>(items);
    const double observed = agreement_sum / n;
    double expected = 0.0;
    for (double total : category_totals) {
        const double p = total / (n * raters);
        expected += p * p;
    }
    if (observed == 1.0) return 1.0;
    if (expected >= 1.0) throw CorpusError("undefined kappa: expected agreement is 1");
    return (observed - expected) / (1.0 - expected);
}

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

struct CorpusStats {
    std::size_t thread_count = 0;
    std::size_t post_count = 0;
    std::size_t author_count = 0;
    std::size_t first_author_count = 0;
    double mean_thread_length = 0.0;
    double std_thread_length = 0.0;  // population standard deviation
    /// posts-per-author -> number of authors with that many posts
    std::map<std::size_t, std::size_t> author_post_histogram;
    std::size_t top_k = 15;
    double top_k_share = 0.0;
    double starter_share = 0.0;  // mean per-thread share of posts written by the thread starter
    double newcomer_share = 0.0;
    double ambiguity_rate = 0.0;
    double first_post_ambiguity = 0.0;
    double last_post_ambiguity = 0.0;
    std::array<std::size_t, kResolvedCount> resolved_distribution{};
};

inline CorpusStats corpus_stats(const Corpus& corpus, std::size_t top_k = 15) {
    CorpusStats s;
    s.top_k = top_k;
    s.thread_count = corpus.threads.size();
    s.post_count = corpus.post_count();
    if (s.post_count == 0) return s;

    const AuthorStats authors = author_stats(corpus);
    s.author_count = authors.post_count.size();
    s.first_author_count = std::set<std::string>(authors.first_author.begin(),
                                                 authors.first_author.end())
                               .size();

    std::vector<std::size_t> counts;
    for (const auto& [author, n] : authors.post_count) {
        ++s.author_post_histogram[n];
        counts.push_back(n);
    }
    std::sort(counts.begin(), counts.end(), std::greater<>());
    std::size_t top = 0;
    for (std::size_t i = 0; i < std::min(top_k, counts.size()); ++i) top += counts[i];
    s.top_k_share = static_cast<double>(top) / static_cast<double>(s.post_count);

    const double threads = static_cast<double>(s.thread_count);
    s.mean_thread_length = static_cast<double>(s.post_count) / threads;
    double var = 0.0;
    std::size_t ambiguous = 0, first_amb = 0, last_amb = 0, newcomers = 0;
    double starter_share_sum = 0.0;
    for (std::size_t t = 0; t < corpus.threads.size(); ++t) {
        const auto& thread = corpus.threads[t];
        const double len = static_cast<double>(thread.posts.size());
        var += (len - s.mean_thread_length) * (len - s.mean_thread_length);
        std::size_t by_starter = 0;
        for (std::size_t p = 0; p < thread.posts.size(); ++p) {
            const auto& post = thread.posts[p];
            const ResolvedLabel r = resolve_label(post.annotations);
            ++s.resolved_distribution[static_cast<std::size_t>(r)];
            if (r == ResolvedLabel::ambiguous) ++ambiguous;
            if (post.author_id == thread.first_author()) ++by_starter;
            if (authors.newcomer[t][p]) ++newcomers;
        }
        starter_share_sum += static_cast<double>(by_starter) / len;
        if (resolve_label(thread.posts.front().annotations) == ResolvedLabel::ambiguous) ++first_amb;
        if (resolve_label(thread.posts.back().annotations) == ResolvedLabel::ambiguous) ++last_amb;
    }
    s.std_thread_length = std::sqrt(var / threads);
    s.starter_share = starter_share_sum / threads;
    s.newcomer_share = static_cast<double>(newcomers) / static_cast<double>(s.post_count);
    s.ambiguity_rate = static_cast<double>(ambiguous) / static_cast<double>(s.post_count);
    s.first_post_ambiguity = static_cast<double>(first_amb) / threads;
    s.last_post_ambiguity = static_cast<double>(last_amb) / threads;
    return s;
}

}  // namespace ece
