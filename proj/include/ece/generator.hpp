#pragma once

// Synthetic forum corpora with a configurable statistical profile.
//
// The built-in "ivf" profile targets the published statistics of the IVF
// Ages 35+ discussions: 80 threads, 1321 posts, 359 authors of whom 15
// prolific authors write about 45% of the posts, thread starters writing about
// a quarter of their thread, and rater disagreement of 13% overall, 26% on
// first posts and 16% on last posts.
//
// Sentiment follows a first-order chain per thread whose transition matrix is
// rho * I + (1 - rho) * 1 pi^T, so pi stays stationary for every rho.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ece/corpus.hpp"
#include "ece/rng.hpp"

namespace ece {

class ProfileError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GeneratorProfile {
    std::string name = "custom";
    std::size_t thread_count = 80;
    std::size_t total_posts = 1321;  // 0: keep the sampled lengths
    double length_mean = 16.5;
    double length_std = 9.6;
    std::size_t length_min = 3;
    std::size_t author_count = 359;
    std::size_t prolific_count = 15;
    double prolific_share = 0.45;
    std::size_t starter_count = 73;  // distinct thread starters
    double starter_share = 0.25;     // share of a thread written by its starter
    std::array<double, kSentimentCount> label_distribution{117.0 / 1146, 310.0 / 1146, 162.0 / 1146,
                                                           124.0 / 1146, 433.0 / 1146};
    double disagreement = 0.13;
    double first_disagreement = 0.26;
    double last_disagreement = 0.16;
    double autocorrelation = 0.6;
    std::size_t tokens_min = 20;
    std::size_t tokens_max = 80;
    std::size_t vocabulary_size = 7787;
    double topical_share = 0.03;  // share of tokens drawn from a label-specific pool
    std::size_t topical_pool = 40;
    std::uint64_t seed = 1;

    void validate() const {
        auto prob = [](double p, const char* what) {
            if (!(p >= 0.0 && p <= 1.0)) throw ProfileError(std::string(what) + " must lie in [0, 1]");
        };
        prob(prolific_share, "prolific_share");
        prob(starter_share, "starter_share");
        prob(disagreement, "disagreement");
        prob(first_disagreement, "first_disagreement");
        prob(last_disagreement, "last_disagreement");
        prob(autocorrelation, "autocorrelation");
        prob(topical_share, "topical_share");
        double sum = 0.0;
        for (double p : label_distribution) {
            prob(p, "label_distribution entries");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ProfileError("label_distribution must sum to 1");
        if (thread_count == 0) throw ProfileError("thread_count must be positive");
        if (length_min < 1) throw ProfileError("length_min must be at least 1");
        if (!(length_std >= 0.0)) throw ProfileError("length_std must be non-negative");
        if (total_posts != 0 && total_posts < thread_count * length_min)
            throw ProfileError("total_posts too small for thread_count * length_min");
        if (prolific_count >= author_count)
            throw ProfileError("prolific_count must be smaller than author_count");
        if (prolific_count == 0 && prolific_share > 0.0)
            throw ProfileError("prolific_share > 0 needs prolific authors");
        if (starter_count == 0 || starter_count > thread_count ||
            starter_count > author_count - prolific_count)
            throw ProfileError("starter_count must be in [1, min(thread_count, regular authors)]");
        if (tokens_min > tokens_max) throw ProfileError("tokens_min exceeds tokens_max");
        if (vocabulary_size == 0 || topical_pool == 0) throw ProfileError("token pools must be non-empty");
    }
};

inline GeneratorProfile ivf_profile() {
    GeneratorProfile p;
    p.name = "ivf";
    return p;
}

/// Like "ivf" but without sentiment autocorrelation or position-dependent disagreement.
inline GeneratorProfile independent_profile() {
    GeneratorProfile p;
    p.name = "independent";
    p.autocorrelation = 0.0;
    p.first_disagreement = p.disagreement;
    p.last_disagreement = p.disagreement;
    return p;
}

inline GeneratorProfile builtin_profile(const std::string& name) {
    if (name == "ivf") return ivf_profile();
    if (name == "independent") return independent_profile();
    throw ProfileError("unknown profile '" + name + "'");
}

/// Overrides fields of `base` from a JSON object; unknown keys are rejected.
inline GeneratorProfile profile_from_json(const nlohmann::json& j, GeneratorProfile base = ivf_profile()) {
    if (!j.is_object()) throw ProfileError("profile must be a JSON object");
    GeneratorProfile p = base;
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "name") p.name = v.get<std::string>();
            else if (key == "thread_count") p.thread_count = v.get<std::size_t>();
            else if (key == "total_posts") p.total_posts = v.get<std::size_t>();
            else if (key == "length_mean") p.length_mean = v.get<double>();
            else if (key == "length_std") p.length_std = v.get<double>();
            else if (key == "length_min") p.length_min = v.get<std::size_t>();
            else if (key == "author_count") p.author_count = v.get<std::size_t>();
            else if (key == "prolific_count") p.prolific_count = v.get<std::size_t>();
            else if (key == "prolific_share") p.prolific_share = v.get<double>();
            else if (key == "starter_count") p.starter_count = v.get<std::size_t>();
            else if (key == "starter_share") p.starter_share = v.get<double>();
            else if (key == "label_distribution") {
                const auto arr = v.get<std::vector<double>>();
                if (arr.size() != kSentimentCount)
                    throw ProfileError("label_distribution needs 5 entries");
                std::copy(arr.begin(), arr.end(), p.label_distribution.begin());
            } else if (key == "disagreement") p.disagreement = v.get<double>();
            else if (key == "first_disagreement") p.first_disagreement = v.get<double>();
            else if (key == "last_disagreement") p.last_disagreement = v.get<double>();
            else if (key == "autocorrelation") p.autocorrelation = v.get<double>();
            else if (key == "tokens_min") p.tokens_min = v.get<std::size_t>();
            else if (key == "tokens_max") p.tokens_max = v.get<std::size_t>();
            else if (key == "vocabulary_size") p.vocabulary_size = v.get<std::size_t>();
            else if (key == "topical_share") p.topical_share = v.get<double>();
            else if (key == "topical_pool") p.topical_pool = v.get<std::size_t>();
            else if (key == "seed") p.seed = v.get<std::uint64_t>();
            else throw ProfileError("unknown profile key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ProfileError("profile key '" + key + "': " + e.what());
        }
    }
    return p;
}

inline GeneratorProfile load_profile(const std::string& name_or_path) {
    if (name_or_path == "ivf" || name_or_path == "independent") return builtin_profile(name_or_path);
    std::ifstream in(name_or_path);
    if (!in) throw ProfileError("no built-in profile or readable file named '" + name_or_path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ProfileError("profile file '" + name_or_path + "': " + e.what());
    }
    return profile_from_json(j);
}

namespace detail {

inline std::string padded(char prefix, std::size_t i, std::size_t count) {
    std::string digits = std::to_string(i);
    const std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
    return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') + digits;
}

/// Picks `count` distinct elements of `pool` uniformly.
inline std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool,
                                                           std::size_t count, Rng& rng) {
    rng.shuffle(pool);
    pool.resize(std::min(count, pool.size()));
    return pool;
}

struct Cumulative {
    std::vector<double> cdf;
    explicit Cumulative(const std::vector<double>& weights) {
        double s = 0.0;
        for (double w : weights) cdf.push_back(s += w);
    }
    std::size_t draw(Rng& rng) const {
        const double u = rng.uniform() * cdf.back();
        return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    }
};

}  // namespace detail

inline Corpus generate_corpus(const GeneratorProfile& profile) {
    profile.validate();
    Rng rng(profile.seed);
    const std::size_t T = profile.thread_count;

    // Thread lengths: rounded normal truncated below at length_min.
    std::vector<std::size_t> lengths(T);
    for (auto& len : lengths) {
        double v = 0.0;
        for (int tries = 0; tries < 1000; ++tries) {
            v = std::round(rng.normal(profile.length_mean, profile.length_std));
            if (v >= static_cast<double>(profile.length_min)) break;
        }
        len = std::max(profile.length_min, static_cast<std::size_t>(std::max(v, 0.0)));
    }
    if (profile.total_posts != 0) {
        std::size_t sum = 0;
        for (auto len : lengths) sum += len;
        while (sum < profile.total_posts) {
            ++lengths[rng.index(T)];
            ++sum;
        }
        while (sum > profile.total_posts) {
            const std::size_t t = rng.index(T);
            if (lengths[t] > profile.length_min) {
                --lengths[t];
                --sum;
            }
        }
    }
    std::size_t N = 0;
    for (auto len : lengths) N += len;

    // Authors 0 .. prolific_count-1 are the prolific group.
    const std::size_t A = profile.author_count, P = profile.prolific_count;
    std::vector<std::size_t> regular;
    for (std::size_t a = P; a < A; ++a) regular.push_back(a);
    const auto starters = detail::sample_without_replacement(regular, profile.starter_count, rng);
    std::vector<std::size_t> starter_of(T);
    for (std::size_t t = 0; t < T; ++t)
        starter_of[t] = t < starters.size() ? starters[t] : starters[rng.index(starters.size())];
    rng.shuffle(starter_of);

    std::vector<std::vector<std::size_t>> author(T);
    std::vector<std::pair<std::size_t, std::size_t>> free_slots;  // (thread, position)
    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t L = lengths[t];
        author[t].assign(L, A);  // A = unassigned
        author[t][0] = starter_of[t];
        const auto target = static_cast<std::size_t>(std::llround(profile.starter_share * static_cast<double>(L)));
        std::vector<std::size_t> rest;
        for (std::size_t p = 1; p < L; ++p) rest.push_back(p);
        const auto extra = detail::sample_without_replacement(rest, target > 0 ? target - 1 : 0, rng);
        for (auto p : extra) author[t][p] = starter_of[t];
        for (std::size_t p = 1; p < L; ++p)
            if (author[t][p] == A) free_slots.emplace_back(t, p);
    }

    const double prolific_target = profile.prolific_share * static_cast<double>(N);
    const double q = free_slots.empty() ? 0.0 : prolific_target / static_cast<double>(free_slots.size());
    if (q > 1.0) throw ProfileError("infeasible profile: prolific share exceeds available posts");
    std::vector<double> prolific_weights;
    for (std::size_t r = 0; r < P; ++r) prolific_weights.push_back(1.0 / (1.0 + 0.15 * static_cast<double>(r)));
    const detail::Cumulative prolific_draw(prolific_weights.empty() ? std::vector<double>{1.0} : prolific_weights);
    std::vector<std::pair<std::size_t, std::size_t>> regular_slots;
    for (const auto& [t, p] : free_slots) {
        if (P > 0 && rng.bernoulli(q)) author[t][p] = prolific_draw.draw(rng);
        else regular_slots.emplace_back(t, p);
    }

    // Every regular author posts at least once; the remaining slots follow a
    // heavy-tailed activity distribution.
    std::set<std::size_t> starter_set(starters.begin(), starters.end());
    std::vector<std::size_t> uncovered;
    for (auto a : regular)
        if (!starter_set.contains(a)) uncovered.push_back(a);
    if (regular_slots.size() < uncovered.size())
        throw ProfileError("infeasible profile: too few posts for author_count");
    rng.shuffle(uncovered);
    rng.shuffle(regular_slots);
    std::vector<double> activity;
    for (std::size_t r = 0; r < regular.size(); ++r) activity.push_back(1.0 / std::pow(static_cast<double>(r + 1), 1.1));
    const detail::Cumulative regular_draw(activity);
    for (std::size_t k = 0; k < regular_slots.size(); ++k) {
        const auto [t, p] = regular_slots[k];
        author[t][p] = k < uncovered.size() ? uncovered[k] : regular[regular_draw.draw(rng)];
    }

    // Sentiment chain.
    const std::vector<double> pi(profile.label_distribution.begin(), profile.label_distribution.end());
    const detail::Cumulative pi_draw(pi);
    std::vector<std::vector<std::size_t>> truth(T);
    for (std::size_t t = 0; t < T; ++t) {
        truth[t].resize(lengths[t]);
        truth[t][0] = pi_draw.draw(rng);
        for (std::size_t p = 1; p < lengths[t]; ++p)
            truth[t][p] = rng.bernoulli(profile.autocorrelation) ? truth[t][p - 1] : pi_draw.draw(rng);
    }

    // Rater disagreement: exact counts at first, last and middle positions.
    std::vector<std::vector<bool>> disagree(T);
    for (std::size_t t = 0; t < T; ++t) disagree[t].assign(lengths[t], false);
    std::vector<std::size_t> all_threads(T), multi_threads;
    for (std::size_t t = 0; t < T; ++t) {
        all_threads[t] = t;
        if (lengths[t] >= 2) multi_threads.push_back(t);
    }
    std::vector<std::pair<std::size_t, std::size_t>> middles;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t p = 1; p + 1 < lengths[t]; ++p) middles.emplace_back(t, p);
    const auto n_first = static_cast<std::size_t>(std::llround(profile.first_disagreement * static_cast<double>(T)));
    const auto n_last = static_cast<std::size_t>(
        std::llround(profile.last_disagreement * static_cast<double>(multi_threads.size())));
    const double middle_target = profile.disagreement * static_cast<double>(N) -
                                 static_cast<double>(n_first) - static_cast<double>(n_last);
    std::size_t n_middle = 0;
    if (!middles.empty()) {
        const double rate = middle_target / static_cast<double>(middles.size());
        if (rate < -1e-9 || rate > 1.0 + 1e-9)
            throw ProfileError("infeasible profile: position disagreement rates inconsistent with overall rate");
        n_middle = static_cast<std::size_t>(std::llround(std::max(0.0, middle_target)));
    }
    for (auto t : detail::sample_without_replacement(all_threads, n_first, rng)) disagree[t][0] = true;
    for (auto t : detail::sample_without_replacement(multi_threads, n_last, rng))
        disagree[t][lengths[t] - 1] = true;
    {
        std::vector<std::size_t> ids(middles.size());
        for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = k;
        for (auto k : detail::sample_without_replacement(ids, n_middle, rng))
            disagree[middles[k].first][middles[k].second] = true;
    }

    std::vector<double> zipf;
    for (std::size_t r = 0; r < profile.vocabulary_size; ++r) zipf.push_back(1.0 / static_cast<double>(r + 1));
    const detail::Cumulative zipf_draw(zipf);

    Corpus corpus;
    for (std::size_t t = 0; t < T; ++t) {
        Thread thread{detail::padded('t', t, T), {}};
        for (std::size_t p = 0; p < lengths[t]; ++p) {
            Post post;
            post.thread_id = thread.thread_id;
            post.index = p;
            post.author_id = detail::padded('a', author[t][p], A);
            const auto truth_label = static_cast<Sentiment>(truth[t][p]);
            post.annotations = {truth_label, truth_label};
            if (disagree[t][p]) {
                auto other = rng.index(kSentimentCount - 1);
                if (other >= truth[t][p]) ++other;
                const auto alt = static_cast<Sentiment>(other);
                post.annotations = rng.bernoulli(0.5) ? AnnotationPair{truth_label, alt}
                                                      : AnnotationPair{alt, truth_label};
            }
            const std::size_t n_tokens =
                profile.tokens_min + rng.index(profile.tokens_max - profile.tokens_min + 1);
            std::string text;
            for (std::size_t k = 0; k < n_tokens; ++k) {
                if (k > 0) text += (rng.index(12) == 0) ? ". " : " ";
                if (rng.bernoulli(profile.topical_share)) {
                    text += to_string(truth_label);
                    text += std::to_string(rng.index(profile.topical_pool));
                } else {
                    text += "w" + std::to_string(zipf_draw.draw(rng));
                }
            }
            post.text = std::move(text);
            thread.posts.push_back(std::move(post));
        }
        corpus.threads.push_back(std::move(thread));
    }
    validate(corpus);
    return corpus;
}

}  // namespace ece
