#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace ece;
using S = Sentiment;
using oracle::make_corpus;

namespace {

std::string line(const std::string& thread, int index, const std::string& author, const std::string& a,
                 const std::string& b) {
    return R"({"thread_id":")" + thread + R"(","post_index":)" + std::to_string(index) + R"(,"author_id":")" +
           author + R"(","label_a":")" + a + R"(","label_b":")" + b + "\"}\n";
}

Corpus parse(const std::string& s) {
    std::istringstream in(s);
    return parse_corpus(in);
}

}  // namespace

TEST(ResolveLabel, AgreementKeepsLabel) {
    EXPECT_EQ(resolve_label({S::encouragement, S::encouragement}), ResolvedLabel::encouragement);
}

TEST(ResolveLabel, DisagreementIsAmbiguous) {
    EXPECT_EQ(resolve_label({S::encouragement, S::factual}), ResolvedLabel::ambiguous);
    EXPECT_EQ(resolve_label({S::gratitude, S::endorsement}), ResolvedLabel::ambiguous);
}

TEST(ResolveLabel, Symmetric) {
    for (auto a : kSentiments)
        for (auto b : kSentiments) EXPECT_EQ(resolve_label({a, b}), resolve_label({b, a}));
}

TEST(LoadCorpus, TwoLineFile) {
    const auto c = parse(line("t1", 0, "a", "factual", "factual") + line("t1", 1, "b", "gratitude", "gratitude"));
    ASSERT_EQ(c.threads.size(), 1u);
    EXPECT_EQ(c.threads[0].posts.size(), 2u);
    EXPECT_EQ(c.post_count(), 2u);
}

TEST(LoadCorpus, SortsLinesInAnyOrder) {
    const auto c = parse(line("t2", 1, "b", "factual", "factual") + line("t1", 0, "a", "factual", "factual") +
                         line("t2", 0, "a", "confusion", "factual"));
    ASSERT_EQ(c.threads.size(), 2u);
    EXPECT_EQ(c.threads[0].thread_id, "t1");
    EXPECT_EQ(c.threads[1].posts[0].annotations.label_a, S::confusion);
}

TEST(LoadCorpus, NonContiguousIndicesRejected) {
    EXPECT_THROW(parse(line("t1", 0, "a", "factual", "factual") + line("t1", 2, "a", "factual", "factual")),
                 ValidationError);
}

TEST(LoadCorpus, UnknownLabelReportsLine) {
    try {
        parse(line("t1", 0, "a", "factual", "factual") + line("t1", 1, "a", "joy", "factual"));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("joy"), std::string::npos);
    }
}

TEST(LoadCorpus, MalformedJsonReportsLine) {
    try {
        parse(line("t1", 0, "a", "factual", "factual") + "\n{not json\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(LoadCorpus, MissingFieldAndUnknownFieldRejected) {
    EXPECT_THROW(parse(R"({"thread_id":"t","post_index":0,"label_a":"factual","label_b":"factual"})"), ParseError);
    EXPECT_THROW(parse(R"({"thread_id":"t","post_index":0,"author_id":"a","label_a":"factual","label_b":"factual","x":1})"),
                 ParseError);
}

TEST(LoadCorpus, DuplicateIndexRejected) {
    EXPECT_THROW(parse(line("t1", 0, "a", "factual", "factual") + line("t1", 0, "b", "factual", "factual")),
                 CorpusError);
}

TEST(LoadCorpus, MissingFileIsError) { EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), CorpusError); }

TEST(LoadCorpus, RoundTripIsIdentity) {
    auto profile = ivf_profile();
    profile.thread_count = 12;
    profile.total_posts = 0;
    profile.author_count = 60;
    profile.starter_count = 10;
    const Corpus c = generate_corpus(profile);
    const std::string first = corpus_to_string(c);
    std::istringstream in(first);
    const Corpus back = parse_corpus(in);
    EXPECT_EQ(corpus_to_string(back), first);
    EXPECT_EQ(back.post_count(), c.post_count());
}

TEST(AuthorStats, ProlificityRatio) {
    std::vector<oracle::PostSpec> posts;
    for (int k = 0; k < 12; ++k) posts.push_back({"max", S::factual, S::factual});
    for (int k = 0; k < 6; ++k) posts.push_back({"A", S::factual, S::factual});
    const auto stats = author_stats(make_corpus({posts}));
    EXPECT_DOUBLE_EQ(stats.prolificity_of("A"), 0.5);
    EXPECT_EQ(stats.prolificity_of("max"), 1.0);
}

TEST(AuthorStats, TiedMaximaAllGetOne) {
    const auto stats = author_stats(make_corpus({{{"x", S::factual, S::factual}, {"y", S::factual, S::factual}},
                                                 {{"z", S::factual, S::factual}}}));
    for (const auto& [a, p] : stats.prolificity) EXPECT_EQ(p, 1.0);
}

TEST(AuthorStats, NewcomerFacts) {
    const auto c = make_corpus({{{"s", S::factual, S::factual},
                                 {"b", S::factual, S::factual},
                                 {"s", S::factual, S::factual},
                                 {"b", S::factual, S::factual}},
                                {{"b", S::factual, S::factual}}});
    const auto stats = author_stats(c);
    EXPECT_EQ(stats.newcomer[0], (std::vector<bool>{true, true, false, false}));
    EXPECT_EQ(stats.newcomer[1], (std::vector<bool>{true}));  // newcomer is per thread
    EXPECT_EQ(stats.first_author[0], "s");
    EXPECT_EQ(stats.post_count.at("b"), 3u);
}

TEST(AuthorStats, ProlificityInvariantOnRandomCorpora) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = oracle::random_corpus(rng, 1 + rng.index(10), 8, 1 + rng.index(12));
        const auto stats = author_stats(c);
        double mx = 0.0;
        for (const auto& [a, p] : stats.prolificity) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            mx = std::max(mx, p);
        }
        EXPECT_EQ(mx, 1.0);
    }
}

TEST(FleissKappa, PerfectAgreementIsOne) {
    EXPECT_EQ(fleiss_kappa(make_corpus({{{"a", S::factual, S::factual}, {"b", S::gratitude, S::gratitude}}})), 1.0);
    // A single category everywhere: expected agreement 1 but observed agreement 1 too.
    EXPECT_EQ(fleiss_kappa(make_corpus({{{"a", S::factual, S::factual}, {"b", S::factual, S::factual}}})), 1.0);
}

TEST(FleissKappa, HandComputedExample) {
    // P-bar = 0.75, Pe = 0.625^2 + 0.375^2 = 0.53125.
    const auto c = make_corpus({{{"a", S::confusion, S::confusion},
                                 {"b", S::confusion, S::confusion},
                                 {"c", S::factual, S::factual},
                                 {"d", S::confusion, S::factual}}});
    EXPECT_NEAR(fleiss_kappa(c), (0.75 - 0.53125) / 0.46875, 1e-12);
    EXPECT_NEAR(fleiss_kappa(c), 0.466666666, 1e-8);
}

TEST(FleissKappa, SystematicDisagreementIsNegative) {
    const auto c = make_corpus({{{"a", S::confusion, S::factual}, {"b", S::factual, S::confusion}}});
    EXPECT_LT(fleiss_kappa(c), 0.0);
    EXPECT_NEAR(fleiss_kappa(c), -1.0, 1e-12);
}

TEST(FleissKappa, InvariantUnderPostOrder) {
    Rng rng(9);
    auto c = oracle::random_corpus(rng, 6, 9, 5, 0.4);
    const double k1 = fleiss_kappa(c);
    for (auto& t : c.threads) std::reverse(t.posts.begin(), t.posts.end());
    std::reverse(c.threads.begin(), c.threads.end());
    EXPECT_NEAR(fleiss_kappa(c), k1, 1e-12);
}

TEST(FleissKappa, EmptyCorpusIsError) { EXPECT_THROW(fleiss_kappa(Corpus{}), CorpusError); }

TEST(CorpusStats, SingleThreadOneAuthor) {
    const auto s = corpus_stats(make_corpus(
        {{{"a", S::factual, S::factual}, {"a", S::factual, S::factual}, {"a", S::factual, S::gratitude}}}));
    EXPECT_EQ(s.thread_count, 1u);
    EXPECT_EQ(s.post_count, 3u);
    EXPECT_EQ(s.author_count, 1u);
    EXPECT_DOUBLE_EQ(s.mean_thread_length, 3.0);
    EXPECT_DOUBLE_EQ(s.std_thread_length, 0.0);
    EXPECT_DOUBLE_EQ(s.starter_share, 1.0);
    EXPECT_DOUBLE_EQ(s.first_post_ambiguity, 0.0);
    EXPECT_DOUBLE_EQ(s.last_post_ambiguity, 1.0);
}

TEST(CorpusStats, ResolvedDistributionSumsToPostCount) {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto c = oracle::random_corpus(rng, 8, 10, 6, 0.3);
        const auto s = corpus_stats(c);
        std::size_t sum = 0, unequal = 0;
        for (auto n : s.resolved_distribution) sum += n;
        for (const auto& t : c.threads)
            for (const auto& p : t.posts) unequal += p.annotations.label_a != p.annotations.label_b;
        EXPECT_EQ(sum, s.post_count);
        EXPECT_EQ(s.resolved_distribution[static_cast<std::size_t>(ResolvedLabel::ambiguous)], unequal);
    }
}

TEST(CorpusStats, IvfProfileMatchesPublishedTotals) {
    const auto c = generate_corpus(ivf_profile());
    const auto s = corpus_stats(c);
    EXPECT_EQ(s.thread_count, 80u);
    EXPECT_EQ(s.post_count, 1321u);
    EXPECT_EQ(s.author_count, 359u);
    EXPECT_NEAR(s.top_k_share, 0.45, 0.05);
}
