// Generates a synthetic forum corpus, trains a CRF on Model XII features for
// the 3-class task and prints cross-validated scores against the majority baseline.

#include <iostream>

#include "ece/ece.hpp"

int main(int argc, char** argv) {
    auto profile = ece::ivf_profile();
    if (argc > 1) profile.seed = std::stoull(argv[1]);
    const ece::Corpus corpus = ece::generate_corpus(profile);
    const auto stats = ece::corpus_stats(corpus);
    std::cout << "corpus: " << stats.thread_count << " threads, " << stats.post_count << " posts, "
              << stats.author_count << " authors, kappa " << ece::format_fixed(ece::fleiss_kappa(corpus), 3)
              << "\n";

    const auto authors = ece::author_stats(corpus);
    const auto task = ece::build_task(corpus, ece::TaskId::ThreeClass);
    const auto baseline = ece::majority_baseline(task);

    for (auto model : {ece::ModelId::I, ece::ModelId::IX, ece::ModelId::XII}) {
        const auto data = ece::encode_model(corpus, authors, task, model);
        const auto plan = ece::make_folds(task, 10, ece::FoldUnit::thread, 42);
        const auto cv = ece::cross_validate(data, ece::Classifier::crf, plan, ece::LearnerSettings{});
        const auto m = ece::macro_metrics(cv.pooled);
        std::cout << "Model " << ece::to_string(model) << " + CRF, 3-class: P " << ece::format_fixed(m.macro_precision, 3)
                  << "  R " << ece::format_fixed(m.macro_recall, 3) << "  F " << ece::format_fixed(m.macro_f, 3)
                  << "\n";
    }
    std::cout << "majority baseline: F " << ece::format_fixed(baseline.macro_f, 3) << "\n";
}
