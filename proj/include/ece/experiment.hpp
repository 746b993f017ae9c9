#pragma once

// Experiment grid runner: every (task, model, classifier) cell is built,
// cross-validated and written to <output>/cells/<cell>.json. The report step
// (report.hpp) turns the cell files into CSV and markdown tables.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ece/corpus_io.hpp"
#include "ece/cross_validation.hpp"
#include "ece/features.hpp"
#include "ece/tasks.hpp"

namespace ece {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    std::string corpus;
    std::vector<TaskId> tasks{kAllTasks.begin(), kAllTasks.end()};
    std::vector<ModelId> models{kAllModels.begin(), kAllModels.end()};
    std::vector<Classifier> classifiers{Classifier::margin, Classifier::crf};
    std::size_t folds = 10;
    std::uint64_t seed = 1;
    LearnerSettings learners;
    std::size_t bow_min_count = 3;
    std::string output = "results";
    std::size_t jobs = 1;

    void validate() const {
        if (corpus.empty()) throw ConfigError("config: 'corpus' is required");
        if (tasks.empty()) throw ConfigError("config: 'tasks' must not be empty");
        if (models.empty()) throw ConfigError("config: 'models' must not be empty");
        if (classifiers.empty()) throw ConfigError("config: 'classifiers' must not be empty");
        if (folds < 2) throw ConfigError("config: 'folds' must be at least 2");
        if (output.empty()) throw ConfigError("config: 'output' must not be empty");
        if (jobs == 0) throw ConfigError("config: 'jobs' must be positive");
        const auto& m = learners.margin;
        if (m.degrees.empty() || m.costs.empty()) throw ConfigError("config: margin grid must not be empty");
        for (int d : m.degrees)
            if (d < 1 || d > 5) throw ConfigError("config: margin degrees must lie in 1..5");
        for (double c : m.costs)
            if (!(c > 0.0)) throw ConfigError("config: margin costs must be positive");
        if (m.inner_folds < 2) throw ConfigError("config: margin inner_folds must be at least 2");
        if (!(learners.crf.sigma2 > 0.0)) throw ConfigError("config: crf sigma2 must be positive");
    }
};

namespace detail {

template <typename Fn>
void for_each_key(const nlohmann::json& obj, const std::string& where, Fn&& fn) {
    if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        try {
            if (!fn(key, value)) throw ConfigError("config: unknown key '" + where + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config: key '" + where + key + "': " + e.what());
        }
    }
}

template <typename T, typename Parse>
std::vector<T> parse_list(const nlohmann::json& v, const std::string& what, Parse&& parse) {
    if (!v.is_array()) throw ConfigError("config: '" + what + "' must be an array");
    std::vector<T> out;
    for (const auto& item : v) {
        const std::string s = item.is_number_integer() ? std::to_string(item.get<long long>())
                                                       : item.get<std::string>();
        auto parsed = parse(s);
        if (!parsed) throw ConfigError("config: unknown entry '" + s + "' in '" + what + "'");
        out.push_back(*parsed);
    }
    return out;
}

inline std::string resolve_path(const std::string& path, const std::filesystem::path& base) {
    const std::filesystem::path p(path);
    if (p.is_absolute() || base.empty()) return p.string();
    return (base / p).lexically_normal().string();
}

}  // namespace detail

/// Relative "corpus" and "output" paths are resolved against `base_dir`.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig cfg;
    cfg.output = detail::resolve_path(cfg.output, base_dir);
    detail::for_each_key(j, "", [&](const std::string& key, const nlohmann::json& v) {
        if (key == "corpus") cfg.corpus = detail::resolve_path(v.get<std::string>(), base_dir);
        else if (key == "output") cfg.output = detail::resolve_path(v.get<std::string>(), base_dir);
        else if (key == "tasks") cfg.tasks = detail::parse_list<TaskId>(v, key, parse_task);
        else if (key == "models") cfg.models = detail::parse_list<ModelId>(v, key, parse_model);
        else if (key == "classifiers") cfg.classifiers = detail::parse_list<Classifier>(v, key, parse_classifier);
        else if (key == "folds") cfg.folds = v.get<std::size_t>();
        else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
        else if (key == "bow_min_count") cfg.bow_min_count = v.get<std::size_t>();
        else if (key == "jobs") cfg.jobs = v.get<std::size_t>();
        else if (key == "margin") {
            auto& m = cfg.learners.margin;
            detail::for_each_key(v, "margin.", [&](const std::string& k, const nlohmann::json& x) {
                if (k == "degrees") m.degrees = x.get<std::vector<int>>();
                else if (k == "costs") m.costs = x.get<std::vector<double>>();
                else if (k == "inner_folds") m.inner_folds = x.get<std::size_t>();
                else if (k == "tolerance") m.base.tolerance = x.get<double>();
                else if (k == "max_iterations") m.base.max_iterations = x.get<std::size_t>();
                else return false;
                return true;
            });
        } else if (key == "crf") {
            auto& c = cfg.learners.crf;
            detail::for_each_key(v, "crf.", [&](const std::string& k, const nlohmann::json& x) {
                if (k == "sigma2") c.sigma2 = x.get<double>();
                else if (k == "tolerance") c.tolerance = x.get<double>();
                else if (k == "max_iterations") c.max_iterations = x.get<std::size_t>();
                else if (k == "history") c.history = x.get<std::size_t>();
                else return false;
                return true;
            });
        } else {
            return false;
        }
        return true;
    });
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return config_from_json(j, std::filesystem::path(path).parent_path());
}

struct CellKey {
    TaskId task = TaskId::SixClass;
    ModelId model = ModelId::I;
    Classifier classifier = Classifier::margin;

    std::string name() const {
        return std::string(to_string(task)) + "__" + std::string(to_string(model)) + "__" +
               std::string(to_string(classifier));
    }
};

struct CellResult {
    CellKey key;
    bool ok = false;
    std::string error;
    std::vector<std::string> classes;
    ConfusionMatrix pooled;
    std::vector<ConfusionMatrix> folds;
    std::vector<MarginConfig> chosen;
};

inline nlohmann::ordered_json matrix_to_json(const ConfusionMatrix& cm) {
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < cm.classes(); ++g) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t p = 0; p < cm.classes(); ++p) row.push_back(cm.at(g, p));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ConfusionMatrix matrix_from_json(const nlohmann::json& j) {
    ConfusionMatrix cm(j.size());
    for (std::size_t g = 0; g < j.size(); ++g) {
        if (j[g].size() != j.size()) throw std::invalid_argument("confusion matrix is not square");
        for (std::size_t p = 0; p < j.size(); ++p) cm.add(g, p, j[g][p].get<std::size_t>());
    }
    return cm;
}

inline nlohmann::ordered_json cell_to_json(const CellResult& c) {
    nlohmann::ordered_json j;
    j["task"] = to_string(c.key.task);
    j["model"] = to_string(c.key.model);
    j["classifier"] = to_string(c.key.classifier);
    j["fold_unit"] = to_string(fold_unit_for(c.key.classifier));
    j["status"] = c.ok ? "ok" : "failed";
    j["error"] = c.error;
    j["classes"] = c.classes;
    if (c.ok) {
        j["pooled"] = matrix_to_json(c.pooled);
        auto folds = nlohmann::ordered_json::array();
        for (const auto& f : c.folds) folds.push_back(matrix_to_json(f));
        j["folds"] = std::move(folds);
        auto chosen = nlohmann::ordered_json::array();
        for (const auto& m : c.chosen)
            chosen.push_back({{"degree", m.kernel.degree}, {"cost", m.cost}});
        j["chosen"] = std::move(chosen);
    }
    return j;
}

inline CellResult cell_from_json(const nlohmann::json& j) {
    CellResult c;
    const auto task = parse_task(j.at("task").get<std::string>());
    const auto model = parse_model(j.at("model").get<std::string>());
    const auto classifier = parse_classifier(j.at("classifier").get<std::string>());
    if (!task || !model || !classifier) throw std::invalid_argument("cell file names an unknown task, model or classifier");
    c.key = {*task, *model, *classifier};
    c.ok = j.at("status").get<std::string>() == "ok";
    c.error = j.value("error", "");
    c.classes = j.at("classes").get<std::vector<std::string>>();
    if (c.ok) {
        c.pooled = matrix_from_json(j.at("pooled"));
        for (const auto& f : j.at("folds")) c.folds.push_back(matrix_from_json(f));
        for (const auto& m : j.value("chosen", nlohmann::json::array()))
            c.chosen.push_back(MarginConfig{KernelSpec{m.at("degree").get<int>()}, m.at("cost").get<double>()});
    }
    return c;
}

/// Writes `content` to a temporary sibling and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

struct RunSummary {
    std::size_t cells = 0;
    std::size_t failed = 0;
    std::filesystem::path output;
};

/// Runs the configured grid and writes cells/ plus run.json under cfg.output.
/// Cell failures are recorded, never thrown; corpus problems propagate.
inline RunSummary run_cells(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    if (!std::filesystem::exists(cfg.corpus)) throw ConfigError("corpus '" + cfg.corpus + "' does not exist");
    const Corpus corpus = load_corpus(cfg.corpus);
    const AuthorStats stats = author_stats(corpus);
    const bool need_vocab = std::find(cfg.models.begin(), cfg.models.end(), ModelId::BoW) != cfg.models.end();
    const Vocabulary vocab = need_vocab ? build_vocabulary(corpus, cfg.bow_min_count) : Vocabulary{};

    const std::filesystem::path out_dir(cfg.output);
    std::filesystem::create_directories(out_dir / "cells");

    struct TaskData {
        TaskDataset ds;
        MetricsReport baseline;
        std::size_t majority = 0;
        std::optional<FoldPlan> message_plan, thread_plan;
        std::string plan_error;
    };
    std::vector<TaskData> tasks;
    for (TaskId t : cfg.tasks) {
        TaskData td;
        td.ds = build_task(corpus, t);
        td.baseline = majority_baseline(td.ds);
        const auto counts = class_distribution(td.ds);
        td.majority = majority_class(counts, td.ds.classes);
        for (FoldUnit unit : {FoldUnit::message, FoldUnit::thread}) {
            try {
                auto plan = make_folds(td.ds, cfg.folds, unit,
                                       derive_seed(cfg.seed, "folds/" + std::string(to_string(t)) + "/" +
                                                                 std::string(to_string(unit))));
                (unit == FoldUnit::message ? td.message_plan : td.thread_plan) = std::move(plan);
            } catch (const std::exception& e) {
                td.plan_error = e.what();
            }
        }
        tasks.push_back(std::move(td));
    }

    std::vector<std::pair<std::size_t, CellKey>> jobs;
    for (std::size_t ti = 0; ti < cfg.tasks.size(); ++ti)
        for (ModelId m : cfg.models)
            for (Classifier c : cfg.classifiers) jobs.push_back({ti, CellKey{cfg.tasks[ti], m, c}});

    std::atomic<std::size_t> next{0}, failed{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const auto& [ti, key] = jobs[j];
            const TaskData& td = tasks[ti];
            CellResult cell;
            cell.key = key;
            cell.classes = td.ds.classes;
            try {
                const auto& plan = key.classifier == Classifier::margin ? td.message_plan : td.thread_plan;
                if (!plan) throw std::runtime_error("no fold plan: " + td.plan_error);
                const auto enc = encode_model(corpus, stats, td.ds, key.model, &vocab);
                auto r = cross_validate(enc, key.classifier, *plan, cfg.learners);
                cell.pooled = std::move(r.pooled);
                cell.folds = std::move(r.fold_matrices);
                if (key.classifier == Classifier::margin) cell.chosen = std::move(r.chosen);
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.ok = false;
                cell.error = e.what();
                ++failed;
            }
            write_file_atomic(out_dir / "cells" / (key.name() + ".json"), cell_to_json(cell).dump(2) + "\n");
            if (log) {
                std::lock_guard lock(log_mutex);
                *log << key.name() << ": "
                     << (cell.ok ? "ok, macro P " + std::to_string(macro_metrics(cell.pooled).macro_precision)
                                 : "FAILED (" + cell.error + ")")
                     << "\n"
                     << std::flush;
            }
        }
    };
    const std::size_t n_workers = std::min(cfg.jobs, std::max<std::size_t>(1, jobs.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }

    nlohmann::ordered_json manifest;
    manifest["corpus"] = std::filesystem::path(cfg.corpus).filename().string();
    manifest["posts"] = corpus.post_count();
    manifest["threads"] = corpus.threads.size();
    manifest["seed"] = cfg.seed;
    manifest["folds"] = cfg.folds;
    for (TaskId t : cfg.tasks) manifest["tasks"].push_back(to_string(t));
    for (ModelId m : cfg.models) manifest["models"].push_back(to_string(m));
    for (Classifier c : cfg.classifiers) manifest["classifiers"].push_back(to_string(c));
    for (const auto& td : tasks) {
        manifest["baselines"].push_back({{"task", to_string(td.ds.task)},
                                         {"instances", td.ds.size()},
                                         {"majority_class", td.ds.classes[td.majority]},
                                         {"macro_precision", td.baseline.macro_precision},
                                         {"macro_recall", td.baseline.macro_recall},
                                         {"macro_f", td.baseline.macro_f}});
    }
    write_file_atomic(out_dir / "run.json", manifest.dump(2) + "\n");
    return RunSummary{jobs.size(), failed.load(), out_dir};
}

}  // namespace ece
