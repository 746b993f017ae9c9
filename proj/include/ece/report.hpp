#pragma once

// Turns an experiment directory (run.json + cells/*.json) into CSV tables and
// a markdown report. Missing or failed cells appear as gaps.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ece/experiment.hpp"
#include "ece/ranking.hpp"
#include "ece/reference_tables.hpp"
#include "ece/significance.hpp"

namespace ece {

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Measure : std::uint8_t { precision, recall, f_score };

constexpr std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::precision: return "precision";
        case Measure::recall: return "recall";
        case Measure::f_score: return "F";
    }
    return "?";
}

inline double macro_value(const MetricsReport& r, Measure m) {
    switch (m) {
        case Measure::precision: return r.macro_precision;
        case Measure::recall: return r.macro_recall;
        case Measure::f_score: return r.macro_f;
    }
    return 0.0;
}

inline std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

/// Ranks are multiples of 0.5 in practice; integers print without a fraction.
inline std::string format_rank(double r) {
    if (r == static_cast<double>(static_cast<long long>(r))) return std::to_string(static_cast<long long>(r));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", r);
    return buf;
}

/// Marks every present cell equal to the row maximum (or minimum).
inline std::vector<bool> flag_row(std::span<const std::optional<double>> row, bool maximum = true) {
    std::optional<double> best;
    for (const auto& v : row)
        if (v && (!best || (maximum ? *v > *best : *v < *best))) best = v;
    std::vector<bool> flags(row.size(), false);
    for (std::size_t c = 0; c < row.size(); ++c) flags[c] = row[c] && best && *row[c] == *best;
    return flags;
}

struct ResultSet {
    std::vector<TaskId> tasks;
    std::vector<ModelId> models;
    std::vector<Classifier> classifiers;
    std::size_t folds = 0;
    nlohmann::json manifest;
    std::map<std::string, CellResult> cells;  // keyed by CellKey::name()

    const CellResult* find(TaskId t, ModelId m, Classifier c) const {
        auto it = cells.find(CellKey{t, m, c}.name());
        return it == cells.end() ? nullptr : &it->second;
    }
    const CellResult* find_ok(TaskId t, ModelId m, Classifier c) const {
        const auto* cell = find(t, m, c);
        return cell && cell->ok ? cell : nullptr;
    }
};

inline ResultSet load_results(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "run.json";
    std::ifstream in(manifest_path);
    if (!in) throw ReportError("no run.json in '" + dir.string() + "'");
    ResultSet rs;
    try {
        in >> rs.manifest;
        for (const auto& t : rs.manifest.at("tasks")) rs.tasks.push_back(parse_task(t.get<std::string>()).value());
        for (const auto& m : rs.manifest.at("models")) rs.models.push_back(parse_model(m.get<std::string>()).value());
        for (const auto& c : rs.manifest.at("classifiers"))
            rs.classifiers.push_back(parse_classifier(c.get<std::string>()).value());
        rs.folds = rs.manifest.at("folds").get<std::size_t>();
    } catch (const std::exception& e) {
        throw ReportError("malformed run.json: " + std::string(e.what()));
    }
    const auto cell_dir = dir / "cells";
    if (std::filesystem::is_directory(cell_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(cell_dir)) {
            if (entry.path().extension() != ".json") continue;
            std::ifstream cin(entry.path());
            try {
                nlohmann::json j;
                cin >> j;
                CellResult cell = cell_from_json(j);
                rs.cells.emplace(cell.key.name(), std::move(cell));
            } catch (const std::exception& e) {
                throw ReportError("malformed cell file '" + entry.path().string() + "': " + e.what());
            }
        }
    }
    return rs;
}

inline std::vector<std::string> task_names(const ResultSet& rs) {
    std::vector<std::string> out;
    for (auto t : rs.tasks) out.emplace_back(to_string(t));
    return out;
}

inline std::vector<std::string> model_names(const ResultSet& rs) {
    std::vector<std::string> out;
    for (auto m : rs.models) out.emplace_back(to_string(m));
    return out;
}

/// Rows = tasks, columns = models; pooled macro value per cell.
inline ScoreTable score_table(const ResultSet& rs, Classifier c, Measure measure) {
    ScoreTable t{task_names(rs), model_names(rs), {}};
    for (auto task : rs.tasks) {
        std::vector<std::optional<double>> row;
        for (auto m : rs.models) {
            const auto* cell = rs.find_ok(task, m, c);
            row.push_back(cell ? std::optional(macro_value(macro_metrics(cell->pooled), measure)) : std::nullopt);
        }
        t.cells.push_back(std::move(row));
    }
    return t;
}

/// Published precision for the same rows and columns (original corpus).
inline ScoreTable published_precision(const ResultSet& rs, Classifier c) {
    const auto& grid = c == Classifier::margin ? reference::kMarginPrecision : reference::kCrfPrecision;
    ScoreTable t{task_names(rs), model_names(rs), {}};
    for (auto task : rs.tasks) {
        std::vector<std::optional<double>> row;
        for (auto m : rs.models) row.push_back(grid[static_cast<std::size_t>(task)][static_cast<std::size_t>(m)]);
        t.cells.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string score_csv(const ScoreTable& t, int digits = 6) {
    std::ostringstream out;
    out << "task";
    for (const auto& c : t.columns) out << "," << c;
    out << "\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out << t.rows[r];
        for (const auto& v : t.cells[r]) out << "," << (v ? format_fixed(*v, digits) : "");
        out << "\n";
    }
    return out.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

/// Reads a table written by score_csv: header "task,<model>...", one row per task.
inline ScoreTable read_score_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ReportError("empty precision CSV");
    auto header = detail::split_csv_line(line);
    if (header.size() < 2) throw ReportError("precision CSV needs at least one model column");
    ScoreTable t;
    t.columns.assign(header.begin() + 1, header.end());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw ReportError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                              " fields, found " + std::to_string(fields.size()));
        t.rows.push_back(fields[0]);
        std::vector<std::optional<double>> row;
        for (std::size_t k = 1; k < fields.size(); ++k) {
            if (fields[k].empty()) {
                row.emplace_back();
                continue;
            }
            try {
                std::size_t used = 0;
                row.emplace_back(std::stod(fields[k], &used));
                if (used != fields[k].size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ReportError("line " + std::to_string(line_no) + ": '" + fields[k] + "' is not a number");
            }
        }
        t.cells.push_back(std::move(row));
    }
    if (t.rows.empty()) throw ReportError("precision CSV has no rows");
    return t;
}

/// Rank rows plus a "total" row when every cell is present.
inline std::string rank_csv(const RankTable& t) {
    std::ostringstream out;
    out << "task";
    for (const auto& c : t.columns) out << "," << c;
    out << "\n";
    bool complete = true;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out << t.rows[r];
        for (const auto& v : t.ranks[r]) {
            out << "," << (v ? format_rank(*v) : "");
            complete = complete && v.has_value();
        }
        out << "\n";
    }
    if (complete && !t.rows.empty()) {
        const auto totals = total_ranks(t);
        out << "total";
        for (double v : totals.totals) out << "," << format_rank(v);
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Markdown
// ---------------------------------------------------------------------------

inline std::string markdown_header(const std::string& first, const std::vector<std::string>& columns) {
    std::string s = "| " + first + " |";
    for (const auto& c : columns) s += " " + c + " |";
    s += "\n|---|";
    for (std::size_t k = 0; k < columns.size(); ++k) s += "---:|";
    return s + "\n";
}

/// Bold marks the row maximum; with `mark_worst`, italics mark the row minimum.
inline std::string markdown_scores(const ScoreTable& t, bool mark_worst = false, int digits = 3) {
    std::string s = markdown_header("task", t.columns);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto best = flag_row(t.cells[r], true);
        const auto worst = flag_row(t.cells[r], false);
        s += "| " + t.rows[r] + " |";
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            const auto& v = t.cells[r][c];
            std::string cell = v ? format_fixed(*v, digits) : "n/a";
            if (v && best[c]) cell = "**" + cell + "**";
            else if (v && mark_worst && worst[c]) cell = "_" + cell + "_";
            s += " " + cell + " |";
        }
        s += "\n";
    }
    return s;
}

inline std::string markdown_ranks(const RankTable& t, const std::set<std::string>& exclude_from_best = {}) {
    std::string s = markdown_header("task", t.columns);
    bool complete = true;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        s += "| " + t.rows[r] + " |";
        for (const auto& v : t.ranks[r]) {
            s += " " + (v ? format_rank(*v) : std::string("n/a")) + " |";
            complete = complete && v.has_value();
        }
        s += "\n";
    }
    if (!complete) return s + "\nTotals omitted: some cells are missing.\n";
    const auto totals = total_ranks(t, exclude_from_best);
    s += "| **total** |";
    for (double v : totals.totals) s += " " + format_rank(v) + " |";
    s += "\n\nBest (lowest total";
    if (!exclude_from_best.empty()) s += ", BoW benchmark excluded";
    s += "): ";
    for (std::size_t k = 0; k < totals.best.size(); ++k) s += (k ? ", " : "") + totals.best[k];
    if (totals.best.size() > 1) s += " (tied)";
    return s + "\n";
}

struct ReportSummary {
    std::size_t expected_cells = 0;
    std::size_t ok_cells = 0;
    std::size_t failed_cells = 0;
    std::size_t missing_cells = 0;
};

namespace detail {

inline std::vector<std::string> class_union(const ResultSet& rs) {
    std::vector<std::string> out;
    for (TaskId t : kAllTasks)
        for (const auto& c : class_names(t))
            if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    (void)rs;
    return out;
}

inline std::string results_csv(const ResultSet& rs) {
    const auto classes = class_union(rs);
    std::ostringstream out;
    out << "task,model,classifier,fold,macro_p,macro_r,macro_f,accuracy";
    for (const auto& c : classes) out << ",precision_" << c << ",recall_" << c << ",f_" << c;
    out << "\n";
    auto emit = [&](const CellKey& key, const std::string& fold, const CellResult& cell, const ConfusionMatrix& cm) {
        const auto m = macro_metrics(cm);
        out << to_string(key.task) << "," << to_string(key.model) << "," << to_string(key.classifier) << ","
            << fold << "," << format_fixed(m.macro_precision, 6) << "," << format_fixed(m.macro_recall, 6) << ","
            << format_fixed(m.macro_f, 6) << "," << format_fixed(m.accuracy, 6);
        for (const auto& c : classes) {
            auto it = std::find(cell.classes.begin(), cell.classes.end(), c);
            if (it == cell.classes.end()) {
                out << ",,,";
                continue;
            }
            const auto k = static_cast<std::size_t>(it - cell.classes.begin());
            out << "," << format_fixed(m.precision[k], 6) << "," << format_fixed(m.recall[k], 6) << ","
                << format_fixed(m.f_score[k], 6);
        }
        out << "\n";
    };
    for (auto t : rs.tasks)
        for (auto m : rs.models)
            for (auto c : rs.classifiers) {
                const auto* cell = rs.find_ok(t, m, c);
                if (!cell) continue;
                for (std::size_t f = 0; f < cell->folds.size(); ++f)
                    emit(cell->key, std::to_string(f), *cell, cell->folds[f]);
                emit(cell->key, "pooled", *cell, cell->pooled);
            }
    return out.str();
}

inline std::string baselines_csv(const ResultSet& rs) {
    std::ostringstream out;
    out << "task,instances,majority_class,macro_precision,macro_recall,macro_f,published_macro_f\n";
    for (const auto& b : rs.manifest.value("baselines", nlohmann::json::array())) {
        const auto task = parse_task(b.at("task").get<std::string>()).value();
        out << b.at("task").get<std::string>() << "," << b.at("instances").get<std::size_t>() << ","
            << b.at("majority_class").get<std::string>() << "," << format_fixed(b.at("macro_precision").get<double>(), 6)
            << "," << format_fixed(b.at("macro_recall").get<double>(), 6) << ","
            << format_fixed(b.at("macro_f").get<double>(), 6) << ","
            << format_fixed(reference::kMajorityF[static_cast<std::size_t>(task)], 3) << "\n";
    }
    return out.str();
}

struct SignificanceRow {
    ModelId model;
    std::size_t pairs = 0;
    PairedTest test;
};

/// Margin vs CRF on one representation, paired over (task, fold) macro precision.
inline std::vector<SignificanceRow> significance_rows(const ResultSet& rs) {
    std::vector<SignificanceRow> out;
    for (auto m : rs.models) {
        std::vector<double> a, b;
        for (auto t : rs.tasks) {
            const auto* x = rs.find_ok(t, m, Classifier::margin);
            const auto* y = rs.find_ok(t, m, Classifier::crf);
            if (!x || !y || x->folds.size() != y->folds.size()) continue;
            for (std::size_t f = 0; f < x->folds.size(); ++f) {
                a.push_back(macro_metrics(x->folds[f]).macro_precision);
                b.push_back(macro_metrics(y->folds[f]).macro_precision);
            }
        }
        if (a.size() < 2) continue;
        out.push_back({m, a.size(), paired_significance(a, b)});
    }
    return out;
}

inline std::string significance_csv(const std::vector<SignificanceRow>& rows) {
    std::ostringstream out;
    out << "model,pairs,mean_difference,t,degrees_of_freedom,p_value\n";
    for (const auto& r : rows)
        out << to_string(r.model) << "," << r.pairs << "," << format_fixed(r.test.mean_difference, 6) << ","
            << format_fixed(r.test.t, 6) << "," << format_fixed(r.test.degrees_of_freedom, 0) << ","
            << format_fixed(r.test.p_value, 6) << "\n";
    return out.str();
}

}  // namespace detail

inline std::string render_report(const ResultSet& rs, ReportSummary& summary) {
    std::ostringstream md;
    const std::size_t per_classifier = rs.tasks.size() * rs.models.size();
    md << "# Sentiment classification results\n\n";
    md << "## Disclosure\n\n"
       << "The original IVF Ages 35+ forum corpus is available only on request and is not distributed here. "
       << "Every number in this report comes from the corpus `" << rs.manifest.value("corpus", std::string("?"))
       << "` (" << rs.manifest.value("posts", 0) << " posts, " << rs.manifest.value("threads", 0)
       << " threads), normally a synthetic corpus generated to match the published summary statistics. "
       << "Absolute precision values are therefore not reproducible: for example the published CRF precision "
       << "on the 6-class task with Model XII is 0.644. Published values are listed beside the synthetic "
       << "ones for orientation only. What should carry over is the qualitative ordering of the models.\n\n"
       << "The original study counts its task/representation combinations as 52; 14 ECE models times 4 tasks "
       << "give 56 per classifier, or 60 with the BoW benchmark. This run covers " << per_classifier
       << " cells per classifier and " << per_classifier * rs.classifiers.size() << " in total.\n\n"
       << "Protocol: " << rs.folds << "-fold cross-validation, seed " << rs.manifest.value("seed", 0)
       << ". The margin classifier uses message-level stratified folds with an inner 3-fold grid search over "
       << "kernel degree and cost; the CRF uses thread-level folds so sequences stay intact. Cell scores are "
       << "macro values of the confusion matrix pooled over folds.\n\n";

    for (const auto& c : rs.classifiers) {
        const bool margin = c == Classifier::margin;
        const std::string label = margin ? "Margin classifier (SVM)" : "CRF";
        const auto scores = score_table(rs, c, Measure::precision);
        const auto published = published_precision(rs, c);
        md << "## " << label << ": macro precision\n\n"
           << "Synthetic run (row maximum in bold):\n\n"
           << markdown_scores(scores) << "\nPublished values on the original corpus:\n\n"
           << markdown_scores(published) << "\n";
        md << "## " << label << ": model ranks\n\n"
           << "Ranks per row, 1 = highest precision, ties share the mean position.\n\n"
           << "Synthetic run:\n\n"
           << markdown_ranks(rank_table(scores), {"BoW"}) << "\nPublished ranks:\n\n"
           << markdown_ranks(rank_table(published), {"BoW"}) << "\n";
    }

    md << "## Benchmark comparison\n\n"
       << "| classifier | task | published best | published | synthetic (same model) | synthetic best |\n"
       << "|---|---|---|---:|---:|---|\n";
    for (const auto& c : rs.classifiers) {
        const auto scores = score_table(rs, c, Measure::precision);
        const auto published = published_precision(rs, c);
        for (std::size_t r = 0; r < rs.tasks.size(); ++r) {
            std::size_t pb = 0;
            for (std::size_t k = 1; k < rs.models.size(); ++k)
                if (*published.cells[r][k] > *published.cells[r][pb]) pb = k;
            std::optional<std::size_t> sb;
            for (std::size_t k = 0; k < rs.models.size(); ++k)
                if (scores.cells[r][k] && (!sb || *scores.cells[r][k] > *scores.cells[r][*sb])) sb = k;
            md << "| " << to_string(c) << " | " << scores.rows[r] << " | " << scores.columns[pb] << " | "
               << format_fixed(*published.cells[r][pb], 3) << " | "
               << (scores.cells[r][pb] ? format_fixed(*scores.cells[r][pb], 3) : "n/a") << " | "
               << (sb ? scores.columns[*sb] + " (" + format_fixed(*scores.cells[r][*sb], 3) + ")" : "n/a")
               << " |\n";
        }
    }
    md << "\n## Majority-class baseline\n\n| task | instances | majority class | macro P | macro R | macro F | "
          "published macro F |\n|---|---:|---|---:|---:|---:|---:|\n";
    for (const auto& b : rs.manifest.value("baselines", nlohmann::json::array())) {
        const auto task = parse_task(b.at("task").get<std::string>()).value();
        md << "| " << b.at("task").get<std::string>() << " | " << b.at("instances").get<std::size_t>() << " | "
           << b.at("majority_class").get<std::string>() << " | "
           << format_fixed(b.at("macro_precision").get<double>(), 3) << " | "
           << format_fixed(b.at("macro_recall").get<double>(), 3) << " | "
           << format_fixed(b.at("macro_f").get<double>(), 3) << " | "
           << format_fixed(reference::kMajorityF[static_cast<std::size_t>(task)], 3) << " |\n";
    }

    md << "\n## Precision, recall and F per classifier\n\n"
       << "Row best in bold, row worst in italics.\n\n";
    for (const auto& c : rs.classifiers)
        for (Measure m : {Measure::precision, Measure::recall, Measure::f_score})
            md << "### " << to_string(c) << ": macro " << to_string(m) << "\n\n"
               << markdown_scores(score_table(rs, c, m), true) << "\n";

    const auto sig = detail::significance_rows(rs);
    md << "## Margin classifier vs CRF\n\n"
       << "Two-sided paired t-test on macro precision. Pairs are (task, fold) combinations: fold f of the "
       << "margin run is paired with fold f of the CRF run although the two use different fold units. "
       << "This pairing is a convention of this tool.\n\n";
    if (sig.empty()) {
        md << "No representation has results for both classifiers.\n";
    } else {
        md << "| model | pairs | mean difference (margin - CRF) | t | df | p |\n|---|---:|---:|---:|---:|---:|\n";
        for (const auto& r : sig)
            md << "| " << to_string(r.model) << " | " << r.pairs << " | " << format_fixed(r.test.mean_difference, 4)
               << " | " << format_fixed(r.test.t, 3) << " | " << format_fixed(r.test.degrees_of_freedom, 0) << " | "
               << format_fixed(r.test.p_value, 4) << " |\n";
    }

    std::vector<std::string> failed, missing;
    for (auto t : rs.tasks)
        for (auto m : rs.models)
            for (auto c : rs.classifiers) {
                ++summary.expected_cells;
                const auto* cell = rs.find(t, m, c);
                if (!cell) {
                    ++summary.missing_cells;
                    missing.push_back(CellKey{t, m, c}.name());
                } else if (!cell->ok) {
                    ++summary.failed_cells;
                    failed.push_back(cell->key.name() + ": " + cell->error);
                } else {
                    ++summary.ok_cells;
                }
            }
    md << "\n## Cell status\n\n"
       << summary.ok_cells << " of " << summary.expected_cells << " cells completed.\n";
    if (!failed.empty()) {
        md << "\nFailed cells:\n\n";
        for (const auto& f : failed) md << "- " << f << "\n";
    }
    if (!missing.empty()) {
        md << "\nMissing cells:\n\n";
        for (const auto& f : missing) md << "- " << f << "\n";
    }
    return md.str();
}

/// Writes results.csv, precision_/rank_/recall_/f_<classifier>.csv,
/// baselines.csv, significance.csv and report.md into `dir`.
inline ReportSummary emit_report(const std::filesystem::path& dir) {
    const ResultSet rs = load_results(dir);
    ReportSummary summary;
    write_file_atomic(dir / "results.csv", detail::results_csv(rs));
    for (const auto& c : rs.classifiers) {
        const std::string suffix = std::string(to_string(c)) + ".csv";
        const auto precision = score_table(rs, c, Measure::precision);
        write_file_atomic(dir / ("precision_" + suffix), score_csv(precision));
        write_file_atomic(dir / ("recall_" + suffix), score_csv(score_table(rs, c, Measure::recall)));
        write_file_atomic(dir / ("f_" + suffix), score_csv(score_table(rs, c, Measure::f_score)));
        write_file_atomic(dir / ("rank_" + suffix), rank_csv(rank_table(precision)));
    }
    write_file_atomic(dir / "baselines.csv", detail::baselines_csv(rs));
    write_file_atomic(dir / "significance.csv", detail::significance_csv(detail::significance_rows(rs)));
    write_file_atomic(dir / "report.md", render_report(rs, summary));
    return summary;
}

/// Runs the grid and writes the report. Returns the run summary.
inline RunSummary run_experiments(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
    auto run = run_cells(cfg, log);
    emit_report(run.output);
    return run;
}

}  // namespace ece
