#pragma once

// Rank-based model comparison: rank 1 is the highest score in a row, tied
// scores share the mean of the positions they occupy.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ece {

inline std::vector<double> rank_row(std::span<const double> scores) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<double> ranks(n, 0.0);
    for (std::size_t start = 0; start < n;) {
        std::size_t stop = start + 1;
        while (stop < n && scores[order[stop]] == scores[order[start]]) ++stop;
        // positions start+1 .. stop share their mean
        const double shared = 0.5 * static_cast<double>(start + 1 + stop);
        for (std::size_t k = start; k < stop; ++k) ranks[order[k]] = shared;
        start = stop;
    }
    return ranks;
}

/// Rows = tasks, columns = models. Missing cells are nullopt.
struct ScoreTable {
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> cells;

    bool complete() const {
        for (const auto& r : cells)
            for (const auto& c : r)
                if (!c) return false;
        return true;
    }
};

struct RankTable {
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> ranks;
};

/// Ranks every row over its present cells.
inline RankTable rank_table(const ScoreTable& scores) {
    RankTable out{scores.rows, scores.columns, {}};
    for (const auto& row : scores.cells) {
        std::vector<double> present;
        std::vector<std::size_t> where;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (row[c]) {
                present.push_back(*row[c]);
                where.push_back(c);
            }
        }
        const auto r = rank_row(present);
        std::vector<std::optional<double>> ranked(row.size());
        for (std::size_t k = 0; k < where.size(); ++k) ranked[where[k]] = r[k];
        out.ranks.push_back(std::move(ranked));
    }
    return out;
}

struct RankTotals {
    std::vector<std::string> models;
    std::vector<double> totals;
    std::vector<std::string> best;  // every model attaining the minimum total
};

/// Sums each model's ranks over all rows; `exclude` drops models from the
/// best-model search (their totals are still reported).
inline RankTotals total_ranks(const RankTable& table, const std::set<std::string>& exclude = {}) {
    RankTotals out;
    out.models = table.columns;
    out.totals.assign(table.columns.size(), 0.0);
    for (const auto& row : table.ranks) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!row[c]) throw std::invalid_argument("rank table is incomplete");
            out.totals[c] += *row[c];
        }
    }
    double best = INFINITY;
    for (std::size_t c = 0; c < out.models.size(); ++c)
        if (!exclude.contains(out.models[c])) best = std::min(best, out.totals[c]);
    for (std::size_t c = 0; c < out.models.size(); ++c)
        if (!exclude.contains(out.models[c]) && out.totals[c] == best) out.best.push_back(out.models[c]);
    return out;
}

}  // namespace ece
