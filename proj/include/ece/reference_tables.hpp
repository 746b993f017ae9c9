#pragma once

// Macro-precision values and model ranks published for the original
// (non-distributed) IVF forum corpus. Used as test fixtures and printed next
// to synthetic-run numbers in reports.

#include <array>

namespace ece::reference {

// Rows: 6-, 5-, 4-, 3-class. Columns: BoW, I .. XIV.
using Row = std::array<double, 15>;
using Grid = std::array<Row, 4>;

inline constexpr Grid kMarginPrecision = {{
    {0.415, 0.375, 0.380, 0.380, 0.373, 0.373, 0.396, 0.398, 0.412, 0.425, 0.182, 0.254, 0.393, 0.348, 0.362},
    {0.515, 0.447, 0.433, 0.470, 0.467, 0.467, 0.469, 0.520, 0.515, 0.515, 0.247, 0.36, 0.486, 0.432, 0.45},
    {0.485, 0.495, 0.506, 0.472, 0.485, 0.485, 0.473, 0.472, 0.481, 0.503, 0.282, 0.364, 0.495, 0.468, 0.48},
    {0.635, 0.604, 0.621, 0.617, 0.608, 0.608, 0.640, 0.640, 0.649, 0.648, 0.358, 0.582, 0.626, 0.629, 0.62},
}};

inline constexpr Grid kMarginRanks = {{
    {2, 9, 7.5, 7.5, 10.5, 10.5, 5, 4, 3, 1, 15, 14, 6, 13, 12},
    {3, 11, 12, 6, 8.5, 8.5, 7, 1, 3, 3, 15, 14, 5, 13, 10},
    {6, 3.5, 1, 11.5, 6, 6, 10, 11.5, 8, 2, 15, 14, 3.5, 13, 9},
    {5, 13, 8, 10, 11.5, 11.5, 3.5, 3.5, 1, 2, 15, 14, 7, 6, 9},
}};

inline constexpr Grid kCrfPrecision = {{
    {0.369, 0.621, 0.613, 0.568, 0.57, 0.516, 0.516, 0.434, 0.438, 0.149, 0.245, 0.265, 0.644, 0.614, 0.582},
    {0.441, 0.619, 0.616, 0.601, 0.582, 0.580, 0.566, 0.507, 0.507, 0.230, 0.334, 0.321, 0.672, 0.643, 0.593},
    {0.452, 0.681, 0.654, 0.618, 0.628, 0.570, 0.568, 0.504, 0.489, 0.258, 0.394, 0.326, 0.662, 0.649, 0.634},
    {0.611, 0.732, 0.711, 0.704, 0.692, 0.669, 0.671, 0.622, 0.64, 0.435, 0.596, 0.539, 0.713, 0.706, 0.717},
}};

inline constexpr Grid kCrfRanks = {{
    {12, 2, 4, 7, 6, 8.5, 8.5, 11, 10, 15, 14, 13, 1, 3, 5},
    {12, 3, 4, 5, 7, 8, 9, 10.5, 10.5, 15, 13, 14, 1, 2, 6},
    {12, 1, 3, 7, 6, 8, 9, 10, 11, 15, 13, 14, 2, 4, 5},
    {12, 1, 4, 6, 7, 9, 8, 11, 10, 15, 13, 14, 3, 5, 2},
}};

/// Majority-class F-scores published per task (6/5/4/3-class).
inline constexpr std::array<double, 4> kMajorityF = {0.162, 0.207, 0.280, 0.355};

}  // namespace ece::reference
