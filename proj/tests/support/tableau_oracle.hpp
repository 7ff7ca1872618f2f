// Copyright 2026 the qbend authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Naive full-tableau two-phase simplex, used only as an independent oracle in
// tests. Supports any relation mix with x >= 0 variables. Deliberately shares
// no code with the production engine.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "qbend/lp.hpp"

namespace qbend::testing {

enum class OracleStatus { Optimal, Infeasible, Unbounded };

struct OracleResult {
    OracleStatus status = OracleStatus::Optimal;
    double objective = 0.0;
    std::vector<double> primal;
};

namespace detail {

// Runs Bland-rule pivots on a full tableau `t` (rows x cols, last column is
// rhs, last row is the objective row). `basis` maps row -> basic column.
// Returns false when unbounded.
inline bool pivot_tableau(std::vector<std::vector<double>>& t, std::vector<std::size_t>& basis,
                          std::size_t ncols) {
    const std::size_t m = basis.size();
    for (;;) {
        std::size_t enter = SIZE_MAX;
        for (std::size_t j = 0; j < ncols; ++j) {
            if (t[m][j] < -1e-9) {
                enter = j;
                break;
            }
        }
        if (enter == SIZE_MAX) return true;
        std::size_t leave = SIZE_MAX;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][enter] > 1e-9) {
                double ratio = t[i].back() / t[i][enter];
                if (ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 && (leave == SIZE_MAX || basis[i] < basis[leave]))) {
                    best = ratio;
                    leave = i;
                }
            }
        }
        if (leave == SIZE_MAX) return false;
        const double piv = t[leave][enter];
        for (auto& v : t[leave]) v /= piv;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = t[i][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < t[i].size(); ++j) t[i][j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }
}

}  // namespace detail

inline OracleResult tableau_solve(const qbend::lp::LinearProgram& lp) {
    using qbend::lp::Relation;
    using qbend::lp::Sense;
    const std::size_t m = lp.num_rows();
    const std::size_t n = lp.num_cols();

    // Columns: structural | slack/surplus | artificial | rhs.
    std::size_t nslack = 0;
    for (auto r : lp.relations)
        if (r != Relation::Equal) ++nslack;
    const std::size_t nart = m;
    const std::size_t total = n + nslack + nart;

    std::vector<std::vector<double>> t(m + 1, std::vector<double>(total + 1, 0.0));
    std::vector<std::size_t> basis(m);
    std::size_t sl = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double flip = lp.rhs[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) t[i][j] = flip * lp.rows[i][j];
        if (lp.relations[i] != Relation::Equal) {
            t[i][n + sl] = flip * (lp.relations[i] == Relation::LessEq ? 1.0 : -1.0);
            ++sl;
        }
        t[i][n + nslack + i] = 1.0;
        t[i][total] = flip * lp.rhs[i];
        basis[i] = n + nslack + i;
    }

    // Phase 1 objective row: minimize sum of artificials; express in terms of
    // nonbasic columns by subtracting the artificial rows.
    for (std::size_t j = 0; j <= total; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += t[i][j];
        t[m][j] = (j >= n + nslack && j < total) ? 0.0 : -s;
    }
    if (!detail::pivot_tableau(t, basis, n + nslack)) return {OracleStatus::Unbounded, 0.0, {}};
    if (t[m][total] < -1e-7) return {OracleStatus::Infeasible, 0.0, {}};

    // Remove artificials still in the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n + nslack) continue;
        for (std::size_t j = 0; j < n + nslack; ++j) {
            if (std::abs(t[i][j]) > 1e-7) {
                const double piv = t[i][j];
                for (auto& v : t[i]) v /= piv;
                for (std::size_t k = 0; k <= m; ++k) {
                    if (k == i) continue;
                    const double f = t[k][j];
                    if (f == 0.0) continue;
                    for (std::size_t c = 0; c <= total; ++c) t[k][c] -= f * t[i][c];
                }
                basis[i] = j;
                break;
            }
        }
    }

    // Phase 2: internal min sense.
    const double sign = lp.sense == Sense::Maximize ? -1.0 : 1.0;
    for (std::size_t j = 0; j <= total; ++j) t[m][j] = 0.0;
    for (std::size_t j = 0; j < n; ++j) t[m][j] = sign * lp.objective[j];
    for (std::size_t i = 0; i < m; ++i) {
        const double f = t[m][basis[i]];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j <= total; ++j) t[m][j] -= f * t[i][j];
    }
    // Blank out artificial columns so they cannot re-enter.
    for (std::size_t j = n + nslack; j < total; ++j) t[m][j] = std::numeric_limits<double>::max() / 4;
    if (!detail::pivot_tableau(t, basis, n + nslack)) return {OracleStatus::Unbounded, 0.0, {}};

    OracleResult res;
    res.status = OracleStatus::Optimal;
    res.primal.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) res.primal[basis[i]] = t[i][total];
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * res.primal[j];
    res.objective = obj;
    return res;
}

}  // namespace qbend::testing
