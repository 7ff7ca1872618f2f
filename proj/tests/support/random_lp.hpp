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

#pragma once

#include <random>

#include "qbend/lp.hpp"

namespace qbend::testing {

/// Random max-sense LP with <= rows, x >= 0 and integer coefficients in
/// [-9, 9]. The shape matches the oracle-equivalence property in the tests.
inline qbend::lp::LinearProgram random_lp(std::mt19937_64& rng, std::size_t max_rows = 10,
                                          std::size_t max_cols = 15) {
    using namespace qbend::lp;
    std::uniform_int_distribution<int> coeff(-9, 9);
    std::uniform_int_distribution<std::size_t> rows_d(1, max_rows), cols_d(1, max_cols);
    const std::size_t m = rows_d(rng), n = cols_d(rng);
    LinearProgram lp = LinearProgram::with_cols(Sense::Maximize, n);
    for (std::size_t j = 0; j < n; ++j) lp.objective[j] = coeff(rng);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(n);
        for (auto& v : row) v = coeff(rng);
        lp.add_row(std::move(row), Relation::LessEq, coeff(rng));
    }
    // Most instances get a bounding box so Optimal outcomes dominate the mix.
    std::uniform_int_distribution<int> pct(0, 99);
    if (pct(rng) < 70) {
        std::uniform_int_distribution<int> ub(1, 9);
        lp.add_row(std::vector<double>(n, 1.0), Relation::LessEq, ub(rng));
    }
    return lp;
}

}  // namespace qbend::testing
