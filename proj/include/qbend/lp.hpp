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

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbend/tolerance.hpp"

namespace qbend::lp {

enum class Sense { Minimize, Maximize };
enum class Relation { LessEq, GreaterEq, Equal };
enum class LpStatus { Optimal, Infeasible, Unbounded };

struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalBreakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedForm : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double inf() { return std::numeric_limits<double>::infinity(); }

/// Dense LP in user form. Bounds may be infinite; matrix, objective and rhs
/// must be finite.
struct LinearProgram {
    Sense sense = Sense::Maximize;
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<Relation> relations;
    std::vector<double> rhs;
    std::vector<double> lower;  // default 0
    std::vector<double> upper;  // default +inf

    std::size_t num_rows() const { return rows.size(); }
    std::size_t num_cols() const { return objective.size(); }

    /// Convenience constructor: `ncols` variables with bounds [0, +inf).
    static LinearProgram with_cols(Sense sense, std::size_t ncols);

    void add_row(std::vector<double> coeffs, Relation rel, double rhs_value);

    /// Throws DimensionMismatch on shape errors or non-finite coefficients.
    void validate() const;
};

struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    std::vector<double> primal;  // one per variable (Optimal only)
    std::vector<double> dual;    // shadow prices, one per row (Optimal only)
    double objective = 0.0;
    // Infeasible: Farkas multipliers over the rows (sign follows the row
    // relation; certificates involving finite upper bounds are not expressible
    // here and callers relying on them must model the bound as a row).
    // Unbounded: improving primal ray, unit infinity-norm.
    std::vector<double> ray;
    int iterations = 0;
};

/// Two-phase revised simplex with a dense LU-factored basis (refactorized
/// every 50 pivots) and Bland's rule throughout. Deterministic for fixed
/// input.
LpSolution solve_lp(const LinearProgram& lp, const ToleranceSet& tol = {});

/// Dual of a subproblem-shaped LP. Accepts max/<= with x >= 0 (returning
/// min/>= with lambda >= 0) and the reverse, so dual_of(dual_of(lp)) is the
/// original up to permutation. Throws UnsupportedForm otherwise.
LinearProgram dual_of(const LinearProgram& lp);

}  // namespace qbend::lp
