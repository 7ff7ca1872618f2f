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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qbend/lp.hpp"
#include "qbend/tolerance.hpp"

namespace qbend::model {

struct NonlinearTerm : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnboundedFreeVariable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooManyBinaries : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidModel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class VarKind { Binary, Continuous };

struct SourceVariable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = lp::inf();
};

/// Sparse linear row in user form. `products` records bilinear terms the
/// builders could not linearize; compile rejects them.
struct SourceRow {
    std::vector<std::pair<std::size_t, double>> terms;
    std::vector<std::pair<std::size_t, std::size_t>> products;
    lp::Relation relation = lp::Relation::LessEq;
    double rhs = 0.0;
    std::string tag;  // provenance, e.g. the benchmark equation that produced it
};

struct ModelSource {
    lp::Sense sense = lp::Sense::Maximize;
    std::vector<SourceVariable> variables;
    std::vector<std::pair<std::size_t, double>> objective;
    double objective_constant = 0.0;
    std::vector<SourceRow> rows;

    std::size_t add_binary(std::string name);
    std::size_t add_continuous(std::string name, double lower = 0.0, double upper = lp::inf());
    void add_row(std::vector<std::pair<std::size_t, double>> terms, lp::Relation rel, double rhs,
                 std::string tag);
    void add_objective_term(std::size_t var, double coeff) { objective.emplace_back(var, coeff); }
};

/// Normalized max-sense program: all rows <=, continuous variables >= 0.
struct MixedBinaryProgram {
    std::size_t n_z = 0;
    std::size_t n_y = 0;
    std::vector<double> i_coeff;             // binary objective, size n_z
    std::vector<double> c;                   // continuous objective, size n_y
    std::vector<std::vector<double>> A;      // rows x n_z
    std::vector<std::vector<double>> B;      // rows x n_y
    std::vector<double> b;
    std::vector<std::string> names;          // n_z binary names, then n_y column names
    // Reporting hooks: source objective = objective_sign * compiled + offset.
    double objective_sign = 1.0;
    double objective_offset = 0.0;

    std::size_t num_rows() const { return b.size(); }
    void validate() const;  // throws InvalidModel on broken invariants

    double source_objective(double compiled) const {
        return objective_sign * compiled + objective_offset;
    }
};

/// How compiled columns map back to source variables.
struct SolutionMap {
    struct ColMap {
        enum class Kind { Binary, Shifted, Negated, Split } kind;
        std::size_t col0 = 0;
        std::size_t col1 = 0;  // Split only
        double shift = 0.0;
    };
    std::vector<ColMap> per_variable;

    /// Reconstructs source-variable values from a compiled (z, y) pair.
    std::vector<double> map_back(const std::vector<std::uint8_t>& z,
                                 const std::vector<double>& y) const;
};

struct CompiledModel {
    MixedBinaryProgram program;
    SolutionMap map;
};

/// Normalizes a ModelSource into form compatible with the decomposition
/// engine: equalities split into <= pairs, >= rows negated, free continuous
/// variables split, finite lower bounds shifted to zero.
CompiledModel compile(const ModelSource& source);

/// Primal subproblem at fixed z: max c'y s.t. B y <= b - A z, y >= 0.
/// The i'z constant lives with the caller.
lp::LinearProgram subproblem_lp(const MixedBinaryProgram& p, const std::vector<std::uint8_t>& z);

enum class MilpStatus { Optimal, Infeasible, Unbounded };

struct BruteForceResult {
    MilpStatus status = MilpStatus::Infeasible;
    std::vector<std::uint8_t> z;
    std::vector<double> y;
    double objective = 0.0;
};

/// Exhaustive ground-truth MILP solve: enumerates binary assignments and
/// solves the continuous LP at each feasible one. `fixed` pins selected
/// binaries (-1 = free); the free count must not exceed `limit`.
/// Ties are broken by lexicographically smallest z, independent of the
/// thread schedule.
BruteForceResult brute_force_milp(const MixedBinaryProgram& p, int limit = 16,
                                  const std::vector<int>& fixed = {},
                                  const ToleranceSet& tol = {});

/// Model interchange file (JSON). Round-trips all program fields losslessly.
std::string to_json_string(const MixedBinaryProgram& p);
MixedBinaryProgram program_from_json_string(const std::string& text);
void save_model(const MixedBinaryProgram& p, const std::string& path);
MixedBinaryProgram load_model(const std::string& path);

}  // namespace qbend::model
