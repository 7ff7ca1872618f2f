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
#include <stdexcept>
#include <string>
#include <vector>

#include "qbend/model.hpp"
#include "qbend/tolerance.hpp"

namespace qbend::benders {

struct DualInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MasterInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IterationLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One dual vector with its iteration of origin. Optimality cuts store an
/// extreme point p^t (cut: p'(b - Az) >= s); feasibility cuts store an
/// extreme ray r^k (cut: r'(b - Az) >= 0).
struct Cut {
    std::vector<double> dual;
    std::size_t origin_iteration = 0;
    bool active = true;
};

struct CutPool {
    std::vector<Cut> optimality;
    std::vector<Cut> feasibility;

    /// Both insertions deduplicate componentwise within 1e-9 and return
    /// whether the cut was new. Rays must lie in the dual cone of the
    /// subproblem (B' r >= -tol, r >= -tol) or InvalidModel is thrown.
    bool add_optimality(std::vector<double> p, std::size_t iteration);
    bool add_feasibility(std::vector<double> r, std::size_t iteration,
                         const model::MixedBinaryProgram& program, const ToleranceSet& tol = {});

    /// Deactivates cuts older than `window` iterations before `current`.
    /// window == 0 keeps everything.
    void apply_window(std::size_t window, std::size_t current);

    std::size_t active_optimality() const;
    std::size_t active_feasibility() const;
};

enum class Method { ConventionalBD, Method1, Method2 };
enum class MasterBackendKind { Exact, QuboSampler };

struct BendersConfig {
    double eps = 1e-3;
    std::size_t R = 1;                  // Method2 samples per outer iteration
    double rho = 1.0;                   // signed Hamming weight
    std::size_t max_iterations = 100;
    std::vector<double> core_point_seed;  // empty = 0.5 in every component
    MasterBackendKind master_backend = MasterBackendKind::Exact;
    std::size_t cut_window = 0;         // 0 = never remove cuts
    std::uint64_t seed = 0;             // sampler master seed
    int acc_bits_override = -1;         // -1 = derive from the program
    std::size_t sa_reads = 64;
    std::size_t sa_sweeps = 2000;
    bool record_timings = false;  // keeps runs byte-reproducible by default
    ToleranceSet tol;

    void validate() const;  // throws InvalidModel on bad fields
};

struct CorePointState {
    std::vector<double> core;                       // in [0,1]^{n_z}
    std::vector<std::vector<std::uint8_t>> history;  // master solutions seen
};

/// Affine recursion: core <- core/2 + z_prev/2. Appends z_prev to history.
CorePointState update_core_point(CorePointState state, const std::vector<std::uint8_t>& z_prev);

struct DualOutcome {
    enum class Kind { ExtremePoint, ExtremeRay } kind = Kind::ExtremePoint;
    std::vector<double> dual;  // lambda or ray, one entry per program row
    double value = 0.0;        // x(z) for extreme points
};

/// Dual subproblem at fixed z: min lambda'(b - Az) s.t. B'lambda >= c,
/// lambda >= 0. Optimal -> ExtremePoint with x(z); unbounded -> ExtremeRay.
/// DualInfeasible means the primal subproblem is unbounded in y.
DualOutcome solve_dual_subproblem(const model::MixedBinaryProgram& p,
                                  const std::vector<std::uint8_t>& z,
                                  const ToleranceSet& tol = {});

/// Same dual problem evaluated at the fractional core point.
DualOutcome solve_pareto_subproblem(const model::MixedBinaryProgram& p,
                                    const CorePointState& core, const ToleranceSet& tol = {});

struct MasterResult {
    /// argmax of i'z + s + rho*H(z, z_prev), lexicographic smallest on ties
    std::vector<std::uint8_t> z;
    double s = 0.0;  // optimal s at `z`
    /// argmax and bound without the Hamming term; ub = i'z_bound + s(z_bound)
    std::vector<std::uint8_t> z_bound;
    double ub = 0.0;
    /// best R distinct feasible z by unperturbed value, descending
    std::vector<std::vector<std::uint8_t>> top;
};

/// Enumerative master solve over z in {0,1}^{n_z} (n_z <= 20). For fixed z,
/// feasibility cuts are pass/fail and s = min over active optimality cuts of
/// p'(b - Az), capped at s_max when no optimality cut is active.
MasterResult solve_master_exact(const CutPool& pool, const model::MixedBinaryProgram& p,
                                const BendersConfig& cfg, const std::vector<std::uint8_t>& z_prev,
                                std::size_t want_top = 1);

/// Cap on s before any optimality cut exists: 2^{acc+1} with
/// acc = max(1, ceil(log2(1 + max_y c'y over By <= b, y >= 0))).
/// Throws InvalidModel when that bounding LP is unbounded.
int acc_bits_for(const model::MixedBinaryProgram& p, int override_bits = -1,
                 const ToleranceSet& tol = {});
double s_cap_for(const model::MixedBinaryProgram& p, int override_bits = -1,
                 const ToleranceSet& tol = {});

struct IterationRecord {
    std::size_t iter = 0;
    double lb = 0.0;
    double ub = 0.0;
    double gap = 0.0;
    std::size_t opt_cuts = 0;
    std::size_t feas_cuts = 0;
    std::string sp_status;        // "point", "ray", or comma-free multi tag
    std::string master_backend;   // "exact" or "qubo-sa"
    double master_ms = 0.0;
    double sp_ms = 0.0;
    double best_energy = 0.0;     // sampler only; 0 for exact backend
};

struct ConvergenceLog {
    std::vector<IterationRecord> rows;
    bool record_timings = false;  // when false, *_ms fields stay 0

    std::string to_csv() const;
};

struct RunResult {
    std::vector<std::uint8_t> z;
    std::vector<double> y;
    double objective = 0.0;  // i'z* + c'y* in the compiled (max) sense
    bool converged = false;
    std::size_t iterations = 0;
    ConvergenceLog log;
};

/// Full decomposition loop. ConventionalBD is Method1 with rho = 0, no
/// Pareto subproblem and no core point. Method1 adds both the cut at z and
/// the Pareto cut at the core point each iteration. Method2 draws the best
/// R master candidates per iteration and cuts at each.
RunResult run(const model::MixedBinaryProgram& p, const BendersConfig& cfg, Method method);

}  // namespace qbend::benders
