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

// Ground truth for the enumerative master: rebuilds the regularized master
// as a tiny MILP over (z, s) and solves it with the validated brute-force
// path. Shares no code with solve_master_exact.

#pragma once

#include <vector>

#include "qbend/benders.hpp"
#include "qbend/model.hpp"

namespace qbend::testing {

struct MasterOracleResult {
    bool feasible = false;
    std::vector<std::uint8_t> z;
    double s = 0.0;
    double value = 0.0;  // i'z + s + rho * H(z, z_prev)
};

inline MasterOracleResult master_oracle(const qbend::benders::CutPool& pool,
                                        const qbend::model::MixedBinaryProgram& p, double rho,
                                        const std::vector<std::uint8_t>& z_prev, double s_cap) {
    using namespace qbend::model;
    ModelSource src;
    for (std::size_t j = 0; j < p.n_z; ++j) src.add_binary("z" + std::to_string(j));
    // free, split by compile: a huge finite lower bound would shift s and
    // wreck the arithmetic
    auto s_var = src.add_continuous("s", -lp::inf(), lp::inf());

    double constant = 0.0;
    for (std::size_t j = 0; j < p.n_z; ++j) {
        // i'z plus the linearized Hamming term rho*(z_j(1-2z'_j) + z'_j)
        src.add_objective_term(j, p.i_coeff[j] + rho * (1.0 - 2.0 * z_prev[j]));
        constant += rho * z_prev[j];
    }
    src.add_objective_term(s_var, 1.0);
    src.objective_constant = constant;

    auto cut_terms = [&](const std::vector<double>& dual) {
        // dual'(b - Az) = dual'b - sum_j (dual'A)_j z_j
        double rhs = 0.0;
        std::vector<std::pair<std::size_t, double>> terms;
        for (std::size_t r = 0; r < p.num_rows(); ++r) rhs += dual[r] * p.b[r];
        for (std::size_t j = 0; j < p.n_z; ++j) {
            double coeff = 0.0;
            for (std::size_t r = 0; r < p.num_rows(); ++r) coeff += dual[r] * p.A[r][j];
            terms.emplace_back(j, coeff);
        }
        return std::make_pair(terms, rhs);
    };
    for (const auto& c : pool.optimality) {
        if (!c.active) continue;
        auto [terms, rhs] = cut_terms(c.dual);
        terms.emplace_back(s_var, 1.0);  // s + (dual'A)z <= dual'b
        src.add_row(std::move(terms), lp::Relation::LessEq, rhs, "opt");
    }
    for (const auto& c : pool.feasibility) {
        if (!c.active) continue;
        auto [terms, rhs] = cut_terms(c.dual);
        src.add_row(std::move(terms), lp::Relation::LessEq, rhs, "feas");
    }
    // s is only capped while no optimality cut bounds it
    if (pool.active_optimality() == 0)
        src.add_row({{s_var, 1.0}}, lp::Relation::LessEq, s_cap, "cap");
    // redundant guards keep every binary referenced even with an empty pool
    for (std::size_t j = 0; j < p.n_z; ++j)
        src.add_row({{j, 1.0}}, lp::Relation::LessEq, 1.0, "guard");

    auto cm = compile(src);
    auto bf = brute_force_milp(cm.program, 20);
    MasterOracleResult out;
    if (bf.status != MilpStatus::Optimal) return out;
    out.feasible = true;
    out.z = bf.z;
    auto vals = cm.map.map_back(bf.z, bf.y);
    out.s = vals[p.n_z];
    out.value = cm.program.source_objective(bf.objective);
    return out;
}

}  // namespace qbend::testing
