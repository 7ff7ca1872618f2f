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

// Ground truth on the UN-normalized source form: enumerates binaries directly
// on the ModelSource and solves the remaining LP with the original relations
// and bounds. Independent of model::compile.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qbend/lp.hpp"
#include "qbend/model.hpp"

namespace qbend::testing {

struct RawOptimum {
    bool feasible = false;
    double objective = 0.0;  // in the source sense, including the constant
    std::vector<double> variables;
};

inline RawOptimum raw_brute_force(const qbend::model::ModelSource& src) {
    using namespace qbend::lp;
    using qbend::model::VarKind;
    std::vector<std::size_t> bins;
    for (std::size_t v = 0; v < src.variables.size(); ++v)
        if (src.variables[v].kind == VarKind::Binary) bins.push_back(v);

    // The continuous LP keeps source bounds/relations; binary columns are
    // substituted into the rhs.
    std::vector<std::size_t> cont;
    std::vector<std::size_t> cont_col(src.variables.size(), SIZE_MAX);
    for (std::size_t v = 0; v < src.variables.size(); ++v)
        if (src.variables[v].kind == VarKind::Continuous) {
            cont_col[v] = cont.size();
            cont.push_back(v);
        }

    RawOptimum best;
    const double better = src.sense == Sense::Maximize ? 1.0 : -1.0;
    for (std::uint64_t mask = 0; mask < (1ull << bins.size()); ++mask) {
        std::vector<double> zval(src.variables.size(), 0.0);
        for (std::size_t k = 0; k < bins.size(); ++k) zval[bins[k]] = (mask >> k) & 1u;

        LinearProgram sub = LinearProgram::with_cols(src.sense, cont.size());
        double obj_const = src.objective_constant;
        for (std::size_t k = 0; k < cont.size(); ++k) {
            sub.lower[k] = src.variables[cont[k]].lower;
            sub.upper[k] = src.variables[cont[k]].upper;
        }
        for (const auto& [v, coeff] : src.objective) {
            if (cont_col[v] != SIZE_MAX)
                sub.objective[cont_col[v]] += coeff;
            else
                obj_const += coeff * zval[v];
        }
        for (const auto& row : src.rows) {
            std::vector<double> r(cont.size(), 0.0);
            double rhs = row.rhs;
            for (const auto& [v, coeff] : row.terms) {
                if (cont_col[v] != SIZE_MAX)
                    r[cont_col[v]] += coeff;
                else
                    rhs -= coeff * zval[v];
            }
            sub.add_row(std::move(r), row.relation, rhs);
        }
        auto sol = solve_lp(sub);
        if (sol.status != LpStatus::Optimal) continue;
        const double obj = sol.objective + obj_const;
        if (!best.feasible || better * obj > better * best.objective + 1e-9) {
            best.feasible = true;
            best.objective = obj;
            best.variables = zval;
            for (std::size_t k = 0; k < cont.size(); ++k) best.variables[cont[k]] = sol.primal[k];
        }
    }
    return best;
}

}  // namespace qbend::testing
