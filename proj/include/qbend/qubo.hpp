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
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qbend/benders.hpp"
#include "qbend/model.hpp"

namespace qbend::qubo {

struct UnboundedContinuousObjective : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LayoutMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bit roles in a compiled master QUBO, in layout order.
enum class BitRole { Z, SPos, SDec, SNeg, OptSlack, FeasSlack };

struct BitInfo {
    BitRole role = BitRole::Z;
    std::size_t group = 0;  // z index, cut index; 0 for s groups
    int power = 0;          // exponent i: weight 2^i (SDec uses 2^-i)
    std::string name;       // "z3", "s_pos_2", "s_dec_0", "s_neg_1", "a1_0_4", "a2_1_0"
};

/// Fixed-point layout: s uses three groups of acc+1 bits each
/// (positive powers, decimal 2^-i, negative powers); every optimality cut
/// gets e1+1 nonnegative integer slack bits and every feasibility cut e2+1.
struct BitLayout {
    int acc = 1;
    int e1 = 1;
    int e2 = 1;
    std::size_t n_z = 0;
    std::size_t opt_cuts = 0;
    std::size_t feas_cuts = 0;
    std::vector<BitInfo> bits;
    bool clamped = false;  // true when any width hit the ceiling

    std::size_t dimension() const { return bits.size(); }
    double s_max() const;  // 2^{acc+1}
};

struct QuboProgram {
    std::size_t dimension = 0;
    /// upper-triangular keys only (i <= j); zero entries are not stored
    std::map<std::pair<std::size_t, std::size_t>, double> coeff;
    double offset = 0.0;
    BitLayout layout;
    double p1 = 0.0;
    double p2 = 0.0;

    void add(std::size_t i, std::size_t j, double v);  // accumulates, prunes zeros
    /// offset + sum Q[i,j] b_i b_j in ascending (i,j) key order
    double energy(const std::vector<std::uint8_t>& bits) const;
};

/// Widths per the discretization bounds: acc from one bounding LP over
/// By <= b, y >= 0; slack widths by interval arithmetic over z in [0,1]^n_z
/// and s in [-2^acc, 2^acc]. Widths clamp at `ceiling`.
BitLayout compute_bit_widths(const model::MixedBinaryProgram& p, const benders::CutPool& pool,
                             int acc_override = -1, int ceiling = 24,
                             const ToleranceSet& tol = {});

/// Minimization QUBO for the regularized master: energy =
/// -[i'z + s + rho*H(z, z_prev)] + sum_t P1 (p^t(b-Az) - s - a1_t)^2
/// + sum_k P2 (r^k(b-Az) - a2_k)^2 with bit-expanded s and slacks.
/// The slacks measure p^t(b-Az) - s and r^k(b-Az), both nonnegative at any
/// point satisfying the cuts, which is what their bit widths are sized for.
/// p1/p2 <= 0 selects the default P* = 2(sum|i_j| + s_max + |rho| n_z + 1).
QuboProgram compile_master_to_qubo(const benders::CutPool& pool,
                                   const model::MixedBinaryProgram& p,
                                   const benders::BendersConfig& cfg,
                                   const std::vector<std::uint8_t>& z_prev,
                                   const BitLayout& layout, double p1 = -1.0, double p2 = -1.0);

struct DecodedSample {
    std::vector<std::uint8_t> z;
    double s = 0.0;
    std::vector<double> opt_slacks;
    std::vector<double> feas_slacks;
    std::vector<double> opt_residuals;   // p^t(b-Az) - s - a1_t
    std::vector<double> feas_residuals;  // r^k(b-Az) - a2_k
    bool feasible = false;  // all residuals within a fixed-point half step
};

DecodedSample decode(const std::vector<std::uint8_t>& bits, const BitLayout& layout,
                     const benders::CutPool& pool, const model::MixedBinaryProgram& p);

/// JSON export: {dimension, offset, entries: [[i,j,coeff]...], layout, P1, P2}.
/// Lossless round-trip with the in-memory form.
std::string to_json_string(const QuboProgram& q);
QuboProgram qubo_from_json_string(const std::string& text);

}  // namespace qbend::qubo
