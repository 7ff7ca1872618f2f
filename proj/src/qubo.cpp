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

#include "qbend/qubo.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace qbend::qubo {

using benders::Cut;
using benders::CutPool;
using model::MixedBinaryProgram;

double BitLayout::s_max() const { return std::ldexp(1.0, acc + 1); }

void QuboProgram::add(std::size_t i, std::size_t j, double v) {
    if (v == 0.0) return;
    if (i > j) std::swap(i, j);
    auto key = std::make_pair(i, j);
    auto it = coeff.find(key);
    if (it == coeff.end()) {
        coeff.emplace(key, v);
        return;
    }
    it->second += v;
    if (it->second == 0.0) coeff.erase(it);
}

double QuboProgram::energy(const std::vector<std::uint8_t>& bits) const {
    double e = offset;
    for (const auto& [key, v] : coeff)
        if (bits[key.first] && bits[key.second]) e += v;
    return e;
}

namespace {

std::vector<const Cut*> active_cuts(const std::vector<Cut>& cuts) {
    std::vector<const Cut*> out;
    for (const auto& c : cuts)
        if (c.active) out.push_back(&c);
    return out;
}

// constant and per-z coefficients of v'(b - Az)
void cut_affine(const MixedBinaryProgram& p, const std::vector<double>& v, double& constant,
                std::vector<double>& zc) {
    constant = 0.0;
    for (std::size_t r = 0; r < p.num_rows(); ++r) constant += v[r] * p.b[r];
    zc.assign(p.n_z, 0.0);
    for (std::size_t r = 0; r < p.num_rows(); ++r)
        for (std::size_t j = 0; j < p.n_z; ++j) zc[j] -= v[r] * p.A[r][j];
}

int width_for(double bound, int ceiling, bool& clamped) {
    int w = 1;
    if (bound > 1.0) w = std::max(1, static_cast<int>(std::ceil(std::log2(bound))));
    if (w > ceiling) {
        w = ceiling;
        clamped = true;
    }
    return w;
}

}  // namespace

BitLayout compute_bit_widths(const MixedBinaryProgram& p, const CutPool& pool, int acc_override,
                             int ceiling, const ToleranceSet& tol) {
    BitLayout layout;
    layout.n_z = p.n_z;

    if (acc_override > 0) {
        layout.acc = std::min(acc_override, ceiling);
        layout.clamped = acc_override > ceiling;
    } else {
        // max_y c'y over By <= b, y >= 0, ignoring the binary columns
        double max_cy = 0.0;
        if (p.n_y > 0) {
            auto bound = lp::LinearProgram::with_cols(lp::Sense::Maximize, p.n_y);
            bound.objective = p.c;
            for (std::size_t r = 0; r < p.num_rows(); ++r)
                bound.add_row(p.B[r], lp::Relation::LessEq, p.b[r]);
            auto sol = lp::solve_lp(bound, tol);
            if (sol.status == lp::LpStatus::Unbounded)
                throw UnboundedContinuousObjective(
                    "continuous objective has no finite maximum; add explicit bounds");
            if (sol.status == lp::LpStatus::Optimal) max_cy = std::max(0.0, sol.objective);
        }
        layout.acc = width_for(1.0 + max_cy, ceiling, layout.clamped);
    }

    const double s_hi = std::ldexp(1.0, layout.acc);
    const auto opts = active_cuts(pool.optimality);
    const auto feas = active_cuts(pool.feasibility);
    layout.opt_cuts = opts.size();
    layout.feas_cuts = feas.size();

    // interval bounds over z in [0,1]^n_z, s in [-2^acc, 2^acc]
    double m1 = 0.0, m2 = 0.0;
    for (const Cut* c : opts) {
        double constant;
        std::vector<double> zc;
        cut_affine(p, c->dual, constant, zc);
        double hi = constant + s_hi;
        for (double v : zc) hi += std::max(0.0, v);
        m1 = std::max(m1, hi);
    }
    for (const Cut* c : feas) {
        double constant;
        std::vector<double> zc;
        cut_affine(p, c->dual, constant, zc);
        double hi = constant;
        for (double v : zc) hi += std::max(0.0, v);
        m2 = std::max(m2, hi);
    }
    layout.e1 = width_for(m1, ceiling, layout.clamped);
    layout.e2 = width_for(m2, ceiling, layout.clamped);

    auto push = [&](BitRole role, std::size_t group, int power, std::string name) {
        layout.bits.push_back({role, group, power, std::move(name)});
    };
    for (std::size_t j = 0; j < p.n_z; ++j)
        push(BitRole::Z, j, 0, p.names.empty() ? "z" + std::to_string(j) : p.names[j]);
    for (int i = 0; i <= layout.acc; ++i) push(BitRole::SPos, 0, i, "s_pos_" + std::to_string(i));
    for (int i = 0; i <= layout.acc; ++i) push(BitRole::SDec, 0, i, "s_dec_" + std::to_string(i));
    for (int i = 0; i <= layout.acc; ++i) push(BitRole::SNeg, 0, i, "s_neg_" + std::to_string(i));
    for (std::size_t t = 0; t < opts.size(); ++t)
        for (int i = 0; i <= layout.e1; ++i)
            push(BitRole::OptSlack, t, i, "a1_" + std::to_string(t) + "_" + std::to_string(i));
    for (std::size_t k = 0; k < feas.size(); ++k)
        for (int i = 0; i <= layout.e2; ++i)
            push(BitRole::FeasSlack, k, i, "a2_" + std::to_string(k) + "_" + std::to_string(i));
    return layout;
}

namespace {

// signed weight of a bit inside its group's expansion; 0 for z bits
double bit_weight(const BitInfo& info) {
    switch (info.role) {
        case BitRole::SPos: return std::ldexp(1.0, info.power);
        case BitRole::SDec: return std::ldexp(1.0, -info.power);
        case BitRole::SNeg: return -std::ldexp(1.0, info.power);
        case BitRole::OptSlack:
        case BitRole::FeasSlack: return std::ldexp(1.0, info.power);
        case BitRole::Z: return 0.0;
    }
    return 0.0;
}

struct AffineExpr {
    double constant = 0.0;
    std::vector<std::pair<std::size_t, double>> terms;  // (bit index, weight)
};

void add_square(QuboProgram& q, const AffineExpr& e, double penalty) {
    q.offset += penalty * e.constant * e.constant;
    for (std::size_t a = 0; a < e.terms.size(); ++a) {
        const auto& [ia, wa] = e.terms[a];
        // b^2 = b folds the diagonal into the linear coefficient
        q.add(ia, ia, penalty * wa * (2.0 * e.constant + wa));
        for (std::size_t bdx = a + 1; bdx < e.terms.size(); ++bdx) {
            const auto& [ib, wb] = e.terms[bdx];
            q.add(ia, ib, penalty * 2.0 * wa * wb);
        }
    }
}

}  // namespace

QuboProgram compile_master_to_qubo(const CutPool& pool, const MixedBinaryProgram& p,
                                   const benders::BendersConfig& cfg,
                                   const std::vector<std::uint8_t>& z_prev,
                                   const BitLayout& layout, double p1, double p2) {
    const auto opts = active_cuts(pool.optimality);
    const auto feas = active_cuts(pool.feasibility);
    if (opts.size() != layout.opt_cuts || feas.size() != layout.feas_cuts ||
        layout.n_z != p.n_z)
        throw LayoutMismatch("bit layout does not match the cut pool");
    if (z_prev.size() != p.n_z) throw LayoutMismatch("z_prev size mismatch");

    QuboProgram q;
    q.dimension = layout.dimension();
    q.layout = layout;
    double sum_abs_i = 0.0;
    for (double v : p.i_coeff) sum_abs_i += std::abs(v);
    const double pstar =
        2.0 * (sum_abs_i + layout.s_max() + std::abs(cfg.rho) * static_cast<double>(p.n_z) + 1.0);
    q.p1 = p1 > 0.0 ? p1 : pstar;
    q.p2 = p2 > 0.0 ? p2 : pstar;

    // -[i'z + s + rho * H(z, z_prev)], H = sum z_j (1 - 2 z'_j) + z'_j
    for (std::size_t b = 0; b < layout.bits.size(); ++b) {
        const auto& info = layout.bits[b];
        if (info.role == BitRole::Z) {
            const double zp = z_prev[info.group];
            q.add(b, b, -(p.i_coeff[info.group] + cfg.rho * (1.0 - 2.0 * zp)));
        } else if (info.role == BitRole::SPos || info.role == BitRole::SDec ||
                   info.role == BitRole::SNeg) {
            q.add(b, b, -bit_weight(info));
        }
    }
    for (std::size_t j = 0; j < p.n_z; ++j) q.offset -= cfg.rho * z_prev[j];

    // index helpers for the penalty expressions
    std::vector<std::size_t> zbit(p.n_z);
    std::vector<std::pair<std::size_t, double>> sbits;
    std::vector<std::vector<std::size_t>> a1(opts.size()), a2(feas.size());
    for (std::size_t b = 0; b < layout.bits.size(); ++b) {
        const auto& info = layout.bits[b];
        switch (info.role) {
            case BitRole::Z: zbit[info.group] = b; break;
            case BitRole::SPos:
            case BitRole::SDec:
            case BitRole::SNeg: sbits.emplace_back(b, bit_weight(info)); break;
            case BitRole::OptSlack: a1[info.group].push_back(b); break;
            case BitRole::FeasSlack: a2[info.group].push_back(b); break;
        }
    }

    for (std::size_t t = 0; t < opts.size(); ++t) {
        // p^t(b - Az) - s - a1_t
        AffineExpr e;
        std::vector<double> zc;
        cut_affine(p, opts[t]->dual, e.constant, zc);
        for (std::size_t j = 0; j < p.n_z; ++j)
            if (zc[j] != 0.0) e.terms.emplace_back(zbit[j], zc[j]);
        for (const auto& [b, w] : sbits) e.terms.emplace_back(b, -w);
        for (std::size_t b : a1[t]) e.terms.emplace_back(b, -bit_weight(layout.bits[b]));
        add_square(q, e, q.p1);
    }
    for (std::size_t k = 0; k < feas.size(); ++k) {
        // r^k(b - Az) - a2_k
        AffineExpr e;
        std::vector<double> zc;
        cut_affine(p, feas[k]->dual, e.constant, zc);
        for (std::size_t j = 0; j < p.n_z; ++j)
            if (zc[j] != 0.0) e.terms.emplace_back(zbit[j], zc[j]);
        for (std::size_t b : a2[k]) e.terms.emplace_back(b, -bit_weight(layout.bits[b]));
        add_square(q, e, q.p2);
    }
    return q;
}

DecodedSample decode(const std::vector<std::uint8_t>& bits, const BitLayout& layout,
                     const CutPool& pool, const MixedBinaryProgram& p) {
    if (bits.size() != layout.dimension())
        throw LayoutMismatch("sample length does not match layout dimension");
    DecodedSample d;
    d.z.assign(layout.n_z, 0);
    d.opt_slacks.assign(layout.opt_cuts, 0.0);
    d.feas_slacks.assign(layout.feas_cuts, 0.0);
    for (std::size_t b = 0; b < bits.size(); ++b) {
        if (!bits[b]) continue;
        const auto& info = layout.bits[b];
        switch (info.role) {
            case BitRole::Z: d.z[info.group] = 1; break;
            case BitRole::SPos:
            case BitRole::SDec:
            case BitRole::SNeg: d.s += bit_weight(info); break;
            case BitRole::OptSlack: d.opt_slacks[info.group] += bit_weight(info); break;
            case BitRole::FeasSlack: d.feas_slacks[info.group] += bit_weight(info); break;
        }
    }

    const auto opts = active_cuts(pool.optimality);
    const auto feas = active_cuts(pool.feasibility);
    if (opts.size() != layout.opt_cuts || feas.size() != layout.feas_cuts)
        throw LayoutMismatch("cut pool does not match layout");
    const double half_s = std::ldexp(1.0, -(layout.acc + 1));
    d.feasible = true;
    for (std::size_t t = 0; t < opts.size(); ++t) {
        double constant;
        std::vector<double> zc;
        cut_affine(p, opts[t]->dual, constant, zc);
        for (std::size_t j = 0; j < p.n_z; ++j) constant += zc[j] * d.z[j];
        d.opt_residuals.push_back(constant - d.s - d.opt_slacks[t]);
        if (std::abs(d.opt_residuals.back()) > half_s + 1e-9) d.feasible = false;
    }
    for (std::size_t k = 0; k < feas.size(); ++k) {
        double constant;
        std::vector<double> zc;
        cut_affine(p, feas[k]->dual, constant, zc);
        for (std::size_t j = 0; j < p.n_z; ++j) constant += zc[j] * d.z[j];
        d.feas_residuals.push_back(constant - d.feas_slacks[k]);
        // integer slack group: half step is 1/2
        if (std::abs(d.feas_residuals.back()) > 0.5 + 1e-9) d.feasible = false;
    }
    return d;
}

namespace {

const char* role_name(BitRole r) {
    switch (r) {
        case BitRole::Z: return "z";
        case BitRole::SPos: return "s_pos";
        case BitRole::SDec: return "s_dec";
        case BitRole::SNeg: return "s_neg";
        case BitRole::OptSlack: return "a1";
        case BitRole::FeasSlack: return "a2";
    }
    return "z";
}

BitRole role_from(const std::string& s) {
    if (s == "z") return BitRole::Z;
    if (s == "s_pos") return BitRole::SPos;
    if (s == "s_dec") return BitRole::SDec;
    if (s == "s_neg") return BitRole::SNeg;
    if (s == "a1") return BitRole::OptSlack;
    if (s == "a2") return BitRole::FeasSlack;
    throw model::InvalidModel("unknown bit role: " + s);
}

}  // namespace

std::string to_json_string(const QuboProgram& q) {
    nlohmann::ordered_json j;
    j["dimension"] = q.dimension;
    j["offset"] = q.offset;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& [key, v] : q.coeff)
        entries.push_back({key.first, key.second, v});
    j["entries"] = std::move(entries);
    nlohmann::ordered_json layout;
    layout["acc"] = q.layout.acc;
    layout["e1"] = q.layout.e1;
    layout["e2"] = q.layout.e2;
    layout["n_z"] = q.layout.n_z;
    layout["opt_cuts"] = q.layout.opt_cuts;
    layout["feas_cuts"] = q.layout.feas_cuts;
    layout["clamped"] = q.layout.clamped;
    auto bits = nlohmann::ordered_json::array();
    for (const auto& b : q.layout.bits)
        bits.push_back({{"role", role_name(b.role)},
                        {"group", b.group},
                        {"power", b.power},
                        {"name", b.name}});
    layout["bits"] = std::move(bits);
    j["layout"] = std::move(layout);
    j["P1"] = q.p1;
    j["P2"] = q.p2;
    return j.dump(2) + "\n";
}

QuboProgram qubo_from_json_string(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    QuboProgram q;
    q.dimension = j.at("dimension").get<std::size_t>();
    q.offset = j.at("offset").get<double>();
    for (const auto& e : j.at("entries"))
        q.coeff[{e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>()}] = e.at(2).get<double>();
    const auto& jl = j.at("layout");
    q.layout.acc = jl.at("acc").get<int>();
    q.layout.e1 = jl.at("e1").get<int>();
    q.layout.e2 = jl.at("e2").get<int>();
    q.layout.n_z = jl.at("n_z").get<std::size_t>();
    q.layout.opt_cuts = jl.at("opt_cuts").get<std::size_t>();
    q.layout.feas_cuts = jl.at("feas_cuts").get<std::size_t>();
    q.layout.clamped = jl.at("clamped").get<bool>();
    for (const auto& b : jl.at("bits"))
        q.layout.bits.push_back({role_from(b.at("role").get<std::string>()),
                                 b.at("group").get<std::size_t>(), b.at("power").get<int>(),
                                 b.at("name").get<std::string>()});
    q.p1 = j.at("P1").get<double>();
    q.p2 = j.at("P2").get<double>();
    return q;
}

}  // namespace qbend::qubo
