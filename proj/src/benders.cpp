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

#include "qbend/benders.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <set>
#include <sstream>

#include "qbend/qubo.hpp"
#include "qbend/sampler.hpp"

namespace qbend::benders {

using model::MixedBinaryProgram;

namespace {

bool same_vector(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-9) return false;
    return true;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// value of cut v at z: v'(b - Az)
double cut_value(const MixedBinaryProgram& p, const std::vector<double>& v,
                 const std::vector<std::uint8_t>& z) {
    double s = dot(v, p.b);
    for (std::size_t r = 0; r < p.num_rows(); ++r) {
        if (v[r] == 0.0) continue;
        for (std::size_t j = 0; j < p.n_z; ++j)
            if (z[j]) s -= v[r] * p.A[r][j];
    }
    return s;
}

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

}  // namespace

void BendersConfig::validate() const {
    if (!(eps > 0.0)) throw model::InvalidModel("eps must be positive");
    if (R < 1) throw model::InvalidModel("R must be >= 1");
    if (max_iterations < 1) throw model::InvalidModel("max_iterations must be >= 1");
    for (double v : core_point_seed)
        if (v < 0.0 || v > 1.0) throw model::InvalidModel("core point seed outside [0,1]");
}

bool CutPool::add_optimality(std::vector<double> p, std::size_t iteration) {
    for (const auto& c : optimality)
        if (same_vector(c.dual, p)) return false;
    optimality.push_back({std::move(p), iteration, true});
    return true;
}

bool CutPool::add_feasibility(std::vector<double> r, std::size_t iteration,
                              const MixedBinaryProgram& program, const ToleranceSet& tol) {
    if (r.size() != program.num_rows()) throw model::InvalidModel("ray size mismatch");
    double scale = 1.0;
    for (double v : r) scale = std::max(scale, std::abs(v));
    for (double v : r)
        if (v < -tol.feas_tol * scale) throw model::InvalidModel("ray has a negative component");
    for (std::size_t j = 0; j < program.n_y; ++j) {
        double btr = 0.0, colscale = 1.0;
        for (std::size_t row = 0; row < program.num_rows(); ++row) {
            btr += program.B[row][j] * r[row];
            colscale = std::max(colscale, std::abs(program.B[row][j]) * std::abs(r[row]));
        }
        if (btr < -1e-6 * colscale) throw model::InvalidModel("ray outside the dual cone");
    }
    for (const auto& c : feasibility)
        if (same_vector(c.dual, r)) return false;
    feasibility.push_back({std::move(r), iteration, true});
    return true;
}

void CutPool::apply_window(std::size_t window, std::size_t current) {
    if (window == 0) return;
    for (auto& c : optimality) c.active = current - c.origin_iteration < window;
    for (auto& c : feasibility) c.active = current - c.origin_iteration < window;
}

std::size_t CutPool::active_optimality() const {
    std::size_t n = 0;
    for (const auto& c : optimality) n += c.active;
    return n;
}

std::size_t CutPool::active_feasibility() const {
    std::size_t n = 0;
    for (const auto& c : feasibility) n += c.active;
    return n;
}

CorePointState update_core_point(CorePointState state, const std::vector<std::uint8_t>& z_prev) {
    if (state.core.size() != z_prev.size()) throw model::InvalidModel("core point size mismatch");
    for (std::size_t j = 0; j < state.core.size(); ++j)
        state.core[j] = 0.5 * state.core[j] + 0.5 * static_cast<double>(z_prev[j]);
    state.history.emplace_back(z_prev);
    return state;
}

namespace {

// min lambda'(b - Az) s.t. B'lambda >= c, lambda >= 0, at possibly
// fractional z
DualOutcome dual_at(const MixedBinaryProgram& p, const std::vector<double>& z_frac,
                    const ToleranceSet& tol) {
    auto dual = lp::LinearProgram::with_cols(lp::Sense::Minimize, p.num_rows());
    for (std::size_t r = 0; r < p.num_rows(); ++r) {
        dual.objective[r] = p.b[r];
        for (std::size_t j = 0; j < p.n_z; ++j) dual.objective[r] -= p.A[r][j] * z_frac[j];
    }
    for (std::size_t j = 0; j < p.n_y; ++j) {
        std::vector<double> row(p.num_rows());
        for (std::size_t r = 0; r < p.num_rows(); ++r) row[r] = p.B[r][j];
        dual.add_row(std::move(row), lp::Relation::GreaterEq, p.c[j]);
    }
    auto sol = lp::solve_lp(dual, tol);
    DualOutcome out;
    switch (sol.status) {
        case lp::LpStatus::Optimal:
            out.kind = DualOutcome::Kind::ExtremePoint;
            out.dual = sol.primal;
            out.value = sol.objective;
            return out;
        case lp::LpStatus::Unbounded:
            out.kind = DualOutcome::Kind::ExtremeRay;
            out.dual = sol.ray;
            return out;
        case lp::LpStatus::Infeasible:
            throw DualInfeasible("dual subproblem infeasible: y direction unbounded");
    }
    throw DualInfeasible("unreachable");
}

}  // namespace

DualOutcome solve_dual_subproblem(const MixedBinaryProgram& p, const std::vector<std::uint8_t>& z,
                                  const ToleranceSet& tol) {
    std::vector<double> zf(z.begin(), z.end());
    return dual_at(p, zf, tol);
}

DualOutcome solve_pareto_subproblem(const MixedBinaryProgram& p, const CorePointState& core,
                                    const ToleranceSet& tol) {
    return dual_at(p, core.core, tol);
}

int acc_bits_for(const MixedBinaryProgram& p, int override_bits, const ToleranceSet& tol) {
    try {
        CutPool empty;
        return qubo::compute_bit_widths(p, empty, override_bits, 24, tol).acc;
    } catch (const qubo::UnboundedContinuousObjective& e) {
        throw model::InvalidModel(e.what());
    }
}

double s_cap_for(const MixedBinaryProgram& p, int override_bits, const ToleranceSet& tol) {
    return std::ldexp(1.0, acc_bits_for(p, override_bits, tol) + 1);
}

MasterResult solve_master_exact(const CutPool& pool, const MixedBinaryProgram& p,
                                const BendersConfig& cfg, const std::vector<std::uint8_t>& z_prev,
                                std::size_t want_top) {
    if (p.n_z > 20) throw model::TooManyBinaries("enumerative master supports n_z <= 20");
    if (z_prev.size() != p.n_z) throw model::InvalidModel("z_prev size mismatch");
    const double s_cap = s_cap_for(p, cfg.acc_bits_override, cfg.tol);

    std::vector<const Cut*> opts, feas;
    for (const auto& c : pool.optimality)
        if (c.active) opts.push_back(&c);
    for (const auto& c : pool.feasibility)
        if (c.active) feas.push_back(&c);

    // cut values are affine in z: base + sum_j step[j] z_j
    auto affine = [&](const Cut& c, double& base, std::vector<double>& step) {
        base = dot(c.dual, p.b);
        step.assign(p.n_z, 0.0);
        for (std::size_t r = 0; r < p.num_rows(); ++r)
            if (c.dual[r] != 0.0)
                for (std::size_t j = 0; j < p.n_z; ++j) step[j] -= c.dual[r] * p.A[r][j];
    };
    std::vector<double> vo(opts.size()), vf(feas.size());
    std::vector<std::vector<double>> so(opts.size()), sf(feas.size());
    for (std::size_t t = 0; t < opts.size(); ++t) affine(*opts[t], vo[t], so[t]);
    for (std::size_t k = 0; k < feas.size(); ++k) affine(*feas[k], vf[k], sf[k]);

    std::vector<std::uint8_t> z(p.n_z, 0);
    auto resync = [&] {
        for (std::size_t t = 0; t < opts.size(); ++t) vo[t] = cut_value(p, opts[t]->dual, z);
        for (std::size_t k = 0; k < feas.size(); ++k) vf[k] = cut_value(p, feas[k]->dual, z);
    };
    // the cap only stands in for "no optimality cut yet"; once cuts exist
    // their minimum is the exact value and capping it could push the bound
    // below a valid LB
    auto exact_s = [&](const std::vector<std::uint8_t>& zz) {
        if (opts.empty()) return s_cap;
        double s = std::numeric_limits<double>::infinity();
        for (const Cut* c : opts) s = std::min(s, cut_value(p, c->dual, zz));
        return s;
    };

    double iz = 0.0;
    int ham = 0;
    for (std::size_t j = 0; j < p.n_z; ++j) ham += z_prev[j] != 0;

    MasterResult res;
    bool found = false;
    double best_pert = -std::numeric_limits<double>::infinity();
    double best_unpert = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, std::vector<std::uint8_t>>> top;  // value desc, z lex asc

    auto exact_iz = [&](const std::vector<std::uint8_t>& zz) {
        double v = 0.0;
        for (std::size_t j = 0; j < p.n_z; ++j)
            if (zz[j]) v += p.i_coeff[j];
        return v;
    };

    auto consider = [&] {
        for (double v : vf)
            if (v < -1e-7) return;
        double s = opts.empty() ? s_cap : std::numeric_limits<double>::infinity();
        for (double v : vo) s = std::min(s, v);
        const double unpert = iz + s;
        const double pert = unpert + cfg.rho * ham;

        if (!found || pert > best_pert - 1e-9) {
            // near-best: settle with drift-free values
            const double s_ex = exact_s(z);
            const double pe = exact_iz(z) + s_ex + cfg.rho * ham;
            if (!found || pe > best_pert || (pe == best_pert && z < res.z)) {
                best_pert = pe;
                res.z = z;
                res.s = s_ex;
            }
        }
        if (!found || unpert > best_unpert - 1e-9) {
            const double u = exact_iz(z) + exact_s(z);
            if (!found || u > best_unpert || (u == best_unpert && z < res.z_bound)) {
                best_unpert = u;
                res.z_bound = z;
                res.ub = u;
            }
        }
        found = true;
        if (top.size() < want_top || unpert > top.back().first - 1e-9) {
            const double u = exact_iz(z) + exact_s(z);
            auto pos = std::lower_bound(
                top.begin(), top.end(), std::make_pair(u, z),
                [](const auto& a, const auto& b) {
                    if (a.first != b.first) return a.first > b.first;
                    return a.second < b.second;
                });
            top.insert(pos, {u, z});
            if (top.size() > want_top) top.pop_back();
        }
    };

    consider();
    const std::uint64_t total = p.n_z == 0 ? 1 : (1ull << p.n_z);
    for (std::uint64_t n = 1; n < total; ++n) {
        const std::size_t j = static_cast<std::size_t>(std::countr_zero(n));
        const double dir = z[j] ? -1.0 : 1.0;
        z[j] ^= 1u;
        iz += dir * p.i_coeff[j];
        ham += (z[j] == z_prev[j]) ? -1 : 1;
        for (std::size_t t = 0; t < opts.size(); ++t) vo[t] += dir * so[t][j];
        for (std::size_t k = 0; k < feas.size(); ++k) vf[k] += dir * sf[k][j];
        if ((n & 0xfffull) == 0) resync();
        consider();
    }
    if (!found) throw MasterInfeasible("feasibility cuts exclude every binary assignment");
    for (auto& [v, zz] : top) res.top.push_back(std::move(zz));
    return res;
}

std::string ConvergenceLog::to_csv() const {
    std::ostringstream out;
    out << "iter,lb,ub,gap,opt_cuts,feas_cuts,sp_status,master_backend,master_ms,sp_ms,"
           "best_energy\n";
    out.precision(17);
    for (const auto& r : rows)
        out << r.iter << ',' << r.lb << ',' << r.ub << ',' << r.gap << ',' << r.opt_cuts << ','
            << r.feas_cuts << ',' << r.sp_status << ',' << r.master_backend << ',' << r.master_ms
            << ',' << r.sp_ms << ',' << r.best_energy << '\n';
    return out.str();
}

RunResult run(const MixedBinaryProgram& p, const BendersConfig& cfg, Method method) {
    cfg.validate();
    p.validate();
    const double inf = std::numeric_limits<double>::infinity();

    RunResult result;
    result.log.record_timings = cfg.record_timings;

    if (p.n_z == 0) {
        auto sol = lp::solve_lp(model::subproblem_lp(p, {}), cfg.tol);
        if (sol.status == lp::LpStatus::Infeasible)
            throw MasterInfeasible("continuous problem infeasible");
        if (sol.status == lp::LpStatus::Unbounded)
            throw DualInfeasible("continuous problem unbounded");
        result.y = sol.primal;
        result.objective = sol.objective;
        result.converged = true;
        result.iterations = 1;
        result.log.rows.push_back({1, sol.objective, sol.objective, 0.0, 0, 0, "point", "exact",
                                   0.0, 0.0, 0.0});
        return result;
    }

    const double rho = method == Method::ConventionalBD ? 0.0 : cfg.rho;
    BendersConfig master_cfg = cfg;
    master_cfg.rho = rho;

    CutPool pool;
    CorePointState core;
    if (method == Method::Method1) {
        core.core = cfg.core_point_seed.empty() ? std::vector<double>(p.n_z, 0.5)
                                                : cfg.core_point_seed;
        if (core.core.size() != p.n_z) throw model::InvalidModel("core point seed size mismatch");
    }

    std::vector<std::uint8_t> z_prev(p.n_z, 0);
    std::vector<std::vector<std::uint8_t>> candidates = {z_prev};
    std::set<std::vector<std::uint8_t>> visited;
    double lb = -inf, ub = inf;
    std::vector<std::uint8_t> best_z;
    bool have_incumbent = false;

    const std::size_t want = method == Method::Method2 ? std::max<std::size_t>(cfg.R, 1) : 1;

    for (std::size_t iter = 1; iter <= cfg.max_iterations; ++iter) {
        IterationRecord rec;
        rec.iter = iter;

        const double sp_start = now_ms();
        std::vector<DualOutcome> outcomes(candidates.size());
        if (candidates.size() > 1) {
            std::vector<std::future<DualOutcome>> jobs;
            for (const auto& cand : candidates)
                jobs.push_back(std::async(std::launch::async, [&p, &cfg, &cand] {
                    return solve_dual_subproblem(p, cand, cfg.tol);
                }));
            for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = jobs[i].get();
        } else {
            for (std::size_t i = 0; i < candidates.size(); ++i)
                outcomes[i] = solve_dual_subproblem(p, candidates[i], cfg.tol);
        }

        std::string status;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            visited.insert(candidates[i]);
            if (!status.empty()) status += ';';
            if (outcomes[i].kind == DualOutcome::Kind::ExtremePoint) {
                status += "point";
                pool.add_optimality(outcomes[i].dual, iter);
                double cand_lb = outcomes[i].value;
                for (std::size_t j = 0; j < p.n_z; ++j)
                    if (candidates[i][j]) cand_lb += p.i_coeff[j];
                if (!have_incumbent || cand_lb > lb) {
                    lb = cand_lb;
                    best_z = candidates[i];
                    have_incumbent = true;
                }
            } else {
                status += "ray";
                pool.add_feasibility(outcomes[i].dual, iter, p, cfg.tol);
            }
        }
        if (method == Method::Method1) {
            auto pareto = solve_pareto_subproblem(p, core, cfg.tol);
            status += ";core-";
            if (pareto.kind == DualOutcome::Kind::ExtremePoint) {
                status += "point";
                pool.add_optimality(pareto.dual, iter);
            } else {
                status += "ray";
                pool.add_feasibility(pareto.dual, iter, p, cfg.tol);
            }
        }
        rec.sp_status = std::move(status);
        if (cfg.record_timings) rec.sp_ms = now_ms() - sp_start;

        pool.apply_window(cfg.cut_window, iter);

        const double master_start = now_ms();
        std::vector<std::vector<std::uint8_t>> next;
        if (cfg.master_backend == MasterBackendKind::Exact) {
            rec.master_backend = "exact";
            auto mres = solve_master_exact(pool, p, master_cfg, z_prev, want);
            // the capped empty-pool value is a placeholder, not a bound
            ub = pool.active_optimality() == 0 ? inf : mres.ub;
            // revisiting the perturbed argmax cannot add cuts; fall back to
            // assignments the pool has not seen yet
            std::vector<std::uint8_t> pick = mres.z;
            if (visited.count(pick)) {
                if (!visited.count(mres.z_bound)) {
                    pick = mres.z_bound;
                } else {
                    for (const auto& zz : mres.top)
                        if (!visited.count(zz)) {
                            pick = zz;
                            break;
                        }
                }
            }
            if (method == Method::Method2) {
                next = mres.top;
                if (next.empty()) next.push_back(pick);
            } else {
                next.push_back(pick);
            }
            z_prev = pick;
        } else {
            rec.master_backend = "qubo-sa";
            auto layout = qubo::compute_bit_widths(p, pool, cfg.acc_bits_override, 24, cfg.tol);
            auto q = qubo::compile_master_to_qubo(pool, p, master_cfg, z_prev, layout);
            sampler::AnnealSchedule sched;
            sched.reads = cfg.sa_reads;
            sched.sweeps = cfg.sa_sweeps;
            sched.seed = cfg.seed + iter;
            auto set = sampler::sample_sa(q, sched);
            rec.best_energy = set.samples.front().energy;
            auto cands = sampler::top_r_feasible(set, layout, pool, p, want);

            // the decoded slacks certify feasibility only to fixed-point
            // resolution; re-check the feasibility cuts exactly so a cut
            // already in the pool is never violated by a proposed candidate
            auto cuts_ok = [&](const std::vector<std::uint8_t>& zz) {
                for (const auto& c : pool.feasibility)
                    if (c.active && cut_value(p, c.dual, zz) < -1e-6) return false;
                return true;
            };
            double bound = -inf;
            for (const auto& d : cands) {
                if (!cuts_ok(d.z)) continue;
                double s = pool.active_optimality() == 0 ? layout.s_max() : inf;
                for (const auto& c : pool.optimality)
                    if (c.active) s = std::min(s, cut_value(p, c.dual, d.z));
                double v = s;
                for (std::size_t j = 0; j < p.n_z; ++j)
                    if (d.z[j]) v += p.i_coeff[j];
                bound = std::max(bound, v);
                next.emplace_back(d.z);
            }
            if (next.empty() && !cands.empty()) next.emplace_back(cands.front().z);
            if (!next.empty()) {
                // prefer a candidate whose subproblem can still add a cut
                for (auto& zz : next)
                    if (!visited.count(zz)) {
                        std::swap(zz, next.front());
                        break;
                    }
            }
            ub = pool.active_optimality() == 0 || bound == -inf ? inf : bound;
            if (next.empty()) next.push_back(z_prev);
            z_prev = next.front();
        }
        if (cfg.record_timings) rec.master_ms = now_ms() - master_start;

        if (method == Method::Method1) core = update_core_point(std::move(core), z_prev);

        rec.lb = lb;
        rec.ub = ub;
        rec.gap = ub - lb;
        rec.opt_cuts = pool.active_optimality();
        rec.feas_cuts = pool.active_feasibility();
        result.log.rows.push_back(std::move(rec));
        result.iterations = iter;

        if (std::abs(ub - lb) <= cfg.eps) {
            result.converged = true;
            break;
        }
        candidates = std::move(next);
    }

    if (!have_incumbent)
        throw IterationLimit("no feasible incumbent within the iteration limit");
    result.z = best_z;
    auto sp = lp::solve_lp(model::subproblem_lp(p, best_z), cfg.tol);
    if (sp.status == lp::LpStatus::Optimal) result.y = sp.primal;
    result.objective = lb;
    return result;
}

}  // namespace qbend::benders
