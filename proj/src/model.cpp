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

#include "qbend/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <thread>

#include <json.hpp>

namespace qbend::model {

using lp::Relation;
using lp::Sense;

std::size_t ModelSource::add_binary(std::string name) {
    variables.push_back({std::move(name), VarKind::Binary, 0.0, 1.0});
    return variables.size() - 1;
}

std::size_t ModelSource::add_continuous(std::string name, double lower, double upper) {
    variables.push_back({std::move(name), VarKind::Continuous, lower, upper});
    return variables.size() - 1;
}

void ModelSource::add_row(std::vector<std::pair<std::size_t, double>> terms, Relation rel,
                          double rhs, std::string tag) {
    if (tag.empty()) throw InvalidModel("every source row needs a provenance tag");
    rows.push_back({std::move(terms), {}, rel, rhs, std::move(tag)});
}

void MixedBinaryProgram::validate() const {
    if (i_coeff.size() != n_z || c.size() != n_y)
        throw InvalidModel("objective vector sizes disagree with n_z/n_y");
    if (A.size() != b.size() || B.size() != b.size())
        throw InvalidModel("A/B row count disagrees with rhs length");
    for (const auto& r : A)
        if (r.size() != n_z) throw InvalidModel("A row width != n_z");
    for (const auto& r : B)
        if (r.size() != n_y) throw InvalidModel("B row width != n_y");
    if (!names.empty() && names.size() != n_z + n_y)
        throw InvalidModel("name table size mismatch");
    for (std::size_t j = 0; j < n_z; ++j) {
        bool used = i_coeff[j] != 0.0;
        for (const auto& r : A) used = used || r[j] != 0.0;
        if (!used)
            throw InvalidModel("binary '" + (names.empty() ? std::to_string(j) : names[j]) +
                               "' appears in neither the objective nor any constraint");
    }
}

std::vector<double> SolutionMap::map_back(const std::vector<std::uint8_t>& z,
                                          const std::vector<double>& y) const {
    std::vector<double> out(per_variable.size(), 0.0);
    for (std::size_t v = 0; v < per_variable.size(); ++v) {
        const ColMap& cm = per_variable[v];
        switch (cm.kind) {
            case ColMap::Kind::Binary: out[v] = static_cast<double>(z.at(cm.col0)); break;
            case ColMap::Kind::Shifted: out[v] = y.at(cm.col0) + cm.shift; break;
            case ColMap::Kind::Negated: out[v] = cm.shift - y.at(cm.col0); break;
            case ColMap::Kind::Split: out[v] = y.at(cm.col0) - y.at(cm.col1); break;
        }
    }
    return out;
}

CompiledModel compile(const ModelSource& source) {
    const std::size_t nv = source.variables.size();
    for (const auto& row : source.rows)
        if (!row.products.empty())
            throw NonlinearTerm("row '" + row.tag +
                                "' contains a variable product; pre-linearize it");

    // Which variables appear in at least one row.
    std::vector<bool> in_rows(nv, false);
    for (const auto& row : source.rows)
        for (const auto& [v, coeff] : row.terms)
            if (coeff != 0.0) in_rows.at(v) = true;

    CompiledModel out;
    MixedBinaryProgram& p = out.program;
    SolutionMap& map = out.map;
    map.per_variable.resize(nv);

    // Dense objective over source variables.
    std::vector<double> obj(nv, 0.0);
    for (const auto& [v, coeff] : source.objective) obj.at(v) += coeff;
    const double sign = source.sense == Sense::Maximize ? 1.0 : -1.0;
    p.objective_sign = sign;
    p.objective_offset = source.objective_constant;

    // Assign compiled columns. Binaries first (z order = declaration order).
    struct BoundRow {
        std::size_t ycol;
        double rhs;
        std::string tag;
    };
    std::vector<BoundRow> bound_rows;
    std::vector<std::string> zn, yn;
    for (std::size_t v = 0; v < nv; ++v) {
        const SourceVariable& sv = source.variables[v];
        if (sv.kind == VarKind::Binary) {
            map.per_variable[v] = {SolutionMap::ColMap::Kind::Binary, p.n_z, 0, 0.0};
            p.i_coeff.push_back(sign * obj[v]);
            zn.push_back(sv.name);
            ++p.n_z;
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        const SourceVariable& sv = source.variables[v];
        if (sv.kind == VarKind::Binary) continue;
        const double lo = sv.lower, up = sv.upper;
        if (std::isfinite(lo)) {
            map.per_variable[v] = {SolutionMap::ColMap::Kind::Shifted, p.n_y, 0, lo};
            p.c.push_back(sign * obj[v]);
            p.objective_offset += sign * sign * obj[v] * lo;  // sign^2 = 1
            if (std::isfinite(up) && std::isfinite(lo))
                bound_rows.push_back({p.n_y, up - lo, sv.name + ":ub"});
            yn.push_back(lo == 0.0 ? sv.name : sv.name + "-" + std::to_string(lo));
            ++p.n_y;
        } else if (std::isfinite(up)) {
            map.per_variable[v] = {SolutionMap::ColMap::Kind::Negated, p.n_y, 0, up};
            p.c.push_back(-sign * obj[v]);
            p.objective_offset += obj[v] * up;
            yn.push_back(sv.name + ":neg");
            ++p.n_y;
        } else {
            if (!in_rows[v])
                throw UnboundedFreeVariable("free variable '" + sv.name +
                                            "' appears in no constraint row");
            map.per_variable[v] = {SolutionMap::ColMap::Kind::Split, p.n_y, p.n_y + 1, 0.0};
            p.c.push_back(sign * obj[v]);
            p.c.push_back(-sign * obj[v]);
            yn.push_back(sv.name + ":pos");
            yn.push_back(sv.name + ":neg");
            p.n_y += 2;
        }
    }

    auto emit_row = [&](const SourceRow& row, double rsign) {
        std::vector<double> arow(p.n_z, 0.0), brow(p.n_y, 0.0);
        double rhs = rsign * row.rhs;
        for (const auto& [v, coeff] : row.terms) {
            const double a = rsign * coeff;
            if (a == 0.0) continue;
            const SolutionMap::ColMap& cm = map.per_variable.at(v);
            switch (cm.kind) {
                case SolutionMap::ColMap::Kind::Binary: arow[cm.col0] += a; break;
                case SolutionMap::ColMap::Kind::Shifted:
                    brow[cm.col0] += a;
                    rhs -= a * cm.shift;
                    break;
                case SolutionMap::ColMap::Kind::Negated:
                    brow[cm.col0] -= a;
                    rhs -= a * cm.shift;
                    break;
                case SolutionMap::ColMap::Kind::Split:
                    brow[cm.col0] += a;
                    brow[cm.col1] -= a;
                    break;
            }
        }
        p.A.push_back(std::move(arow));
        p.B.push_back(std::move(brow));
        p.b.push_back(rhs);
    };

    for (const auto& row : source.rows) {
        switch (row.relation) {
            case Relation::LessEq: emit_row(row, 1.0); break;
            case Relation::GreaterEq: emit_row(row, -1.0); break;
            case Relation::Equal:
                emit_row(row, 1.0);
                emit_row(row, -1.0);
                break;
        }
    }
    for (const auto& br : bound_rows) {
        std::vector<double> brow(p.n_y, 0.0);
        brow[br.ycol] = 1.0;
        p.A.emplace_back(p.n_z, 0.0);
        p.B.push_back(std::move(brow));
        p.b.push_back(br.rhs);
    }

    p.names = zn;
    p.names.insert(p.names.end(), yn.begin(), yn.end());
    p.validate();
    return out;
}

lp::LinearProgram subproblem_lp(const MixedBinaryProgram& p, const std::vector<std::uint8_t>& z) {
    lp::LinearProgram sp = lp::LinearProgram::with_cols(Sense::Maximize, p.n_y);
    sp.objective = p.c;
    for (std::size_t r = 0; r < p.num_rows(); ++r) {
        double rhs = p.b[r];
        for (std::size_t j = 0; j < p.n_z; ++j) rhs -= p.A[r][j] * z[j];
        sp.add_row(p.B[r], Relation::LessEq, rhs);
    }
    return sp;
}

namespace {

bool lex_less(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

BruteForceResult brute_force_milp(const MixedBinaryProgram& p, int limit,
                                  const std::vector<int>& fixed, const ToleranceSet& tol) {
    p.validate();
    std::vector<int> pin = fixed;
    pin.resize(p.n_z, -1);
    std::vector<std::size_t> free_bits;
    for (std::size_t j = 0; j < p.n_z; ++j)
        if (pin[j] < 0) free_bits.push_back(j);
    if (static_cast<int>(free_bits.size()) > limit)
        throw TooManyBinaries("brute force over " + std::to_string(free_bits.size()) +
                              " free binaries exceeds limit " + std::to_string(limit));

    const std::uint64_t count = 1ull << free_bits.size();
    const unsigned nthreads =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                        count > 64 ? 8u : 1u));

    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        BruteForceResult best;
        bool any_unbounded = false;
        std::vector<std::uint8_t> z(p.n_z, 0);
        for (std::size_t j = 0; j < p.n_z; ++j)
            if (pin[j] > 0) z[j] = 1;
        for (std::uint64_t mask = begin; mask < end; ++mask) {
            for (std::size_t k = 0; k < free_bits.size(); ++k)
                z[free_bits[k]] = (mask >> k) & 1u;
            auto sol = lp::solve_lp(subproblem_lp(p, z), tol);
            if (sol.status == lp::LpStatus::Infeasible) continue;
            if (sol.status == lp::LpStatus::Unbounded) {
                any_unbounded = true;
                continue;
            }
            double obj = sol.objective;
            for (std::size_t j = 0; j < p.n_z; ++j) obj += p.i_coeff[j] * z[j];
            if (best.status != MilpStatus::Optimal || obj > best.objective + 1e-9 ||
                (obj > best.objective - 1e-9 && lex_less(z, best.z))) {
                best.status = MilpStatus::Optimal;
                best.objective = obj;
                best.z = z;
                best.y = sol.primal;
            }
        }
        if (any_unbounded) best.status = MilpStatus::Unbounded;
        return best;
    };

    std::vector<BruteForceResult> parts;
    if (nthreads <= 1 || count < 2 * nthreads) {
        parts.push_back(work(0, count));
    } else {
        std::vector<std::future<BruteForceResult>> futs;
        const std::uint64_t chunk = (count + nthreads - 1) / nthreads;
        for (unsigned t = 0; t < nthreads; ++t) {
            const std::uint64_t lo = t * chunk, hi = std::min(count, lo + chunk);
            if (lo >= hi) break;
            futs.push_back(std::async(std::launch::async, work, lo, hi));
        }
        for (auto& f : futs) parts.push_back(f.get());
    }

    BruteForceResult best;
    for (auto& part : parts) {
        if (part.status == MilpStatus::Unbounded) return part;
        if (part.status != MilpStatus::Optimal) continue;
        if (best.status != MilpStatus::Optimal || part.objective > best.objective + 1e-9 ||
            (part.objective > best.objective - 1e-9 && lex_less(part.z, best.z)))
            best = std::move(part);
    }
    return best;
}

std::string to_json_string(const MixedBinaryProgram& p) {
    nlohmann::ordered_json j;
    j["n_z"] = p.n_z;
    j["n_y"] = p.n_y;
    j["i"] = p.i_coeff;
    j["c"] = p.c;
    j["A"] = p.A;
    j["B"] = p.B;
    j["b"] = p.b;
    j["names"] = p.names;
    j["objective_sign"] = p.objective_sign;
    j["objective_offset"] = p.objective_offset;
    return j.dump(2) + "\n";
}

MixedBinaryProgram program_from_json_string(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MixedBinaryProgram p;
    p.n_z = j.at("n_z").get<std::size_t>();
    p.n_y = j.at("n_y").get<std::size_t>();
    p.i_coeff = j.at("i").get<std::vector<double>>();
    p.c = j.at("c").get<std::vector<double>>();
    p.A = j.at("A").get<std::vector<std::vector<double>>>();
    p.B = j.at("B").get<std::vector<std::vector<double>>>();
    p.b = j.at("b").get<std::vector<double>>();
    p.names = j.at("names").get<std::vector<std::string>>();
    p.objective_sign = j.value("objective_sign", 1.0);
    p.objective_offset = j.value("objective_offset", 0.0);
    p.validate();
    return p;
}

void save_model(const MixedBinaryProgram& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidModel("cannot open '" + path + "' for writing");
    out << to_json_string(p);
}

MixedBinaryProgram load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidModel("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return program_from_json_string(text);
}

}  // namespace qbend::model
