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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbend/bench.hpp"
#include "qbend/benders.hpp"
#include "qbend/model.hpp"

namespace {

using nlohmann::ordered_json;
using namespace qbend;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitIterationLimit = 2;

struct SolveOptions {
    std::string model_path;
    std::string method = "bd1";
    std::string sampler = "exact";
    std::size_t R = 1;
    double eps = 1e-3;
    double rho = 1.0;
    std::uint64_t seed = 0;
    std::size_t max_iter = 100;
    int acc_bits = -1;
    std::string log_path;
    std::string out_path;
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

benders::BendersConfig config_from(const SolveOptions& opt) {
    benders::BendersConfig cfg;
    cfg.eps = opt.eps;
    cfg.R = opt.R;
    cfg.rho = opt.rho;
    cfg.seed = opt.seed;
    cfg.max_iterations = opt.max_iter;
    cfg.acc_bits_override = opt.acc_bits;
    cfg.master_backend = opt.sampler == "sa" ? benders::MasterBackendKind::QuboSampler
                                             : benders::MasterBackendKind::Exact;
    return cfg;
}

struct SolveOutput {
    ordered_json result;
    std::string log_csv;
    int exit_code = kExitOk;
};

const char* classify(const std::exception& e) {
    if (dynamic_cast<const benders::IterationLimit*>(&e)) return "iteration-limit";
    if (dynamic_cast<const benders::MasterInfeasible*>(&e)) return "master-infeasible";
    if (dynamic_cast<const benders::DualInfeasible*>(&e)) return "dual-infeasible";
    if (dynamic_cast<const model::TooManyBinaries*>(&e)) return "too-many-binaries";
    if (dynamic_cast<const model::InvalidModel*>(&e)) return "invalid-model";
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return "parse-error";
    return "internal";
}

SolveOutput run_solve(const SolveOptions& opt) {
    SolveOutput out;
    auto program = model::load_model(opt.model_path);
    ordered_json& r = out.result;
    r["model"] = opt.model_path;
    r["method"] = opt.method;

    if (opt.method == "sso") {
        auto res = model::brute_force_milp(program);
        if (res.status != model::MilpStatus::Optimal) {
            r["error"] = {{"code", res.status == model::MilpStatus::Infeasible ? "infeasible"
                                                                               : "unbounded"},
                          {"message", "exhaustive solve found no finite optimum"}};
            out.exit_code = kExitError;
            return out;
        }
        r["objective"] = program.source_objective(res.objective);
        r["z"] = res.z;
        r["y"] = res.y;
        r["iterations"] = 0;
        r["converged"] = true;
        r["timings"] = {{"cpu_ms", 0.0}, {"sampler_ms", 0.0}};
        r["error"] = nullptr;
        return out;
    }

    static const std::map<std::string, benders::Method> methods = {
        {"cbd", benders::Method::ConventionalBD},
        {"bd1", benders::Method::Method1},
        {"bd2", benders::Method::Method2},
    };
    r["sampler"] = opt.sampler;
    auto cfg = config_from(opt);
    auto res = benders::run(program, cfg, methods.at(opt.method));
    r["objective"] = program.source_objective(res.objective);
    r["z"] = res.z;
    r["y"] = res.y;
    r["iterations"] = res.iterations;
    r["converged"] = res.converged;
    double cpu = 0.0, sampler_ms = 0.0;
    for (const auto& row : res.log.rows) {
        cpu += row.sp_ms;
        (row.master_backend == "qubo-sa" ? sampler_ms : cpu) += row.master_ms;
    }
    r["timings"] = {{"cpu_ms", cpu}, {"sampler_ms", sampler_ms}};
    r["error"] = nullptr;
    out.log_csv = res.log.to_csv();
    if (!res.converged) out.exit_code = kExitIterationLimit;
    return out;
}

int cmd_build(const std::string& kind, const std::string& input, int E, std::size_t gen,
              const std::string& side, const std::string& out_path) {
    model::ModelSource src;
    if (kind == "ots") {
        auto net = bench::load_case(input);
        std::vector<std::string> warnings;
        src = bench::build_ots(net, E, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    } else {
        auto nn = bench::load_nn(input);
        src = bench::build_nn_verification(
            nn, gen, side == "upper" ? bench::BoundSide::Upper : bench::BoundSide::Lower);
    }
    auto compiled = model::compile(src);
    write_text(out_path, model::to_json_string(compiled.program));
    std::cout << "n_z=" << compiled.program.n_z << " n_y=" << compiled.program.n_y
              << " rows=" << compiled.program.num_rows() << "\n";
    return kExitOk;
}

int cmd_solve(const SolveOptions& opt) {
    SolveOutput out;
    try {
        out = run_solve(opt);
    } catch (const std::exception& e) {
        out.result["model"] = opt.model_path;
        out.result["method"] = opt.method;
        out.result["error"] = {{"code", classify(e)}, {"message", e.what()}};
        out.exit_code = std::string(classify(e)) == "iteration-limit" ? kExitIterationLimit
                                                                      : kExitError;
    }
    write_text(opt.out_path, out.result.dump(2) + "\n");
    if (!opt.log_path.empty() && !out.log_csv.empty()) write_text(opt.log_path, out.log_csv);
    return out.exit_code;
}

int cmd_compare(const std::vector<std::string>& models, const std::vector<std::string>& methods,
                std::vector<std::uint64_t> seeds, SolveOptions base, const std::string& out_path) {
    if (seeds.empty()) seeds.push_back(base.seed);
    std::string csv = "model,method,sampler,R,seed,objective,iterations,mean_iter_ms,converged\n";
    bool disagreement = false;
    for (const auto& model_path : models) {
        auto program = model::load_model(model_path);
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (const auto& method : methods) {
            for (auto seed : seeds) {
                double objective = 0.0;
                std::size_t iterations = 0;
                double mean_ms = 0.0;
                bool converged = false;
                if (method == "sso") {
                    auto res = model::brute_force_milp(program);
                    if (res.status == model::MilpStatus::Optimal) {
                        objective = program.source_objective(res.objective);
                        converged = true;
                    }
                } else {
                    auto cfg = config_from(base);
                    cfg.seed = seed;
                    cfg.record_timings = true;
                    static const std::map<std::string, benders::Method> ids = {
                        {"cbd", benders::Method::ConventionalBD},
                        {"bd1", benders::Method::Method1},
                        {"bd2", benders::Method::Method2},
                    };
                    try {
                        auto res = benders::run(program, cfg, ids.at(method));
                        objective = program.source_objective(res.objective);
                        iterations = res.iterations;
                        converged = res.converged;
                        for (const auto& row : res.log.rows) mean_ms += row.master_ms + row.sp_ms;
                        if (!res.log.rows.empty()) mean_ms /= double(res.log.rows.size());
                    } catch (const std::exception& e) {
                        std::cerr << "compare: " << model_path << "/" << method << " failed: "
                                  << e.what() << "\n";
                    }
                }
                char line[512];
                std::snprintf(line, sizeof line, "%s,%s,%s,%zu,%llu,%.10g,%zu,%.3f,%d\n",
                              model_path.c_str(), method.c_str(),
                              method == "sso" ? "-" : base.sampler.c_str(), base.R,
                              static_cast<unsigned long long>(seed), objective, iterations,
                              mean_ms, converged ? 1 : 0);
                csv += line;
                if (converged) {
                    if (first) lo = hi = objective, first = false;
                    lo = std::min(lo, objective);
                    hi = std::max(hi, objective);
                }
            }
        }
        if (!first && hi - lo > base.eps * (1.0 + std::abs(hi))) {
            std::cerr << "DISAGREEMENT: objectives for " << model_path << " span [" << lo << ", "
                      << hi << "], eps=" << base.eps << "\n";
            disagreement = true;
        }
    }
    write_text(out_path, csv);
    return disagreement ? kExitError : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benders decomposition toolkit with a QUBO master backend"};
    app.require_subcommand(1);

    // build
    auto* build = app.add_subcommand("build", "Compile a benchmark into a model file");
    std::string build_kind, build_input, build_out, build_side = "upper";
    int build_E = 0;
    std::size_t build_gen = 0;
    build->add_option("kind", build_kind, "ots or nnver")
        ->required()
        ->check(CLI::IsMember({"ots", "nnver"}));
    build->add_option("input", build_input, "case or network file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    build->add_option("-E", build_E, "max lines switched off (ots)");
    build->add_option("--gen", build_gen, "target generator index (nnver)");
    build->add_option("--side", build_side, "bound side (nnver)")
        ->check(CLI::IsMember({"upper", "lower"}));
    build->add_option("-o", build_out, "output model file (default stdout)");

    // solve
    auto* solve = app.add_subcommand("solve", "Run one method on a model file");
    SolveOptions opt;
    solve->add_option("--model", opt.model_path, "model file")
        ->required()
        ->check(CLI::ExistingFile);
    solve->add_option("--method", opt.method, "sso, cbd, bd1 or bd2")
        ->required()
        ->check(CLI::IsMember({"sso", "cbd", "bd1", "bd2"}));
    solve->add_option("--sampler", opt.sampler, "master backend: exact or sa")
        ->check(CLI::IsMember({"exact", "sa"}));
    solve->add_option("-R", opt.R, "master candidates per iteration (bd2)");
    solve->add_option("--eps", opt.eps, "absolute convergence tolerance");
    solve->add_option("--rho", opt.rho, "Hamming regularization weight");
    solve->add_option("--seed", opt.seed, "sampler seed");
    solve->add_option("--max-iter", opt.max_iter, "outer iteration limit");
    solve->add_option("--acc-bits", opt.acc_bits, "fixed-point bits override (-1 = derive)");
    solve->add_option("--log", opt.log_path, "convergence CSV output");
    solve->add_option("-o", opt.out_path, "result file (default stdout)");

    // compare
    auto* compare = app.add_subcommand("compare", "Run a model x method x seed grid");
    std::vector<std::string> cmp_models, cmp_methods;
    std::vector<std::uint64_t> cmp_seeds;
    std::string cmp_out;
    SolveOptions cmp_base;
    compare->add_option("--model", cmp_models, "model files")
        ->required()
        ->check(CLI::ExistingFile);
    compare->add_option("--method", cmp_methods, "methods to run")
        ->required()
        ->check(CLI::IsMember({"sso", "cbd", "bd1", "bd2"}));
    compare->add_option("--seed", cmp_seeds, "seeds (default: one run with seed 0)");
    compare->add_option("--sampler", cmp_base.sampler, "master backend: exact or sa")
        ->check(CLI::IsMember({"exact", "sa"}));
    compare->add_option("-R", cmp_base.R, "master candidates per iteration (bd2)");
    compare->add_option("--eps", cmp_base.eps, "absolute convergence tolerance");
    compare->add_option("--rho", cmp_base.rho, "Hamming regularization weight");
    compare->add_option("--max-iter", cmp_base.max_iter, "outer iteration limit");
    compare->add_option("--acc-bits", cmp_base.acc_bits, "fixed-point bits override");
    compare->add_option("-o", cmp_out, "summary CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // contract: every failure exits 1; CLI11's own codes stay internal
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    try {
        if (build->parsed())
            return cmd_build(build_kind, build_input, build_E, build_gen, build_side, build_out);
        if (solve->parsed()) return cmd_solve(opt);
        return cmd_compare(cmp_models, cmp_methods, cmp_seeds, cmp_base, cmp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
