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

#include "qbend/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace qbend::bench {

using lp::Relation;
using lp::Sense;
using model::InvalidModel;
using model::ModelSource;

void NetworkCase::validate() const {
    if (buses.empty()) throw InvalidModel("case has no buses");
    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (!index.emplace(buses[i].id, i).second)
            throw InvalidModel("duplicate bus id " + std::to_string(buses[i].id));
    if (!index.count(slack)) throw InvalidModel("slack bus id not in the bus list");
    if (!(theta_max > theta_min)) throw InvalidModel("empty angle box");
    for (const auto& g : generators) {
        if (!index.count(g.bus)) throw InvalidModel("generator on unknown bus");
        if (!(g.pmax > 0.0)) throw InvalidModel("generator capacity must be positive");
    }
    for (const auto& l : lines) {
        if (!index.count(l.from) || !index.count(l.to) || l.from == l.to)
            throw InvalidModel("line endpoints invalid");
        if (!(l.limit > 0.0) || !(l.b > 0.0))
            throw InvalidModel("line limits and susceptances must be positive");
    }
    // connectivity with all lines on
    std::vector<int> comp(buses.size(), -1);
    std::vector<std::size_t> stack = {0};
    comp[0] = 0;
    while (!stack.empty()) {
        std::size_t at = stack.back();
        stack.pop_back();
        for (const auto& l : lines) {
            std::size_t a = index.at(l.from), b = index.at(l.to);
            if (a == at && comp[b] < 0) comp[b] = 0, stack.push_back(b);
            if (b == at && comp[a] < 0) comp[a] = 0, stack.push_back(a);
        }
    }
    for (int c : comp)
        if (c < 0) throw InvalidModel("network is disconnected with all lines on");
}

NetworkCase case_from_json_string(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    NetworkCase net;
    for (const auto& b : j.at("buses"))
        net.buses.push_back({b.at("id").get<int>(), b.at("demand").get<double>()});
    for (const auto& g : j.at("generators"))
        net.generators.push_back({g.at("bus").get<int>(), g.at("cost").get<double>(),
                                  g.at("pmax").get<double>()});
    for (const auto& l : j.at("lines"))
        net.lines.push_back({l.at("from").get<int>(), l.at("to").get<int>(),
                             l.at("b").get<double>(), l.at("limit").get<double>(),
                             l.value("switchable", true)});
    net.slack = j.at("slack").get<int>();
    if (j.contains("theta_bounds")) {
        net.theta_min = j["theta_bounds"].at(0).get<double>();
        net.theta_max = j["theta_bounds"].at(1).get<double>();
    }
    net.validate();
    return net;
}

NetworkCase load_case(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidModel("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return case_from_json_string(buf.str());
}

ModelSource build_ots(const NetworkCase& net, int E, std::vector<std::string>* warnings) {
    net.validate();
    if (E < 0 || static_cast<std::size_t>(E) > net.lines.size())
        throw InvalidModel("switch budget must lie in [0, line count]");

    std::map<int, std::size_t> bus_of;
    for (std::size_t i = 0; i < net.buses.size(); ++i) bus_of.emplace(net.buses[i].id, i);

    ModelSource src;
    src.sense = Sense::Minimize;

    // binaries first keeps decoded assignments aligned with the line order
    std::vector<std::size_t> x_var(net.lines.size(), SIZE_MAX);
    for (std::size_t l = 0; l < net.lines.size(); ++l)
        if (net.lines[l].switchable)
            x_var[l] = src.add_binary("x_" + std::to_string(net.lines[l].from) + "_" +
                                      std::to_string(net.lines[l].to) + "_" + std::to_string(l));

    std::vector<std::size_t> g_var(net.generators.size());
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        g_var[g] = src.add_continuous("g" + std::to_string(g), 0.0, net.generators[g].pmax);
        src.add_objective_term(g_var[g], net.generators[g].cost);
    }
    std::vector<std::size_t> p_var(net.lines.size());
    for (std::size_t l = 0; l < net.lines.size(); ++l)
        p_var[l] = src.add_continuous("p" + std::to_string(l), -net.lines[l].limit,
                                      net.lines[l].limit);
    std::vector<std::size_t> th_var(net.buses.size());
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        const bool is_slack = net.buses[i].id == net.slack;
        th_var[i] = src.add_continuous("theta" + std::to_string(net.buses[i].id),
                                       is_slack ? 0.0 : net.theta_min,
                                       is_slack ? 0.0 : net.theta_max);
    }

    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const auto& ln = net.lines[l];
        const std::size_t i = bus_of.at(ln.from), jj = bus_of.at(ln.to);
        const std::string tag = "line" + std::to_string(l);
        if (ln.switchable) {
            // |p_l| <= limit * x_l
            src.add_row({{p_var[l], 1.0}, {x_var[l], -ln.limit}}, Relation::LessEq, 0.0,
                        tag + ":cap+");
            src.add_row({{p_var[l], -1.0}, {x_var[l], -ln.limit}}, Relation::LessEq, 0.0,
                        tag + ":cap-");
            // p_l = b (th_i - th_j) when on, released by M (1 - x_l) when off
            const double M = ln.b * (net.theta_max - net.theta_min);
            src.add_row({{p_var[l], 1.0}, {th_var[i], -ln.b}, {th_var[jj], ln.b}, {x_var[l], M}},
                        Relation::LessEq, M, tag + ":ang+");
            src.add_row({{p_var[l], -1.0}, {th_var[i], ln.b}, {th_var[jj], -ln.b}, {x_var[l], M}},
                        Relation::LessEq, M, tag + ":ang-");
        } else {
            src.add_row({{p_var[l], 1.0}, {th_var[i], -ln.b}, {th_var[jj], ln.b}},
                        Relation::Equal, 0.0, tag + ":ang");
        }
    }

    // nodal balance: generation + inflow = outflow + demand
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        std::vector<std::pair<std::size_t, double>> terms;
        for (std::size_t g = 0; g < net.generators.size(); ++g)
            if (bus_of.at(net.generators[g].bus) == i) terms.emplace_back(g_var[g], 1.0);
        for (std::size_t l = 0; l < net.lines.size(); ++l) {
            if (bus_of.at(net.lines[l].to) == i) terms.emplace_back(p_var[l], 1.0);
            if (bus_of.at(net.lines[l].from) == i) terms.emplace_back(p_var[l], -1.0);
        }
        src.add_row(std::move(terms), Relation::Equal, net.buses[i].demand,
                    "balance" + std::to_string(net.buses[i].id));
    }

    // sum over switchable lines of (1 - x_l) <= E
    std::vector<std::pair<std::size_t, double>> budget;
    std::size_t switchable = 0;
    for (std::size_t l = 0; l < net.lines.size(); ++l)
        if (x_var[l] != SIZE_MAX) {
            budget.emplace_back(x_var[l], -1.0);
            ++switchable;
        }
    if (!budget.empty())
        src.add_row(std::move(budget), Relation::LessEq,
                    static_cast<double>(E) - static_cast<double>(switchable), "budget");

    if (warnings) {
        // screening: a demand bus whose switchable degree fits the budget can
        // be isolated by the master
        for (const auto& bus : net.buses) {
            if (bus.demand <= 0.0) continue;
            bool has_gen = false;
            for (const auto& g : net.generators) has_gen = has_gen || g.bus == bus.id;
            if (has_gen) continue;
            int fixed = 0, sw = 0;
            for (const auto& l : net.lines)
                if (l.from == bus.id || l.to == bus.id) (l.switchable ? sw : fixed)++;
            if (fixed == 0 && sw <= E)
                warnings->push_back("budget E=" + std::to_string(E) + " can isolate demand bus " +
                                    std::to_string(bus.id));
        }
    }
    return src;
}

void NeuralNetSpec::validate() const {
    if (layers.empty()) throw InvalidModel("network needs at least the output layer");
    if (input_lb.size() != input_ub.size() || input_lb.empty())
        throw InvalidModel("input box sizes disagree");
    std::size_t width = input_lb.size();
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& layer = layers[k];
        if (layer.W.empty() || layer.W.size() != layer.b.size())
            throw InvalidModel("layer " + std::to_string(k) + " weight/bias mismatch");
        for (const auto& row : layer.W)
            if (row.size() != width)
                throw InvalidModel("layer " + std::to_string(k) + " width mismatch");
        width = layer.W.size();
    }
    for (std::size_t d = 0; d < input_lb.size(); ++d) {
        if (!std::isfinite(input_lb[d]) || !std::isfinite(input_ub[d]) ||
            input_lb[d] > input_ub[d])
            throw InvalidModel("input box must be finite and nonempty");
    }
    if (gen_limits.size() != layers.back().W.size() + 1)
        throw InvalidModel("gen_limits must cover all outputs plus the slack generator");
    if (slack_index >= gen_limits.size()) throw InvalidModel("slack index out of range");
    if (map_d.empty()) throw InvalidModel("bus injection map is empty");
    for (const auto& row : map_d)
        if (row.size() != input_lb.size()) throw InvalidModel("injection map width mismatch");
}

NeuralNetSpec nn_from_json_string(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    NeuralNetSpec nn;
    for (const auto& l : j.at("layers")) {
        Layer layer;
        layer.W = l.at("W").get<std::vector<std::vector<double>>>();
        layer.b = l.at("b").get<std::vector<double>>();
        nn.layers.push_back(std::move(layer));
    }
    nn.input_lb = j.at("input_lb").get<std::vector<double>>();
    nn.input_ub = j.at("input_ub").get<std::vector<double>>();
    for (const auto& g : j.at("gen_limits"))
        nn.gen_limits.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
    nn.map_d = j.at("map_d").get<std::vector<std::vector<double>>>();
    nn.slack_index = j.at("slack_index").get<std::size_t>();
    nn.validate();
    return nn;
}

NeuralNetSpec load_nn(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidModel("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return nn_from_json_string(buf.str());
}

std::vector<std::vector<Interval>> propagate_bounds(const NeuralNetSpec& nn) {
    nn.validate();
    std::vector<Interval> in(nn.input_lb.size());
    for (std::size_t d = 0; d < in.size(); ++d) in[d] = {nn.input_lb[d], nn.input_ub[d]};

    std::vector<std::vector<Interval>> out;
    for (std::size_t k = 0; k < nn.layers.size(); ++k) {
        const auto& layer = nn.layers[k];
        std::vector<Interval> pre(layer.W.size());
        for (std::size_t n = 0; n < layer.W.size(); ++n) {
            double lo = layer.b[n], hi = layer.b[n];
            for (std::size_t d = 0; d < in.size(); ++d) {
                const double w = layer.W[n][d];
                lo += w * (w >= 0.0 ? in[d].lo : in[d].hi);
                hi += w * (w >= 0.0 ? in[d].hi : in[d].lo);
            }
            pre[n] = {lo, hi};
        }
        out.push_back(pre);
        // next layer sees the ReLU image, except after the linear output
        in.resize(pre.size());
        for (std::size_t n = 0; n < pre.size(); ++n)
            in[n] = {std::max(0.0, pre[n].lo), std::max(0.0, pre[n].hi)};
    }
    return out;
}

ModelSource build_nn_verification(const NeuralNetSpec& nn, std::size_t target_gen,
                                  BoundSide side) {
    nn.validate();
    if (target_gen >= nn.gen_limits.size()) throw InvalidModel("target generator out of range");
    auto bounds = propagate_bounds(nn);
    for (const auto& layer : bounds)
        for (const auto& iv : layer)
            if (std::abs(iv.lo) > 1e6 || std::abs(iv.hi) > 1e6)
                throw BoundBlowup("propagated activation bound exceeds 1e6; tighten the input box");

    ModelSource src;
    src.sense = Sense::Maximize;

    const std::size_t hidden = nn.hidden_layers();
    std::vector<std::vector<std::size_t>> delta(hidden), zv(hidden);
    for (std::size_t k = 0; k < hidden; ++k)
        for (std::size_t n = 0; n < nn.layers[k].W.size(); ++n)
            delta[k].push_back(
                src.add_binary("d" + std::to_string(k) + "_" + std::to_string(n)));

    std::vector<std::size_t> pd(nn.input_lb.size());
    for (std::size_t d = 0; d < pd.size(); ++d)
        pd[d] = src.add_continuous("pd" + std::to_string(d), nn.input_lb[d], nn.input_ub[d]);
    for (std::size_t k = 0; k < hidden; ++k)
        for (std::size_t n = 0; n < nn.layers[k].W.size(); ++n)
            zv[k].push_back(src.add_continuous(
                "z" + std::to_string(k) + "_" + std::to_string(n), 0.0,
                std::max(0.0, bounds[k][n].hi)));

    // pre-activation of neuron (k, n) as terms over the previous layer
    auto pre_terms = [&](std::size_t k, std::size_t n) {
        std::vector<std::pair<std::size_t, double>> terms;
        const auto& prev = k == 0 ? pd : zv[k - 1];
        for (std::size_t d = 0; d < prev.size(); ++d)
            if (nn.layers[k].W[n][d] != 0.0) terms.emplace_back(prev[d], nn.layers[k].W[n][d]);
        return terms;
    };

    for (std::size_t k = 0; k < hidden; ++k) {
        for (std::size_t n = 0; n < nn.layers[k].W.size(); ++n) {
            const std::string tag = "relu" + std::to_string(k) + "_" + std::to_string(n);
            const double m_plus = std::max(0.0, bounds[k][n].hi);
            const double m_minus = std::max(0.0, -bounds[k][n].lo);
            // z >= pre: pre - z <= -bias
            auto lbrow = pre_terms(k, n);
            lbrow.emplace_back(zv[k][n], -1.0);
            src.add_row(std::move(lbrow), Relation::LessEq, -nn.layers[k].b[n], tag + ":lb");
            // z <= pre + m_minus (1 - delta)
            auto ubrow = pre_terms(k, n);
            for (auto& t : ubrow) t.second = -t.second;
            ubrow.emplace_back(zv[k][n], 1.0);
            ubrow.emplace_back(delta[k][n], m_minus);
            src.add_row(std::move(ubrow), Relation::LessEq, nn.layers[k].b[n] + m_minus,
                        tag + ":ub");
            // z <= m_plus * delta
            src.add_row({{zv[k][n], 1.0}, {delta[k][n], -m_plus}}, Relation::LessEq, 0.0,
                        tag + ":on");
        }
    }

    // generator outputs are affine; accumulate the objective directly
    const auto& out_layer = nn.layers.back();
    auto output_terms = [&](std::size_t o, double scale,
                            std::vector<std::pair<std::size_t, double>>& terms, double& constant) {
        const auto& prev = hidden == 0 ? pd : zv[hidden - 1];
        for (std::size_t d = 0; d < prev.size(); ++d)
            if (out_layer.W[o][d] != 0.0) terms.emplace_back(prev[d], scale * out_layer.W[o][d]);
        constant += scale * out_layer.b[o];
    };

    std::vector<std::pair<std::size_t, double>> obj;
    double constant = 0.0;
    if (target_gen == nn.slack_index) {
        // slack output = sum of bus injections minus the other generators
        std::vector<double> colsum(pd.size(), 0.0);
        for (const auto& row : nn.map_d)
            for (std::size_t d = 0; d < pd.size(); ++d) colsum[d] += row[d];
        for (std::size_t d = 0; d < pd.size(); ++d)
            if (colsum[d] != 0.0) obj.emplace_back(pd[d], colsum[d]);
        for (std::size_t o = 0; o < out_layer.W.size(); ++o) output_terms(o, -1.0, obj, constant);
    } else {
        const std::size_t o = target_gen < nn.slack_index ? target_gen : target_gen - 1;
        output_terms(o, 1.0, obj, constant);
    }

    const auto [g_lo, g_hi] = nn.gen_limits[target_gen];
    double sign = side == BoundSide::Upper ? 1.0 : -1.0;
    for (auto& [v, c] : obj) c *= sign;
    src.objective_constant = sign * constant + (side == BoundSide::Upper ? -g_hi : g_lo);
    // accumulate duplicated variables before handing terms to the objective
    std::map<std::size_t, double> folded;
    for (const auto& [v, c] : obj) folded[v] += c;
    for (const auto& [v, c] : folded)
        if (c != 0.0) src.add_objective_term(v, c);
    return src;
}

}  // namespace qbend::bench
