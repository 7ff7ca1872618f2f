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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "qbend/bench.hpp"
#include "qbend/lp.hpp"

namespace qbend::testing {

inline std::vector<double> nn_forward_layer(const bench::NeuralNetSpec& nn, std::size_t k,
                                            const std::vector<double>& prev, bool relu) {
    const auto& layer = nn.layers[k];
    std::vector<double> out(layer.W.size());
    for (std::size_t n = 0; n < layer.W.size(); ++n) {
        double v = layer.b[n];
        for (std::size_t d = 0; d < prev.size(); ++d) v += layer.W[n][d] * prev[d];
        out[n] = relu ? std::max(0.0, v) : v;
    }
    return out;
}

inline std::vector<double> nn_forward(const bench::NeuralNetSpec& nn,
                                      const std::vector<double>& x) {
    std::vector<double> h = x;
    for (std::size_t k = 0; k + 1 < nn.layers.size(); ++k) h = nn_forward_layer(nn, k, h, true);
    return nn_forward_layer(nn, nn.layers.size() - 1, h, false);
}

inline double nn_gen_value(const bench::NeuralNetSpec& nn, const std::vector<double>& x,
                           std::size_t target) {
    auto out = nn_forward(nn, x);
    if (target == nn.slack_index) {
        double v = 0.0;
        for (const auto& row : nn.map_d)
            for (std::size_t d = 0; d < x.size(); ++d) v += row[d] * x[d];
        for (double o : out) v -= o;
        return v;
    }
    return out[target < nn.slack_index ? target : target - 1];
}

inline double nn_violation(const bench::NeuralNetSpec& nn, const std::vector<double>& x,
                           std::size_t target, bench::BoundSide side) {
    const double g = nn_gen_value(nn, x, target);
    return side == bench::BoundSide::Upper ? g - nn.gen_limits[target].second
                                           : nn.gen_limits[target].first - g;
}

/// Independent verification ground truth: enumerate every ReLU activation
/// pattern, solve the resulting LP over the input box, keep the best
/// violation. Neuron values are tracked as affine functions of the inputs.
inline double nn_pattern_oracle(const bench::NeuralNetSpec& nn, std::size_t target,
                                bench::BoundSide side) {
    struct Affine {
        std::vector<double> a;
        double c = 0.0;
    };

    const std::size_t n_in = nn.input_lb.size();
    std::vector<std::size_t> widths;
    for (std::size_t k = 0; k + 1 < nn.layers.size(); ++k) widths.push_back(nn.layers[k].W.size());
    std::size_t total = 0;
    for (std::size_t w : widths) total += w;
    if (total > 12) throw std::invalid_argument("pattern oracle limited to 12 hidden neurons");

    double best = -1e300;
    bool any = false;
    for (std::uint64_t mask = 0; mask < (1ull << total); ++mask) {
        lp::LinearProgram prob = lp::LinearProgram::with_cols(lp::Sense::Maximize, n_in);
        prob.lower = nn.input_lb;
        prob.upper = nn.input_ub;

        std::vector<Affine> prev(n_in);
        for (std::size_t d = 0; d < n_in; ++d) {
            prev[d].a.assign(n_in, 0.0);
            prev[d].a[d] = 1.0;
        }
        std::size_t bit = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
            std::vector<Affine> next(widths[k]);
            for (std::size_t n = 0; n < widths[k]; ++n, ++bit) {
                Affine pre;
                pre.a.assign(n_in, 0.0);
                pre.c = nn.layers[k].b[n];
                for (std::size_t d = 0; d < prev.size(); ++d) {
                    const double w = nn.layers[k].W[n][d];
                    for (std::size_t t = 0; t < n_in; ++t) pre.a[t] += w * prev[d].a[t];
                    pre.c += w * prev[d].c;
                }
                const bool active = (mask >> bit) & 1u;
                prob.add_row(pre.a, active ? lp::Relation::GreaterEq : lp::Relation::LessEq,
                             -pre.c);
                if (active) {
                    next[n] = pre;
                } else {
                    next[n].a.assign(n_in, 0.0);
                    next[n].c = 0.0;
                }
            }
            prev = std::move(next);
        }

        const auto& out_layer = nn.layers.back();
        Affine g;
        g.a.assign(n_in, 0.0);
        if (target == nn.slack_index) {
            for (const auto& row : nn.map_d)
                for (std::size_t d = 0; d < n_in; ++d) g.a[d] += row[d];
            for (std::size_t o = 0; o < out_layer.W.size(); ++o) {
                g.c -= out_layer.b[o];
                for (std::size_t d = 0; d < prev.size(); ++d) {
                    const double w = out_layer.W[o][d];
                    for (std::size_t t = 0; t < n_in; ++t) g.a[t] -= w * prev[d].a[t];
                    g.c -= w * prev[d].c;
                }
            }
        } else {
            const std::size_t o = target < nn.slack_index ? target : target - 1;
            g.c = out_layer.b[o];
            for (std::size_t d = 0; d < prev.size(); ++d) {
                const double w = out_layer.W[o][d];
                for (std::size_t t = 0; t < n_in; ++t) g.a[t] += w * prev[d].a[t];
                g.c += w * prev[d].c;
            }
        }
        const double sign = side == bench::BoundSide::Upper ? 1.0 : -1.0;
        for (std::size_t t = 0; t < n_in; ++t) prob.objective[t] = sign * g.a[t];
        const double constant = sign * g.c + (side == bench::BoundSide::Upper
                                                  ? -nn.gen_limits[target].second
                                                  : nn.gen_limits[target].first);

        auto sol = lp::solve_lp(prob);
        if (sol.status != lp::LpStatus::Optimal) continue;
        any = true;
        best = std::max(best, sol.objective + constant);
    }
    if (!any) throw std::runtime_error("pattern oracle: no feasible activation pattern");
    return best;
}

inline bench::NeuralNetSpec random_nn(std::mt19937_64& rng, std::size_t n_in,
                                      const std::vector<std::size_t>& hidden, std::size_t n_out) {
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    bench::NeuralNetSpec nn;
    std::size_t width = n_in;
    auto make_layer = [&](std::size_t rows) {
        bench::Layer layer;
        layer.W.assign(rows, std::vector<double>(width));
        layer.b.assign(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t d = 0; d < width; ++d) layer.W[r][d] = w(rng);
            layer.b[r] = 0.5 * w(rng);
        }
        width = rows;
        return layer;
    };
    for (std::size_t h : hidden) nn.layers.push_back(make_layer(h));
    nn.layers.push_back(make_layer(n_out));
    nn.input_lb.assign(n_in, -1.0);
    nn.input_ub.assign(n_in, 1.0);
    nn.gen_limits.assign(n_out + 1, {-0.25, 0.25});
    nn.map_d.assign(2, std::vector<double>(n_in));
    for (auto& row : nn.map_d)
        for (double& v : row) v = w(rng);
    nn.slack_index = n_out;  // slack last
    return nn;
}

}  // namespace qbend::testing
