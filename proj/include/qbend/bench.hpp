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
#include <utility>
#include <vector>

#include "qbend/model.hpp"

namespace qbend::bench {

struct BoundBlowup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Bus {
    int id = 0;
    double demand = 0.0;  // MW
};

struct Generator {
    int bus = 0;
    double cost = 0.0;
    double pmax = 0.0;
};

struct Line {
    int from = 0;
    int to = 0;
    double b = 0.0;      // susceptance magnitude of line (from, to)
    double limit = 0.0;  // thermal limit on |flow|
    bool switchable = true;
};

/// DC network for the transmission-switching benchmark. Flow on line
/// (i, j) is oriented from i to j and equals b * (theta_i - theta_j) while
/// the line is on.
struct NetworkCase {
    std::vector<Bus> buses;
    std::vector<Generator> generators;
    std::vector<Line> lines;
    int slack = 0;
    double theta_min = -1.5707963267948966;
    double theta_max = 1.5707963267948966;

    void validate() const;  // throws InvalidModel; requires a connected graph
};

NetworkCase case_from_json_string(const std::string& text);
NetworkCase load_case(const std::string& path);

/// Switching MILP: min generation cost, per-line on/off binaries, flow
/// limits |p_l| <= limit * x_l, big-M rows tying flow to the angle
/// difference, and the budget row sum(1 - x_l) <= E over switchable lines.
/// A budget that would let the master isolate a demand bus only produces a
/// warning string: the decomposition handles such assignments with
/// feasibility cuts.
model::ModelSource build_ots(const NetworkCase& net, int E,
                             std::vector<std::string>* warnings = nullptr);

struct Layer {
    std::vector<std::vector<double>> W;  // rows x inputs
    std::vector<double> b;
};

/// Feed-forward ReLU network plus the dispatch bookkeeping needed for the
/// verification MILP: hidden layers then one linear output layer producing
/// the non-slack generator setpoints; the slack generator balances demand.
struct NeuralNetSpec {
    std::vector<Layer> layers;
    std::vector<double> input_lb;
    std::vector<double> input_ub;
    std::vector<std::pair<double, double>> gen_limits;  // all generators
    std::vector<std::vector<double>> map_d;             // bus injection map M_d
    std::size_t slack_index = 0;  // position of the slack generator

    std::size_t hidden_layers() const { return layers.empty() ? 0 : layers.size() - 1; }
    void validate() const;  // throws InvalidModel
};

NeuralNetSpec nn_from_json_string(const std::string& text);
NeuralNetSpec load_nn(const std::string& path);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Per-layer pre-activation intervals by interval arithmetic from the input
/// box; the last entry covers the linear output layer.
std::vector<std::vector<Interval>> propagate_bounds(const NeuralNetSpec& nn);

enum class BoundSide { Upper, Lower };

/// Worst-case limit violation of one generator: maximize p_g - ub_g or
/// lb_g - p_g over the input box, with big-M ReLU rows per hidden neuron
/// (one binary each) sized from the propagated intervals. Throws
/// BoundBlowup when any propagated bound exceeds 1e6 in magnitude.
model::ModelSource build_nn_verification(const NeuralNetSpec& nn, std::size_t target_gen,
                                         BoundSide side);

}  // namespace qbend::bench
