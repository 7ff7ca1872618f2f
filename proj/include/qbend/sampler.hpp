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
#include <vector>

#include "qbend/qubo.hpp"

namespace qbend::sampler {

struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Sample {
    std::vector<std::uint8_t> bits;
    double energy = 0.0;
    std::size_t read_index = 0;
    std::uint64_t chain_seed = 0;
};

/// Always sorted ascending by (energy, lexicographic bits). Energies are
/// recomputed from the QuboProgram after the chains finish, never carried.
struct SampleSet {
    std::vector<Sample> samples;

    /// first occurrence of each distinct assignment, in sorted order
    std::vector<const Sample*> distinct() const;
};

struct AnnealSchedule {
    std::size_t reads = 64;
    std::size_t sweeps = 2000;
    double beta_init = 0.1;   // scaled by max |Q| at run time
    double beta_final = 10.0;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

/// Multi-read single-spin-flip Metropolis annealer with a geometric beta
/// schedule. Deterministic for a given (q, sched): per-read seeds come from
/// a counter-based split of the master seed, so reads may run concurrently.
SampleSet sample_sa(const qubo::QuboProgram& q, const AnnealSchedule& sched);

/// Exhaustive 2^N scan; keeps the `keep` lowest-energy assignments.
SampleSet sample_exact(const qubo::QuboProgram& q, int limit = 24, std::size_t keep = 16);

/// Decodes in energy order, drops penalty-violating and duplicate-z samples,
/// returns at most R candidates. If nothing passes the penalty check the
/// single best sample is returned with feasible = false so the caller can
/// still cut at it.
std::vector<qubo::DecodedSample> top_r_feasible(const SampleSet& set,
                                                const qubo::BitLayout& layout,
                                                const benders::CutPool& pool,
                                                const model::MixedBinaryProgram& p, std::size_t R);

}  // namespace qbend::sampler
