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

#include "qbend/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <set>
#include <thread>

namespace qbend::sampler {

using qubo::QuboProgram;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// symmetric neighbor lists: linear[i] = Q[i][i], adj[i] = {(j, Q[i][j])}
struct Graph {
    std::vector<double> linear;
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;
    double max_abs = 0.0;

    explicit Graph(const QuboProgram& q) : linear(q.dimension, 0.0), adj(q.dimension) {
        for (const auto& [key, v] : q.coeff) {
            max_abs = std::max(max_abs, std::abs(v));
            if (key.first == key.second) {
                linear[key.first] = v;
            } else {
                adj[key.first].emplace_back(key.second, v);
                adj[key.second].emplace_back(key.first, v);
            }
        }
    }

    // energy change of flipping bit i in state `bits`
    double flip_delta(const std::vector<std::uint8_t>& bits, std::size_t i) const {
        double field = linear[i];
        for (const auto& [j, v] : adj[i])
            if (bits[j]) field += v;
        return bits[i] ? -field : field;
    }
};

Sample run_read(const QuboProgram& q, const Graph& g, const AnnealSchedule& sched,
                std::size_t read) {
    const std::uint64_t chain_seed = splitmix64(sched.seed ^ (0xa5a5a5a5ull + read));
    std::mt19937_64 rng(chain_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::uint8_t> bits(q.dimension);
    for (auto& b : bits) b = rng() & 1u;

    // energy deltas scale with the coefficient magnitude, so the schedule is
    // normalized by max |Q| to keep acceptance probabilities comparable
    const double scale = g.max_abs > 0.0 ? g.max_abs : 1.0;
    const double b0 = sched.beta_init / scale;
    const double b1 = sched.beta_final / scale;
    const double ratio =
        sched.sweeps > 1 ? std::pow(b1 / b0, 1.0 / static_cast<double>(sched.sweeps - 1)) : 1.0;

    double beta = b0;
    for (std::size_t sweep = 0; sweep < sched.sweeps; ++sweep, beta *= ratio) {
        for (std::size_t i = 0; i < q.dimension; ++i) {
            const double delta = g.flip_delta(bits, i);
            if (delta <= 0.0 || unit(rng) < std::exp(-beta * delta)) bits[i] ^= 1u;
        }
    }
    // quench: greedy descent until the state is a local minimum
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i < q.dimension; ++i)
            if (g.flip_delta(bits, i) < 0.0) {
                bits[i] ^= 1u;
                improved = true;
            }
    }
    return Sample{std::move(bits), 0.0, read, chain_seed};
}

void sort_samples(std::vector<Sample>& samples) {
    std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        return a.bits < b.bits;
    });
}

}  // namespace

void AnnealSchedule::validate() const {
    if (reads < 1 || sweeps < 1) throw std::invalid_argument("reads and sweeps must be >= 1");
    if (!(beta_final > beta_init) || !(beta_init > 0.0))
        throw std::invalid_argument("need 0 < beta_init < beta_final");
}

std::vector<const Sample*> SampleSet::distinct() const {
    std::vector<const Sample*> out;
    std::set<std::vector<std::uint8_t>> seen;
    for (const auto& s : samples)
        if (seen.insert(s.bits).second) out.push_back(&s);
    return out;
}

SampleSet sample_sa(const QuboProgram& q, const AnnealSchedule& sched) {
    sched.validate();
    const Graph g(q);

    SampleSet set;
    set.samples.resize(sched.reads);
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), sched.reads);
    if (workers > 1 && q.dimension > 16) {
        std::vector<std::future<void>> jobs;
        for (std::size_t w = 0; w < workers; ++w)
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t r = w; r < sched.reads; r += workers)
                    set.samples[r] = run_read(q, g, sched, r);
            }));
        for (auto& j : jobs) j.get();
    } else {
        for (std::size_t r = 0; r < sched.reads; ++r) set.samples[r] = run_read(q, g, sched, r);
    }
    for (auto& s : set.samples) s.energy = q.energy(s.bits);
    sort_samples(set.samples);
    return set;
}

SampleSet sample_exact(const QuboProgram& q, int limit, std::size_t keep) {
    if (q.dimension > static_cast<std::size_t>(limit))
        throw TooLarge("QUBO dimension exceeds the exact enumeration limit");

    const Graph g(q);
    std::vector<std::uint8_t> bits(q.dimension, 0);
    double running = q.offset;

    // worst kept energy so far, with a drift margin; exact energies are
    // recomputed before anything is stored
    std::vector<Sample> kept;
    auto consider = [&](double estimate) {
        if (kept.size() >= keep) {
            if (estimate > kept.back().energy + 1e-9) return;
        }
        Sample s{bits, q.energy(bits), 0, 0};
        kept.push_back(std::move(s));
        sort_samples(kept);
        if (kept.size() > keep) kept.pop_back();
    };

    consider(running);
    const std::uint64_t total = q.dimension == 0 ? 1 : (1ull << q.dimension);
    for (std::uint64_t n = 1; n < total; ++n) {
        // Gray-code order: exactly one bit differs between steps
        const std::size_t i = static_cast<std::size_t>(std::countr_zero(n));
        running += g.flip_delta(bits, i);
        bits[i] ^= 1u;
        if ((n & 0xfffull) == 0) running = q.energy(bits);  // cancel drift
        consider(running);
    }
    SampleSet set;
    set.samples = std::move(kept);
    return set;
}

std::vector<qubo::DecodedSample> top_r_feasible(const SampleSet& set,
                                                const qubo::BitLayout& layout,
                                                const benders::CutPool& pool,
                                                const model::MixedBinaryProgram& p,
                                                std::size_t R) {
    std::vector<qubo::DecodedSample> out;
    std::set<std::vector<std::uint8_t>> seen_z;
    for (const Sample* s : set.distinct()) {
        auto d = qubo::decode(s->bits, layout, pool, p);
        if (!d.feasible) continue;
        if (!seen_z.insert(d.z).second) continue;
        out.push_back(std::move(d));
        if (out.size() >= R) break;
    }
    if (out.empty() && !set.samples.empty())
        out.push_back(qubo::decode(set.samples.front().bits, layout, pool, p));
    return out;
}

}  // namespace qbend::sampler
