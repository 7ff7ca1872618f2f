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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "qbend/sampler.hpp"

using namespace qbend;
using namespace qbend::sampler;
using qubo::QuboProgram;

namespace {

QuboProgram random_qubo(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> c(-9, 9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    QuboProgram q;
    q.dimension = n;
    for (std::size_t i = 0; i < n; ++i) {
        q.add(i, i, c(rng));
        for (std::size_t j = i + 1; j < n; ++j)
            if (unit(rng) < 0.4) q.add(i, j, c(rng));
    }
    q.offset = c(rng);
    return q;
}

// independent energy evaluation, deliberately not reusing QuboProgram::energy
double naive_energy(const QuboProgram& q, const std::vector<std::uint8_t>& bits) {
    double e = q.offset;
    for (std::size_t i = 0; i < q.dimension; ++i)
        for (std::size_t j = i; j < q.dimension; ++j) {
            auto it = q.coeff.find({i, j});
            if (it != q.coeff.end() && bits[i] && bits[j]) e += it->second;
        }
    return e;
}

double ground_energy(const QuboProgram& q) {
    double best = 1e300;
    std::vector<std::uint8_t> bits(q.dimension, 0);
    for (std::uint64_t m = 0; m < (1ull << q.dimension); ++m) {
        for (std::size_t i = 0; i < q.dimension; ++i) bits[i] = (m >> i) & 1u;
        best = std::min(best, naive_energy(q, bits));
    }
    return best;
}

}  // namespace

TEST_CASE("one-bit qubo reads the sign") {
    QuboProgram q;
    q.dimension = 1;
    q.add(0, 0, 5.0);
    q.offset = 2.0;
    AnnealSchedule sched;
    sched.reads = 4;
    sched.sweeps = 50;
    auto set = sample_sa(q, sched);
    CHECK(set.samples.front().bits == std::vector<std::uint8_t>{0});
    CHECK(set.samples.front().energy == doctest::Approx(2.0));
}

TEST_CASE("all-negative diagonal drives every bit on") {
    QuboProgram q;
    q.dimension = 6;
    for (std::size_t i = 0; i < 6; ++i) q.add(i, i, -1.0 - double(i));
    AnnealSchedule sched;
    sched.reads = 8;
    sched.sweeps = 200;
    auto set = sample_sa(q, sched);
    CHECK(set.samples.front().bits == std::vector<std::uint8_t>(6, 1));
}

TEST_CASE("schedule validation") {
    AnnealSchedule bad;
    bad.reads = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.reads = 1;
    bad.beta_init = 5.0;
    bad.beta_final = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("exact enumeration: dimension one and degenerate ties") {
    QuboProgram q;
    q.dimension = 1;
    q.add(0, 0, 3.0);
    auto set = sample_exact(q);
    REQUIRE(set.samples.size() == 2);
    CHECK(set.samples[0].energy == doctest::Approx(0.0));
    CHECK(set.samples[1].energy == doctest::Approx(3.0));

    // symmetric two-bit instance: 01 and 10 tie, lexicographic order
    QuboProgram sym;
    sym.dimension = 2;
    sym.add(0, 0, -1.0);
    sym.add(1, 1, -1.0);
    sym.add(0, 1, 2.0);
    auto tied = sample_exact(sym);
    REQUIRE(tied.samples.size() >= 2);
    CHECK(tied.samples[0].energy == doctest::Approx(-1.0));
    CHECK(tied.samples[1].energy == doctest::Approx(-1.0));
    CHECK(tied.samples[0].bits == std::vector<std::uint8_t>{0, 1});
    CHECK(tied.samples[1].bits == std::vector<std::uint8_t>{1, 0});

    QuboProgram big;
    big.dimension = 30;
    CHECK_THROWS_AS(sample_exact(big), TooLarge);
}

TEST_CASE("exact enumeration matches a naive evaluator on random instances") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        auto q = random_qubo(rng, 10);
        auto set = sample_exact(q, 24, 8);
        REQUIRE(set.samples.size() == 8);
        CHECK(set.samples.front().energy == doctest::Approx(ground_energy(q)));
        for (const auto& s : set.samples)
            CHECK(s.energy == doctest::Approx(naive_energy(q, s.bits)));
        CHECK(std::is_sorted(set.samples.begin(), set.samples.end(),
                             [](const Sample& a, const Sample& b) { return a.energy < b.energy; }));
    }
}

TEST_CASE("annealer is deterministic and never beats the exact ground state") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        auto q = random_qubo(rng, 12);
        AnnealSchedule sched;
        sched.reads = 16;
        sched.sweeps = 200;
        sched.seed = 1234 + trial;
        auto a = sample_sa(q, sched);
        auto b = sample_sa(q, sched);
        REQUIRE(a.samples.size() == b.samples.size());
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            CHECK(a.samples[i].bits == b.samples[i].bits);
            CHECK(a.samples[i].energy == b.samples[i].energy);
        }
        CHECK(a.samples.front().energy >= ground_energy(q) - 1e-9);
    }
}

TEST_CASE("annealer finds the ground state of most 12-bit instances") {
    std::mt19937_64 rng(2025);
    int hits = 0;
    const int total = 60;
    for (int trial = 0; trial < total; ++trial) {
        auto q = random_qubo(rng, 12);
        AnnealSchedule sched;
        sched.seed = trial;
        auto set = sample_sa(q, sched);
        if (std::abs(set.samples.front().energy - ground_energy(q)) < 1e-9) ++hits;
    }
    CHECK(hits * 100 >= total * 95);
}

TEST_CASE("doubling sweeps never worsens the median best energy") {
    std::mt19937_64 rng(31);
    std::vector<double> short_best, long_best;
    for (int trial = 0; trial < 50; ++trial) {
        auto q = random_qubo(rng, 14);
        AnnealSchedule sched;
        sched.reads = 4;
        sched.sweeps = 50;
        sched.seed = trial;
        short_best.push_back(sample_sa(q, sched).samples.front().energy);
        sched.sweeps = 100;
        long_best.push_back(sample_sa(q, sched).samples.front().energy);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    CHECK(median(long_best) <= median(short_best) + 1e-9);
}

TEST_CASE("distinct view collapses duplicate assignments") {
    QuboProgram q;
    q.dimension = 2;
    q.add(0, 0, 1.0);
    AnnealSchedule sched;
    sched.reads = 32;
    sched.sweeps = 100;
    auto set = sample_sa(q, sched);
    auto d = set.distinct();
    CHECK(d.size() <= 4);
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i]->bits != d[i - 1]->bits);
}
