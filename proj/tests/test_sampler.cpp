// Copyright 2026 The chromanneal Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.


#include <algorithm>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "chromanneal/eval.hpp"
#include "chromanneal/learn.hpp"
#include "chromanneal/sampler.hpp"

using namespace chromanneal;

namespace {

IsingModel random_ising(std::size_t n, Rng &rng, double density = 1.0) {
    IsingModel m;
    m.n_vars = n;
    for (std::size_t i = 0; i < n; ++i) m.h.push_back(uniform_real(rng, -1, 1));
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (uniform01(rng) < density) m.couplings.push_back({i, j, uniform_real(rng, -1, 1)});
    return m;
}

IsingModel single_spin(double h) {
    IsingModel m;
    m.n_vars = 1;
    m.h = {h};
    return m;
}

std::vector<double> histogram(const std::vector<State> &xs, std::size_t n) {
    std::vector<double> f(std::size_t{1} << n, 0.0);
    for (const auto &x : xs) f[state_code(x)] += 1.0 / static_cast<double>(xs.size());
    return f;
}

double total_variation(const std::vector<double> &a, const std::vector<double> &b) {
    double tv = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) tv += std::abs(a[k] - b[k]) / 2;
    return tv;
}

template <typename Fn>
std::vector<State> repeat(std::size_t n, std::uint64_t seed, Fn &&fn) {
    std::vector<State> out;
    for (std::size_t k = 0; k < n; ++k) {
        auto rng = make_rng(derive_seed(seed, k));
        out.push_back(fn(rng));
    }
    return out;
}

}  // namespace

TEST(Schedule, DefaultIsValidAndMonotone) {
    const auto s = default_schedule();
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(s.s.size(), 21u);
    EXPECT_DOUBLE_EQ(s.a(1.0), 0.0);
    EXPECT_DOUBLE_EQ(s.b(1.0), 1.0);
    EXPECT_GT(s.a(0.0), s.b(0.0));
    EXPECT_DOUBLE_EQ(s.a(0.025), (s.A[0] + s.A[1]) / 2);
}

TEST(Schedule, CsvRoundTripAndSeparateFiles) {
    const auto s = default_schedule();
    std::ostringstream os;
    write_schedule_csv(os, s);
    std::istringstream is(os.str());
    const auto back = read_schedule_csv(is);
    EXPECT_EQ(back.s, s.s);
    EXPECT_EQ(back.A, s.A);
    EXPECT_EQ(back.B, s.B);
    std::istringstream a("s,A\n0,2\n1,0\n"), b("0,0.1\n0.5,0.5\n1,1\n");
    const auto merged = read_schedule_csv(a, b);
    EXPECT_EQ(merged.s, (std::vector<double>{0, 0.5, 1}));
    EXPECT_EQ(merged.A, (std::vector<double>{2, 1, 0}));
    std::istringstream bad("0,1,0\n0.5,1.5,0.5\n1,0,1\n");
    EXPECT_THROW(read_schedule_csv(bad), Error);
    std::istringstream shortrow("0,1\n");
    EXPECT_THROW(read_schedule_csv(shortrow), ParseError);
}

TEST(Schedule, SweepsForTime) {
    EXPECT_EQ(sweeps_for_time(1.0), 1000u);
    EXPECT_EQ(sweeps_for_time(0.0001), 1u);
    EXPECT_EQ(sweeps_for_time(2.5, 100), 250u);
    EXPECT_THROW(sweeps_for_time(0.0), Error);
}

TEST(ReversePoints, Shape) {
    ReverseSchedule rs;
    rs.s_reverse = 0.6;
    rs.t_reverse_ns = 5;  // 5 sweeps per leg at 1000 sweeps per microsecond
    const auto p = reverse_points(rs);
    ASSERT_EQ(p.size(), 10u);
    EXPECT_DOUBLE_EQ(p[4], 0.6);
    EXPECT_DOUBLE_EQ(p.back(), 1.0);
    EXPECT_LT(p[3], p[2]);
    rs.s_reverse = 0.0;
    EXPECT_THROW(reverse_points(rs), Error);
}

TEST(SimulatedAnneal, SingleSpinGroundState) {
    const CompiledModel m(single_spin(1.0));
    AnnealParams p;
    p.beta = 5.0;
    p.sweeps = 100;
    const auto xs = repeat(1000, 1, [&](Rng &r) { return simulated_anneal(m, p, r); });
    const auto down = std::count_if(xs.begin(), xs.end(), [](const State &x) { return x[0] < 0; });
    EXPECT_GT(down, 990);
}

TEST(SimulatedAnneal, FerromagneticPairAligns) {
    IsingModel f;
    f.n_vars = 2;
    f.h = {0, 0};
    f.couplings = {{1, 0, -1}};
    const CompiledModel m(f);
    AnnealParams p;
    p.beta = 10.0;
    p.sweeps = 200;
    for (const auto &x : repeat(500, 2, [&](Rng &r) { return simulated_anneal(m, p, r); })) EXPECT_EQ(x[0], x[1]);
}

TEST(SimulatedAnneal, BeatsRandomStates) {
    auto rng = make_rng(3);
    const auto model = random_ising(6, rng);
    const CompiledModel m(model);
    std::vector<double> all;
    for (std::uint64_t k = 0; k < 64; ++k) all.push_back(ising_energy(model, enumerated_state(k, 6, Vartype::spin)));
    std::nth_element(all.begin(), all.begin() + 32, all.end());
    const double median = all[32];
    AnnealParams p;
    p.beta = 3.0;
    p.sweeps = 200;
    for (const auto &x : repeat(100, 3, [&](Rng &r) { return simulated_anneal(m, p, r); }))
        EXPECT_LE(ising_energy(model, x), median);
}

TEST(SimulatedQuantumAnneal, NoTransverseWeightMatchesClassicalAnneal) {
    const auto model = single_spin(0.5);
    const CompiledModel m(model);
    AnnealSchedule flat = default_schedule();
    std::fill(flat.A.begin(), flat.A.end(), 0.0);
    AnnealParams p;
    p.sweeps = 200;
    p.slices = 8;
    const auto q = repeat(3000, 4, [&](Rng &r) { return simulated_quantum_anneal(m, flat, p, r); });
    const auto c = repeat(3000, 5, [&](Rng &r) { return simulated_anneal(m, p, r); });
    EXPECT_LE(total_variation(histogram(q, 1), histogram(c, 1)), 0.05);
}

TEST(SimulatedQuantumAnneal, SingleSpinGroundStateDominates) {
    // exact final distribution: P(-1) = 1 / (1 + e^{-2 beta}); above 0.95 needs beta > 1.47
    const CompiledModel m(single_spin(1.0));
    AnnealParams p;
    p.beta = 3.0;
    p.sweeps = 500;
    const auto xs = repeat(1000, 6, [&](Rng &r) { return simulated_quantum_anneal(m, default_schedule(), p, r); });
    const auto down = std::count_if(xs.begin(), xs.end(), [](const State &x) { return x[0] < 0; });
    EXPECT_GT(down, 950);
}

TEST(SimulatedQuantumAnneal, FrustratedTriangle) {
    IsingModel t;
    t.n_vars = 3;
    t.h = {0, 0, 0};
    t.couplings = {{1, 0, 1}, {2, 0, 1}, {2, 1, 1}};
    const CompiledModel m(t);
    AnnealParams p;
    p.beta = 5.0;
    p.sweeps = 500;
    std::map<std::uint64_t, int> seen;
    for (const auto &x : repeat(600, 7, [&](Rng &r) { return simulated_quantum_anneal(m, default_schedule(), p, r); })) {
        EXPECT_DOUBLE_EQ(ising_energy(t, x), -1.0);
        ++seen[state_code(x)];
    }
    EXPECT_EQ(seen.size(), 6u);
}

TEST(ReverseAnneal, FullDepthOneIsIdentity) {
    auto rng = make_rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = random_ising(8, rng, 0.5);
        const CompiledModel m(model);
        ReverseSchedule rs;
        rs.s_reverse = 1.0;
        rs.initial = random_state(8, Vartype::spin, rng);
        EXPECT_EQ(reverse_anneal(m, default_schedule(), rs, AnnealParams{}, rng), rs.initial);
    }
}

TEST(ReverseAnneal, ExploresLessThanForwardAnneal) {
    auto rng = make_rng(9);
    const auto model = random_ising(10, rng, 0.5);
    State templ = random_state(10, Vartype::spin, rng);
    IsingModel biased = model;
    for (std::size_t i = 0; i < 10; ++i) biased.h[i] -= 0.5 * templ[i];
    const CompiledModel m(biased);
    AnnealParams p;
    p.sweeps = 200;
    p.slices = 8;
    ReverseSchedule rs;
    rs.s_reverse = 0.4;
    rs.t_reverse_ns = 20;
    rs.initial = templ;
    auto mean_distance = [&](const std::vector<State> &xs) {
        double d = 0;
        for (const auto &x : xs) d += static_cast<double>(hamming(templ, x)) / 10.0 / static_cast<double>(xs.size());
        return d;
    };
    const double rev = mean_distance(repeat(100, 10, [&](Rng &r) { return reverse_anneal(m, default_schedule(), rs, p, r); }));
    const double fwd = mean_distance(repeat(100, 11, [&](Rng &r) { return simulated_quantum_anneal(m, default_schedule(), p, r); }));
    EXPECT_GT(rev, 0.0);
    EXPECT_LT(rev, fwd);
}

TEST(ReverseAnneal, ShallowLongReversalForgetsTheStart) {
    auto rng = make_rng(12);
    const auto model = random_ising(4, rng);
    const CompiledModel m(model);
    AnnealParams p;
    p.slices = 8;
    p.sweeps = 1000;
    ReverseSchedule rs;
    rs.s_reverse = 0.01;
    rs.t_reverse_ns = 500;
    rs.initial = {1, -1, 1, -1};
    const auto rev = repeat(2000, 13, [&](Rng &r) { return reverse_anneal(m, default_schedule(), rs, p, r); });
    const auto fwd = repeat(2000, 14, [&](Rng &r) { return simulated_quantum_anneal(m, default_schedule(), p, r); });
    EXPECT_LE(total_variation(histogram(rev, 4), histogram(fwd, 4)), 0.1);
}

TEST(ReverseAnneal, RejectsBadInitialState) {
    const CompiledModel m(single_spin(1.0));
    ReverseSchedule rs;
    rs.initial = {1, 1};
    auto rng = make_rng(1);
    EXPECT_THROW(reverse_anneal(m, default_schedule(), rs, AnnealParams{}, rng), Error);
    rs.initial = {0};
    EXPECT_THROW(reverse_anneal(m, default_schedule(), rs, AnnealParams{}, rng), Error);
}

TEST(SampleMany, AggregatesAndIsThreadIndependent) {
    auto rng = make_rng(15);
    const auto model = random_ising(6, rng);
    SamplerConfig cfg;
    cfg.anneal_time_us = 0.1;
    cfg.threads = 1;
    const auto a = sample_many(model, 50, cfg, 3);
    cfg.threads = 4;
    const auto b = sample_many(model, 50, cfg, 3);
    EXPECT_EQ(a.total_occurrences(), 50);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        EXPECT_EQ(a.records[k].state, b.records[k].state);
        EXPECT_EQ(a.records[k].occurrences, b.records[k].occurrences);
    }
    for (std::size_t k = 1; k < a.records.size(); ++k) EXPECT_LE(a.records[k - 1].energy, a.records[k].energy);
}

TEST(SampleMany, DeterministicBackendGivesOneRecord) {
    // a huge field pins the spin: every anneal returns the same state
    SamplerConfig cfg;
    cfg.backend = Backend::sa;
    cfg.anneal.beta = 5.0;
    cfg.anneal_time_us = 0.05;
    const auto s = sample_many(single_spin(50.0), 100, cfg, 1);
    ASSERT_EQ(s.records.size(), 1u);
    EXPECT_EQ(s.records[0].occurrences, 100);
}

TEST(SampleCluster, ReproducesSequentialAnneals) {
    auto rng = make_rng(16);
    const auto model = random_ising(5, rng, 0.6);
    for (auto backend : {Backend::sa, Backend::sqa, Backend::boltzmann}) {
        SamplerConfig cfg;
        cfg.backend = backend;
        cfg.anneal_time_us = 0.05;
        const auto seq = sample_many(model, 20, cfg, 77);
        const auto clu = sample_cluster(model, 5, 4, cfg, 77);
        ASSERT_EQ(seq.records.size(), clu.records.size()) << to_string(backend);
        for (std::size_t k = 0; k < seq.records.size(); ++k) {
            EXPECT_EQ(seq.records[k].state, clu.records[k].state);
            EXPECT_EQ(seq.records[k].occurrences, clu.records[k].occurrences);
        }
    }
}

TEST(SampleEmbedded, IntactChainsGiveLogicalEnergies) {
    IsingModel m;
    m.n_vars = 2;
    m.h = {0.3, -0.2};
    m.couplings = {{1, 0, -0.5}};
    // chains on a path 0-1-2-3: {0,1} and {2,3}
    Graph path(4, {{0, 1}, {1, 2}, {2, 3}});
    Embedding e;
    e.chains = {{0, 1}, {2, 3}};
    const auto phys = embed_ising(m, e, path, 2.0);
    SamplerConfig cfg;
    cfg.anneal.beta = 3.0;
    cfg.anneal_time_us = 0.2;
    const auto s = sample_embedded(m, phys, 100, cfg, 5);
    EXPECT_EQ(s.total_occurrences(), 100);
    for (const auto &r : s.records) EXPECT_DOUBLE_EQ(r.energy, ising_energy(m, r.state));
    EXPECT_LT(s.chain_break_rate(), 0.05);
    EXPECT_DOUBLE_EQ(s.params.chain_strength, 2.0);
}

TEST(Backend, Parsing) {
    EXPECT_EQ(parse_backend("reverse"), Backend::reverse);
    EXPECT_THROW(parse_backend("qpu"), Error);
    EXPECT_EQ(parse_readout("random_slice"), Readout::random_slice);
}
