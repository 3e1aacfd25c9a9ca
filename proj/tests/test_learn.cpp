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


#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "chromanneal/learn.hpp"

using namespace chromanneal;

namespace {

double acceptance_rate(double dE, double beta, int trials = 20000) {
    auto rng = make_rng(1);
    int n = 0;
    for (int k = 0; k < trials; ++k) n += metropolis_accept(dE, beta, rng);
    return static_cast<double>(n) / trials;
}

CartesianParams random_params(std::size_t M, std::size_t L, double range, Rng &rng) {
    CartesianParams p(M, L);
    for (auto *v : {&p.q, &p.r, &p.s})
        for (auto &x : *v) x = uniform_real(rng, -range, range);
    return p;
}

}  // namespace

TEST(Metropolis, AcceptanceProbabilities) {
    EXPECT_EQ(acceptance_rate(-1.0, 1.0), 1.0);
    EXPECT_EQ(acceptance_rate(0.0, 1.0), 1.0);
    EXPECT_NEAR(acceptance_rate(std::log(2.0), 1.0), 0.5, 0.015);
}

TEST(BoltzmannSample, ZeroModelMarginals) {
    QuboModel q;
    q.n_vars = 3;
    q.linear = {0, 0, 0};
    const CompiledModel m(q);
    auto rng = make_rng(2);
    std::vector<int> on(3);
    for (int k = 0; k < 10000; ++k) {
        const auto x = boltzmann_sample(m, 30, 1.0, rng);
        for (int i = 0; i < 3; ++i) on[i] += x[i];
    }
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(on[i] / 1e4, 0.5, 0.02);
}

TEST(BoltzmannSample, StrongPenaltyKeepsVariableOff) {
    // e^-10 / (1 + e^-10) is about 4.5e-5
    QuboModel q;
    q.n_vars = 1;
    q.linear = {10.0};
    const CompiledModel m(q);
    auto rng = make_rng(3);
    int on = 0;
    for (int k = 0; k < 10000; ++k) on += boltzmann_sample(m, 20, 1.0, rng)[0];
    EXPECT_LT(on / 1e4, 0.01);
}

TEST(BoltzmannSample, MatchesExactDistribution) {
    auto rng = make_rng(4);
    QuboModel q;
    q.n_vars = 6;
    q.linear.resize(6);
    for (auto &v : q.linear) v = uniform_real(rng, -1, 1);
    for (std::size_t i = 1; i < 6; ++i)
        for (std::size_t j = 0; j < i; ++j) q.quadratic.push_back({i, j, uniform_real(rng, -1, 1)});
    const CompiledModel m(q);
    const auto exact = exact_boltzmann(m, 1.0);
    // 10^5 samples of 10 sweeps each = 10^6 sweeps
    std::vector<double> freq(64, 0.0);
    for (int k = 0; k < 100000; ++k) freq[state_code(boltzmann_sample(m, 60, 1.0, rng))] += 1e-5;
    double tv = 0.0;
    for (int k = 0; k < 64; ++k) tv += std::abs(freq[k] - exact[k]) / 2;
    EXPECT_LE(tv, 0.02);
}

TEST(ExactStats, SingleNucleosomeByHand) {
    // one marker, one nucleosome, linear a: mu = e^-a / (1 + e^-a)
    QuboModel q;
    q.n_vars = 1;
    q.linear = {0.7};
    q.shape = ModelShape{1, 1, 0};
    const auto s = exact_stats(q, 1.0);
    EXPECT_NEAR(s.mu[0], std::exp(-0.7) / (1 + std::exp(-0.7)), 1e-12);
}

TEST(Learn, RecoversMomentsOfKnownModel) {
    auto rng = make_rng(6);
    const ModelShape shape{2, 4, 1, Boundary::periodic};
    const auto truth = build_qubo(shape, random_params(2, 1, 1.0, rng));
    const auto target = exact_stats(truth, 1.0);
    LearnConfig cfg;
    cfg.seed = 17;
    cfg.error_threshold = 0.06;
    cfg.lr_decay = 0.02;
    cfg.threads = 1;
    const auto res = learn_params(target, shape, cfg);
    const auto got = exact_stats(build_qubo(shape, res.params), 1.0);
    const auto a = target.flatten(), b = got.flatten();
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 0.05) << "statistic " << k;
}

TEST(Learn, AllZeroTargetPenalisesActivation) {
    const ModelShape shape{2, 4, 1, Boundary::periodic};
    StatsSummary target;
    target.markers = 2;
    target.max_distance = 1;
    target.boundary = Boundary::periodic;
    target.mu = {0, 0};
    target.rho_intra = {0, 0, 0, 0};
    target.rho_inter = {0, 0};
    LearnConfig cfg;
    cfg.seed = 3;
    cfg.max_iters = 300;
    cfg.error_threshold = 0.04;
    cfg.threads = 1;
    const auto res = learn_params(target, shape, cfg);
    for (double q : res.params.q) EXPECT_GT(q, 2.0);
    const auto s = exact_stats(build_qubo(shape, res.params), 1.0);
    for (double m : s.mu) EXPECT_LT(m, cfg.error_threshold);
    // smoothed error trace is non-increasing
    const auto &t = res.trace;
    ASSERT_GE(t.size(), 5u);
    double prev = 1e300;
    for (std::size_t k = 0; k + 5 <= t.size(); k += 5) {
        double w = 0;
        for (std::size_t j = k; j < k + 5; ++j) w += t[j].error.total / 5;
        EXPECT_LE(w, prev + 1e-12);
        prev = w;
    }
}

TEST(Learn, DeterministicForSeed) {
    const ModelShape shape{2, 3, 1, Boundary::open};
    auto rng = make_rng(8);
    const auto target = exact_stats(build_qubo(shape, random_params(2, 1, 1.0, rng)), 1.0);
    LearnConfig cfg;
    cfg.seed = 99;
    cfg.max_iters = 20;
    cfg.threads = 2;
    const auto a = learn_params(target, shape, cfg), b = learn_params(target, shape, cfg);
    EXPECT_EQ(a.params, b.params);
    cfg.threads = 1;
    EXPECT_EQ(learn_params(target, shape, cfg).params, a.params);
}

TEST(Learn, RejectsMismatchedTarget) {
    StatsSummary target;
    target.markers = 3;
    target.max_distance = 1;
    EXPECT_THROW(learn_params(target, ModelShape{2, 4, 1}, LearnConfig{}), Error);
}
