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

#pragma once

// Metropolis sampling at fixed inverse temperature and moment-matching parameter learning.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"
#include "model.hpp"
#include "shape.hpp"
#include "stats.hpp"

namespace chromanneal {

// Single-site Metropolis acceptance for an energy change dE.
inline bool metropolis_accept(double dE, double beta, Rng &rng) {
    if (dE <= 0.0) return true;
    return uniform01(rng) < std::exp(-beta * dE);
}

inline void flip(State &x, std::size_t i, Vartype vt) {
    if (vt == Vartype::binary)
        x[i] = x[i] ? 0 : 1;
    else
        x[i] = static_cast<Value>(-x[i]);
}

// Picks one variable uniformly and flips it under the Metropolis rule. Returns true on acceptance.
inline bool metropolis_step(const CompiledModel &model, State &x, double beta, Rng &rng) {
    const auto i = uniform_index(rng, model.size());
    if (!metropolis_accept(model.delta_energy(x, i), beta, rng)) return false;
    flip(x, i, model.vartype());
    return true;
}

inline State random_state(std::size_t n, Vartype vt, Rng &rng) {
    State x(n);
    for (auto &v : x) {
        const auto s = random_spin(rng);
        v = vt == Vartype::spin ? s : spin_to_binary(s);
    }
    return x;
}

// n_steps single-variable Metropolis updates from a uniformly random state.
inline State boltzmann_sample(const CompiledModel &model, std::size_t n_steps, double beta, Rng &rng) {
    if (n_steps < 1) throw Error("boltzmann_sample: n_steps must be >= 1");
    State x = random_state(model.size(), model.vartype(), rng);
    for (std::size_t t = 0; t < n_steps; ++t) metropolis_step(model, x, beta, rng);
    return x;
}

// Exact Boltzmann probabilities by enumeration. State k assigns bit i of k to variable i
// (1 = active / spin up).
inline constexpr std::size_t max_enumeration_vars = 24;

inline State enumerated_state(std::uint64_t k, std::size_t n, Vartype vt) {
    State x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Value bit = static_cast<Value>((k >> i) & 1u);
        x[i] = vt == Vartype::binary ? bit : binary_to_spin(bit);
    }
    return x;
}

inline std::uint64_t state_code(const State &x) {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0) k |= std::uint64_t{1} << i;
    return k;
}

inline std::vector<double> exact_boltzmann(const CompiledModel &model, double beta) {
    const auto n = model.size();
    if (n > max_enumeration_vars) throw Error("exact_boltzmann: too many variables to enumerate");
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<double> logw(count);
    double top = -INFINITY;
    for (std::uint64_t k = 0; k < count; ++k) {
        logw[k] = -beta * model.energy(enumerated_state(k, n, model.vartype()));
        top = std::max(top, logw[k]);
    }
    double z = 0.0;
    for (auto &w : logw) z += (w = std::exp(w - top));
    for (auto &w : logw) w /= z;
    return logw;
}

// Moments of the exact Boltzmann distribution of a Cartesian QUBO.
inline StatsSummary exact_stats(const QuboModel &qubo, double beta,
                                InterNormalization norm = InterNormalization::term_count) {
    if (!qubo.shape) throw Error("exact_stats: model has no shape");
    const auto &shape = *qubo.shape;
    const CompiledModel model(qubo);
    const auto p = exact_boltzmann(model, beta);
    StatsSummary out;
    out.markers = shape.markers;
    out.max_distance = shape.max_distance;
    out.boundary = shape.boundary;
    out.normalization = norm;
    out.mu.assign(shape.markers, 0.0);
    out.rho_intra.assign(shape.markers * shape.markers, 0.0);
    out.rho_inter.assign(shape.markers * shape.max_distance, 0.0);
    for (std::uint64_t k = 0; k < p.size(); ++k) {
        if (p[k] == 0.0) continue;
        StatsAccumulator acc(shape.markers, shape.max_distance, shape.boundary, norm);
        acc.add_state(enumerated_state(k, model.size(), Vartype::binary), Vartype::binary, shape.nucleosomes);
        const auto s = acc.summary();
        for (std::size_t a = 0; a < s.mu.size(); ++a) out.mu[a] += p[k] * s.mu[a];
        for (std::size_t a = 0; a < s.rho_intra.size(); ++a) out.rho_intra[a] += p[k] * s.rho_intra[a];
        for (std::size_t a = 0; a < s.rho_inter.size(); ++a) out.rho_inter[a] += p[k] * s.rho_inter[a];
    }
    return out;
}

struct LearnConfig {
    double beta = 1.0;
    std::size_t n_steps = 0;    // Metropolis steps per sample; 0 means 50 per variable
    std::size_t n_samples = 400;
    double lr_mu = 1.0;
    double lr_intra = 1.0;
    double lr_inter = 1.0;
    double lr_decay = 0.0;      // learning rates scale as 1 / (1 + decay * iteration)
    double weight_mu = 1.0;
    double weight_intra = 1.0;
    double weight_inter = 1.0;
    double error_threshold = 0.05;
    std::size_t max_iters = 500;
    double init_range = 0.1;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    void validate() const {
        if (!(beta > 0.0)) throw Error("learn: beta must be > 0");
        if (n_samples < 1) throw Error("learn: n_samples must be >= 1");
        if (max_iters < 1) throw Error("learn: max_iters must be >= 1");
        if (!(error_threshold > 0.0)) throw Error("learn: error_threshold must be > 0");
        for (double r : {lr_mu, lr_intra, lr_inter})
            if (!(r > 0.0)) throw Error("learn: learning rates must be > 0");
        if (lr_decay < 0.0 || init_range < 0.0) throw Error("learn: lr_decay and init_range must be >= 0");
    }
};

struct MomentErrors {
    double mu = 0.0;
    double intra = 0.0;
    double inter = 0.0;
    double total = 0.0;
};

struct LearnTraceRow {
    std::size_t iteration = 0;
    MomentErrors error;
};

struct LearnResult {
    CartesianParams params;
    std::vector<LearnTraceRow> trace;
    bool converged = false;
};

inline MomentErrors moment_errors(const StatsSummary &target, const StatsSummary &sampled, double w_mu = 1.0,
                                  double w_intra = 1.0, double w_inter = 1.0) {
    target.check_compatible(sampled);
    MomentErrors e;
    for (std::size_t m = 0; m < target.markers; ++m) e.mu += std::abs(sampled.mu[m] - target.mu[m]);
    for (std::size_t a = 0; a < target.markers; ++a)
        for (std::size_t b = a + 1; b < target.markers; ++b) e.intra += std::abs(sampled.intra(a, b) - target.intra(a, b));
    for (std::size_t k = 0; k < target.rho_inter.size(); ++k) e.inter += std::abs(sampled.rho_inter[k] - target.rho_inter[k]);
    e.total = w_mu * e.mu + w_intra * e.intra + w_inter * e.inter;
    return e;
}

// Moments of n_samples independent Metropolis samples of the Cartesian model.
inline StatsSummary sample_stats(const QuboModel &qubo, std::size_t n_samples, std::size_t n_steps, double beta,
                                 std::uint64_t seed, InterNormalization norm, unsigned threads = 0) {
    const auto &shape = *qubo.shape;
    const CompiledModel model(qubo);
    if (n_steps == 0) n_steps = 50 * model.size();
    std::vector<State> states(n_samples);
    parallel_for(
            n_samples,
            [&](std::size_t k) {
                auto rng = make_rng(derive_seed(seed, k));
                states[k] = boltzmann_sample(model, n_steps, beta, rng);
            },
            threads);
    StatsAccumulator acc(shape.markers, shape.max_distance, shape.boundary, norm);
    for (const auto &s : states) acc.add_state(s, Vartype::binary, shape.nucleosomes);
    return acc.summary();
}

// Boltzmann-machine style moment matching: each parameter moves along (sampled - target) of its
// conjugate moment, so over-represented features become energetically costlier.
inline LearnResult learn_params(const StatsSummary &target, const ModelShape &shape, const LearnConfig &cfg) {
    cfg.validate();
    shape.validate(std::max(shape.markers, default_max_markers));
    if (target.markers != shape.markers || target.max_distance != shape.max_distance)
        throw Error("learn: target statistics do not match shape " + shape.str());
    if (target.boundary != shape.boundary)
        warn("learn: target statistics boundary differs from model boundary");

    const auto M = shape.markers, L = shape.max_distance;
    LearnResult result;
    CartesianParams p(M, L);
    {
        auto rng = make_rng(cfg.seed);
        for (auto *v : {&p.q, &p.r, &p.s})
            for (auto &x : *v) x = uniform_real(rng, -cfg.init_range, cfg.init_range);
    }

    // Each iteration uses its own block of sample seeds.
    const std::uint64_t stride = std::uint64_t{1} << 32;
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        const auto qubo = build_qubo(shape, p);
        const auto sampled = sample_stats(qubo, cfg.n_samples, cfg.n_steps, cfg.beta,
                                          derive_seed(cfg.seed, (it + 1) * stride), target.normalization, cfg.threads);
        const auto err = moment_errors(target, sampled, cfg.weight_mu, cfg.weight_intra, cfg.weight_inter);
        result.trace.push_back({it, err});
        if (err.total < cfg.error_threshold) {
            result.converged = true;
            break;
        }
        const double scale = 1.0 / (1.0 + cfg.lr_decay * static_cast<double>(it));
        for (std::size_t m = 0; m < M; ++m) p.q[m] += cfg.lr_mu * scale * (sampled.mu[m] - target.mu[m]);
        for (std::size_t m1 = 1; m1 < M; ++m1)
            for (std::size_t m2 = 0; m2 < m1; ++m2)
                p.R(m1, m2) += cfg.lr_intra * scale * (sampled.intra(m1, m2) - target.intra(m1, m2));
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t l = 1; l <= L; ++l)
                p.S(m, l) += cfg.lr_inter * scale * (sampled.inter(m, l) - target.inter(m, l));
    }
    result.params = std::move(p);
    return result;
}

inline void write_learn_trace_csv(std::ostream &out, const std::vector<LearnTraceRow> &trace) {
    out << "iteration,total_error,mu_error,rho_intra_error,rho_inter_error\n";
    for (const auto &r : trace)
        out << r.iteration << ',' << format_double(r.error.total) << ',' << format_double(r.error.mu) << ','
            << format_double(r.error.intra) << ',' << format_double(r.error.inter) << '\n';
}

}  // namespace chromanneal
