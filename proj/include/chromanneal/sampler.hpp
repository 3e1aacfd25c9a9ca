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

// Annealing backends standing in for a quantum annealer: classical simulated annealing, path
// integral (simulated quantum) annealing over Trotter slices, reverse annealing from a given state,
// and fixed-temperature Metropolis sampling.
//
// Time is nominal. One microsecond of anneal time maps to `sweeps_per_us` sweeps (default 1000),
// so one nanosecond of reverse-anneal time is one sweep.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "embed.hpp"
#include "ingest.hpp"
#include "learn.hpp"
#include "model.hpp"
#include "sample_set.hpp"

namespace chromanneal {

// Transverse weight A(s) and problem weight B(s) tabulated on a grid of s, linearly interpolated.
struct AnnealSchedule {
    std::vector<double> s;
    std::vector<double> A;
    std::vector<double> B;

    void validate() const {
        if (s.size() < 2 || A.size() != s.size() || B.size() != s.size())
            throw Error("schedule: need at least two points with s, A and B each");
        if (s.front() != 0.0 || s.back() != 1.0) throw Error("schedule: s must run from 0 to 1");
        for (std::size_t k = 1; k < s.size(); ++k) {
            if (!(s[k] > s[k - 1])) throw Error("schedule: s must be strictly increasing");
            if (A[k] > A[k - 1]) throw Error("schedule: A(s) must be non-increasing");
            if (B[k] < B[k - 1]) throw Error("schedule: B(s) must be non-decreasing");
        }
        for (std::size_t k = 0; k < s.size(); ++k)
            if (A[k] < 0.0 || B[k] < 0.0) throw Error("schedule: A and B must be non-negative");
    }

    static double interpolate(const std::vector<double> &xs, const std::vector<double> &ys, double x) {
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
        const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return ys[k - 1] + t * (ys[k] - ys[k - 1]);
    }

    double a(double x) const { return interpolate(s, A, x); }
    double b(double x) const { return interpolate(s, B, x); }
};

// Monotone crossing shape: A(s) = 2.5 (1 - s)^2.5, B(s) = 0.03 + 0.97 s^2 on 21 points.
inline AnnealSchedule default_schedule() {
    AnnealSchedule sch;
    for (int k = 0; k <= 20; ++k) {
        const double x = k / 20.0;
        sch.s.push_back(x);
        sch.A.push_back(2.5 * std::pow(1.0 - x, 2.5));
        sch.B.push_back(0.03 + 0.97 * x * x);
    }
    return sch;
}

namespace detail {

inline std::vector<std::vector<double>> read_numeric_csv(std::istream &in, std::size_t columns) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            auto t = split_ws(cell);
            if (t.size() != 1 || !parse_number(t[0], v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (rows.empty()) continue;  // header
            throw ParseError(lineno, "non-numeric schedule row");
        }
        if (row.size() != columns)
            throw ParseError(lineno, "expected " + std::to_string(columns) + " columns, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

// Combined file: rows of s,A,B (an optional header line is skipped).
inline AnnealSchedule read_schedule_csv(std::istream &in) {
    AnnealSchedule sch;
    for (const auto &r : detail::read_numeric_csv(in, 3)) {
        sch.s.push_back(r[0]);
        sch.A.push_back(r[1]);
        sch.B.push_back(r[2]);
    }
    sch.validate();
    return sch;
}

// Separate (s,A) and (s,B) files, merged on the union of their grids.
inline AnnealSchedule read_schedule_csv(std::istream &in_a, std::istream &in_b) {
    AnnealSchedule fa, fb;
    for (const auto &r : detail::read_numeric_csv(in_a, 2)) {
        fa.s.push_back(r[0]);
        fa.A.push_back(r[1]);
    }
    for (const auto &r : detail::read_numeric_csv(in_b, 2)) {
        fb.s.push_back(r[0]);
        fb.B.push_back(r[1]);
    }
    if (fa.s.size() < 2 || fb.s.size() < 2) throw Error("schedule: each file needs at least two points");
    AnnealSchedule sch;
    sch.s = fa.s;
    sch.s.insert(sch.s.end(), fb.s.begin(), fb.s.end());
    std::sort(sch.s.begin(), sch.s.end());
    sch.s.erase(std::unique(sch.s.begin(), sch.s.end()), sch.s.end());
    for (double x : sch.s) {
        sch.A.push_back(AnnealSchedule::interpolate(fa.s, fa.A, x));
        sch.B.push_back(AnnealSchedule::interpolate(fb.s, fb.B, x));
    }
    sch.validate();
    return sch;
}

inline void write_schedule_csv(std::ostream &out, const AnnealSchedule &sch) {
    out << "s,A,B\n";
    for (std::size_t k = 0; k < sch.s.size(); ++k)
        out << format_double(sch.s[k]) << ',' << format_double(sch.A[k]) << ',' << format_double(sch.B[k]) << '\n';
}

// Reverse anneal: s goes linearly from 1 down to s_R over t_R, then back to 1 over t_R.
struct ReverseSchedule {
    double s_reverse = 1.0;      // s_R in (0, 1]
    double t_reverse_ns = 100.0;  // t_R per leg
    State initial;               // spins

    void validate() const {
        if (!(s_reverse > 0.0 && s_reverse <= 1.0)) throw Error("reverse schedule: s_R must be in (0, 1]");
        if (!(t_reverse_ns > 0.0)) throw Error("reverse schedule: t_R must be > 0");
    }
};

enum class Readout { majority, random_slice };

inline Readout parse_readout(std::string_view s) {
    if (s == "majority") return Readout::majority;
    if (s == "random_slice") return Readout::random_slice;
    throw Error("unknown readout '" + std::string(s) + "' (expected majority|random_slice)");
}

inline constexpr double default_sweeps_per_us = 1000.0;

inline std::size_t sweeps_for_time(double microseconds, double sweeps_per_us = default_sweeps_per_us) {
    if (!(microseconds > 0.0) || !(sweeps_per_us > 0.0)) throw Error("anneal time and sweep rate must be > 0");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(microseconds * sweeps_per_us)));
}

// Random streams for one anneal. Variables are split into equal consecutive blocks that each draw
// from their own stream; sampling disconnected copies of a model together then makes exactly the
// draws that separate runs of the copies would make.
class Streams {
  public:
    Streams(Rng &rng) : rngs_(&rng, 1), block_(SIZE_MAX) {}
    Streams(std::span<Rng> rngs, std::size_t block) : rngs_(rngs), block_(block) {
        if (block_ == 0 || rngs_.empty()) throw Error("streams: empty block");
    }
    Rng &operator()(std::size_t i) { return rngs_[std::min(i / block_, rngs_.size() - 1)]; }
    std::size_t blocks() const { return rngs_.size(); }
    std::size_t block_size() const { return block_; }

  private:
    std::span<Rng> rngs_;
    std::size_t block_;
};

struct AnnealParams {
    double beta = 1.0;          // final inverse temperature (SA) or physical one (SQA, reverse)
    double beta_start = 0.1;    // start of the geometric SA ramp
    std::size_t sweeps = 1000;
    std::size_t slices = 16;    // Trotter slices P
    Readout readout = Readout::majority;
    bool worldline_moves = true;  // also try flipping a spin in every slice at once

    void validate() const {
        if (!(beta > 0.0) || !(beta_start > 0.0)) throw Error("anneal: inverse temperatures must be > 0");
        if (sweeps < 1) throw Error("anneal: sweeps must be >= 1");
        if (slices < 2) throw Error("anneal: need at least 2 Trotter slices");
    }
};

inline State random_spins(std::size_t n, Streams &rng) {
    State x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = random_spin(rng(i));
    return x;
}

// Metropolis sweeps in variable order under a geometric ramp from beta_start to beta.
inline State simulated_anneal(const CompiledModel &model, const AnnealParams &p, Streams &rng) {
    p.validate();
    if (model.vartype() != Vartype::spin) throw Error("simulated_anneal: expects an Ising model");
    State x = random_spins(model.size(), rng);
    for (std::size_t t = 0; t < p.sweeps; ++t) {
        const double frac = p.sweeps > 1 ? static_cast<double>(t) / static_cast<double>(p.sweeps - 1) : 1.0;
        const double beta = p.beta_start * std::pow(p.beta / p.beta_start, frac);
        for (std::size_t i = 0; i < model.size(); ++i)
            if (metropolis_accept(model.delta_energy(x, i), beta, rng(i))) x[i] = static_cast<Value>(-x[i]);
    }
    return x;
}

inline State simulated_anneal(const CompiledModel &model, const AnnealParams &p, Rng &rng) {
    Streams st(rng);
    return simulated_anneal(model, p, st);
}

namespace detail {

// Coupling between neighbouring Trotter slices; infinite when the transverse weight vanishes,
// capped so that slice-breaking moves are simply never accepted.
inline double slice_coupling(double beta, double a, std::size_t slices) {
    constexpr double cap = 50.0;
    const double t = std::tanh(beta * a / static_cast<double>(slices));
    if (!(t > 0.0)) return cap;
    return std::min(cap, -0.5 * std::log(t));
}

// Path-integral Monte Carlo over the given s points (one sweep each). Points with s >= 1 carry no
// dynamics. Slices start from `initial` when given, otherwise independently at random.
inline State path_integral_anneal(const CompiledModel &model, const AnnealSchedule &sch,
                                  const std::vector<double> &points, const AnnealParams &p,
                                  const State *initial, Streams &rng) {
    p.validate();
    if (model.vartype() != Vartype::spin) throw Error("simulated_quantum_anneal: expects an Ising model");
    const auto n = model.size(), P = p.slices;
    std::vector<State> x(P);
    for (std::size_t k = 0; k < P; ++k) x[k] = initial ? *initial : random_spins(n, rng);

    for (double s : points) {
        if (s >= 1.0) continue;
        const double scale = p.beta * sch.b(s) / static_cast<double>(P);
        const double jperp = slice_coupling(p.beta, sch.a(s), P);
        for (std::size_t k = 0; k < P; ++k) {
            const auto &up = x[(k + 1) % P];
            const auto &down = x[(k + P - 1) % P];
            auto &cur = x[k];
            for (std::size_t i = 0; i < n; ++i) {
                const double dE = scale * model.delta_energy(cur, i) + 2.0 * jperp * cur[i] * (up[i] + down[i]);
                if (metropolis_accept(dE, 1.0, rng(i))) cur[i] = static_cast<Value>(-cur[i]);
            }
        }
        if (!p.worldline_moves) continue;
        for (std::size_t i = 0; i < n; ++i) {
            double dE = 0.0;
            for (std::size_t k = 0; k < P; ++k) dE += model.delta_energy(x[k], i);
            if (metropolis_accept(scale * dE, 1.0, rng(i)))
                for (std::size_t k = 0; k < P; ++k) x[k][i] = static_cast<Value>(-x[k][i]);
        }
    }

    State out(n);
    if (p.readout == Readout::random_slice) {
        // One slice for the whole state; drawn from the first stream of each block.
        std::size_t pick = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == 0 || (rng.block_size() != SIZE_MAX && i % rng.block_size() == 0)) pick = uniform_index(rng(i), P);
            out[i] = x[pick][i];
        }
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        int sum = 0;
        for (std::size_t k = 0; k < P; ++k) sum += x[k][i];
        out[i] = sum > 0 ? Value{1} : sum < 0 ? Value{-1} : random_spin(rng(i));
    }
    return out;
}

}  // namespace detail

// Forward anneal: sweep t runs at s = t / sweeps.
inline State simulated_quantum_anneal(const CompiledModel &model, const AnnealSchedule &sch, const AnnealParams &p,
                                      Streams &rng) {
    sch.validate();
    std::vector<double> points(p.sweeps);
    for (std::size_t t = 0; t < p.sweeps; ++t) points[t] = static_cast<double>(t) / static_cast<double>(p.sweeps);
    return detail::path_integral_anneal(model, sch, points, p, nullptr, rng);
}

inline State simulated_quantum_anneal(const CompiledModel &model, const AnnealSchedule &sch, const AnnealParams &p,
                                      Rng &rng) {
    Streams st(rng);
    return simulated_quantum_anneal(model, sch, p, st);
}

// s points of a reverse schedule: t_R sweeps down to s_R, then t_R sweeps back up to 1.
inline std::vector<double> reverse_points(const ReverseSchedule &rs, double sweeps_per_us = default_sweeps_per_us) {
    rs.validate();
    const auto leg = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(rs.t_reverse_ns * sweeps_per_us / 1000.0)));
    std::vector<double> points;
    points.reserve(2 * leg);
    const double depth = 1.0 - rs.s_reverse;
    for (std::size_t t = 1; t <= leg; ++t) points.push_back(1.0 - depth * static_cast<double>(t) / static_cast<double>(leg));
    for (std::size_t t = 1; t <= leg; ++t) points.push_back(rs.s_reverse + depth * static_cast<double>(t) / static_cast<double>(leg));
    return points;
}

// All slices start at the given state. The couplings and fields are left unchanged.
inline State reverse_anneal(const CompiledModel &model, const AnnealSchedule &sch, const ReverseSchedule &rs,
                            const AnnealParams &p, Streams &rng, double sweeps_per_us = default_sweeps_per_us) {
    sch.validate();
    if (rs.initial.size() != model.size())
        throw Error("reverse_anneal: initial state has " + std::to_string(rs.initial.size()) + " spins, model has " +
                    std::to_string(model.size()));
    for (auto v : rs.initial)
        if (v != 1 && v != -1) throw Error("reverse_anneal: initial state must be spins");
    return detail::path_integral_anneal(model, sch, reverse_points(rs, sweeps_per_us), p, &rs.initial, rng);
}

inline State reverse_anneal(const CompiledModel &model, const AnnealSchedule &sch, const ReverseSchedule &rs,
                            const AnnealParams &p, Rng &rng, double sweeps_per_us = default_sweeps_per_us) {
    Streams st(rng);
    return reverse_anneal(model, sch, rs, p, st, sweeps_per_us);
}

// Single-site Metropolis at fixed beta from a random state, in sweeps.
inline State metropolis_sample(const CompiledModel &model, const AnnealParams &p, Streams &rng) {
    State x = random_spins(model.size(), rng);
    for (std::size_t t = 0; t < p.sweeps; ++t)
        for (std::size_t i = 0; i < model.size(); ++i)
            if (metropolis_accept(model.delta_energy(x, i), p.beta, rng(i))) x[i] = static_cast<Value>(-x[i]);
    return x;
}

enum class Backend { sa, sqa, reverse, boltzmann };

inline std::string_view to_string(Backend b) {
    switch (b) {
    case Backend::sa: return "sa";
    case Backend::sqa: return "sqa";
    case Backend::reverse: return "reverse";
    case Backend::boltzmann: return "boltzmann";
    }
    return "?";
}

inline Backend parse_backend(std::string_view s) {
    if (s == "sa") return Backend::sa;
    if (s == "sqa") return Backend::sqa;
    if (s == "reverse") return Backend::reverse;
    if (s == "boltzmann") return Backend::boltzmann;
    throw Error("unknown backend '" + std::string(s) + "' (expected sa|sqa|reverse|boltzmann)");
}

struct SamplerConfig {
    Backend backend = Backend::sqa;
    double anneal_time_us = 1.0;  // T_A, forward backends
    double sweeps_per_us = default_sweeps_per_us;
    AnnealParams anneal;           // sweeps is derived from anneal_time_us
    AnnealSchedule schedule = default_schedule();
    std::optional<ReverseSchedule> reverse;
    UnembedPolicy unembed = UnembedPolicy::majority;
    unsigned threads = 0;

    AnnealParams resolved() const {
        AnnealParams p = anneal;
        p.sweeps = sweeps_for_time(anneal_time_us, sweeps_per_us);
        return p;
    }
};

// One anneal with the configured backend.
inline State anneal_once(const CompiledModel &model, const SamplerConfig &cfg, Streams &rng) {
    const auto p = cfg.resolved();
    switch (cfg.backend) {
    case Backend::sa: return simulated_anneal(model, p, rng);
    case Backend::sqa: return simulated_quantum_anneal(model, cfg.schedule, p, rng);
    case Backend::reverse:
        if (!cfg.reverse) throw Error("reverse backend needs a reverse schedule");
        return reverse_anneal(model, cfg.schedule, *cfg.reverse, p, rng, cfg.sweeps_per_us);
    case Backend::boltzmann: return metropolis_sample(model, p, rng);
    }
    throw Error("unsupported backend");
}

namespace detail {

inline SampleSet finish_sampleset(SampleAggregator &agg, const SamplerConfig &cfg, std::size_t n_samples,
                                  double chain_strength, const IsingModel &model) {
    SampleSet out;
    out.records = agg.finish();
    out.backend = std::string(to_string(cfg.backend));
    out.vartype = Vartype::spin;
    out.shape = model.shape;
    out.params.anneal_time_us = cfg.anneal_time_us;
    out.params.chain_strength = chain_strength;
    out.params.n_samples = static_cast<std::int64_t>(n_samples);
    out.params.beta_eff = fit_beta_eff(out.records);
    return out;
}

}  // namespace detail

// n_samples independent anneals; anneal k uses seed derive_seed(seed, k).
inline SampleSet sample_many(const IsingModel &model, std::size_t n_samples, const SamplerConfig &cfg,
                             std::uint64_t seed) {
    if (n_samples < 1) throw Error("sample: n_samples must be >= 1");
    const CompiledModel cm(model);
    std::vector<State> states(n_samples);
    parallel_for(
            n_samples,
            [&](std::size_t k) {
                auto rng = make_rng(derive_seed(seed, k));
                Streams st(rng);
                states[k] = anneal_once(cm, cfg, st);
            },
            cfg.threads);
    SampleAggregator agg;
    for (const auto &s : states) agg.add(s, ising_energy(model, s));
    return detail::finish_sampleset(agg, cfg, n_samples, 0.0, model);
}

// Anneals the embedded physical problem and maps every read back to logical spins. Energies are
// those of the logical model.
inline SampleSet sample_embedded(const IsingModel &model, const PhysicalIsing &physical, std::size_t n_samples,
                                 const SamplerConfig &cfg, std::uint64_t seed) {
    if (n_samples < 1) throw Error("sample: n_samples must be >= 1");
    if (physical.chains.size() != model.n_vars) throw Error("sample: embedding does not match the model");
    SamplerConfig pc = cfg;
    if (cfg.reverse) {
        // Reverse anneals start from the initial state copied onto every chain qubit.
        ReverseSchedule rs = *cfg.reverse;
        if (rs.initial.size() != model.n_vars) throw Error("reverse: initial state does not match the model");
        State phys(physical.model.n_vars, 1);
        for (std::size_t u = 0; u < physical.chains.size(); ++u)
            for (auto q : physical.chains[u]) phys[q] = rs.initial[u];
        rs.initial = std::move(phys);
        pc.reverse = std::move(rs);
    }
    const CompiledModel cm(physical.model);
    std::vector<Unembedded> reads(n_samples);
    parallel_for(
            n_samples,
            [&](std::size_t k) {
                auto rng = make_rng(derive_seed(seed, k));
                Streams st(rng);
                const auto x = anneal_once(cm, pc, st);
                reads[k] = unembed(x, physical.chains, cfg.unembed, rng);
            },
            cfg.threads);
    SampleAggregator agg;
    for (const auto &r : reads) agg.add(r.state, ising_energy(model, r.state), r.break_fraction());
    return detail::finish_sampleset(agg, cfg, n_samples, physical.chain_strength, model);
}

// Samples a cluster of n_copies disjoint copies of the model: each of n_reads anneals of the
// replicated model yields one logical sample per copy. Copy c of read r draws from the stream
// derive_seed(seed, r * n_copies + c), the stream sample_many gives to anneal r * n_copies + c.
inline SampleSet sample_cluster(const IsingModel &model, std::size_t n_copies, std::size_t n_reads,
                                const SamplerConfig &cfg, std::uint64_t seed) {
    if (n_copies < 1 || n_reads < 1) throw Error("sample_cluster: need at least one copy and one read");
    const auto cluster = replicate_model(model, n_copies);
    const CompiledModel cm(cluster);
    SamplerConfig cc = cfg;
    if (cfg.reverse) {
        ReverseSchedule rs = *cfg.reverse;
        State rep;
        for (std::size_t c = 0; c < n_copies; ++c) rep.insert(rep.end(), rs.initial.begin(), rs.initial.end());
        rs.initial = std::move(rep);
        cc.reverse = std::move(rs);
    }
    std::vector<State> reads(n_reads);
    parallel_for(
            n_reads,
            [&](std::size_t r) {
                std::vector<Rng> rngs;
                rngs.reserve(n_copies);
                for (std::size_t c = 0; c < n_copies; ++c) rngs.push_back(make_rng(derive_seed(seed, r * n_copies + c)));
                Streams st(rngs, model.n_vars);
                reads[r] = anneal_once(cm, cc, st);
            },
            cfg.threads);
    SampleAggregator agg;
    for (const auto &x : reads)
        for (std::size_t c = 0; c < n_copies; ++c) {
            State s(x.begin() + static_cast<std::ptrdiff_t>(c * model.n_vars),
                    x.begin() + static_cast<std::ptrdiff_t>((c + 1) * model.n_vars));
            const double e = ising_energy(model, s);
            agg.add(s, e);
        }
    return detail::finish_sampleset(agg, cfg, n_copies * n_reads, 0.0, model);
}

}  // namespace chromanneal
