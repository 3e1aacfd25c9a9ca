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

// Agreement between empirical and sampled statistics, distances to a template state, rank
// correlation, and a small SVG scatter writer.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"
#include "sample_set.hpp"
#include "stats.hpp"

namespace chromanneal {

inline constexpr double default_log_floor = 1e-4;

// Coefficient of determination of `predicted` against `observed`.
inline double r2(const std::vector<double> &observed, const std::vector<double> &predicted) {
    if (observed.size() != predicted.size()) throw Error("r2: length mismatch");
    if (observed.empty()) throw Error("r2: no values");
    const double mean = std::accumulate(observed.begin(), observed.end(), 0.0) / static_cast<double>(observed.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        ss_res += (observed[k] - predicted[k]) * (observed[k] - predicted[k]);
        ss_tot += (observed[k] - mean) * (observed[k] - mean);
    }
    if (!(ss_tot > 0.0)) throw Error("r2: all observed values are equal");
    return 1.0 - ss_res / ss_tot;
}

inline std::vector<double> floored_log(const std::vector<double> &v, double floor) {
    if (!(floor > 0.0)) throw Error("r2_log: epsilon must be > 0");
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::log(std::max(v[k], floor));
    return out;
}

// R^2 on log(max(stat, epsilon)) over all statistics flattened.
inline double r2_log(const StatsSummary &empirical, const StatsSummary &sampled, double epsilon = default_log_floor) {
    empirical.check_compatible(sampled);
    return r2(floored_log(empirical.flatten(), epsilon), floored_log(sampled.flatten(), epsilon));
}

struct GroupR2 {
    std::optional<double> mu, intra, inter;  // empty when a group is degenerate
};

inline GroupR2 r2_log_groups(const StatsSummary &empirical, const StatsSummary &sampled,
                             double epsilon = default_log_floor) {
    empirical.check_compatible(sampled);
    const auto e = empirical.flatten(), s = sampled.flatten();
    const std::size_t M = empirical.markers, P = empirical.n_intra_pairs();
    auto group = [&](std::size_t from, std::size_t to) -> std::optional<double> {
        if (from >= to) return std::nullopt;
        std::vector<double> a(e.begin() + static_cast<std::ptrdiff_t>(from), e.begin() + static_cast<std::ptrdiff_t>(to));
        std::vector<double> b(s.begin() + static_cast<std::ptrdiff_t>(from), s.begin() + static_cast<std::ptrdiff_t>(to));
        try {
            return r2(floored_log(a, epsilon), floored_log(b, epsilon));
        } catch (const Error &) {
            return std::nullopt;
        }
    };
    return {group(0, M), group(M, M + P), group(M + P, e.size())};
}

inline void check_spins(const State &x, const char *what) {
    for (auto v : x)
        if (v != 1 && v != -1) throw Error(std::string(what) + ": entries must be -1 or +1");
}

// Number of positions where x disagrees with the template.
inline std::size_t hamming(const State &templ, const State &x) {
    if (templ.size() != x.size())
        throw Error("hamming: length mismatch (" + std::to_string(templ.size()) + " vs " + std::to_string(x.size()) + ")");
    check_spins(templ, "hamming");
    check_spins(x, "hamming");
    std::size_t d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d += templ[i] != x[i];
    return d;
}

inline double rel_hamming(const State &templ, const State &x, std::size_t markers, std::size_t nucleosomes) {
    if (markers * nucleosomes != templ.size() || markers == 0)
        throw Error("rel_hamming: template length " + std::to_string(templ.size()) + " is not " +
                    std::to_string(markers) + " x " + std::to_string(nucleosomes));
    return static_cast<double>(hamming(templ, x)) / static_cast<double>(markers * nucleosomes);
}

struct DistanceSummary {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// Occurrence-weighted relative distances of a spin sample set to a template.
inline DistanceSummary template_distance(const SampleSet &samples, const State &templ) {
    if (samples.vartype != Vartype::spin) throw Error("template_distance: expects spin samples");
    if (samples.records.empty()) throw Error("template_distance: empty sample set");
    DistanceSummary d{0.0, 1.0, 0.0};
    double total = 0.0;
    for (const auto &r : samples.records) {
        const double v = static_cast<double>(hamming(templ, r.state)) / static_cast<double>(templ.size());
        d.mean += v * static_cast<double>(r.occurrences);
        total += static_cast<double>(r.occurrences);
        d.min = std::min(d.min, v);
        d.max = std::max(d.max, v);
    }
    d.mean /= total;
    return d;
}

// Ranks starting at 1; tied values share their average rank.
inline std::vector<double> average_ranks(const std::vector<double> &v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t k = 0; k < idx.size();) {
        std::size_t j = k;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[k]]) ++j;
        const double r = (static_cast<double>(k + j) / 2.0) + 1.0;
        for (std::size_t t = k; t <= j; ++t) rank[idx[t]] = r;
        k = j + 1;
    }
    return rank;
}

inline double pearson(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("correlation: need two equal-length series of >= 2 values");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw Error("correlation: a series is constant");
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double> &x, const std::vector<double> &y) {
    return pearson(average_ranks(x), average_ranks(y));
}

// Scatter of empirical against sampled statistics on log axes, one colour per statistic group.
inline void write_stats_scatter_svg(std::ostream &out, const StatsSummary &empirical, const StatsSummary &sampled,
                                    double epsilon = default_log_floor) {
    empirical.check_compatible(sampled);
    const auto e = floored_log(empirical.flatten(), epsilon), s = floored_log(sampled.flatten(), epsilon);
    double lo = std::log(epsilon), hi = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) hi = std::max({hi, e[k], s[k]});
    const double size = 400.0, pad = 40.0;
    auto px = [&](double v) { return pad + (v - lo) / (hi - lo) * (size - 2 * pad); };
    auto py = [&](double v) { return size - pad - (v - lo) / (hi - lo) * (size - 2 * pad); };
    const std::size_t M = empirical.markers, P = empirical.n_intra_pairs();
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
    out << "<line x1=\"" << px(lo) << "\" y1=\"" << py(lo) << "\" x2=\"" << px(hi) << "\" y2=\"" << py(hi)
        << "\" stroke=\"gray\"/>\n";
    for (std::size_t k = 0; k < e.size(); ++k) {
        const char *colour = k < M ? "#1f77b4" : k < M + P ? "#ff7f0e" : "#2ca02c";
        out << "<circle cx=\"" << format_fixed(px(e[k]), 2) << "\" cy=\"" << format_fixed(py(s[k]), 2)
            << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    out << "<text x=\"" << pad << "\" y=\"" << size - 8 << "\" font-size=\"12\">log empirical</text>\n";
    out << "<text x=\"8\" y=\"" << pad - 10 << "\" font-size=\"12\">log sampled</text>\n";
    out << "</svg>\n";
}

}  // namespace chromanneal
