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

// Moment statistics of incidence data: mean incidence, intra-nucleosome co-incidence and
// inter-nucleosome (same marker, distance l) co-incidence.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "ingest.hpp"
#include "sample_set.hpp"
#include "shape.hpp"

namespace chromanneal {

// Denominator of open-boundary inter-correlations: the number of valid (n, n+l) pairs, or N as
// in the plain 1/N formula. Periodic data always divides by N.
enum class InterNormalization { term_count, total };

inline std::string_view to_string(InterNormalization n) {
    return n == InterNormalization::term_count ? "term_count" : "total";
}

inline InterNormalization parse_inter_normalization(std::string_view s) {
    if (s == "term_count") return InterNormalization::term_count;
    if (s == "total") return InterNormalization::total;
    throw Error("unknown inter-correlation normalization '" + std::string(s) + "'");
}

struct StatsSummary {
    std::size_t markers = 0;       // M
    std::size_t max_distance = 0;  // L
    Boundary boundary = Boundary::periodic;
    InterNormalization normalization = InterNormalization::term_count;
    std::vector<double> mu;         // M
    std::vector<double> rho_intra;  // M x M, symmetric, diagonal = mu
    std::vector<double> rho_inter;  // M x L, entry (m, l) at m*L + (l-1)

    double intra(std::size_t m1, std::size_t m2) const { return rho_intra[m1 * markers + m2]; }
    double inter(std::size_t m, std::size_t l) const { return rho_inter[m * max_distance + (l - 1)]; }

    // All independent statistics in a fixed order: mu, then rho_intra for m1 < m2 (row-major),
    // then rho_inter (marker-major, l ascending).
    std::vector<double> flatten() const {
        std::vector<double> out(mu);
        for (std::size_t a = 0; a < markers; ++a)
            for (std::size_t b = a + 1; b < markers; ++b) out.push_back(intra(a, b));
        out.insert(out.end(), rho_inter.begin(), rho_inter.end());
        return out;
    }

    std::size_t n_intra_pairs() const { return markers * (markers - 1) / 2; }

    void check_compatible(const StatsSummary &other) const {
        if (markers != other.markers || max_distance != other.max_distance)
            throw Error("statistics shapes differ (M=" + std::to_string(markers) + ",L=" +
                        std::to_string(max_distance) + " vs M=" + std::to_string(other.markers) +
                        ",L=" + std::to_string(other.max_distance) + ")");
    }
};

// Integer co-incidence counts, accumulated over any number of weighted M x N configurations.
// Division happens once in summary(), so results are exact and independent of insertion order.
class StatsAccumulator {
  public:
    StatsAccumulator(std::size_t markers, std::size_t max_distance, Boundary boundary,
                     InterNormalization norm = InterNormalization::term_count)
            : m_(markers),
              l_(max_distance),
              boundary_(boundary),
              norm_(norm),
              single_(markers, 0),
              pair_(markers * markers, 0),
              inter_(markers * max_distance, 0),
              inter_den_(max_distance, 0) {}

    // `get(m, n)` returns the 0/1 incidence of marker m at nucleosome n.
    template <typename Get>
    void add(std::size_t nucleosomes, Get &&get, std::int64_t weight = 1) {
        const std::size_t n_len = nucleosomes;
        if (l_ >= n_len && l_ > 0) throw Error("statistics: L must be < N");
        std::vector<std::uint8_t> col(m_);
        for (std::size_t n = 0; n < n_len; ++n) {
            for (std::size_t m = 0; m < m_; ++m) col[m] = get(m, n) ? 1 : 0;
            for (std::size_t a = 0; a < m_; ++a) {
                if (!col[a]) continue;
                single_[a] += weight;
                for (std::size_t b = 0; b < m_; ++b)
                    if (col[b]) pair_[a * m_ + b] += weight;
            }
        }
        for (std::size_t l = 1; l <= l_; ++l) {
            const std::size_t terms = boundary_ == Boundary::periodic ? n_len : n_len - l;
            for (std::size_t m = 0; m < m_; ++m) {
                std::int64_t c = 0;
                for (std::size_t n = 0; n < terms; ++n)
                    if (get(m, n) && get(m, (n + l) % n_len)) ++c;
                inter_[m * l_ + (l - 1)] += c * weight;
            }
            const bool by_terms = boundary_ == Boundary::open && norm_ == InterNormalization::term_count;
            inter_den_[l - 1] += static_cast<std::int64_t>(by_terms ? terms : n_len) * weight;
        }
        positions_ += static_cast<std::int64_t>(n_len) * weight;
    }

    void add(const IncidenceMatrix &x, std::int64_t weight = 1) {
        if (x.markers() != m_) throw Error("statistics: marker count mismatch");
        add(x.nucleosomes(), [&](std::size_t m, std::size_t n) { return x(m, n) != 0; }, weight);
    }

    // A model state indexed by variable i = n*M + m (binary or spin values).
    void add_state(const State &state, Vartype vt, std::size_t nucleosomes, std::int64_t weight = 1) {
        if (state.size() != m_ * nucleosomes) throw Error("statistics: state length does not match M x N");
        add(
                nucleosomes,
                [&](std::size_t m, std::size_t n) {
                    const auto v = state[n * m_ + m];
                    return vt == Vartype::spin ? v > 0 : v != 0;
                },
                weight);
    }

    bool empty() const noexcept { return positions_ == 0; }

    StatsSummary summary() const {
        if (positions_ == 0) throw Error("statistics: no data accumulated");
        StatsSummary s;
        s.markers = m_;
        s.max_distance = l_;
        s.boundary = boundary_;
        s.normalization = norm_;
        const auto pos = static_cast<double>(positions_);
        s.mu.resize(m_);
        for (std::size_t m = 0; m < m_; ++m) s.mu[m] = static_cast<double>(single_[m]) / pos;
        s.rho_intra.resize(m_ * m_);
        for (std::size_t k = 0; k < m_ * m_; ++k) s.rho_intra[k] = static_cast<double>(pair_[k]) / pos;
        s.rho_inter.resize(m_ * l_);
        for (std::size_t m = 0; m < m_; ++m)
            for (std::size_t l = 1; l <= l_; ++l)
                s.rho_inter[m * l_ + (l - 1)] =
                        static_cast<double>(inter_[m * l_ + (l - 1)]) / static_cast<double>(inter_den_[l - 1]);
        return s;
    }

  private:
    std::size_t m_, l_;
    Boundary boundary_;
    InterNormalization norm_;
    std::vector<std::int64_t> single_, pair_, inter_, inter_den_;
    std::int64_t positions_ = 0;
};

inline std::vector<double> mean_incidence(const IncidenceMatrix &x) {
    StatsAccumulator acc(x.markers(), 0, Boundary::open);
    acc.add(x);
    return acc.summary().mu;
}

// M x M row-major, diagonal = mean incidence.
inline std::vector<double> intra_corr(const IncidenceMatrix &x) {
    StatsAccumulator acc(x.markers(), 0, Boundary::open);
    acc.add(x);
    return acc.summary().rho_intra;
}

// M x L marker-major; entry (m, l) at m*L + (l-1).
inline std::vector<double> inter_corr(const IncidenceMatrix &x, std::size_t max_distance, Boundary boundary,
                                      InterNormalization norm = InterNormalization::term_count) {
    if (max_distance < 1 || max_distance >= x.nucleosomes())
        throw Error("inter_corr: need 1 <= L < N (L=" + std::to_string(max_distance) +
                    ", N=" + std::to_string(x.nucleosomes()) + ")");
    StatsAccumulator acc(x.markers(), max_distance, boundary, norm);
    acc.add(x);
    return acc.summary().rho_inter;
}

inline StatsSummary compute_stats(const IncidenceMatrix &x, std::size_t max_distance, Boundary boundary,
                                  InterNormalization norm = InterNormalization::term_count) {
    if (max_distance >= x.nucleosomes() && max_distance > 0)
        throw Error("statistics: L must be < N (L=" + std::to_string(max_distance) +
                    ", N=" + std::to_string(x.nucleosomes()) + ")");
    StatsAccumulator acc(x.markers(), max_distance, boundary, norm);
    acc.add(x);
    return acc.summary();
}

// Statistics averaged over nucleosome positions and over samples, weighted by occurrences.
inline StatsSummary stats_of_samples(const SampleSet &samples, const ModelShape &shape,
                                     InterNormalization norm = InterNormalization::term_count) {
    if (samples.records.empty()) throw Error("stats_of_samples: empty sample set");
    StatsAccumulator acc(shape.markers, shape.max_distance, shape.boundary, norm);
    for (const auto &r : samples.records) acc.add_state(r.state, samples.vartype, shape.nucleosomes, r.occurrences);
    return acc.summary();
}

inline void to_json(nlohmann::json &j, const StatsSummary &s) {
    auto mat = [](const std::vector<double> &v, std::size_t rows, std::size_t cols) {
        auto a = nlohmann::json::array();
        for (std::size_t r = 0; r < rows; ++r)
            a.push_back(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                            v.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)));
        return a;
    };
    j = nlohmann::json{{"M", s.markers},
                       {"L", s.max_distance},
                       {"boundary", std::string(to_string(s.boundary))},
                       {"normalization", std::string(to_string(s.normalization))},
                       {"mu", s.mu},
                       {"rho_intra", mat(s.rho_intra, s.markers, s.markers)},
                       {"rho_inter", mat(s.rho_inter, s.markers, s.max_distance)}};
}

inline void from_json(const nlohmann::json &j, StatsSummary &s) {
    s.markers = j.at("M").get<std::size_t>();
    s.max_distance = j.at("L").get<std::size_t>();
    s.boundary = parse_boundary(j.at("boundary").get<std::string>());
    s.normalization = parse_inter_normalization(j.value("normalization", std::string("term_count")));
    s.mu = j.at("mu").get<std::vector<double>>();
    s.rho_intra.clear();
    for (const auto &row : j.at("rho_intra")) {
        auto r = row.get<std::vector<double>>();
        s.rho_intra.insert(s.rho_intra.end(), r.begin(), r.end());
    }
    s.rho_inter.clear();
    for (const auto &row : j.at("rho_inter")) {
        auto r = row.get<std::vector<double>>();
        s.rho_inter.insert(s.rho_inter.end(), r.begin(), r.end());
    }
    if (s.mu.size() != s.markers || s.rho_intra.size() != s.markers * s.markers ||
        s.rho_inter.size() != s.markers * s.max_distance)
        throw Error("statistics JSON: inconsistent dimensions");
}

// Long-format CSV: group,index_a,index_b,value (index_b is m2 for rho_intra, l for rho_inter).
inline void write_stats_csv(std::ostream &out, const StatsSummary &s) {
    out << "group,a,b,value\n";
    for (std::size_t m = 0; m < s.markers; ++m) out << "mu," << m << ",," << format_double(s.mu[m]) << '\n';
    for (std::size_t a = 0; a < s.markers; ++a)
        for (std::size_t b = a + 1; b < s.markers; ++b)
            out << "rho_intra," << a << ',' << b << ',' << format_double(s.intra(a, b)) << '\n';
    for (std::size_t m = 0; m < s.markers; ++m)
        for (std::size_t l = 1; l <= s.max_distance; ++l)
            out << "rho_inter," << m << ',' << l << ',' << format_double(s.inter(m, l)) << '\n';
}

}  // namespace chromanneal
