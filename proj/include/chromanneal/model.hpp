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

// The Cartesian QUBO objective and its Ising form.
//
//   H(x) = sum_{m,n} q_m x_m^n + sum_{m1>m2} sum_n R_{m1 m2} x_{m1}^n x_{m2}^n
//        + sum_m sum_{l=1..L} sum_n S_m^l x_m^n x_m^{n+l}
//
// Parameters are shared across nucleosome positions, so CartesianParams holds only q (M),
// R (M(M-1)/2) and S (M x L). Couplings between different markers on different nucleosomes are
// never emitted.

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "ingest.hpp"
#include "shape.hpp"

namespace chromanneal {

struct CartesianParams {
    std::size_t markers = 0;       // M
    std::size_t max_distance = 0;  // L
    std::vector<double> q;         // M
    std::vector<double> r;         // strictly lower triangle, (m1 > m2) at m1*(m1-1)/2 + m2
    std::vector<double> s;         // M x L, (m, l) at m*L + (l-1)

    CartesianParams() = default;
    CartesianParams(std::size_t m, std::size_t l)
            : markers(m), max_distance(l), q(m, 0.0), r(m * (m - 1) / 2, 0.0), s(m * l, 0.0) {}

    static std::size_t tri(std::size_t m1, std::size_t m2) {
        if (m1 <= m2) throw Error("intra-coupling index requires m1 > m2");
        return m1 * (m1 - 1) / 2 + m2;
    }

    double &R(std::size_t m1, std::size_t m2) { return r[tri(m1, m2)]; }
    double R(std::size_t m1, std::size_t m2) const { return r[tri(m1, m2)]; }
    double &S(std::size_t m, std::size_t l) { return s[m * max_distance + (l - 1)]; }
    double S(std::size_t m, std::size_t l) const { return s[m * max_distance + (l - 1)]; }

    void check(const ModelShape &shape) const {
        if (markers != shape.markers || max_distance != shape.max_distance || q.size() != markers ||
            r.size() != markers * (markers - 1) / 2 || s.size() != markers * max_distance)
            throw Error("parameters do not match shape " + shape.str());
        for (const auto *v : {&q, &r, &s})
            for (double x : *v)
                if (!std::isfinite(x)) throw Error("parameters must be finite");
    }

    bool operator==(const CartesianParams &) const = default;
};

// Pairwise term between variables i > j.
struct Coupling {
    std::size_t i = 0;
    std::size_t j = 0;
    double weight = 0.0;
    bool operator==(const Coupling &) const = default;
};

namespace detail {

using CouplingMap = std::map<std::pair<std::size_t, std::size_t>, double>;

inline void add_coupling(CouplingMap &map, std::size_t a, std::size_t b, double w) {
    if (a == b) throw Error("self-coupling on variable " + std::to_string(a));
    const auto key = a > b ? std::make_pair(a, b) : std::make_pair(b, a);
    map[key] += w;
}

inline std::vector<Coupling> to_couplings(const CouplingMap &map) {
    std::vector<Coupling> out;
    out.reserve(map.size());
    for (const auto &[k, w] : map) out.push_back({k.first, k.second, w});
    return out;
}

}  // namespace detail

struct QuboModel {
    std::size_t n_vars = 0;
    std::vector<double> linear;
    std::vector<Coupling> quadratic;  // sorted by (i, j), i > j, unique
    double offset = 0.0;
    std::optional<ModelShape> shape;
};

struct IsingModel {
    std::size_t n_vars = 0;
    std::vector<double> h;
    std::vector<Coupling> couplings;  // J, sorted by (i, j), i > j, unique
    double offset = 0.0;
    std::optional<ModelShape> shape;
};

inline QuboModel build_qubo(const ModelShape &shape, const CartesianParams &params) {
    shape.validate(std::max(shape.markers, default_max_markers));
    params.check(shape);
    const auto M = shape.markers, N = shape.nucleosomes, L = shape.max_distance;
    QuboModel qubo;
    qubo.n_vars = M * N;
    qubo.shape = shape;
    qubo.linear.assign(qubo.n_vars, 0.0);
    detail::CouplingMap quad;
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t m = 0; m < M; ++m) qubo.linear[n * M + m] = params.q[m];
        for (std::size_t m1 = 1; m1 < M; ++m1)
            for (std::size_t m2 = 0; m2 < m1; ++m2) detail::add_coupling(quad, n * M + m1, n * M + m2, params.R(m1, m2));
    }
    bool merged = false;
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t l = 1; l <= L; ++l) {
            for (std::size_t n = 0; n < N; ++n) {
                std::size_t n2 = n + l;
                if (n2 >= N) {
                    if (shape.boundary == Boundary::open) continue;
                    n2 %= N;
                }
                const auto key = std::make_pair(std::max(n * M + m, n2 * M + m), std::min(n * M + m, n2 * M + m));
                if (quad.count(key)) merged = true;
                detail::add_coupling(quad, n * M + m, n2 * M + m, params.S(m, l));
            }
        }
    }
    if (merged)
        warn("periodic shape " + shape.str() + " has 2L >= N; coinciding inter-nucleosome couplings were summed");
    qubo.quadratic = detail::to_couplings(quad);
    return qubo;
}

inline double qubo_energy(const QuboModel &model, const State &x) {
    if (x.size() != model.n_vars)
        throw Error("qubo_energy: state length " + std::to_string(x.size()) + " != " + std::to_string(model.n_vars));
    double e = model.offset;
    for (std::size_t i = 0; i < model.n_vars; ++i)
        if (x[i]) e += model.linear[i];
    for (const auto &c : model.quadratic)
        if (x[c.i] && x[c.j]) e += c.weight;
    return e;
}

inline double ising_energy(const IsingModel &model, const State &s) {
    if (s.size() != model.n_vars)
        throw Error("ising_energy: state length " + std::to_string(s.size()) + " != " + std::to_string(model.n_vars));
    double e = model.offset;
    for (std::size_t i = 0; i < model.n_vars; ++i) {
        if (s[i] != 1 && s[i] != -1) throw Error("ising_energy: entry " + std::to_string(i) + " is not -1 or +1");
        e += model.h[i] * s[i];
    }
    for (const auto &c : model.couplings) e += c.weight * s[c.i] * s[c.j];
    return e;
}

// x = (1 + s) / 2. Inactive (0) maps to spin -1, active (1) to +1.
inline IsingModel qubo_to_ising(const QuboModel &qubo) {
    IsingModel ising;
    ising.n_vars = qubo.n_vars;
    ising.shape = qubo.shape;
    ising.h.assign(qubo.n_vars, 0.0);
    ising.offset = qubo.offset;
    for (std::size_t i = 0; i < qubo.n_vars; ++i) {
        ising.h[i] += qubo.linear[i] / 2.0;
        ising.offset += qubo.linear[i] / 2.0;
    }
    ising.couplings.reserve(qubo.quadratic.size());
    for (const auto &c : qubo.quadratic) {
        const double w = c.weight / 4.0;
        ising.couplings.push_back({c.i, c.j, w});
        ising.h[c.i] += w;
        ising.h[c.j] += w;
        ising.offset += w;
    }
    return ising;
}

// s = 2x - 1.
inline QuboModel ising_to_qubo(const IsingModel &ising) {
    QuboModel qubo;
    qubo.n_vars = ising.n_vars;
    qubo.shape = ising.shape;
    qubo.linear.assign(ising.n_vars, 0.0);
    qubo.offset = ising.offset;
    for (std::size_t i = 0; i < ising.n_vars; ++i) {
        qubo.linear[i] += 2.0 * ising.h[i];
        qubo.offset -= ising.h[i];
    }
    qubo.quadratic.reserve(ising.couplings.size());
    for (const auto &c : ising.couplings) {
        qubo.quadratic.push_back({c.i, c.j, 4.0 * c.weight});
        qubo.linear[c.i] -= 2.0 * c.weight;
        qubo.linear[c.j] -= 2.0 * c.weight;
        qubo.offset += c.weight;
    }
    return qubo;
}

// Drops Ising couplings with |J| < delta; fields and offset are untouched.
inline IsingModel apply_threshold(const IsingModel &model, double delta) {
    if (!(delta >= 0.0)) throw Error("coupling threshold must be >= 0");
    IsingModel out = model;
    std::erase_if(out.couplings, [delta](const Coupling &c) { return std::abs(c.weight) < delta; });
    return out;
}

// Template state A (spins, M x N, marker-major like IncidenceMatrix) and bias strength f.
struct TemplateBias {
    std::size_t markers = 0;
    std::size_t nucleosomes = 0;
    std::vector<Value> spins;  // A, marker-major: (m, n) at m*N + n
    double strength = 0.0;     // f

    static TemplateBias from_incidence(const IncidenceMatrix &x, double f) {
        TemplateBias b{x.markers(), x.nucleosomes(), {}, f};
        b.spins.reserve(x.data().size());
        for (auto v : x.data()) b.spins.push_back(binary_to_spin(v));
        return b;
    }

    // A in variable order i = n*M + m.
    State as_state() const {
        State s(markers * nucleosomes);
        for (std::size_t m = 0; m < markers; ++m)
            for (std::size_t n = 0; n < nucleosomes; ++n) s[n * markers + m] = spins[m * nucleosomes + n];
        return s;
    }
};

// Linear incidence bias: h_i <- h_i - f * A_i, pulling each spin toward the template.
inline IsingModel apply_bias(const IsingModel &model, const TemplateBias &bias) {
    if (!(bias.strength >= 0.0)) throw Error("bias strength must be >= 0");
    if (bias.markers * bias.nucleosomes != model.n_vars || bias.spins.size() != model.n_vars ||
        (model.shape && (model.shape->markers != bias.markers || model.shape->nucleosomes != bias.nucleosomes)))
        throw Error("template shape [" + std::to_string(bias.markers) + "," + std::to_string(bias.nucleosomes) +
                    "] does not match the model");
    for (auto v : bias.spins)
        if (v != 1 && v != -1) throw Error("template entries must be -1 or +1");
    IsingModel out = model;
    const auto a = bias.as_state();
    for (std::size_t i = 0; i < out.n_vars; ++i) out.h[i] -= bias.strength * a[i];
    return out;
}

// Compressed adjacency for local energy differences. `field` is the linear term (QUBO diagonal or
// Ising h); `vartype` tells how to interpret states.
class CompiledModel {
  public:
    CompiledModel(const QuboModel &q) : CompiledModel(q.n_vars, q.linear, q.quadratic, Vartype::binary) {}
    CompiledModel(const IsingModel &m) : CompiledModel(m.n_vars, m.h, m.couplings, Vartype::spin) {}

    std::size_t size() const noexcept { return field_.size(); }
    Vartype vartype() const noexcept { return vartype_; }
    double field(std::size_t i) const { return field_[i]; }

    // Neighbours of i as [begin, end) offsets into neighbor()/weight().
    std::size_t begin(std::size_t i) const { return offsets_[i]; }
    std::size_t end(std::size_t i) const { return offsets_[i + 1]; }
    std::size_t neighbor(std::size_t k) const { return nbr_[k]; }
    double weight(std::size_t k) const { return w_[k]; }

    // Energy change from flipping variable i.
    double delta_energy(const State &x, std::size_t i) const {
        double local = field_[i];
        if (vartype_ == Vartype::binary) {
            for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k)
                if (x[nbr_[k]]) local += w_[k];
            return x[i] ? -local : local;
        }
        for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k) local += w_[k] * x[nbr_[k]];
        return -2.0 * x[i] * local;
    }

    double energy(const State &x) const {
        double e = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            if (vartype_ == Vartype::binary) {
                if (!x[i]) continue;
                e += field_[i];
                for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k)
                    if (nbr_[k] < i && x[nbr_[k]]) e += w_[k];
            } else {
                e += field_[i] * x[i];
                for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k)
                    if (nbr_[k] < i) e += w_[k] * x[i] * x[nbr_[k]];
            }
        }
        return e;
    }

  private:
    CompiledModel(std::size_t n, const std::vector<double> &field, const std::vector<Coupling> &couplings, Vartype vt)
            : vartype_(vt), field_(field), offsets_(n + 1, 0) {
        for (const auto &c : couplings) {
            ++offsets_[c.i + 1];
            ++offsets_[c.j + 1];
        }
        for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
        nbr_.resize(offsets_[n]);
        w_.resize(offsets_[n]);
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (const auto &c : couplings) {
            nbr_[fill[c.i]] = c.j;
            w_[fill[c.i]++] = c.weight;
            nbr_[fill[c.j]] = c.i;
            w_[fill[c.j]++] = c.weight;
        }
    }

    Vartype vartype_;
    std::vector<double> field_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> nbr_;
    std::vector<double> w_;
};

// Incidence matrix as a binary model state (i = n*M + m).
inline State incidence_to_state(const IncidenceMatrix &x) {
    State s(x.markers() * x.nucleosomes());
    for (std::size_t m = 0; m < x.markers(); ++m)
        for (std::size_t n = 0; n < x.nucleosomes(); ++n) s[n * x.markers() + m] = static_cast<Value>(x(m, n));
    return s;
}

//
// Model file: {"shape": {M, N, L}, "boundary": ..., "q": [...], "R": [[m1, m2, value], ...], "S": [[...], ...]}
//
struct CartesianModel {
    ModelShape shape;
    CartesianParams params;
};

inline void to_json(nlohmann::json &j, const CartesianModel &model) {
    const auto &p = model.params;
    auto rj = nlohmann::json::array();
    for (std::size_t m1 = 1; m1 < p.markers; ++m1)
        for (std::size_t m2 = 0; m2 < m1; ++m2) rj.push_back(nlohmann::json::array({m1, m2, p.R(m1, m2)}));
    auto sj = nlohmann::json::array();
    for (std::size_t m = 0; m < p.markers; ++m) {
        auto row = nlohmann::json::array();
        for (std::size_t l = 1; l <= p.max_distance; ++l) row.push_back(p.S(m, l));
        sj.push_back(row);
    }
    j = nlohmann::json{{"shape",
                        {{"M", model.shape.markers}, {"N", model.shape.nucleosomes}, {"L", model.shape.max_distance}}},
                       {"boundary", std::string(to_string(model.shape.boundary))},
                       {"q", p.q},
                       {"R", rj},
                       {"S", sj}};
}

inline void from_json(const nlohmann::json &j, CartesianModel &model) {
    const auto &sh = j.at("shape");
    model.shape.markers = sh.at("M").get<std::size_t>();
    model.shape.nucleosomes = sh.at("N").get<std::size_t>();
    model.shape.max_distance = sh.at("L").get<std::size_t>();
    model.shape.boundary = parse_boundary(j.value("boundary", sh.value("boundary", std::string("periodic"))));
    model.shape.validate(std::max(model.shape.markers, default_max_markers));
    CartesianParams p(model.shape.markers, model.shape.max_distance);
    p.q = j.at("q").get<std::vector<double>>();
    if (p.q.size() != p.markers) throw Error("model JSON: q must have M entries");
    std::vector<bool> seen(p.r.size(), false);
    for (const auto &t : j.at("R")) {
        const auto m1 = t.at(0).get<std::size_t>(), m2 = t.at(1).get<std::size_t>();
        if (m1 >= p.markers || m2 >= m1) throw Error("model JSON: R entries need M > m1 > m2");
        p.R(m1, m2) = t.at(2).get<double>();
        seen[CartesianParams::tri(m1, m2)] = true;
    }
    const auto &sj = j.at("S");
    if (sj.size() != p.markers) throw Error("model JSON: S must have M rows");
    for (std::size_t m = 0; m < p.markers; ++m) {
        auto row = sj.at(m).get<std::vector<double>>();
        if (row.size() != p.max_distance) throw Error("model JSON: S rows must have L entries");
        for (std::size_t l = 1; l <= p.max_distance; ++l) p.S(m, l) = row[l - 1];
    }
    p.check(model.shape);
    model.params = std::move(p);
}

//
// Ising edge-list text:
//   # ising n_vars <n> offset <offset>
//   <i> <h_i>          (one line per variable)
//   <i> <j> <J_ij>     (one line per coupling, i > j)
//
inline void write_ising_text(std::ostream &out, const IsingModel &m) {
    out << "# ising n_vars " << m.n_vars << " offset " << format_double(m.offset) << '\n';
    for (std::size_t i = 0; i < m.n_vars; ++i) out << i << ' ' << format_double(m.h[i]) << '\n';
    for (const auto &c : m.couplings) out << c.i << ' ' << c.j << ' ' << format_double(c.weight) << '\n';
}

inline IsingModel read_ising_text(std::istream &in) {
    IsingModel m;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    detail::CouplingMap couplings;
    while (std::getline(in, line)) {
        ++lineno;
        auto f = detail::split_ws(line);
        if (f.empty()) continue;
        if (!header) {
            if (f.size() != 6 || f[0] != "#" || f[1] != "ising" || f[2] != "n_vars" || f[4] != "offset" ||
                !detail::parse_number(f[3], m.n_vars) || !detail::parse_number(f[5], m.offset))
                throw ParseError(lineno, "expected header '# ising n_vars <n> offset <offset>'");
            m.h.assign(m.n_vars, 0.0);
            header = true;
            continue;
        }
        if (f[0].starts_with("#")) continue;
        std::size_t i = 0, j = 0;
        double w = 0.0;
        if (f.size() == 2) {
            if (!detail::parse_number(f[0], i) || !detail::parse_number(f[1], w) || i >= m.n_vars)
                throw ParseError(lineno, "bad field line");
            m.h[i] = w;
        } else if (f.size() == 3) {
            if (!detail::parse_number(f[0], i) || !detail::parse_number(f[1], j) || !detail::parse_number(f[2], w) ||
                i >= m.n_vars || j >= m.n_vars || i == j)
                throw ParseError(lineno, "bad coupling line");
            const auto key = i > j ? std::make_pair(i, j) : std::make_pair(j, i);
            if (couplings.count(key)) throw ParseError(lineno, "duplicate coupling");
            couplings[key] = w;
        } else {
            throw ParseError(lineno, "expected 2 or 3 fields");
        }
    }
    if (!header) throw Error("empty Ising file");
    m.couplings = detail::to_couplings(couplings);
    return m;
}

}  // namespace chromanneal
