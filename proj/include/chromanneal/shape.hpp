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

#include <cstddef>
#include <string>

#include "json.hpp"

#include "common.hpp"

namespace chromanneal {

inline constexpr std::size_t default_max_markers = 12;

// Structural parameters [M, N, L] of the Cartesian model plus its boundary condition.
struct ModelShape {
    std::size_t markers = 1;      // M
    std::size_t nucleosomes = 1;  // N
    std::size_t max_distance = 0; // L, inter-nucleosome coupling range
    Boundary boundary = Boundary::periodic;

    std::size_t n_vars() const noexcept { return markers * nucleosomes; }

    // L = 0 is accepted (and required) for single-nucleosome shapes.
    void validate(std::size_t max_markers = default_max_markers) const {
        if (markers < 1) throw Error("shape: M must be >= 1");
        if (markers > max_markers)
            throw Error("shape: M = " + std::to_string(markers) + " exceeds the marker cap " +
                        std::to_string(max_markers));
        if (nucleosomes < 1) throw Error("shape: N must be >= 1");
        if (max_distance >= nucleosomes) throw Error("shape: L must be < N");
        if (max_distance == 0 && nucleosomes > 1) throw Error("shape: L must be >= 1 when N > 1");
    }

    std::string str() const {
        return "[" + std::to_string(markers) + "," + std::to_string(nucleosomes) + "," +
               std::to_string(max_distance) + "]";
    }

    bool operator==(const ModelShape &) const = default;
};

// Variable index of incidence x_m^n: nucleosome-major, i = n*M + m.
inline std::size_t index_map(std::size_t m, std::size_t n, const ModelShape &shape) {
    if (m >= shape.markers || n >= shape.nucleosomes)
        throw Error("index_map: (m=" + std::to_string(m) + ", n=" + std::to_string(n) + ") out of range for " +
                    shape.str());
    return n * shape.markers + m;
}

// Overload without an N bound, for callers that only know M.
inline std::size_t index_map(std::size_t m, std::size_t n, std::size_t markers) {
    if (markers == 0 || m >= markers) throw Error("index_map: marker index out of range");
    return n * markers + m;
}

struct MarkerNucleosome {
    std::size_t marker;
    std::size_t nucleosome;
    bool operator==(const MarkerNucleosome &) const = default;
};

inline MarkerNucleosome inverse_index(std::size_t i, std::size_t markers) {
    if (markers == 0) throw Error("inverse_index: M must be >= 1");
    return {i % markers, i / markers};
}

inline void to_json(nlohmann::json &j, const ModelShape &s) {
    j = nlohmann::json{{"M", s.markers}, {"N", s.nucleosomes}, {"L", s.max_distance},
                       {"boundary", std::string(to_string(s.boundary))}};
}

inline void from_json(const nlohmann::json &j, ModelShape &s) {
    s.markers = j.at("M").get<std::size_t>();
    s.nucleosomes = j.at("N").get<std::size_t>();
    s.max_distance = j.at("L").get<std::size_t>();
    if (j.contains("boundary")) s.boundary = parse_boundary(j.at("boundary").get<std::string>());
}

}  // namespace chromanneal
