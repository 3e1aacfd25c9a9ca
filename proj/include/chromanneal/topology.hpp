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

// Defect-free Chimera, Pegasus and Zephyr hardware graphs.
//
// Every generator first enumerates edges on the vendor's linear qubit labels, then compacts the
// nodes that appear, in increasing label order, to indices 0..|V|-1. `labels[i]` keeps the linear
// label of compact node i.
//
//   chimera(m), t = 4:   label = i*m*2t + j*2t + u*t + k            (cell row i, column j)
//   pegasus(m):          label = u*12*m*(m-1) + w*12*(m-1) + k*(m-1) + z   (fabric nodes only)
//   zephyr(m), t = 4:    label = (((u*(2m+1) + w)*t + k)*2 + j)*m + z

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "graph.hpp"
#include "ingest.hpp"

namespace chromanneal {

enum class TopologyKind { chimera, pegasus, zephyr };

inline std::string_view to_string(TopologyKind k) {
    switch (k) {
    case TopologyKind::chimera: return "chimera";
    case TopologyKind::pegasus: return "pegasus";
    case TopologyKind::zephyr: return "zephyr";
    }
    return "?";
}

inline TopologyKind parse_topology(std::string_view s) {
    if (s == "chimera") return TopologyKind::chimera;
    if (s == "pegasus") return TopologyKind::pegasus;
    if (s == "zephyr") return TopologyKind::zephyr;
    throw Error("unsupported topology '" + std::string(s) + "' (expected chimera|pegasus|zephyr)");
}

inline std::size_t degree_bound(TopologyKind k) {
    switch (k) {
    case TopologyKind::chimera: return 6;
    case TopologyKind::pegasus: return 15;
    case TopologyKind::zephyr: return 20;
    }
    return 0;
}

struct HardwareGraph {
    Graph graph;
    TopologyKind kind = TopologyKind::pegasus;
    std::size_t m = 0;
    std::vector<std::int64_t> labels;  // vendor linear label per compact node

    std::size_t size() const { return graph.size(); }
};

namespace detail {

using LabelEdge = std::pair<std::int64_t, std::int64_t>;

inline HardwareGraph compact(std::vector<LabelEdge> edges, TopologyKind kind, std::size_t m) {
    std::vector<std::int64_t> labels;
    labels.reserve(2 * edges.size());
    for (const auto &[a, b] : edges) {
        labels.push_back(a);
        labels.push_back(b);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    auto idx = [&](std::int64_t l) {
        return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), l) - labels.begin());
    };
    std::vector<Edge> out;
    out.reserve(edges.size());
    for (const auto &[a, b] : edges) out.push_back({idx(a), idx(b)});
    HardwareGraph hw{Graph(labels.size(), std::move(out)), kind, m, std::move(labels)};
    if (hw.graph.merged_duplicates() > 0) throw Error("topology generator produced duplicate edges");
    return hw;
}

inline std::vector<LabelEdge> chimera_edges(std::int64_t m) {
    constexpr std::int64_t t = 4;
    auto label = [&](std::int64_t i, std::int64_t j, std::int64_t u, std::int64_t k) {
        return i * m * 2 * t + j * 2 * t + u * t + k;
    };
    std::vector<LabelEdge> e;
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < m; ++j) {
            for (std::int64_t k0 = 0; k0 < t; ++k0)
                for (std::int64_t k1 = 0; k1 < t; ++k1) e.push_back({label(i, j, 0, k0), label(i, j, 1, k1)});
            for (std::int64_t k = 0; k < t; ++k) {
                if (j + 1 < m) e.push_back({label(i, j, 1, k), label(i, j + 1, 1, k)});
                if (i + 1 < m) e.push_back({label(i, j, 0, k), label(i + 1, j, 0, k)});
            }
        }
    return e;
}

inline std::vector<LabelEdge> pegasus_edges(std::int64_t m) {
    const std::int64_t m1 = m - 1;
    constexpr std::array<std::int64_t, 12> off0{2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6};
    constexpr std::array<std::int64_t, 12> off1{6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10};
    const std::array<std::int64_t, 2> fs{*std::min_element(off1.begin(), off1.end()),
                                         *std::min_element(off0.begin(), off0.end())};
    const std::array<std::int64_t, 2> fe{12 - *std::max_element(off1.begin(), off1.end()),
                                         12 - *std::max_element(off0.begin(), off0.end())};
    auto label = [&](std::int64_t u, std::int64_t w, std::int64_t k, std::int64_t z) {
        return u * 12 * m * m1 + w * 12 * m1 + k * m1 + z;
    };
    auto fabric = [&](std::int64_t u, std::int64_t w, std::int64_t k) {
        if (w == 0 && k < fs[u]) return false;
        if (w == m1 && k >= 12 - fe[u]) return false;
        return true;
    };
    std::vector<LabelEdge> e;
    for (std::int64_t u = 0; u < 2; ++u)
        for (std::int64_t w = 0; w < m; ++w) {
            const std::int64_t k0 = w == 0 ? fs[u] : 0, k1 = 12 - (w == m1 ? fe[u] : 0);
            for (std::int64_t k = k0; k < k1; ++k)
                for (std::int64_t z = 0; z + 1 < m1; ++z) e.push_back({label(u, w, k, z), label(u, w, k, z + 1)});
            for (std::int64_t k = k0; k < k1; k += 2)
                for (std::int64_t z = 0; z < m1; ++z) e.push_back({label(u, w, k, z), label(u, w, k + 1, z)});
        }
    for (std::int64_t w = 0; w < m; ++w)
        for (std::int64_t kk = 0; kk < 12; ++kk) {
            const std::int64_t k0 = w ? 0 : off1[kk], k1 = w < m1 ? 12 : off1[kk];
            for (std::int64_t k = k0; k < k1; ++k)
                for (std::int64_t z = 0; z < m1; ++z) {
                    const std::int64_t w2 = z + (kk < off0[k] ? 1 : 0), z2 = w - (k < off1[kk] ? 1 : 0);
                    if (!fabric(0, w, k) || !fabric(1, w2, kk)) continue;
                    e.push_back({label(0, w, k, z), label(1, w2, kk, z2)});
                }
        }
    return e;
}

inline std::vector<LabelEdge> zephyr_edges(std::int64_t m) {
    constexpr std::int64_t t = 4;
    const std::int64_t M = 2 * m + 1;
    auto label = [&](std::int64_t u, std::int64_t w, std::int64_t k, std::int64_t j, std::int64_t z) {
        return (((u * M + w) * t + k) * 2 + j) * m + z;
    };
    std::vector<LabelEdge> e;
    for (std::int64_t u = 0; u < 2; ++u)
        for (std::int64_t w = 0; w < M; ++w)
            for (std::int64_t k = 0; k < t; ++k) {
                for (std::int64_t j = 0; j < 2; ++j)
                    for (std::int64_t z = 0; z + 1 < m; ++z) e.push_back({label(u, w, k, j, z), label(u, w, k, j, z + 1)});
                for (std::int64_t a = 0; a < 2; ++a)
                    for (std::int64_t z = a; z < m; ++z) e.push_back({label(u, w, k, 0, z), label(u, w, k, 1, z - a)});
            }
    for (std::int64_t w = 0; w < m; ++w)
        for (std::int64_t z = 0; z < m; ++z)
            for (std::int64_t h = 0; h < t; ++h)
                for (std::int64_t k = 0; k < t; ++k)
                    for (std::int64_t i = 0; i < 2; ++i)
                        for (std::int64_t j = 0; j < 2; ++j)
                            for (std::int64_t a = 0; a < 2; ++a)
                                for (std::int64_t b = 0; b < 2; ++b)
                                    e.push_back({label(0, 2 * w + 1 + a * (2 * i - 1), k, j, z),
                                                 label(1, 2 * z + 1 + b * (2 * j - 1), h, i, w)});
    return e;
}

}  // namespace detail

inline HardwareGraph build_hardware(TopologyKind kind, std::size_t m) {
    if (m < 1) throw Error("topology size m must be >= 1");
    if (kind == TopologyKind::pegasus && m < 2) throw Error("pegasus needs m >= 2");
    const auto mm = static_cast<std::int64_t>(m);
    switch (kind) {
    case TopologyKind::chimera: return detail::compact(detail::chimera_edges(mm), kind, m);
    case TopologyKind::pegasus: return detail::compact(detail::pegasus_edges(mm), kind, m);
    case TopologyKind::zephyr: return detail::compact(detail::zephyr_edges(mm), kind, m);
    }
    throw Error("unsupported topology");
}

// Removes blocked qubits (by vendor label) and blocked couplers (label pairs). Remaining nodes
// keep their labels and relative order.
inline HardwareGraph apply_blocklist(const HardwareGraph &hw, const std::set<std::int64_t> &nodes,
                                     const std::set<std::pair<std::int64_t, std::int64_t>> &couplers) {
    std::vector<std::size_t> remap(hw.size(), SIZE_MAX);
    std::vector<std::int64_t> labels;
    for (std::size_t i = 0; i < hw.size(); ++i)
        if (!nodes.count(hw.labels[i])) {
            remap[i] = labels.size();
            labels.push_back(hw.labels[i]);
        }
    std::vector<Edge> edges;
    for (const auto &e : hw.graph.edges()) {
        if (remap[e.u] == SIZE_MAX || remap[e.v] == SIZE_MAX) continue;
        const auto a = hw.labels[e.u], b = hw.labels[e.v];
        if (couplers.count({std::min(a, b), std::max(a, b)})) continue;
        edges.push_back({remap[e.u], remap[e.v]});
    }
    return HardwareGraph{Graph(labels.size(), std::move(edges)), hw.kind, hw.m, std::move(labels)};
}

// Blocklist text: `node <label>` or `edge <label> <label>` per line, `#` comments.
inline HardwareGraph apply_blocklist(const HardwareGraph &hw, std::istream &in) {
    std::set<std::int64_t> nodes;
    std::set<std::pair<std::int64_t, std::int64_t>> couplers;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = detail::split_ws(line);
        if (t.empty() || t[0].starts_with("#")) continue;
        std::int64_t a = 0, b = 0;
        if (t[0] == "node" && t.size() == 2 && detail::parse_number(t[1], a)) {
            nodes.insert(a);
        } else if (t[0] == "edge" && t.size() == 3 && detail::parse_number(t[1], a) && detail::parse_number(t[2], b)) {
            couplers.insert({std::min(a, b), std::max(a, b)});
        } else {
            throw ParseError(lineno, "expected 'node <label>' or 'edge <label> <label>'");
        }
    }
    return apply_blocklist(hw, nodes, couplers);
}

inline void write_hardware_edge_list(std::ostream &out, const HardwareGraph &hw) {
    write_edge_list(out, hw.graph, std::string(to_string(hw.kind)), hw.m);
}

}  // namespace chromanneal
