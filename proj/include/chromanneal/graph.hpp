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

// Undirected simple graphs with optional node and edge weights, plus the constructions used for
// objective graphs: complete graphs, circulant nucleosome graphs, Cartesian products and
// disjoint unions.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "ingest.hpp"
#include "model.hpp"

namespace chromanneal {

struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    auto operator<=>(const Edge &) const = default;
};

class Graph {
  public:
    Graph() = default;

    // Edges are normalized to u < v and sorted. Repeated edges are merged (weights summed) and
    // counted in merged_duplicates().
    explicit Graph(std::size_t n, std::vector<Edge> edges = {}, std::vector<double> edge_weights = {})
            : n_(n) {
        const bool weighted = !edge_weights.empty();
        if (weighted && edge_weights.size() != edges.size()) throw Error("graph: edge weight count mismatch");
        std::vector<std::pair<Edge, double>> tmp;
        tmp.reserve(edges.size());
        for (std::size_t k = 0; k < edges.size(); ++k) {
            auto e = edges[k];
            if (e.u == e.v) throw Error("graph: self-loop on node " + std::to_string(e.u));
            if (e.u >= n || e.v >= n) throw Error("graph: edge references a missing node");
            if (e.u > e.v) std::swap(e.u, e.v);
            tmp.push_back({e, weighted ? edge_weights[k] : 0.0});
        }
        std::stable_sort(tmp.begin(), tmp.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
        for (const auto &[e, w] : tmp) {
            if (!edges_.empty() && edges_.back() == e) {
                ++merged_;
                if (weighted) edge_weights_.back() += w;
                continue;
            }
            edges_.push_back(e);
            if (weighted) edge_weights_.push_back(w);
        }
        build_adjacency();
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t n_edges() const noexcept { return edges_.size(); }
    const std::vector<Edge> &edges() const noexcept { return edges_; }
    std::size_t merged_duplicates() const noexcept { return merged_; }

    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {adj_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
    std::size_t max_degree() const {
        std::size_t d = 0;
        for (std::size_t i = 0; i < n_; ++i) d = std::max(d, degree(i));
        return d;
    }

    bool has_edge(std::size_t a, std::size_t b) const {
        if (a >= n_ || b >= n_) return false;
        auto nb = neighbors(a);
        return std::binary_search(nb.begin(), nb.end(), b);
    }

    bool has_node_weights() const noexcept { return !node_weights_.empty(); }
    bool has_edge_weights() const noexcept { return !edge_weights_.empty(); }
    const std::vector<double> &node_weights() const noexcept { return node_weights_; }
    const std::vector<double> &edge_weights() const noexcept { return edge_weights_; }
    void set_node_weights(std::vector<double> w) {
        if (!w.empty() && w.size() != n_) throw Error("graph: node weight count mismatch");
        node_weights_ = std::move(w);
    }

    bool same_structure(const Graph &o) const { return n_ == o.n_ && edges_ == o.edges_; }

  private:
    void build_adjacency() {
        offsets_.assign(n_ + 1, 0);
        for (const auto &e : edges_) {
            ++offsets_[e.u + 1];
            ++offsets_[e.v + 1];
        }
        for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
        adj_.resize(offsets_[n_]);
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (const auto &e : edges_) {
            adj_[fill[e.u]++] = e.v;
            adj_[fill[e.v]++] = e.u;
        }
        for (std::size_t i = 0; i < n_; ++i)
            std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                      adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
    }

    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<double> edge_weights_;
    std::vector<double> node_weights_;
    std::size_t merged_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> adj_;
};

struct GraphMetrics {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double avg_degree = 0.0;  // <k> = 2|E| / |V|
    double gamma = 0.0;       // 2|E| / (|V| (|V| - 1))
};

inline GraphMetrics metrics(const Graph &g) {
    if (g.size() < 2) throw Error("metrics: edge density needs at least two nodes");
    GraphMetrics m;
    m.nodes = g.size();
    m.edges = g.n_edges();
    const auto v = static_cast<double>(m.nodes), e = static_cast<double>(m.edges);
    m.avg_degree = 2.0 * e / v;
    m.gamma = 2.0 * e / (v * (v - 1.0));
    return m;
}

// Node per variable weighted by h; edge per nonzero coupling weighted by J.
inline Graph objective_graph(const IsingModel &model) {
    std::vector<Edge> edges;
    std::vector<double> w;
    for (const auto &c : model.couplings) {
        if (c.weight == 0.0) continue;
        edges.push_back({c.j, c.i});
        w.push_back(c.weight);
    }
    Graph g(model.n_vars, std::move(edges), std::move(w));
    g.set_node_weights(model.h);
    return g;
}

inline Graph complete_graph(std::size_t n) {
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) edges.push_back({a, b});
    return Graph(n, std::move(edges));
}

inline Graph marker_intersection_graph(std::size_t markers) {
    if (markers < 1) throw Error("marker graph: M must be >= 1");
    return complete_graph(markers);
}

// Node n joined to n + l for l = 1..L, wrapping modulo N when periodic.
inline Graph nucleosome_intersection_graph(std::size_t nucleosomes, std::size_t max_distance, Boundary boundary) {
    if (nucleosomes < 1) throw Error("nucleosome graph: N must be >= 1");
    if (max_distance >= nucleosomes && max_distance > 0) throw Error("nucleosome graph: L must be < N");
    std::vector<Edge> edges;
    for (std::size_t n = 0; n < nucleosomes; ++n)
        for (std::size_t l = 1; l <= max_distance; ++l) {
            if (n + l >= nucleosomes && boundary == Boundary::open) continue;
            edges.push_back({n, (n + l) % nucleosomes});
        }
    Graph g(nucleosomes, std::move(edges));
    if (g.merged_duplicates() > 0)
        warn("nucleosome graph with 2L >= N: " + std::to_string(g.merged_duplicates()) + " duplicate edges merged");
    return g;
}

// Node (a, b) of G1 x G2 gets index b * |V1| + a, so K_M x C gives the variable order n*M + m.
inline Graph cartesian_product(const Graph &g1, const Graph &g2) {
    const auto n1 = g1.size(), n2 = g2.size();
    std::vector<Edge> edges;
    edges.reserve(g1.n_edges() * n2 + g2.n_edges() * n1);
    for (std::size_t b = 0; b < n2; ++b)
        for (const auto &e : g1.edges()) edges.push_back({b * n1 + e.u, b * n1 + e.v});
    for (const auto &e : g2.edges())
        for (std::size_t a = 0; a < n1; ++a) edges.push_back({e.u * n1 + a, e.v * n1 + a});
    return Graph(n1 * n2, std::move(edges));
}

// Copy c of node i gets index c * |V| + i.
struct ClusterGraph {
    Graph graph;
    std::size_t copies = 0;
    std::size_t copy_size = 0;
    std::size_t copy_of(std::size_t node) const { return node / copy_size; }
    std::size_t original(std::size_t node) const { return node % copy_size; }
};

inline ClusterGraph replicate_cluster(const Graph &source, std::size_t n_copies) {
    if (n_copies < 1) throw Error("replicate_cluster: need at least one copy");
    const auto n = source.size();
    std::vector<Edge> edges;
    std::vector<double> w;
    edges.reserve(source.n_edges() * n_copies);
    for (std::size_t c = 0; c < n_copies; ++c)
        for (std::size_t k = 0; k < source.n_edges(); ++k) {
            const auto &e = source.edges()[k];
            edges.push_back({c * n + e.u, c * n + e.v});
            if (source.has_edge_weights()) w.push_back(source.edge_weights()[k]);
        }
    ClusterGraph out{Graph(n * n_copies, std::move(edges), std::move(w)), n_copies, n};
    if (source.has_node_weights()) {
        std::vector<double> nw;
        for (std::size_t c = 0; c < n_copies; ++c)
            nw.insert(nw.end(), source.node_weights().begin(), source.node_weights().end());
        out.graph.set_node_weights(std::move(nw));
    }
    return out;
}

// Disjoint union of n_copies of an Ising model, numbered like replicate_cluster.
inline IsingModel replicate_model(const IsingModel &model, std::size_t n_copies) {
    if (n_copies < 1) throw Error("replicate_model: need at least one copy");
    IsingModel out;
    const auto n = model.n_vars;
    out.n_vars = n * n_copies;
    out.offset = model.offset * static_cast<double>(n_copies);
    out.h.reserve(out.n_vars);
    for (std::size_t c = 0; c < n_copies; ++c) {
        out.h.insert(out.h.end(), model.h.begin(), model.h.end());
        for (const auto &e : model.couplings) out.couplings.push_back({c * n + e.i, c * n + e.j, e.weight});
    }
    return out;
}

//
// Edge-list text:
//   <kind> <m> <|V|> <|E|>
//   <u> <v> [weight]
//
inline void write_edge_list(std::ostream &out, const Graph &g, const std::string &kind = "graph", std::size_t m = 0,
                            const std::vector<std::int64_t> &labels = {}) {
    out << kind << ' ' << m << ' ' << g.size() << ' ' << g.n_edges() << '\n';
    for (std::size_t k = 0; k < g.n_edges(); ++k) {
        const auto &e = g.edges()[k];
        if (labels.empty())
            out << e.u << ' ' << e.v;
        else
            out << labels[e.u] << ' ' << labels[e.v];
        if (g.has_edge_weights()) out << ' ' << format_double(g.edge_weights()[k]);
        out << '\n';
    }
}

struct EdgeListFile {
    std::string kind;
    std::size_t m = 0;
    Graph graph;
};

inline EdgeListFile read_edge_list(std::istream &in) {
    EdgeListFile f;
    std::string line;
    std::size_t lineno = 0, n = 0, declared = 0;
    bool header = false;
    std::vector<Edge> edges;
    std::vector<double> w;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = detail::split_ws(line);
        if (t.empty() || t[0].starts_with("#")) continue;
        if (!header) {
            if (t.size() != 4 || !detail::parse_number(t[1], f.m) || !detail::parse_number(t[2], n) ||
                !detail::parse_number(t[3], declared))
                throw ParseError(lineno, "expected header '<kind> <m> <|V|> <|E|>'");
            f.kind = std::string(t[0]);
            header = true;
            continue;
        }
        Edge e;
        double wt = 0.0;
        if ((t.size() != 2 && t.size() != 3) || !detail::parse_number(t[0], e.u) || !detail::parse_number(t[1], e.v) ||
            (t.size() == 3 && !detail::parse_number(t[2], wt)))
            throw ParseError(lineno, "expected '<u> <v> [weight]'");
        if (e.u >= n || e.v >= n || e.u == e.v) throw ParseError(lineno, "edge endpoint out of range");
        if (t.size() == 3) w.push_back(wt);
        edges.push_back(e);
    }
    if (!header) throw Error("empty edge-list file");
    if (edges.size() != declared) throw Error("edge-list header declares " + std::to_string(declared) + " edges, found " +
                                              std::to_string(edges.size()));
    if (!w.empty() && w.size() != edges.size()) throw Error("edge-list: weights must be given for all edges or none");
    f.graph = Graph(n, std::move(edges), std::move(w));
    return f;
}

}  // namespace chromanneal
