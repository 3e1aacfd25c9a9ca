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

// Minor embedding of logical graphs into hardware graphs, chain diagnostics, physical Ising
// construction and unembedding.
//
// The search is a tear-out-and-rebuild heuristic. A chain is rebuilt as a root qubit plus shortest
// paths to the chains of its placed neighbours, where a qubit's cost grows exponentially with the
// number of chains already using it. Path segments that serve a single neighbour are handed to that
// neighbour and taken back when the chain is rebuilt. Passes that forbid a chain from reaching qubits
// as full as its previous worst one push the overlap down until no qubit is shared; later passes
// rebuild chains on free qubits to shorten them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "graph.hpp"
#include "model.hpp"
#include "topology.hpp"

namespace chromanneal {

using Chain = std::vector<std::size_t>;  // sorted compact hardware node indices

struct Embedding {
    std::vector<Chain> chains;  // one per logical variable
    std::string source_id;
    TopologyKind target_kind = TopologyKind::pegasus;
    std::size_t target_m = 0;

    std::size_t n_qubits() const {
        std::size_t n = 0;
        for (const auto &c : chains) n += c.size();
        return n;
    }
};

struct EmbedOptions {
    std::uint64_t seed = 0;
    std::size_t max_tries = 10;        // independent restarts
    std::size_t max_rounds = 10000;    // overlap-removal passes per try
    std::size_t patience = 10;         // passes without improvement before a try is abandoned
    std::size_t shrink_passes = 2;     // chain-shortening passes without improvement before stopping
    unsigned threads = 1;              // tries run in parallel batches of this size
};

struct EmbedResult {
    std::optional<Embedding> embedding;
    std::size_t tries = 0;             // tries attempted (including the successful one)
    std::size_t successful_try = 0;
};

namespace detail {

// A chain kept as a tree. Each qubit stores its parent (the root is its own parent) and a reference
// count: children pointing at it plus links naming it. links[v] is the qubit of this chain that
// touches (is adjacent or equal to) the chain of v. links[self] is the root.
struct TreeChain {
    std::unordered_map<std::size_t, std::pair<std::size_t, int>> nodes;
    std::unordered_map<std::size_t, std::size_t> links;
};

class ChainPlacer {
    using Dist = std::int64_t;
    static constexpr Dist inf = std::numeric_limits<Dist>::max();
    static constexpr std::size_t none = SIZE_MAX;

  public:
    ChainPlacer(const Graph &source, const Graph &target, Rng &rng)
            : src_(source), tgt_(target), rng_(rng), nv_(source.size()), nq_(target.size()), chains_(nv_),
              usage_(nq_, 0), nbrs_(nv_), perm_(nv_) {
        for (std::size_t u = 0; u < nv_; ++u) {
            auto n = source.neighbors(u);
            nbrs_[u].assign(n.begin(), n.end());
            perm_[u].resize(nq_);
            for (std::size_t q = 0; q < nq_; ++q) perm_[u][q] = static_cast<std::uint32_t>(q);
            shuffle(perm_[u], rng_);
        }
        std::size_t maxdeg = 1;
        for (std::size_t u = 0; u < nv_; ++u) maxdeg = std::max(maxdeg, nbrs_[u].size());
        exponent_room_ = 62.0 - std::log2(static_cast<double>(maxdeg * std::max<std::size_t>(nq_, 2)));
        default_bound_ = std::max(1, static_cast<int>(std::floor(exponent_room_)));
        bound_ = default_bound_;
        weight_.assign(nq_, 1);
        total_.assign(nq_, 0);
    }

    std::optional<std::vector<Chain>> run(const EmbedOptions &opt) {
        for (auto u : order(true))
            if (!place(u)) return std::nullopt;
        best_stats_.clear();
        improved(true);
        chains_ = best_chains_;
        usage_ = best_usage_;

        std::size_t patience = opt.patience, pushback = 0;
        for (std::size_t round = 0; round < opt.max_rounds && patience > 0 && !embedded_; ++round) {
            desperate_ = patience <= 1 || round + 1 == opt.max_rounds;
            int r;
            if (pushback < nv_) {
                r = pushdown_pass(pushback);
            } else {
                --pushback;
                r = overfill_pass();
            }
            if (r < 0) {
                chains_ = best_chains_;
                usage_ = best_usage_;
            }
            if (r > 0) {
                patience = opt.patience;
                pushback = 0;
            } else {
                --patience;
            }
        }
        if (!embedded_) return std::nullopt;

        bound_ = 1;
        chains_ = best_chains_;
        usage_ = best_usage_;
        for (std::size_t p = opt.shrink_passes; p > 0;) {
            auto keep_chains = chains_;
            auto keep_usage = usage_;
            const int r = shrink_pass();
            if (r < 0) {
                chains_ = std::move(keep_chains);
                usage_ = std::move(keep_usage);
            }
            if (r > 0)
                p = opt.shrink_passes;
            else
                --p;
        }

        std::vector<Chain> out(nv_);
        for (std::size_t u = 0; u < nv_; ++u) {
            for (const auto &kv : best_chains_[u].nodes) out[u].push_back(kv.first);
            std::sort(out[u].begin(), out[u].end());
        }
        return out;
    }

  private:
    // --- chain tree bookkeeping

    std::size_t size(std::size_t u) const { return chains_[u].nodes.size(); }
    bool contains(std::size_t u, std::size_t q) const { return chains_[u].nodes.count(q) > 0; }
    int &refs(std::size_t u, std::size_t q) { return chains_[u].nodes.at(q).second; }

    std::size_t link(std::size_t u, std::size_t x) const {
        auto it = chains_[u].links.find(x);
        return it == chains_[u].links.end() ? none : it->second;
    }

    void set_link(std::size_t u, std::size_t x, std::size_t q) {
        chains_[u].links[x] = q;
        ++refs(u, q);
    }

    std::size_t drop_link(std::size_t u, std::size_t x) {
        auto it = chains_[u].links.find(x);
        if (it == chains_[u].links.end()) return none;
        const auto q = it->second;
        --refs(u, q);
        chains_[u].links.erase(it);
        return q;
    }

    void set_root(std::size_t u, std::size_t q) {
        chains_[u].links.emplace(u, q);
        chains_[u].nodes.emplace(q, std::make_pair(q, 2));
        ++usage_[q];
    }

    void add_leaf(std::size_t u, std::size_t q, std::size_t parent) {
        chains_[u].nodes.emplace(q, std::make_pair(parent, 0));
        ++usage_[q];
        ++refs(u, parent);
    }

    // Removes q when nothing references it. Returns its parent if removed, q otherwise.
    std::size_t trim_leaf(std::size_t u, std::size_t q) {
        auto it = chains_[u].nodes.find(q);
        if (it->second.second != 0) return q;
        const auto p = it->second.first;
        --usage_[q];
        chains_[u].nodes.erase(it);
        --refs(u, p);
        return p;
    }

    std::size_t trim_branch(std::size_t u, std::size_t q) {
        for (auto p = trim_leaf(u, q); p != q; p = trim_leaf(u, q)) q = p;
        return q;
    }

    void clear(std::size_t u) {
        for (const auto &kv : chains_[u].nodes) --usage_[kv.first];
        chains_[u].nodes.clear();
        chains_[u].links.clear();
    }

    void tear_out(std::size_t u) {
        clear(u);
        for (auto v : nbrs_[u]) drop_link(v, u);
    }

    // u takes over the qubits v holds only for its link towards u, walking back from that link,
    // until u reaches `limit` qubits (0 = no limit).
    void steal(std::size_t u, std::size_t v, std::size_t limit) {
        auto q = drop_link(u, v), p = drop_link(v, u);
        while (limit == 0 || size(u) < limit) {
            const auto r = trim_leaf(v, p);
            if (r == p) break;
            if (!contains(u, p)) {
                add_leaf(u, p, q);
            } else if (p != q) {
                ++refs(u, p);
                trim_branch(u, q);
                --refs(u, p);
            }
            q = p;
            p = r;
        }
        set_link(u, v, q);
        set_link(v, u, p);
    }

    bool linked_pair(std::size_t u, std::size_t v) const { return link(u, v) != none && link(v, u) != none; }

    void steal_all(std::size_t u) {
        for (auto v : nbrs_[u])
            if (linked_pair(u, v)) steal(u, v, 0);
    }

    // Hands path segments of u back to the neighbours they lead to.
    void give_back(std::size_t u, std::size_t limit) {
        for (auto v : nbrs_[u])
            if (size(v) && linked_pair(u, v)) steal(v, u, limit);
    }

    struct Frozen {
        TreeChain chain;
        std::vector<std::pair<std::size_t, std::size_t>> incoming;  // (neighbour, its link qubit)
    };

    void freeze(std::size_t u) {
        frozen_.incoming.clear();
        for (const auto &[x, q] : chains_[u].links)
            if (x != u) frozen_.incoming.push_back({x, drop_link(x, u)});
        for (const auto &kv : chains_[u].nodes) --usage_[kv.first];
        frozen_.chain = std::move(chains_[u]);
        chains_[u] = TreeChain{};
    }

    void thaw(std::size_t u) {
        chains_[u] = std::move(frozen_.chain);
        for (const auto &kv : chains_[u].nodes) ++usage_[kv.first];
        for (const auto &[x, q] : frozen_.incoming) set_link(x, u, q);
    }

    // --- search

    void compute_weights() {
        const int top = *std::max_element(usage_.begin(), usage_.end());
        const double log_base = top <= 0 ? 1.0 : exponent_room_ / top;
        table_.assign(64, inf);
        double power = 1.0;
        for (int i = 0; i <= std::min(top, 62); ++i) {
            table_[i] = static_cast<Dist>(power);
            power *= std::exp2(log_base);
        }
        for (std::size_t q = 0; q < nq_; ++q) weight_[q] = usage_[q] < 64 ? table_[usage_[q]] : inf;
    }

    struct Slot {
        std::vector<Dist> dist;
        std::vector<std::size_t> parent;
        std::vector<char> seen;
    };

    Slot &slot(std::size_t k) {
        while (slots_.size() <= k) slots_.push_back({std::vector<Dist>(nq_), std::vector<std::size_t>(nq_),
                                                     std::vector<char>(nq_)});
        return slots_[k];
    }

    // Node-weighted shortest paths from the chain of v. Qubits at or above the fill bound are walls.
    void distances_from(std::size_t v, Slot &s) {
        using Item = std::tuple<Dist, std::uint32_t, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        const auto &perm = perm_[v];
        std::fill(s.seen.begin(), s.seen.end(), 0);
        for (const auto &kv : chains_[v].nodes) {
            const auto q = kv.first;
            s.parent[q] = none;
            s.seen[q] = 1;
            pq.emplace(0, perm[q], q);
        }
        while (!pq.empty()) {
            const auto [d, r, q] = pq.top();
            pq.pop();
            s.dist[q] = d;
            for (auto p : tgt_.neighbors(q)) {
                if (s.seen[p]) continue;
                s.seen[p] = 1;
                if (usage_[p] >= bound_) {
                    s.dist[p] = inf;
                } else {
                    s.parent[p] = q;
                    pq.emplace(d + weight_[p], perm[p], p);
                }
            }
        }
    }

    void accumulate(std::size_t v, const Slot &s) {
        for (const auto &kv : chains_[v].nodes) {
            const auto q = kv.first;
            if (total_[q] != inf && usage_[q] < bound_ && weight_[q] != inf)
                total_[q] += weight_[q];
            else
                total_[q] = inf;
        }
        for (std::size_t q = 0; q < nq_; ++q) {
            if (s.seen[q] && total_[q] != inf && s.dist[q] != inf && usage_[q] < bound_)
                total_[q] += s.dist[q];
            else
                total_[q] = inf;
        }
    }

    void link_path(std::size_t u, std::size_t v, std::size_t q, const Slot &s) {
        auto p = s.parent[q];
        if (p == none) {
            p = q;
        } else {
            while (!contains(v, p)) {
                if (contains(u, p))
                    trim_branch(u, q);
                else
                    add_leaf(u, p, q);
                q = p;
                p = s.parent[p];
            }
        }
        set_link(u, v, q);
        set_link(v, u, p);
    }

    // Builds a chain for the (empty) variable u touching every placed neighbour. Each path starts at
    // the root or a branch point closest to that neighbour.
    bool build(std::size_t u) {
        auto &nb = nbrs_[u];
        if (nb.size() >= 2) {
            const auto i = uniform_index(rng_, nb.size() - 1);
            std::swap(nb[i], nb[i + 1]);
            perm_[u].swap(perm_[nb[uniform_index(rng_, nb.size())]]);
        }
        compute_weights();
        std::fill(total_.begin(), total_.end(), 0);
        std::size_t placed = 0;
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (!size(nb[k])) continue;
            ++placed;
            distances_from(nb[k], slot(k));
            accumulate(nb[k], slot(k));
        }
        if (!placed)
            for (std::size_t q = 0; q < nq_; ++q) total_[q] = usage_[q] >= bound_ ? inf : weight_[q];

        Dist lo = inf;
        std::vector<std::size_t> roots;
        for (std::size_t q = 0; q < nq_; ++q) {
            if (total_[q] < lo) {
                lo = total_[q];
                roots.clear();
            }
            if (total_[q] == lo) roots.push_back(q);
        }
        if (lo == inf) return false;
        const auto root = roots[uniform_index(rng_, roots.size())];

        set_root(u, root);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const auto v = nb[k];
            if (!size(v)) continue;
            const auto &s = slots_[k];
            auto start = root;
            Dist ds = s.seen[root] ? s.dist[root] : inf;
            for (const auto &[p, node] : chains_[u].nodes) {
                if (node.second <= 1) continue;
                const Dist dp = s.seen[p] ? s.dist[p] : inf;
                if (dp < ds) {
                    ds = dp;
                    start = p;
                }
            }
            link_path(u, v, start, s);
        }
        return true;
    }

    // Tear out and rebuild u while qubits may still be shared.
    bool place(std::size_t u) {
        if (desperate_) steal_all(u);
        tear_out(u);
        if (!build(u)) return false;
        give_back(u, 0);
        return true;
    }

    // --- passes

    std::vector<std::size_t> order(bool priority) {
        std::vector<std::size_t> shuffled(nv_);
        for (std::size_t u = 0; u < nv_; ++u) shuffled[u] = u;
        shuffle(shuffled, rng_);
        if (!priority) return shuffled;
        // Priority-first: next is the variable with the most already ordered neighbours.
        std::vector<std::uint32_t> rank(nv_);
        for (std::size_t i = 0; i < nv_; ++i) rank[shuffled[i]] = static_cast<std::uint32_t>(i);
        std::vector<char> seen(nv_, 0);
        std::vector<std::size_t> out;
        using Item = std::tuple<long, std::uint32_t, std::size_t>;
        for (auto s : shuffled) {
            if (seen[s]) continue;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
            pq.emplace(0, rank[s], s);
            while (!pq.empty()) {
                const auto x = std::get<2>(pq.top());
                pq.pop();
                if (seen[x]) continue;
                seen[x] = 1;
                out.push_back(x);
                for (auto y : nbrs_[x]) {
                    if (seen[y]) continue;
                    long d = 0;
                    for (auto w : nbrs_[y]) d -= seen[w];
                    pq.emplace(d, rank[y], y);
                }
            }
        }
        return out;
    }

    // Re-place every chain without letting it touch qubits as full as its previous worst one.
    int pushdown_pass(std::size_t &pushback) {
        bool better = false;
        for (auto u : order(false)) {
            if (pushback < nv_) {
                steal_all(u);
                int fill = 0;
                for (const auto &kv : chains_[u].nodes) fill = std::max(fill, usage_[kv.first]);
                bound_ = fill;
                freeze(u);
                if (!build(u)) {
                    pushback += 3;
                    thaw(u);
                }
                give_back(u, 0);
            } else {
                bound_ = default_bound_;
                steal_all(u);
                tear_out(u);
                if (!build(u)) return -1;
                give_back(u, 0);
            }
            bound_ = default_bound_;
            better |= improved(false);
            if (embedded_) break;
        }
        bound_ = default_bound_;
        return better ? 1 : 0;
    }

    int overfill_pass() {
        bool better = false;
        for (auto u : order(true)) {
            if (!place(u)) return -1;
            better |= improved(false);
            if (embedded_) break;
        }
        return better ? 1 : 0;
    }

    // Rebuild chains on free qubits only; keep a rebuilt chain unless it got longer.
    int shrink_pass() {
        bool better = false;
        shuffle(perm_[0], rng_);
        for (std::size_t u = 1; u < nv_; ++u) perm_[u] = perm_[0];
        for (auto u : order(true)) {
            steal_all(u);
            const auto before = size(u);
            freeze(u);
            if (build(u) && size(u) <= std::max(before, target_)) {
                // keep
            } else {
                tear_out(u);
                thaw(u);
            }
            give_back(u, target_);
            better |= improved(false);
        }
        return better ? 1 : 0;
    }

    // Histogram used to rank states: qubit fill counts while any qubit is shared, chain length
    // counts once none is. Returns true in the second case.
    bool histogram(std::vector<int> &h) const {
        const int top = *std::max_element(usage_.begin(), usage_.end());
        if (top > 1) {
            h.assign(static_cast<std::size_t>(top - 1), 0);
            for (auto w : usage_)
                if (w > 1) ++h[static_cast<std::size_t>(w - 2)];
            return false;
        }
        std::size_t longest = 0;
        for (std::size_t u = 0; u < nv_; ++u) longest = std::max(longest, size(u));
        h.assign(longest + 1, 0);
        for (std::size_t u = 0; u < nv_; ++u) ++h[size(u)];
        return true;
    }

    bool improved(bool reset) {
        std::vector<int> h;
        const bool clean = histogram(h);
        bool better = reset || best_stats_.empty();
        if (clean && !embedded_) {
            embedded_ = true;
            better = true;
        }
        if (!clean && embedded_) return false;
        if (!better) {
            const auto major = static_cast<long>(best_stats_.size()) - static_cast<long>(h.size());
            const int minor = best_stats_.back() - h.back();
            if (major > 0) {
                better = true;
            } else if (major == 0 && minor > 0) {
                better = true;
            } else if (major == 0 && minor == 0) {
                for (std::size_t i = h.size(); i-- > 0;) {
                    if (h[i] == best_stats_[i]) continue;
                    better = h[i] < best_stats_[i];
                    break;
                }
            }
        }
        if (better) {
            if (embedded_) target_ = h.size() - 1;
            best_chains_ = chains_;
            best_usage_ = usage_;
            best_stats_ = std::move(h);
        }
        return better;
    }

    const Graph &src_;
    const Graph &tgt_;
    Rng &rng_;
    std::size_t nv_, nq_;
    std::vector<TreeChain> chains_;
    std::vector<int> usage_;
    std::vector<std::vector<std::size_t>> nbrs_;
    std::vector<std::vector<std::uint32_t>> perm_;
    double exponent_room_ = 40.0;
    int default_bound_ = 40;
    int bound_ = 40;
    bool embedded_ = false;
    bool desperate_ = false;
    std::size_t target_ = 0;
    std::vector<Dist> table_, weight_, total_;
    std::vector<Slot> slots_;
    Frozen frozen_;
    std::vector<TreeChain> best_chains_;
    std::vector<int> best_usage_;
    std::vector<int> best_stats_;
};

}  // namespace detail

// Problems with a candidate embedding; empty when it is valid.
inline std::vector<std::string> validate(const Embedding &e, const Graph &source, const Graph &target) {
    std::vector<std::string> out;
    if (e.chains.size() != source.size()) {
        out.push_back("embedding has " + std::to_string(e.chains.size()) + " chains for " +
                      std::to_string(source.size()) + " logical variables");
        return out;
    }
    std::vector<std::size_t> owner(target.size(), SIZE_MAX);
    for (std::size_t u = 0; u < e.chains.size(); ++u) {
        const auto &c = e.chains[u];
        if (c.empty()) {
            out.push_back("chain " + std::to_string(u) + " is empty");
            continue;
        }
        bool in_range = true;
        for (auto q : c) {
            if (q >= target.size()) {
                out.push_back("chain " + std::to_string(u) + " uses missing qubit " + std::to_string(q));
                in_range = false;
                continue;
            }
            if (owner[q] != SIZE_MAX && owner[q] != u)
                out.push_back("qubit " + std::to_string(q) + " shared by chains " + std::to_string(owner[q]) + " and " +
                              std::to_string(u));
            owner[q] = u;
        }
        if (!in_range) continue;
        // Connectivity of the chain-induced subgraph.
        std::set<std::size_t> members(c.begin(), c.end());
        std::vector<std::size_t> stack{c.front()};
        std::set<std::size_t> seen{c.front()};
        while (!stack.empty()) {
            const auto q = stack.back();
            stack.pop_back();
            for (auto r : target.neighbors(q))
                if (members.count(r) && seen.insert(r).second) stack.push_back(r);
        }
        if (seen.size() != members.size()) out.push_back("chain " + std::to_string(u) + " is not connected");
    }
    for (const auto &edge : source.edges()) {
        bool found = false;
        for (auto q : e.chains[edge.u]) {
            if (q >= target.size()) continue;
            for (auto r : target.neighbors(q))
                if (std::binary_search(e.chains[edge.v].begin(), e.chains[edge.v].end(), r)) {
                    found = true;
                    break;
                }
            if (found) break;
        }
        if (!found)
            out.push_back("logical edge (" + std::to_string(edge.u) + "," + std::to_string(edge.v) +
                          ") has no coupler between its chains");
    }
    return out;
}

inline EmbedResult find_embedding(const Graph &source, const HardwareGraph &target, const EmbedOptions &opt = {}) {
    if (source.size() > target.size())
        throw Error("find_embedding: source has " + std::to_string(source.size()) + " nodes, target only " +
                    std::to_string(target.size()));
    if (opt.max_tries < 1) throw Error("find_embedding: max_tries must be >= 1");
    EmbedResult result;
    const unsigned batch = std::max(1u, opt.threads);
    for (std::size_t first = 0; first < opt.max_tries; first += batch) {
        const auto count = std::min<std::size_t>(batch, opt.max_tries - first);
        std::vector<std::optional<std::vector<Chain>>> found(count);
        parallel_for(
                count,
                [&](std::size_t b) {
                    auto rng = make_rng(derive_seed(opt.seed, first + b));
                    detail::ChainPlacer placer(source, target.graph, rng);
                    found[b] = placer.run(opt);
                },
                batch);
        for (std::size_t b = 0; b < count; ++b) {
            result.tries = first + b + 1;
            if (!found[b]) continue;
            Embedding e;
            e.chains = std::move(*found[b]);
            e.target_kind = target.kind;
            e.target_m = target.m;
            if (!validate(e, source, target.graph).empty()) continue;
            result.embedding = std::move(e);
            result.successful_try = first + b;
            return result;
        }
    }
    return result;
}

struct ChainMetrics {
    std::vector<std::size_t> lengths;    // L_C
    std::vector<std::size_t> diameters;  // D_C, nodes on the longest shortest path
    double mean_length = 0.0;
    std::size_t max_length = 0;
    double mean_diameter = 0.0;
    std::size_t max_diameter = 0;
    std::size_t qubits = 0;
};

// Hop diameter + 1 of the chain-induced subgraph.
inline std::size_t chain_diameter(const Chain &chain, const Graph &target) {
    std::map<std::size_t, std::size_t> local;
    for (std::size_t a = 0; a < chain.size(); ++a) local[chain[a]] = a;
    std::size_t best = 0;
    std::vector<std::size_t> dist(chain.size());
    for (std::size_t s = 0; s < chain.size(); ++s) {
        std::fill(dist.begin(), dist.end(), SIZE_MAX);
        dist[s] = 0;
        std::vector<std::size_t> frontier{s};
        for (std::size_t h = 0; h < frontier.size(); ++h) {
            const auto a = frontier[h];
            for (auto r : target.neighbors(chain[a])) {
                auto it = local.find(r);
                if (it == local.end() || dist[it->second] != SIZE_MAX) continue;
                dist[it->second] = dist[a] + 1;
                frontier.push_back(it->second);
            }
        }
        for (auto d : dist) {
            if (d == SIZE_MAX) throw Error("chain_diameter: chain is not connected");
            best = std::max(best, d);
        }
    }
    return best + 1;
}

// With skip_single, length-1 chains are left out of the means and maxima (but not the lists).
inline ChainMetrics chain_metrics(const Embedding &e, const Graph &target, bool skip_single = false) {
    ChainMetrics m;
    std::size_t counted = 0;
    for (const auto &c : e.chains) {
        if (c.empty()) throw Error("chain_metrics: empty chain");
        const auto len = c.size(), dia = chain_diameter(c, target);
        m.lengths.push_back(len);
        m.diameters.push_back(dia);
        m.qubits += len;
        if (skip_single && len == 1) continue;
        ++counted;
        m.mean_length += static_cast<double>(len);
        m.mean_diameter += static_cast<double>(dia);
        m.max_length = std::max(m.max_length, len);
        m.max_diameter = std::max(m.max_diameter, dia);
    }
    if (counted) {
        m.mean_length /= static_cast<double>(counted);
        m.mean_diameter /= static_cast<double>(counted);
    }
    return m;
}

inline void write_chain_metrics_csv(std::ostream &out, const ChainMetrics &m) {
    out << "chain,length,diameter\n";
    for (std::size_t u = 0; u < m.lengths.size(); ++u) out << u << ',' << m.lengths[u] << ',' << m.diameters[u] << '\n';
}

// Ising problem over the qubits an embedding uses. Qubit `local` index k is hardware node qubits[k].
struct PhysicalIsing {
    IsingModel model;
    std::vector<std::size_t> qubits;
    std::vector<Chain> chains;  // in local indices
    double chain_strength = 0.0;
};

enum class CouplingPlacement { first_edge, spread };

// Fields are split equally over a chain. Each logical coupling goes on the lexicographically
// first coupler between the two chains (or is spread evenly over all of them). Intra-chain
// couplers carry -J_C; the offset is raised by J_C per such coupler so that intact chains
// reproduce the logical energy exactly.
inline PhysicalIsing embed_ising(const IsingModel &model, const Embedding &e, const Graph &target, double chain_strength,
                                 CouplingPlacement placement = CouplingPlacement::first_edge) {
    if (!(chain_strength > 0.0)) throw Error("embed_ising: chain strength must be > 0");
    if (e.chains.size() != model.n_vars) throw Error("embed_ising: embedding does not cover the model variables");
    PhysicalIsing p;
    p.chain_strength = chain_strength;
    std::vector<std::size_t> local(target.size(), SIZE_MAX);
    for (const auto &c : e.chains)
        for (auto q : c) p.qubits.push_back(q);
    std::sort(p.qubits.begin(), p.qubits.end());
    for (std::size_t k = 0; k < p.qubits.size(); ++k) {
        if (local[p.qubits[k]] != SIZE_MAX) throw Error("embed_ising: chains overlap");
        local[p.qubits[k]] = k;
    }
    p.model.n_vars = p.qubits.size();
    p.model.h.assign(p.model.n_vars, 0.0);
    p.model.offset = model.offset;
    detail::CouplingMap J;
    for (std::size_t u = 0; u < e.chains.size(); ++u) {
        Chain lc;
        for (auto q : e.chains[u]) {
            lc.push_back(local[q]);
            p.model.h[local[q]] += model.h[u] / static_cast<double>(e.chains[u].size());
        }
        p.chains.push_back(std::move(lc));
        for (auto q : e.chains[u])
            for (auto r : target.neighbors(q))
                if (r > q && std::binary_search(e.chains[u].begin(), e.chains[u].end(), r)) {
                    detail::add_coupling(J, local[q], local[r], -chain_strength);
                    p.model.offset += chain_strength;
                }
    }
    for (const auto &c : model.couplings) {
        if (c.weight == 0.0) continue;  // not part of the objective graph
        std::vector<std::pair<std::size_t, std::size_t>> couplers;
        for (auto q : e.chains[c.i])
            for (auto r : target.neighbors(q))
                if (std::binary_search(e.chains[c.j].begin(), e.chains[c.j].end(), r))
                    couplers.push_back({std::min(q, r), std::max(q, r)});
        if (couplers.empty())
            throw Error("embed_ising: no coupler for logical edge (" + std::to_string(c.i) + "," + std::to_string(c.j) + ")");
        std::sort(couplers.begin(), couplers.end());
        if (placement == CouplingPlacement::first_edge) {
            detail::add_coupling(J, local[couplers[0].first], local[couplers[0].second], c.weight);
        } else {
            for (const auto &[q, r] : couplers)
                detail::add_coupling(J, local[q], local[r], c.weight / static_cast<double>(couplers.size()));
        }
    }
    p.model.couplings = detail::to_couplings(J);
    return p;
}

enum class UnembedPolicy { majority, weighted_random };

inline UnembedPolicy parse_unembed_policy(std::string_view s) {
    if (s == "majority") return UnembedPolicy::majority;
    if (s == "weighted_random") return UnembedPolicy::weighted_random;
    throw Error("unknown unembedding policy '" + std::string(s) + "' (expected majority|weighted_random)");
}

struct Unembedded {
    State state;                  // logical spins
    std::vector<bool> broken;     // per chain
    double break_fraction() const {
        if (broken.empty()) return 0.0;
        return static_cast<double>(std::count(broken.begin(), broken.end(), true)) / static_cast<double>(broken.size());
    }
};

// Majority vote per chain; a split vote is settled by a coin flip from rng. weighted_random picks
// +1 with probability equal to the fraction of up spins.
inline Unembedded unembed(const State &physical, const std::vector<Chain> &chains, UnembedPolicy policy, Rng &rng) {
    Unembedded out;
    out.state.resize(chains.size());
    out.broken.resize(chains.size());
    for (std::size_t u = 0; u < chains.size(); ++u) {
        std::size_t up = 0;
        for (auto q : chains[u]) {
            if (q >= physical.size()) throw Error("unembed: sample does not cover chain qubits");
            if (physical[q] > 0) ++up;
        }
        const auto n = chains[u].size();
        out.broken[u] = up != 0 && up != n;
        if (!out.broken[u]) {
            out.state[u] = up ? 1 : -1;
        } else if (policy == UnembedPolicy::majority) {
            if (2 * up == n)
                out.state[u] = random_spin(rng);
            else
                out.state[u] = 2 * up > n ? 1 : -1;
        } else {
            out.state[u] = uniform01(rng) * static_cast<double>(n) < static_cast<double>(up) ? 1 : -1;
        }
    }
    return out;
}

inline void to_json(nlohmann::json &j, const Embedding &e) {
    j = nlohmann::json{{"source_id", e.source_id},
                       {"target", {{"kind", std::string(to_string(e.target_kind))}, {"m", e.target_m}}},
                       {"chains", e.chains}};
}

inline void from_json(const nlohmann::json &j, Embedding &e) {
    e.source_id = j.value("source_id", std::string());
    e.target_kind = parse_topology(j.at("target").at("kind").get<std::string>());
    e.target_m = j.at("target").at("m").get<std::size_t>();
    e.chains = j.at("chains").get<std::vector<Chain>>();
    for (auto &c : e.chains) std::sort(c.begin(), c.end());
}

}  // namespace chromanneal
