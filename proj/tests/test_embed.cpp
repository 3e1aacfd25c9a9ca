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


#include <gtest/gtest.h>

#include "chromanneal/embed.hpp"
#include "chromanneal/learn.hpp"

using namespace chromanneal;

namespace {

HardwareGraph custom_hardware(Graph g) {
    HardwareGraph hw;
    const auto n = g.size();
    hw.graph = std::move(g);
    for (std::size_t i = 0; i < n; ++i) hw.labels.push_back(static_cast<std::int64_t>(i));
    return hw;
}

Graph cycle(std::size_t n) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
    return Graph(n, e);
}

// Star: centre 0, leaves 1..3.
Graph star() { return Graph(4, {{0, 1}, {0, 2}, {0, 3}}); }

}  // namespace

TEST(FindEmbedding, SubgraphUsesSingleQubits) {
    const auto hw = build_hardware(TopologyKind::chimera, 2);
    const auto src = cycle(4);  // a chimera cell contains 4-cycles
    const auto r = find_embedding(src, hw, EmbedOptions{1});
    ASSERT_TRUE(r.embedding);
    EXPECT_TRUE(validate(*r.embedding, src, hw.graph).empty());
    EXPECT_EQ(chain_metrics(*r.embedding, hw.graph).max_length, 1u);
}

TEST(FindEmbedding, TriangleIntoSquare) {
    // brute force: a triangle needs one chain of two adjacent qubits on a 4-cycle
    const auto hw = custom_hardware(cycle(4));
    const auto r = find_embedding(complete_graph(3), hw, EmbedOptions{2});
    ASSERT_TRUE(r.embedding);
    EXPECT_TRUE(validate(*r.embedding, complete_graph(3), hw.graph).empty());
    const auto cm = chain_metrics(*r.embedding, hw.graph);
    EXPECT_EQ(cm.qubits, 4u);
    EXPECT_EQ(std::count(cm.lengths.begin(), cm.lengths.end(), 2u), 1);
}

TEST(FindEmbedding, Failures) {
    const auto hw = custom_hardware(cycle(4));
    EXPECT_THROW(find_embedding(complete_graph(5), hw, EmbedOptions{3}), Error);
    EmbedOptions o{3};
    o.max_tries = 3;
    const auto r = find_embedding(complete_graph(4), hw, o);
    EXPECT_FALSE(r.embedding);
    EXPECT_EQ(r.tries, 3u);
}

TEST(FindEmbedding, DenseModelOnPegasus) {
    const auto hw = build_hardware(TopologyKind::pegasus, 6);
    const auto src = cartesian_product(complete_graph(6), nucleosome_intersection_graph(8, 2, Boundary::periodic));
    const auto r = find_embedding(src, hw, EmbedOptions{5});
    ASSERT_TRUE(r.embedding);
    EXPECT_TRUE(validate(*r.embedding, src, hw.graph).empty());
}

TEST(FindEmbedding, DeterministicAcrossThreadCounts) {
    const auto hw = build_hardware(TopologyKind::chimera, 4);
    const auto src = cartesian_product(complete_graph(4), nucleosome_intersection_graph(6, 1, Boundary::periodic));
    EmbedOptions a{42};
    a.max_tries = 4;
    auto b = a;
    b.threads = 4;
    const auto x = find_embedding(src, hw, a), y = find_embedding(src, hw, b);
    ASSERT_TRUE(x.embedding && y.embedding);
    EXPECT_EQ(x.embedding->chains, y.embedding->chains);
}

TEST(Validate, ReportsViolations) {
    const auto hw = custom_hardware(cycle(4));
    Embedding ok;
    ok.chains = {{0}, {1}, {2, 3}};
    EXPECT_TRUE(validate(ok, complete_graph(3), hw.graph).empty());
    Embedding overlap;
    overlap.chains = {{0}, {0, 1}, {2, 3}};
    const auto v = validate(overlap, complete_graph(3), hw.graph);
    ASSERT_FALSE(v.empty());
    EXPECT_NE(v[0].find("qubit 0"), std::string::npos);
    Embedding missing;
    missing.chains = {{0}, {2}, {1}};  // 0 and 2 are not adjacent on the square
    const auto w = validate(missing, complete_graph(3), hw.graph);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NE(w[0].find("(0,1)"), std::string::npos);
    Embedding split;
    split.chains = {{0, 2}, {1}, {3}};
    EXPECT_FALSE(validate(split, complete_graph(3), hw.graph).empty());
}

TEST(ChainMetrics, Examples) {
    const auto hw = custom_hardware(cycle(6));
    Embedding single;
    single.chains = {{0}, {1}};
    auto s = chain_metrics(single, hw.graph);
    EXPECT_DOUBLE_EQ(s.mean_length, 1.0);
    EXPECT_EQ(s.max_length, 1u);
    EXPECT_EQ(s.max_diameter, 1u);
    EXPECT_EQ(chain_diameter({0, 1, 2, 3}, hw.graph), 4u);
    EXPECT_EQ(chain_diameter({0, 1, 2, 3}, star()), 3u);
}

TEST(ChainMetrics, DiameterNeverExceedsLength) {
    const auto hw = build_hardware(TopologyKind::chimera, 3);
    auto rng = make_rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        Graph src(10 + uniform_index(rng, 6));
        std::vector<Edge> e;
        for (std::size_t i = 1; i < src.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (uniform01(rng) < 0.4) e.push_back({j, i});
        src = Graph(src.size(), e);
        EmbedOptions o{static_cast<std::uint64_t>(trial)};
        o.max_tries = 2;
        const auto r = find_embedding(src, hw, o);
        if (!r.embedding) continue;
        const auto cm = chain_metrics(*r.embedding, hw.graph);
        for (std::size_t u = 0; u < cm.lengths.size(); ++u) EXPECT_LE(cm.diameters[u], cm.lengths[u]);
    }
}

TEST(EmbedIsing, SingleQubitChainsKeepTheModel) {
    const auto hw = custom_hardware(cycle(4));
    IsingModel m;
    m.n_vars = 2;
    m.h = {0.5, -1};
    m.couplings = {{1, 0, 0.25}};
    Embedding e;
    e.chains = {{0}, {1}};
    const auto p = embed_ising(m, e, hw.graph, 2.0);
    EXPECT_EQ(p.model.h, m.h);
    EXPECT_EQ(p.model.couplings, m.couplings);
    EXPECT_EQ(p.model.offset, m.offset);
}

TEST(EmbedIsing, FieldSplitAndChainCoupling) {
    const auto hw = custom_hardware(cycle(4));
    IsingModel m;
    m.n_vars = 1;
    m.h = {2.0};
    Embedding e;
    e.chains = {{0, 1}};
    const auto p = embed_ising(m, e, hw.graph, 3.0);
    EXPECT_EQ(p.model.h, (std::vector<double>{1.0, 1.0}));
    ASSERT_EQ(p.model.couplings.size(), 1u);
    EXPECT_DOUBLE_EQ(p.model.couplings[0].weight, -3.0);
    // 4-state enumeration: the ground state is aligned for any |h| < 2 * J_C
    for (double h : {-5.9, -2.0, 0.0, 3.0, 5.9}) {
        m.h = {h};
        const auto q = embed_ising(m, e, hw.graph, 3.0);
        double best = 1e300;
        State arg;
        for (std::uint64_t k = 0; k < 4; ++k) {
            const auto s = enumerated_state(k, 2, Vartype::spin);
            const double en = ising_energy(q.model, s);
            if (en < best) best = en, arg = s;
        }
        EXPECT_EQ(arg[0], arg[1]) << "h = " << h;
        // intact chains reproduce the logical energy
        EXPECT_NEAR(ising_energy(q.model, {1, 1}), ising_energy(m, {1}), 1e-12);
    }
}

TEST(EmbedIsing, RejectsBadInput) {
    const auto hw = custom_hardware(cycle(4));
    IsingModel m;
    m.n_vars = 2;
    m.h = {0, 0};
    m.couplings = {{1, 0, 1}};
    Embedding e;
    e.chains = {{0}, {2}};
    EXPECT_THROW(embed_ising(m, e, hw.graph, 1.0), Error);
    e.chains = {{0}, {1}};
    EXPECT_THROW(embed_ising(m, e, hw.graph, 0.0), Error);
}

TEST(Unembed, MajorityAndTies) {
    auto rng = make_rng(5);
    const std::vector<Chain> three{{0, 1, 2}};
    auto a = unembed({1, 1, 1}, three, UnembedPolicy::majority, rng);
    EXPECT_EQ(a.state[0], 1);
    EXPECT_FALSE(a.broken[0]);
    auto b = unembed({1, 1, -1}, three, UnembedPolicy::majority, rng);
    EXPECT_EQ(b.state[0], 1);
    EXPECT_TRUE(b.broken[0]);
    // tie: a fair coin from the seeded generator
    const std::vector<Chain> two{{0, 1}};
    int up = 0;
    for (int k = 0; k < 2000; ++k) {
        auto t = unembed({1, -1}, two, UnembedPolicy::majority, rng);
        EXPECT_TRUE(t.broken[0]);
        up += t.state[0] > 0;
    }
    EXPECT_NEAR(up / 2000.0, 0.5, 0.05);
    auto r1 = make_rng(77), r2 = make_rng(77);
    EXPECT_EQ(unembed({1, -1}, two, UnembedPolicy::majority, r1).state,
              unembed({1, -1}, two, UnembedPolicy::majority, r2).state);
}

TEST(Unembed, WeightedRandom) {
    auto rng = make_rng(6);
    const std::vector<Chain> four{{0, 1, 2, 3}};
    int up = 0;
    for (int k = 0; k < 4000; ++k) up += unembed({1, 1, 1, -1}, four, UnembedPolicy::weighted_random, rng).state[0] > 0;
    EXPECT_NEAR(up / 4000.0, 0.75, 0.03);
}

TEST(Embedding, JsonRoundTrip) {
    Embedding e;
    e.chains = {{0, 4}, {1}, {2, 3, 7}};
    e.source_id = "[1,3,1]";
    e.target_kind = TopologyKind::zephyr;
    e.target_m = 2;
    nlohmann::json j = e;
    const auto back = j.get<Embedding>();
    EXPECT_EQ(back.chains, e.chains);
    EXPECT_EQ(back.target_kind, e.target_kind);
    EXPECT_EQ(back.target_m, 2u);
}
