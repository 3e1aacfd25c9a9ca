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


#include <filesystem>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "chromanneal/pipeline.hpp"

using namespace chromanneal;
namespace fs = std::filesystem;

namespace {

const std::string data_dir = CHROMANNEAL_DATA_DIR;

PipelineConfig toy_config() {
    PipelineConfig c;
    for (auto m : {"H3K4me3", "H3K27ac", "H3K27me3", "H3K9me3"}) c.tracks.push_back(data_dir + "/toy/" + m + ".bedGraph");
    c.nucleosomes = 12;
    c.max_distance = 1;
    c.learn_max_iters = 30;
    c.learn_samples = 100;
    c.anneal_time_us = 0.05;
    c.n_samples = 20;
    c.threads = 1;
    c.seed = 5;
    return c;
}

}  // namespace

TEST(Config, EveryFieldIsDocumented) {
    std::set<std::string> documented;
    for (const auto &f : config_fields()) {
        EXPECT_TRUE(documented.insert(f.key).second) << "duplicate " << f.key;
        EXPECT_GT(std::string(f.meaning).size(), 5u);
    }
    std::set<std::string> serialized;
    const auto defaults = to_json(PipelineConfig{});
    for (const auto &[k, v] : defaults.items()) serialized.insert(k);
    EXPECT_EQ(documented, serialized);
}

TEST(Config, JsonRoundTrip) {
    auto c = toy_config();
    c.topology = TopologyKind::zephyr;
    c.backend = Backend::reverse;
    c.template_offset = 4;
    const auto back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, UnknownAndBadKeysAreAllReported) {
    nlohmann::json j{{"bin_sise", 100}, {"threshold", "high"}, {"boundary", "closed"}, {"n_samples", 10}};
    try {
        config_from_json(j);
        FAIL() << "expected a config error";
    } catch (const ConfigError &e) {
        ASSERT_EQ(e.problems().size(), 3u);
        const std::string all = e.what();
        for (auto key : {"bin_sise", "threshold", "boundary"}) EXPECT_NE(all.find(key), std::string::npos) << key;
    }
}

TEST(Config, ValidationListsEveryViolatedField) {
    PipelineConfig c;
    c.bin_size = 0;
    c.slices = 1;
    c.reverse_s = 0.0;
    c.bias_strength = 1.0;
    const auto p = c.problems(true);
    std::string all;
    for (const auto &s : p) all += s + "\n";
    for (auto key : {"bin_size", "slices", "reverse_s", "bias_strength", "seed"}) EXPECT_NE(all.find(key), std::string::npos) << key;
    EXPECT_THROW(c.validate(true), ConfigError);
}

TEST(Config, MissingPathsAreReported) {
    PipelineConfig c;
    c.incidence = "/nonexistent/x.csv";
    const auto p = c.problems(false);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_NE(p[0].find("incidence"), std::string::npos);
}

TEST(Config, RelativePathsResolveAgainstConfigDir) {
    const auto c = config_from_json(nlohmann::json{{"schedule", "s.csv"}, {"out", "/abs/out"}}, "/base/dir");
    EXPECT_EQ(c.schedule, "/base/dir/s.csv");
    EXPECT_EQ(c.out, "/abs/out");
}

TEST(Config, SeedRequiredForStageSeeds) {
    PipelineConfig c;
    EXPECT_THROW(c.stage_seed(1), ConfigError);
    c.seed = 10;
    EXPECT_EQ(c.stage_seed(3), derive_seed(10, std::uint64_t{3} << 48));
}

TEST(Grid, Parsing) {
    const auto g = parse_grid("0.5:4:8");
    ASSERT_EQ(g.size(), 8u);
    EXPECT_EQ(g.front(), "0.5");
    EXPECT_EQ(g.back(), "4");
    EXPECT_EQ(parse_grid("open,periodic"), (std::vector<std::string>{"open", "periodic"}));
    EXPECT_EQ(parse_grid("2:2:1"), (std::vector<std::string>{"2"}));
    EXPECT_THROW(parse_grid("1:2"), Error);
    EXPECT_THROW(parse_grid(""), Error);
    EXPECT_THROW(parse_sweep_axis("gamma"), Error);
    EXPECT_EQ(parse_sweep_axis("JC"), SweepAxis::chain_strength);
}

TEST(Grid, WithAxis) {
    PipelineConfig c;
    EXPECT_EQ(with_axis(c, SweepAxis::threshold, "0.25").threshold, 0.25);
    EXPECT_EQ(with_axis(c, SweepAxis::boundary, "open").boundary, Boundary::open);
    const auto r = with_axis(c, SweepAxis::reverse_depth, "0.4");
    EXPECT_EQ(r.backend, Backend::reverse);
    EXPECT_EQ(r.reverse_s, 0.4);
    EXPECT_THROW(with_axis(c, SweepAxis::bias, "lots"), Error);
}

TEST(Pipeline, ToyDataLoads) {
    const auto c = toy_config();
    const auto x = load_data(c);
    EXPECT_EQ(x.markers(), 4u);
    EXPECT_EQ(x.nucleosomes(), 600u);
    EXPECT_EQ(x.marker_names()[0], "H3K4me3");
    const auto shape = model_shape(c, x);
    EXPECT_EQ(shape, (ModelShape{4, 12, 1, Boundary::periodic}));
    auto t = c;
    t.template_offset = 300;
    const auto w = load_template(t, x, shape);
    ASSERT_TRUE(w);
    EXPECT_EQ(*w, x.window(300, 12));
    t.template_offset = 595;
    EXPECT_THROW(load_template(t, x, shape), Error);
}

TEST(Pipeline, EndToEndIsDeterministic) {
    auto c = toy_config();
    c.template_offset = 300;
    c.bias_strength = 1.0;
    auto run = [&] {
        const auto x = load_data(c);
        const auto shape = model_shape(c, x);
        const auto res = learn_params(empirical_stats(c, x), shape, learn_config(c));
        const auto templ = load_template(c, x, shape);
        const auto model = build_model(c, CartesianModel{shape, res.params}, templ);
        const auto s = run_sampling(c, model, templ);
        return to_json(evaluate(c, s, empirical_stats(c, x), shape, templ)).dump();
    };
    EXPECT_EQ(run(), run());
}

TEST(Pipeline, EmbeddedSampling) {
    auto c = toy_config();
    c.nucleosomes = 6;
    c.topology = TopologyKind::pegasus;
    c.topology_m = 4;
    const auto x = load_data(c);
    const auto shape = model_shape(c, x);
    CartesianParams p(4, 1);
    p.q = {0.5, 0.5, 1, 1};
    p.s = {-1, -1, -1, -1};
    const auto model = build_model(c, CartesianModel{shape, p}, std::nullopt);
    const auto hw = load_hardware(c);
    const auto e = embed_graph(c, objective_graph(model), hw);
    ASSERT_TRUE(e.embedding);
    const auto s = run_sampling(c, model, std::nullopt, &*e.embedding, &hw);
    EXPECT_EQ(s.total_occurrences(), 20);
    EXPECT_GT(s.params.chain_strength, 0.0);
}

TEST(Sweep, FailingPointIsRecordedAndOthersRun) {
    auto c = toy_config();
    SweepInputs in{load_data(c), {}};
    const auto rows = run_sweep(c, SweepAxis::threshold, {"0", "-1", "0.2"}, in);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_TRUE(rows[0].report);
    EXPECT_FALSE(rows[1].report);
    EXPECT_NE(rows[1].error.find("threshold"), std::string::npos);
    EXPECT_TRUE(rows[2].report);
    EXPECT_LE(rows[2].edges, rows[0].edges);
    std::ostringstream os;
    write_sweep_csv(os, SweepAxis::threshold, rows);
    std::size_t lines = 0;
    for (char ch : os.str()) lines += ch == '\n';
    EXPECT_EQ(lines, 4u);
}

TEST(Sweep, ParallelGridMatchesSequential) {
    auto c = toy_config();
    SweepInputs a{load_data(c), {}};
    const auto one = run_sweep(c, SweepAxis::anneal_time, {"0.02", "0.05"}, a);
    c.threads = 2;
    SweepInputs b{load_data(c), {}};
    const auto two = run_sweep(c, SweepAxis::anneal_time, {"0.02", "0.05"}, b);
    std::ostringstream x, y;
    write_sweep_csv(x, SweepAxis::anneal_time, one);
    write_sweep_csv(y, SweepAxis::anneal_time, two);
    EXPECT_EQ(x.str(), y.str());
}

TEST(Scaling, TableHasRowPerShapeAndTopology) {
    const auto rows = scaling_sweep({ModelShape{3, 5, 1}, ModelShape{3, 5, 2}},
                                    {{TopologyKind::pegasus, 4}, {TopologyKind::zephyr, 2}}, 2, 9, 3);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto &r : rows) {
        EXPECT_EQ(r.successes + r.failures, 2u);
        if (r.successes) {
            EXPECT_GE(r.max_length, r.mean_length);
        }
    }
    std::ostringstream os;
    write_scaling_csv(os, rows);
    EXPECT_NE(os.str().find("zephyr"), std::string::npos);
}
