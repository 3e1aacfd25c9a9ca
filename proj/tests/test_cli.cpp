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


#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include "json.hpp"

#include "chromanneal/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = CHROMANNEAL_CLI;
const std::string data_dir = CHROMANNEAL_DATA_DIR;

struct Run {
    int code = -1;
    std::string output;
};

Run run(const std::string &args) {
    Run r;
    FILE *p = popen((cli + " " + args + " 2>&1").c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    while (auto n = std::fread(buf.data(), 1, buf.size(), p)) r.output.append(buf.data(), n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// A small config written next to its output directory.
fs::path small_config(const std::string &name) {
    const auto dir = fs::temp_directory_path() / ("chromanneal_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    nlohmann::json j;
    for (auto m : {"H3K4me3", "H3K27ac", "H3K27me3", "H3K9me3"}) j["tracks"].push_back(data_dir + "/toy/" + m + ".bedGraph");
    j["nucleosomes"] = 8;
    j["max_distance"] = 1;
    j["learn_samples"] = 100;
    j["learn_max_iters"] = 10;
    j["anneal_time_us"] = 0.05;
    j["n_samples"] = 10;
    j["threads"] = 1;
    j["seed"] = 3;
    j["out"] = "out";
    std::ofstream(dir / "config.json") << j.dump(2);
    return dir;
}

std::size_t count_lines(const std::string &s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST(Cli, HelpListsEveryConfigField) {
    const auto r = run("--help");
    EXPECT_EQ(r.code, 0);
    for (const auto &f : chromanneal::config_fields()) EXPECT_NE(r.output.find(f.key), std::string::npos) << f.key;
    for (auto sub : {"ingest", "stats", "learn", "build", "topology", "embed", "sample", "eval", "sweep", "replicate"})
        EXPECT_NE(r.output.find(sub), std::string::npos) << sub;
}

TEST(Cli, StatsOnToyData) {
    const auto dir = small_config("stats");
    const auto r = run("stats --config " + (dir / "config.json").string());
    ASSERT_EQ(r.code, 0) << r.output;
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "stats.json"));
    EXPECT_EQ(j["M"], 4);
    EXPECT_NE(r.output.find("\"status\":\"ok\""), std::string::npos) << r.output;
}

TEST(Cli, SampleWithoutSeedFails) {
    const auto dir = small_config("noseed");
    const auto cfg = (dir / "config.json").string();
    ASSERT_EQ(run("learn --config " + cfg).code, 0);
    const auto r = run("sample --config " + cfg + " --set seed=null");
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.output.find("seed"), std::string::npos) << r.output;
}

TEST(Cli, BadConfigListsAllProblems) {
    const auto dir = small_config("bad");
    const auto r = run("stats --config " + (dir / "config.json").string() + " --set bin_size=0 --set slices=1 --set nope=1");
    EXPECT_EQ(r.code, 2);
    for (auto key : {"bin_size", "slices", "nope"}) EXPECT_NE(r.output.find(key), std::string::npos) << key;
}

TEST(Cli, SweepWritesOneRowPerGridPoint) {
    const auto dir = small_config("sweep");
    const auto r = run("sweep --config " + (dir / "config.json").string() + " --axis JC --grid 0.5:4:8");
    ASSERT_EQ(r.code, 0) << r.output;
    const auto csv = slurp(dir / "out" / "sweep_J_C.csv");
    EXPECT_EQ(count_lines(csv), 9u) << csv;
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
    const auto dir = small_config("repeat");
    const auto cfg = (dir / "config.json").string();
    std::string first[3];
    for (int pass = 0; pass < 2; ++pass) {
        ASSERT_EQ(run("learn --config " + cfg).code, 0);
        ASSERT_EQ(run("sample --config " + cfg).code, 0);
        ASSERT_EQ(run("eval --config " + cfg).code, 0);
        const std::string now[3] = {slurp(dir / "out" / "model.json"), slurp(dir / "out" / "samples.jsonl"),
                                    slurp(dir / "out" / "eval.json")};
        for (int k = 0; k < 3; ++k) {
            EXPECT_FALSE(now[k].empty());
            if (pass == 1) {
                EXPECT_EQ(now[k], first[k]) << k;
            }
            first[k] = now[k];
        }
    }
}
