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

// chromanneal command-line driver. Every subcommand reads one JSON config (--config), applies
// flag overrides, writes its artifacts under --out and prints a one-line JSON summary.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "chromanneal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace chromanneal;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    std::vector<std::string> sets;
    std::string model, samples, embedding;
    std::string axis, grid;
    std::size_t copies = 10;
};

std::string field_table() {
    std::ostringstream os;
    os << "Config keys (JSON object; unknown keys are errors; relative paths resolve against the config file):\n";
    for (const auto &f : config_fields()) {
        os << "  " << f.key;
        for (std::size_t k = std::string(f.key).size(); k < 20; ++k) os << ' ';
        os << f.type << "  " << f.meaning << '\n';
    }
    os << "Precedence: --seed/--out and --set key=value > config file > defaults.\n";
    return os.str();
}

PipelineConfig resolve_config(const Flags &fl) {
    PipelineConfig c = fl.config.empty() ? PipelineConfig{} : load_config(fl.config);
    std::vector<std::string> problems;
    for (const auto &kv : fl.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            problems.push_back("--set '" + kv + "': expected key=value");
            continue;
        }
        const auto key = kv.substr(0, eq), raw = kv.substr(eq + 1);
        json v;
        try {
            v = json::parse(raw);
        } catch (const json::exception &) {
            v = raw;  // bare strings
        }
        try {
            set_config_value(c, key, v);
        } catch (const Error &e) {
            problems.push_back(e.what());
        }
    }
    if (!problems.empty()) {
        for (auto &p : c.problems(false)) problems.push_back(std::move(p));
        throw ConfigError(problems);
    }
    if (fl.seed) c.seed = fl.seed;
    if (!fl.out.empty()) c.out = fl.out;
    return c;
}

fs::path out_path(const PipelineConfig &c, const std::string &name) {
    fs::create_directories(c.out);
    return fs::path(c.out) / name;
}

std::ofstream open_out(const fs::path &p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write '" + p.string() + "'");
    return f;
}

std::ifstream open_in(const std::string &p) {
    std::ifstream f(p);
    if (!f) throw Error("cannot open '" + p + "'");
    return f;
}

std::string input_or(const std::string &flag, const PipelineConfig &c, const std::string &name) {
    return flag.empty() ? (fs::path(c.out) / name).string() : flag;
}

CartesianModel read_model(const std::string &path) {
    auto in = open_in(path);
    try {
        return json::parse(in).get<CartesianModel>();
    } catch (const json::exception &e) {
        throw Error("model '" + path + "': " + e.what());
    }
}

// Ising model of the learned model file under the config's threshold and bias.
struct Built {
    IncidenceMatrix data;
    ModelShape shape;
    std::optional<IncidenceMatrix> templ;
    IsingModel ising;
};

Built build(const PipelineConfig &c, const Flags &fl) {
    Built b;
    b.data = load_data(c);
    const auto model = read_model(input_or(fl.model, c, "model.json"));
    b.shape = model.shape;
    b.templ = load_template(c, b.data, b.shape);
    b.ising = build_model(c, model, b.templ);
    return b;
}

json cmd_ingest(const PipelineConfig &c, const Flags &fl) {
    c.validate(false);
    const auto x = load_data(c);
    fs::path p;
    if (fl.format == "json") {
        p = out_path(c, "incidence.json");
        auto f = open_out(p);
        f << json(x).dump() << '\n';
    } else {
        p = out_path(c, "incidence.csv");
        auto f = open_out(p);
        write_incidence_csv(f, x);
    }
    std::size_t active = 0;
    for (auto v : x.data()) active += v;
    return {{"markers", x.markers()},
            {"nucleosomes", x.nucleosomes()},
            {"active_fraction", static_cast<double>(active) / static_cast<double>(x.data().size())},
            {"outputs", {p.string()}}};
}

json cmd_stats(const PipelineConfig &c, const Flags &fl) {
    c.validate(false);
    const auto s = empirical_stats(c, load_data(c));
    fs::path p;
    if (fl.format == "csv") {
        p = out_path(c, "stats.csv");
        auto f = open_out(p);
        write_stats_csv(f, s);
    } else {
        p = out_path(c, "stats.json");
        auto f = open_out(p);
        f << json(s).dump(2) << '\n';
    }
    return {{"statistics", s.flatten().size()}, {"outputs", {p.string()}}};
}

json cmd_learn(const PipelineConfig &c, const Flags &) {
    c.validate(true);
    const auto data = load_data(c);
    const auto shape = model_shape(c, data);
    const auto res = learn_params(empirical_stats(c, data), shape, learn_config(c));
    const auto mp = out_path(c, "model.json"), tp = out_path(c, "learn_trace.csv");
    {
        auto f = open_out(mp);
        f << json(CartesianModel{shape, res.params}).dump(2) << '\n';
    }
    {
        auto f = open_out(tp);
        write_learn_trace_csv(f, res.trace);
    }
    return {{"shape", shape.str()},
            {"iterations", res.trace.size()},
            {"converged", res.converged},
            {"final_error", res.trace.empty() ? 0.0 : res.trace.back().error.total},
            {"outputs", {mp.string(), tp.string()}}};
}

json cmd_build(const PipelineConfig &c, const Flags &fl) {
    c.validate(false);
    const auto b = build(c, fl);
    const auto ip = out_path(c, "ising.txt"), gp = out_path(c, "objective.edges");
    {
        auto f = open_out(ip);
        write_ising_text(f, b.ising);
    }
    const auto g = objective_graph(b.ising);
    {
        auto f = open_out(gp);
        write_edge_list(f, g, "objective");
    }
    const auto gm = metrics(g);
    return {{"shape", b.shape.str()},
            {"nodes", gm.nodes},
            {"edges", gm.edges},
            {"avg_degree", gm.avg_degree},
            {"gamma", gm.gamma},
            {"outputs", {ip.string(), gp.string()}}};
}

json cmd_topology(const PipelineConfig &c, const Flags &) {
    c.validate(false);
    const auto hw = load_hardware(c);
    const auto p = out_path(c, std::string(to_string(hw.kind)) + "_" + std::to_string(hw.m) + ".edges");
    {
        auto f = open_out(p);
        write_hardware_edge_list(f, hw);
    }
    return {{"topology", std::string(to_string(hw.kind))},
            {"m", hw.m},
            {"nodes", hw.size()},
            {"edges", hw.graph.n_edges()},
            {"outputs", {p.string()}}};
}

json chain_summary(const ChainMetrics &cm) {
    return {{"qubits", cm.qubits},
            {"mean_chain_length", cm.mean_length},
            {"max_chain_length", cm.max_length},
            {"mean_chain_diameter", cm.mean_diameter},
            {"max_chain_diameter", cm.max_diameter}};
}

json cmd_embed(const PipelineConfig &c, const Flags &fl) {
    c.validate(true);
    const auto b = build(c, fl);
    const auto hw = load_hardware(c);
    const auto res = embed_graph(c, objective_graph(b.ising), hw);
    if (!res.embedding) throw Error("no embedding found in " + std::to_string(res.tries) + " tries");
    auto e = *res.embedding;
    e.source_id = b.shape.str();
    const auto cm = chain_metrics(e, hw.graph);
    const auto ep = out_path(c, "embedding.json"), mp = out_path(c, "chains.csv");
    {
        auto f = open_out(ep);
        f << json(e).dump() << '\n';
    }
    {
        auto f = open_out(mp);
        write_chain_metrics_csv(f, cm);
    }
    auto j = chain_summary(cm);
    j["tries"] = res.tries;
    j["outputs"] = {ep.string(), mp.string()};
    return j;
}

json cmd_sample(const PipelineConfig &c, const Flags &fl) {
    c.validate(true);
    const auto b = build(c, fl);
    SampleSet s;
    if (c.topology) {
        const auto hw = load_hardware(c);
        Embedding e;
        if (!fl.embedding.empty()) {
            auto in = open_in(fl.embedding);
            e = json::parse(in).get<Embedding>();
        } else {
            const auto res = embed_graph(c, objective_graph(b.ising), hw);
            if (!res.embedding) throw Error("no embedding found in " + std::to_string(res.tries) + " tries");
            e = *res.embedding;
        }
        const auto bad = validate(e, objective_graph(b.ising), hw.graph);
        if (!bad.empty()) throw Error("embedding is invalid: " + bad.front());
        s = run_sampling(c, b.ising, b.templ, &e, &hw);
    } else {
        s = run_sampling(c, b.ising, b.templ);
    }
    fs::path p;
    if (fl.format == "csv") {
        p = out_path(c, "samples.csv");
        auto f = open_out(p);
        write_sampleset_csv(f, s);
    } else {
        p = out_path(c, "samples.jsonl");
        auto f = open_out(p);
        write_sampleset_jsonl(f, s);
    }
    return {{"backend", s.backend},
            {"samples", s.total_occurrences()},
            {"distinct_states", s.records.size()},
            {"lowest_energy", s.records.empty() ? 0.0 : s.records.front().energy},
            {"chain_break_rate", s.chain_break_rate()},
            {"outputs", {p.string()}}};
}

json cmd_eval(const PipelineConfig &c, const Flags &fl) {
    c.validate(false);
    const auto data = load_data(c);
    auto in = open_in(input_or(fl.samples, c, "samples.jsonl"));
    const auto s = read_sampleset_jsonl(in);
    if (!s.shape) throw Error("sample file carries no model shape");
    const auto shape = *s.shape;
    const auto templ = load_template(c, data, shape);
    const auto emp = empirical_stats(c, data);
    const auto rep = evaluate(c, s, emp, shape, templ);
    fs::path p;
    if (fl.format == "svg") {
        p = out_path(c, "stats_scatter.svg");
        auto f = open_out(p);
        write_stats_scatter_svg(f, emp, stats_of_samples(s, shape, c.normalization), c.log_floor);
    } else {
        p = out_path(c, "eval.json");
        auto f = open_out(p);
        f << to_json(rep).dump(2) << '\n';
    }
    auto j = to_json(rep);
    j["outputs"] = {p.string()};
    return j;
}

json cmd_sweep(const PipelineConfig &c, const Flags &fl) {
    if (fl.axis.empty() || fl.grid.empty()) throw ConfigError({"sweep: --axis and --grid are required"});
    const auto axis = parse_sweep_axis(fl.axis);
    const auto grid = parse_grid(fl.grid);
    c.validate(true);
    SweepInputs inputs{load_data(c), {}};
    if (!fl.model.empty()) {
        auto m = read_model(fl.model);
        inputs.learned.emplace(m.shape.boundary, std::move(m));
    }
    const auto rows = run_sweep(c, axis, grid, inputs);
    fs::path p;
    if (fl.format == "svg") {
        p = out_path(c, "sweep_" + std::string(to_string(axis)) + ".svg");
        auto f = open_out(p);
        write_sweep_svg(f, axis, rows);
    } else {
        p = out_path(c, "sweep_" + std::string(to_string(axis)) + ".csv");
        auto f = open_out(p);
        write_sweep_csv(f, axis, rows);
    }
    std::size_t failed = 0;
    for (const auto &r : rows) failed += !r.report;
    return {{"axis", std::string(to_string(axis))}, {"points", rows.size()}, {"failed", failed}, {"outputs", {p.string()}}};
}

json cmd_replicate(const PipelineConfig &c, const Flags &fl) {
    c.validate(true);
    if (fl.copies < 1) throw ConfigError({"--copies: must be >= 1"});
    const auto b = build(c, fl);
    const auto cluster = replicate_cluster(objective_graph(b.ising), fl.copies);
    json j{{"copies", fl.copies}, {"cluster_nodes", cluster.graph.size()}, {"cluster_edges", cluster.graph.n_edges()}};
    std::vector<std::string> outputs;
    if (c.topology) {
        const auto hw = load_hardware(c);
        const auto res = embed_graph(c, cluster.graph, hw);
        j["embedded"] = res.embedding.has_value();
        if (res.embedding) {
            const auto cm = chain_metrics(*res.embedding, hw.graph);
            j["qubits"] = cm.qubits;
            j["qubit_fraction"] = static_cast<double>(cm.qubits) / static_cast<double>(hw.size());
            const auto ep = out_path(c, "cluster_embedding.json");
            auto f = open_out(ep);
            f << json(*res.embedding).dump() << '\n';
            outputs.push_back(ep.string());
        }
    }
    // n_samples logical samples from ceil(n_samples / copies) cluster reads.
    const auto reads = (c.n_samples + fl.copies - 1) / fl.copies;
    const auto s = sample_cluster(b.ising, fl.copies, reads, sampler_config(c, b.templ), c.stage_seed(3));
    const auto sp = out_path(c, "cluster_samples.jsonl");
    {
        auto f = open_out(sp);
        write_sampleset_jsonl(f, s);
    }
    outputs.push_back(sp.string());
    j["reads"] = reads;
    j["samples"] = s.total_occurrences();
    j["outputs"] = outputs;
    return j;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"chromanneal: epigenetic Ising models, annealing samplers and minor embedding"};
    app.footer(field_table());
    app.require_subcommand(1);
    Flags fl;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", fl.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", fl.seed, "master seed (overrides the config)");
        sub->add_option("--out", fl.out, "output directory (overrides the config)");
        sub->add_option("--format", fl.format, "output format")->check(CLI::IsMember({"csv", "json", "svg"}));
        sub->add_option("--set", fl.sets, "override a config key, key=value (repeatable)");
        return sub;
    };
    struct Cmd {
        const char *name;
        const char *help;
        json (*fn)(const PipelineConfig &, const Flags &);
    };
    const std::vector<Cmd> cmds{
            {"ingest", "bin and binarize tracks into an incidence matrix", cmd_ingest},
            {"stats", "empirical statistics of the data", cmd_stats},
            {"learn", "fit model parameters to the empirical statistics", cmd_learn},
            {"build", "Ising model and objective graph of a learned model", cmd_build},
            {"topology", "generate the hardware graph", cmd_topology},
            {"embed", "minor-embed the objective graph into the hardware graph", cmd_embed},
            {"sample", "draw samples from the model", cmd_sample},
            {"eval", "R^2 and template distance of a sample file", cmd_eval},
            {"sweep", "one full run per grid value of a parameter", cmd_sweep},
            {"replicate", "sample through disjoint copies of the model", cmd_replicate},
    };
    std::vector<std::pair<CLI::App *, const Cmd *>> subs;
    for (const auto &c : cmds) {
        auto *sub = add_common(app.add_subcommand(c.name, c.help));
        sub->footer(field_table());
        subs.push_back({sub, &c});
    }
    for (auto &[sub, c] : subs) {
        const std::string n = c->name;
        if (n == "build" || n == "embed" || n == "sample" || n == "sweep" || n == "replicate")
            sub->add_option("--model", fl.model, "learned model JSON (default OUT/model.json)");
        if (n == "eval") sub->add_option("--samples", fl.samples, "sample JSONL (default OUT/samples.jsonl)");
        if (n == "sample") sub->add_option("--embedding", fl.embedding, "embedding JSON to reuse");
        if (n == "sweep") {
            sub->add_option("--axis", fl.axis, "TA|JC|delta|boundary|f|sR|tR");
            sub->add_option("--grid", fl.grid, "start:stop:count or a comma-separated list");
        }
        if (n == "replicate") sub->add_option("--copies", fl.copies, "copies in the cluster (10)");
    }
    CLI11_PARSE(app, argc, argv);

    const Cmd *cmd = nullptr;
    for (auto &[sub, c] : subs)
        if (sub->parsed()) cmd = c;
    try {
        const auto cfg = resolve_config(fl);
        auto summary = cmd->fn(cfg, fl);
        summary["command"] = cmd->name;
        summary["status"] = "ok";
        std::cout << summary.dump() << std::endl;
        return 0;
    } catch (const ConfigError &e) {
        std::cerr << e.what() << '\n';
        std::cout << json{{"command", cmd->name}, {"status", "error"}, {"error", e.problems()}}.dump() << std::endl;
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        std::cout << json{{"command", cmd->name}, {"status", "error"}, {"error", {e.what()}}}.dump() << std::endl;
        return 1;
    }
}
