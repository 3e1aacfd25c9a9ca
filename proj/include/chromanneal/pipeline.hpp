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

// Pipeline configuration and the stages that bind the modules together: data loading, empirical
// statistics, learning, model building, embedding, sampling, evaluation and parameter sweeps.
//
// All randomness derives from the master seed. Stage k uses derive_seed(master, k << 48) with
// learn = 1, embed = 2, sample = 3; grid points of a sweep share these seeds.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "embed.hpp"
#include "eval.hpp"
#include "graph.hpp"
#include "ingest.hpp"
#include "learn.hpp"
#include "model.hpp"
#include "sample_set.hpp"
#include "sampler.hpp"
#include "shape.hpp"
#include "stats.hpp"
#include "topology.hpp"

namespace chromanneal {

class ConfigError : public Error {
  public:
    explicit ConfigError(std::vector<std::string> problems)
            : Error(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string> &problems() const { return problems_; }

  private:
    static std::string join(const std::vector<std::string> &p) {
        std::string s = "invalid configuration:";
        for (const auto &x : p) s += "\n  " + x;
        return s;
    }
    std::vector<std::string> problems_;
};

struct FieldDoc {
    const char *key;
    const char *type;
    const char *meaning;
};

// Every accepted configuration key. Anything else in a config file is an error.
inline const std::vector<FieldDoc> &config_fields() {
    static const std::vector<FieldDoc> fields{
            {"tracks", "list of paths", "bedGraph files, one per marker (marker name = file stem)"},
            {"incidence", "path", "incidence CSV used instead of tracks"},
            {"span_start", "int", "first base pair of the region (default: smallest track start)"},
            {"span_end", "int", "end of the region, exclusive (default: rounded up from the largest track end)"},
            {"bin_size", "int", "base pairs per nucleosome bin (200)"},
            {"aggregation", "mean|max", "how a bin summarises the signal (mean)"},
            {"binarize_threshold", "number", "bins strictly above this value are active (0.5)"},
            {"nucleosomes", "int", "model length N; 0 means the whole data length (0)"},
            {"max_distance", "int", "longest inter-nucleosome coupling distance L (1)"},
            {"boundary", "open|periodic", "nucleosome chain boundary (periodic)"},
            {"normalization", "term_count|total", "inter-correlation normalisation (term_count)"},
            {"learn_beta", "number", "inverse temperature of the learning sampler (1)"},
            {"learn_samples", "int", "Metropolis samples per learning iteration (400)"},
            {"learn_steps", "int", "Metropolis steps per sample; 0 means 50 per variable (0)"},
            {"learn_rate", "number", "learning rate for all parameter groups (1)"},
            {"learn_decay", "number", "rates scale as 1/(1 + decay * iteration) (0)"},
            {"learn_max_iters", "int", "iteration cap (500)"},
            {"learn_tolerance", "number", "stop when the summed absolute moment error drops below (0.05)"},
            {"learn_init_range", "number", "parameters start uniform in [-r, r] (0.1)"},
            {"threshold", "number", "coupling threshold delta; |J| < delta is dropped (0)"},
            {"template", "path", "incidence CSV of the template state"},
            {"template_offset", "int", "template = data window starting at this nucleosome (-1: none)"},
            {"bias_strength", "number", "incidence bias f (0)"},
            {"backend", "sa|sqa|reverse|boltzmann", "sampling backend (sqa)"},
            {"schedule", "path", "s,A,B schedule CSV (bundled default when empty)"},
            {"anneal_time_us", "number", "anneal time T_A in microseconds (1)"},
            {"sweeps_per_us", "number", "sweeps per microsecond of anneal time (1000)"},
            {"beta", "number", "inverse temperature of the samplers (1)"},
            {"beta_start", "number", "start of the simulated annealing ramp (0.1)"},
            {"slices", "int", "Trotter slices for sqa and reverse (16)"},
            {"readout", "majority|random_slice", "how a state is read from the slices (majority)"},
            {"worldline_moves", "bool", "also flip a spin in every slice at once (true)"},
            {"reverse_s", "number", "reversal depth s_R for the reverse backend (0.6)"},
            {"reverse_t_ns", "number", "reverse-anneal time t_R per leg in nanoseconds (100)"},
            {"topology", "none|chimera|pegasus|zephyr", "hardware graph; none samples the logical model (none)"},
            {"topology_m", "int", "hardware size parameter (16)"},
            {"blocklist", "path", "hardware blocklist with 'node <label>' / 'edge <a> <b>' lines"},
            {"embed_tries", "int", "embedding restarts (10)"},
            {"chain_strength", "number", "J_C; 0 means max |J| of the logical model (0)"},
            {"coupling_placement", "first_edge|spread", "where a logical coupling goes (first_edge)"},
            {"unembed", "majority|weighted_random", "chain-break resolution (majority)"},
            {"n_samples", "int", "anneals per run n_smpl (100)"},
            {"log_floor", "number", "floor applied before logs in R^2 (1e-4)"},
            {"seed", "int", "master seed; required by learn, embed, sample, eval, sweep and replicate"},
            {"threads", "int", "worker threads; 0 means hardware concurrency (0)"},
            {"out", "path", "output directory (out)"},
    };
    return fields;
}

struct PipelineConfig {
    std::vector<std::string> tracks;
    std::string incidence;
    std::optional<std::int64_t> span_start, span_end;
    std::int64_t bin_size = default_bin_size;
    Aggregation aggregation = Aggregation::mean;
    double binarize_threshold = 0.5;
    std::size_t nucleosomes = 0;
    std::size_t max_distance = 1;
    Boundary boundary = Boundary::periodic;
    InterNormalization normalization = InterNormalization::term_count;
    double learn_beta = 1.0;
    std::size_t learn_samples = 400;
    std::size_t learn_steps = 0;
    double learn_rate = 1.0;
    double learn_decay = 0.0;
    std::size_t learn_max_iters = 500;
    double learn_tolerance = 0.05;
    double learn_init_range = 0.1;
    double threshold = 0.0;
    std::string template_path;
    std::int64_t template_offset = -1;
    double bias_strength = 0.0;
    Backend backend = Backend::sqa;
    std::string schedule;
    double anneal_time_us = 1.0;
    double sweeps_per_us = default_sweeps_per_us;
    double beta = 1.0;
    double beta_start = 0.1;
    std::size_t slices = 16;
    Readout readout = Readout::majority;
    bool worldline_moves = true;
    double reverse_s = 0.6;
    double reverse_t_ns = 100.0;
    std::optional<TopologyKind> topology;
    std::size_t topology_m = 16;
    std::string blocklist;
    std::size_t embed_tries = 10;
    double chain_strength = 0.0;
    CouplingPlacement coupling_placement = CouplingPlacement::first_edge;
    UnembedPolicy unembed = UnembedPolicy::majority;
    std::size_t n_samples = 100;
    double log_floor = default_log_floor;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out = "out";

    std::uint64_t stage_seed(std::uint64_t stage) const {
        if (!seed) throw ConfigError({"seed: required for this command"});
        return derive_seed(*seed, stage << 48);
    }

    bool has_template() const { return !template_path.empty() || template_offset >= 0; }

    // Every violated field, or nothing.
    std::vector<std::string> problems(bool need_seed) const {
        std::vector<std::string> p;
        if (bin_size <= 0) p.push_back("bin_size: must be > 0");
        if (!(binarize_threshold >= 0.0)) p.push_back("binarize_threshold: must be >= 0");
        if (span_start && span_end && *span_end <= *span_start) p.push_back("span_end: must be > span_start");
        if (!(learn_beta > 0.0)) p.push_back("learn_beta: must be > 0");
        if (learn_samples < 1) p.push_back("learn_samples: must be >= 1");
        if (!(learn_rate > 0.0)) p.push_back("learn_rate: must be > 0");
        if (learn_decay < 0.0) p.push_back("learn_decay: must be >= 0");
        if (learn_max_iters < 1) p.push_back("learn_max_iters: must be >= 1");
        if (!(learn_tolerance > 0.0)) p.push_back("learn_tolerance: must be > 0");
        if (learn_init_range < 0.0) p.push_back("learn_init_range: must be >= 0");
        if (!(threshold >= 0.0)) p.push_back("threshold: must be >= 0");
        if (!(bias_strength >= 0.0)) p.push_back("bias_strength: must be >= 0");
        if (bias_strength > 0.0 && !has_template()) p.push_back("bias_strength: needs template or template_offset");
        if (!template_path.empty() && template_offset >= 0) p.push_back("template: give either template or template_offset");
        if (!(anneal_time_us > 0.0)) p.push_back("anneal_time_us: must be > 0");
        if (!(sweeps_per_us > 0.0)) p.push_back("sweeps_per_us: must be > 0");
        if (!(beta > 0.0)) p.push_back("beta: must be > 0");
        if (!(beta_start > 0.0)) p.push_back("beta_start: must be > 0");
        if (slices < 2) p.push_back("slices: must be >= 2");
        if (!(reverse_s > 0.0 && reverse_s <= 1.0)) p.push_back("reverse_s: must be in (0, 1]");
        if (!(reverse_t_ns > 0.0)) p.push_back("reverse_t_ns: must be > 0");
        if (backend == Backend::reverse && !has_template()) p.push_back("backend: reverse needs template or template_offset");
        if (topology_m < 1) p.push_back("topology_m: must be >= 1");
        if (embed_tries < 1) p.push_back("embed_tries: must be >= 1");
        if (chain_strength < 0.0) p.push_back("chain_strength: must be >= 0");
        if (n_samples < 1) p.push_back("n_samples: must be >= 1");
        if (!(log_floor > 0.0)) p.push_back("log_floor: must be > 0");
        if (need_seed && !seed) p.push_back("seed: required for this command");
        auto exists = [&](const char *key, const std::string &path) {
            if (!path.empty() && !std::filesystem::exists(path)) p.push_back(std::string(key) + ": no such file '" + path + "'");
        };
        for (const auto &t : tracks) exists("tracks", t);
        exists("incidence", incidence);
        exists("template", template_path);
        exists("schedule", schedule);
        exists("blocklist", blocklist);
        return p;
    }

    void validate(bool need_seed) const {
        auto p = problems(need_seed);
        if (!p.empty()) throw ConfigError(std::move(p));
    }
};

inline nlohmann::json to_json(const PipelineConfig &c) {
    nlohmann::json j;
    j["tracks"] = c.tracks;
    j["incidence"] = c.incidence;
    j["span_start"] = c.span_start ? nlohmann::json(*c.span_start) : nlohmann::json(nullptr);
    j["span_end"] = c.span_end ? nlohmann::json(*c.span_end) : nlohmann::json(nullptr);
    j["bin_size"] = c.bin_size;
    j["aggregation"] = c.aggregation == Aggregation::mean ? "mean" : "max";
    j["binarize_threshold"] = c.binarize_threshold;
    j["nucleosomes"] = c.nucleosomes;
    j["max_distance"] = c.max_distance;
    j["boundary"] = std::string(to_string(c.boundary));
    j["normalization"] = std::string(to_string(c.normalization));
    j["learn_beta"] = c.learn_beta;
    j["learn_samples"] = c.learn_samples;
    j["learn_steps"] = c.learn_steps;
    j["learn_rate"] = c.learn_rate;
    j["learn_decay"] = c.learn_decay;
    j["learn_max_iters"] = c.learn_max_iters;
    j["learn_tolerance"] = c.learn_tolerance;
    j["learn_init_range"] = c.learn_init_range;
    j["threshold"] = c.threshold;
    j["template"] = c.template_path;
    j["template_offset"] = c.template_offset;
    j["bias_strength"] = c.bias_strength;
    j["backend"] = std::string(to_string(c.backend));
    j["schedule"] = c.schedule;
    j["anneal_time_us"] = c.anneal_time_us;
    j["sweeps_per_us"] = c.sweeps_per_us;
    j["beta"] = c.beta;
    j["beta_start"] = c.beta_start;
    j["slices"] = c.slices;
    j["readout"] = c.readout == Readout::majority ? "majority" : "random_slice";
    j["worldline_moves"] = c.worldline_moves;
    j["reverse_s"] = c.reverse_s;
    j["reverse_t_ns"] = c.reverse_t_ns;
    j["topology"] = c.topology ? std::string(to_string(*c.topology)) : std::string("none");
    j["topology_m"] = c.topology_m;
    j["blocklist"] = c.blocklist;
    j["embed_tries"] = c.embed_tries;
    j["chain_strength"] = c.chain_strength;
    j["coupling_placement"] = c.coupling_placement == CouplingPlacement::first_edge ? "first_edge" : "spread";
    j["unembed"] = c.unembed == UnembedPolicy::majority ? "majority" : "weighted_random";
    j["n_samples"] = c.n_samples;
    j["log_floor"] = c.log_floor;
    j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr);
    j["threads"] = c.threads;
    j["out"] = c.out;
    return j;
}

namespace detail {

inline std::string resolve_path(const std::string &p, const std::filesystem::path &base) {
    if (p.empty() || base.empty()) return p;
    std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (base / fp).lexically_normal().string();
}

}  // namespace detail

// Applies one key. Throws Error with a message naming the key on a bad value.
inline void set_config_value(PipelineConfig &c, const std::string &key, const nlohmann::json &v,
                             const std::filesystem::path &base = {}) {
    auto str = [&] { return v.get<std::string>(); };
    auto path = [&] { return detail::resolve_path(v.get<std::string>(), base); };
    auto uint = [&]() -> std::size_t {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw Error("expected a non-negative integer");
        return v.get<std::size_t>();
    };
    auto num = [&]() -> double {
        if (!v.is_number()) throw Error("expected a number");
        return v.get<double>();
    };
    try {
        if (key == "tracks") {
            c.tracks.clear();
            for (const auto &t : v) c.tracks.push_back(detail::resolve_path(t.get<std::string>(), base));
        } else if (key == "incidence") c.incidence = path();
        else if (key == "span_start") c.span_start = v.is_null() ? std::nullopt : std::optional<std::int64_t>(v.get<std::int64_t>());
        else if (key == "span_end") c.span_end = v.is_null() ? std::nullopt : std::optional<std::int64_t>(v.get<std::int64_t>());
        else if (key == "bin_size") c.bin_size = static_cast<std::int64_t>(uint());
        else if (key == "aggregation") c.aggregation = parse_aggregation(str());
        else if (key == "binarize_threshold") c.binarize_threshold = num();
        else if (key == "nucleosomes") c.nucleosomes = uint();
        else if (key == "max_distance") c.max_distance = uint();
        else if (key == "boundary") c.boundary = parse_boundary(str());
        else if (key == "normalization") c.normalization = parse_inter_normalization(str());
        else if (key == "learn_beta") c.learn_beta = num();
        else if (key == "learn_samples") c.learn_samples = uint();
        else if (key == "learn_steps") c.learn_steps = uint();
        else if (key == "learn_rate") c.learn_rate = num();
        else if (key == "learn_decay") c.learn_decay = num();
        else if (key == "learn_max_iters") c.learn_max_iters = uint();
        else if (key == "learn_tolerance") c.learn_tolerance = num();
        else if (key == "learn_init_range") c.learn_init_range = num();
        else if (key == "threshold") c.threshold = num();
        else if (key == "template") c.template_path = path();
        else if (key == "template_offset") c.template_offset = v.get<std::int64_t>();
        else if (key == "bias_strength") c.bias_strength = num();
        else if (key == "backend") c.backend = parse_backend(str());
        else if (key == "schedule") c.schedule = path();
        else if (key == "anneal_time_us") c.anneal_time_us = num();
        else if (key == "sweeps_per_us") c.sweeps_per_us = num();
        else if (key == "beta") c.beta = num();
        else if (key == "beta_start") c.beta_start = num();
        else if (key == "slices") c.slices = uint();
        else if (key == "readout") c.readout = parse_readout(str());
        else if (key == "worldline_moves") c.worldline_moves = v.get<bool>();
        else if (key == "reverse_s") c.reverse_s = num();
        else if (key == "reverse_t_ns") c.reverse_t_ns = num();
        else if (key == "topology") c.topology = str() == "none" ? std::nullopt : std::optional(parse_topology(str()));
        else if (key == "topology_m") c.topology_m = uint();
        else if (key == "blocklist") c.blocklist = path();
        else if (key == "embed_tries") c.embed_tries = uint();
        else if (key == "chain_strength") c.chain_strength = num();
        else if (key == "coupling_placement") {
            const auto s = str();
            if (s == "first_edge") c.coupling_placement = CouplingPlacement::first_edge;
            else if (s == "spread") c.coupling_placement = CouplingPlacement::spread;
            else throw Error("expected first_edge|spread");
        } else if (key == "unembed") c.unembed = parse_unembed_policy(str());
        else if (key == "n_samples") c.n_samples = uint();
        else if (key == "log_floor") c.log_floor = num();
        else if (key == "seed") c.seed = v.is_null() ? std::nullopt : std::optional<std::uint64_t>(v.get<std::uint64_t>());
        else if (key == "threads") c.threads = static_cast<unsigned>(uint());
        else if (key == "out") c.out = path();
        else throw Error("unknown key");
    } catch (const nlohmann::json::exception &e) {
        throw Error(key + ": " + e.what());
    } catch (const Error &e) {
        throw Error(key + ": " + e.what());
    }
}

// Collects every bad or unknown key before failing. Relative paths resolve against `base`.
inline PipelineConfig config_from_json(const nlohmann::json &j, const std::filesystem::path &base = {}) {
    if (!j.is_object()) throw ConfigError({"config: top level must be an object"});
    PipelineConfig c;
    std::vector<std::string> problems;
    for (const auto &[key, v] : j.items()) {
        try {
            set_config_value(c, key, v, base);
        } catch (const Error &e) {
            problems.push_back(e.what());
        }
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return c;
}

inline PipelineConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw Error("config '" + path + "': " + e.what());
    }
    return config_from_json(j, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------- stages

namespace detail {

inline std::ifstream open_in(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return in;
}

}  // namespace detail

// Binned, binarized incidence matrix from the configured tracks or incidence file.
inline IncidenceMatrix load_data(const PipelineConfig &c) {
    if (!c.incidence.empty()) {
        auto in = detail::open_in(c.incidence);
        return read_incidence_csv(in);
    }
    if (c.tracks.empty()) throw ConfigError({"tracks: give bedGraph tracks or an incidence file"});
    std::vector<RawTrack> raw;
    for (const auto &p : c.tracks) {
        auto in = detail::open_in(p);
        raw.push_back(parse_bedgraph(in, std::filesystem::path(p).stem().string()));
        if (raw.back().intervals.empty()) throw Error("track '" + p + "' has no intervals");
    }
    std::int64_t lo = raw[0].intervals.front().start, hi = raw[0].intervals.back().end;
    for (const auto &t : raw) {
        lo = std::min(lo, t.intervals.front().start);
        hi = std::max(hi, t.intervals.back().end);
    }
    const auto start = c.span_start.value_or(lo);
    auto end = c.span_end.value_or(hi);
    if (!c.span_end) end = start + (end - start + c.bin_size - 1) / c.bin_size * c.bin_size;
    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> rows;
    for (const auto &t : raw)
        rows.push_back({t.marker_name, binarize(bin_signal(t, c.bin_size, start, end, c.aggregation), c.binarize_threshold)});
    return assemble(rows);
}

inline ModelShape model_shape(const PipelineConfig &c, const IncidenceMatrix &data) {
    ModelShape s{data.markers(), c.nucleosomes ? c.nucleosomes : data.nucleosomes(), c.max_distance, c.boundary};
    s.validate(std::max(s.markers, default_max_markers));
    return s;
}

inline StatsSummary empirical_stats(const PipelineConfig &c, const IncidenceMatrix &data) {
    return compute_stats(data, c.max_distance, c.boundary, c.normalization);
}

inline LearnConfig learn_config(const PipelineConfig &c) {
    LearnConfig l;
    l.beta = c.learn_beta;
    l.n_samples = c.learn_samples;
    l.n_steps = c.learn_steps;
    l.lr_mu = l.lr_intra = l.lr_inter = c.learn_rate;
    l.lr_decay = c.learn_decay;
    l.max_iters = c.learn_max_iters;
    l.error_threshold = c.learn_tolerance;
    l.init_range = c.learn_init_range;
    l.seed = c.stage_seed(1);
    l.threads = c.threads;
    return l;
}

// Template incidence (M x N window of the data or a separate file), if configured.
inline std::optional<IncidenceMatrix> load_template(const PipelineConfig &c, const IncidenceMatrix &data,
                                                    const ModelShape &shape) {
    if (!c.template_path.empty()) {
        auto in = detail::open_in(c.template_path);
        auto t = read_incidence_csv(in);
        if (t.markers() != shape.markers || t.nucleosomes() != shape.nucleosomes)
            throw Error("template is " + std::to_string(t.markers()) + "x" + std::to_string(t.nucleosomes()) +
                        ", model is " + shape.str());
        return t;
    }
    if (c.template_offset < 0) return std::nullopt;
    const auto off = static_cast<std::size_t>(c.template_offset);
    if (off + shape.nucleosomes > data.nucleosomes())
        throw Error("template_offset " + std::to_string(off) + " + N exceeds the data length " +
                    std::to_string(data.nucleosomes()));
    return data.window(off, shape.nucleosomes);
}

// Ising model of the learned parameters with threshold and bias applied.
inline IsingModel build_model(const PipelineConfig &c, const CartesianModel &learned,
                              const std::optional<IncidenceMatrix> &templ) {
    auto ising = apply_threshold(qubo_to_ising(build_qubo(learned.shape, learned.params)), c.threshold);
    if (c.bias_strength > 0.0) {
        if (!templ) throw Error("bias needs a template");
        ising = apply_bias(ising, TemplateBias::from_incidence(*templ, c.bias_strength));
    }
    return ising;
}

inline AnnealSchedule load_schedule(const PipelineConfig &c) {
    if (c.schedule.empty()) return default_schedule();
    auto in = detail::open_in(c.schedule);
    return read_schedule_csv(in);
}

inline SamplerConfig sampler_config(const PipelineConfig &c, const std::optional<IncidenceMatrix> &templ) {
    SamplerConfig s;
    s.backend = c.backend;
    s.anneal_time_us = c.anneal_time_us;
    s.sweeps_per_us = c.sweeps_per_us;
    s.anneal.beta = c.beta;
    s.anneal.beta_start = c.beta_start;
    s.anneal.slices = c.slices;
    s.anneal.readout = c.readout;
    s.anneal.worldline_moves = c.worldline_moves;
    s.schedule = load_schedule(c);
    s.unembed = c.unembed;
    s.threads = c.threads;
    if (c.backend == Backend::reverse) {
        if (!templ) throw Error("reverse backend needs a template");
        ReverseSchedule rs;
        rs.s_reverse = c.reverse_s;
        rs.t_reverse_ns = c.reverse_t_ns;
        rs.initial = to_spin(incidence_to_state(*templ));
        s.reverse = std::move(rs);
    }
    return s;
}

inline HardwareGraph load_hardware(const PipelineConfig &c) {
    if (!c.topology) throw ConfigError({"topology: a hardware graph is required for this command"});
    auto hw = build_hardware(*c.topology, c.topology_m);
    if (!c.blocklist.empty()) {
        auto in = detail::open_in(c.blocklist);
        hw = apply_blocklist(hw, in);
    }
    return hw;
}

inline EmbedResult embed_graph(const PipelineConfig &c, const Graph &source, const HardwareGraph &hw) {
    EmbedOptions o;
    o.seed = c.stage_seed(2);
    o.max_tries = c.embed_tries;
    o.threads = std::max(1u, c.threads);
    return find_embedding(source, hw, o);
}

inline double max_abs_coupling(const IsingModel &m) {
    double j = 0.0;
    for (const auto &e : m.couplings) j = std::max(j, std::abs(e.weight));
    return j;
}

// Samples the model, through the hardware embedding when one is given.
inline SampleSet run_sampling(const PipelineConfig &c, const IsingModel &model, const std::optional<IncidenceMatrix> &templ,
                              const Embedding *embedding = nullptr, const HardwareGraph *hw = nullptr) {
    const auto sc = sampler_config(c, templ);
    const auto seed = c.stage_seed(3);
    if (!embedding) return sample_many(model, c.n_samples, sc, seed);
    double jc = c.chain_strength > 0.0 ? c.chain_strength : max_abs_coupling(model);
    if (!(jc > 0.0)) jc = 1.0;
    const auto phys = embed_ising(model, *embedding, hw->graph, jc, c.coupling_placement);
    return sample_embedded(model, phys, c.n_samples, sc, seed);
}

struct EvalReport {
    double r2 = 0.0;
    GroupR2 groups;
    std::optional<DistanceSummary> distance;  // to the template
    double chain_break_rate = 0.0;
    std::optional<double> beta_eff;
    std::size_t distinct_states = 0;
    std::int64_t samples = 0;
};

inline EvalReport evaluate(const PipelineConfig &c, const SampleSet &samples, const StatsSummary &empirical,
                           const ModelShape &shape, const std::optional<IncidenceMatrix> &templ) {
    EvalReport r;
    const auto sampled = stats_of_samples(samples, shape, empirical.normalization);
    r.r2 = r2_log(empirical, sampled, c.log_floor);
    r.groups = r2_log_groups(empirical, sampled, c.log_floor);
    if (templ) r.distance = template_distance(samples, to_spin(incidence_to_state(*templ)));
    r.chain_break_rate = samples.chain_break_rate();
    r.beta_eff = samples.params.beta_eff;
    r.distinct_states = samples.records.size();
    r.samples = samples.total_occurrences();
    return r;
}

inline nlohmann::json to_json(const EvalReport &r) {
    auto opt = [](const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json j{{"r2", r.r2},
                     {"r2_mu", opt(r.groups.mu)},
                     {"r2_intra", opt(r.groups.intra)},
                     {"r2_inter", opt(r.groups.inter)},
                     {"chain_break_rate", r.chain_break_rate},
                     {"beta_eff", opt(r.beta_eff)},
                     {"distinct_states", r.distinct_states},
                     {"samples", r.samples}};
    if (r.distance) {
        j["d_A_mean"] = r.distance->mean;
        j["d_A_min"] = r.distance->min;
        j["d_A_max"] = r.distance->max;
    } else {
        j["d_A_mean"] = j["d_A_min"] = j["d_A_max"] = nullptr;
    }
    return j;
}

// ---------------------------------------------------------------- sweeps

enum class SweepAxis { anneal_time, chain_strength, threshold, boundary, bias, reverse_depth, reverse_time };

inline SweepAxis parse_sweep_axis(std::string_view s) {
    if (s == "TA" || s == "T_A") return SweepAxis::anneal_time;
    if (s == "JC" || s == "J_C") return SweepAxis::chain_strength;
    if (s == "delta" || s == "threshold") return SweepAxis::threshold;
    if (s == "boundary") return SweepAxis::boundary;
    if (s == "f" || s == "bias") return SweepAxis::bias;
    if (s == "sR" || s == "s_R") return SweepAxis::reverse_depth;
    if (s == "tR" || s == "t_R") return SweepAxis::reverse_time;
    throw Error("unknown sweep axis '" + std::string(s) + "' (expected TA|JC|delta|boundary|f|sR|tR)");
}

inline std::string_view to_string(SweepAxis a) {
    switch (a) {
    case SweepAxis::anneal_time: return "T_A";
    case SweepAxis::chain_strength: return "J_C";
    case SweepAxis::threshold: return "delta";
    case SweepAxis::boundary: return "boundary";
    case SweepAxis::bias: return "f";
    case SweepAxis::reverse_depth: return "s_R";
    case SweepAxis::reverse_time: return "t_R";
    }
    return "?";
}

// "a:b:n" gives n evenly spaced values from a to b; otherwise a comma-separated list.
inline std::vector<std::string> parse_grid(const std::string &text) {
    std::vector<std::string> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(p);
        double a = 0, b = 0;
        std::size_t n = 0;
        if (parts.size() != 3 || !detail::parse_number(parts[0], a) || !detail::parse_number(parts[1], b) ||
            !detail::parse_number(parts[2], n) || n < 1)
            throw Error("grid '" + text + "': expected start:stop:count");
        for (std::size_t k = 0; k < n; ++k)
            out.push_back(format_double(n == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1)));
        return out;
    }
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ','))
        if (!p.empty()) out.push_back(p);
    if (out.empty()) throw Error("grid is empty");
    return out;
}

inline PipelineConfig with_axis(PipelineConfig c, SweepAxis axis, const std::string &value) {
    double v = 0.0;
    if (axis != SweepAxis::boundary && !detail::parse_number(value, v))
        throw Error("grid value '" + value + "' is not a number");
    switch (axis) {
    case SweepAxis::anneal_time: c.anneal_time_us = v; break;
    case SweepAxis::chain_strength: c.chain_strength = v; break;
    case SweepAxis::threshold: c.threshold = v; break;
    case SweepAxis::boundary: c.boundary = parse_boundary(value); break;
    case SweepAxis::bias: c.bias_strength = v; break;
    case SweepAxis::reverse_depth:
        c.reverse_s = v;
        c.backend = Backend::reverse;
        break;
    case SweepAxis::reverse_time:
        c.reverse_t_ns = v;
        c.backend = Backend::reverse;
        break;
    }
    return c;
}

struct SweepRow {
    std::string value;
    std::optional<EvalReport> report;
    std::size_t edges = 0;
    std::size_t qubits = 0;
    std::string error;
};

// Data and learned parameters a sweep starts from; learning is redone only per boundary value.
struct SweepInputs {
    IncidenceMatrix data;
    std::map<Boundary, CartesianModel> learned;
};

// One full build-sample-evaluate run per grid value. A failing grid point is recorded and the
// sweep continues.
inline std::vector<SweepRow> run_sweep(const PipelineConfig &base, SweepAxis axis, const std::vector<std::string> &grid,
                                       SweepInputs &inputs) {
    base.validate(true);
    std::vector<SweepRow> rows(grid.size());
    std::optional<HardwareGraph> hw;
    if (base.topology) hw = load_hardware(base);
    // Learning happens up front so that grid points only read shared state.
    std::vector<PipelineConfig> cfgs;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        rows[g].value = grid[g];
        try {
            cfgs.push_back(with_axis(base, axis, grid[g]));
            const auto &c = cfgs.back();
            c.validate(true);
            if (!inputs.learned.count(c.boundary)) {
                const auto shape = model_shape(c, inputs.data);
                auto res = learn_params(empirical_stats(c, inputs.data), shape, learn_config(c));
                inputs.learned.emplace(c.boundary, CartesianModel{shape, std::move(res.params)});
            }
        } catch (const Error &e) {
            if (cfgs.size() == g) cfgs.push_back(base);
            rows[g].error = e.what();
        }
    }
    const unsigned outer = base.threads == 1 ? 1u : std::max(1u, base.threads);
    parallel_for(
            grid.size(),
            [&](std::size_t g) {
                if (!rows[g].error.empty()) return;
                auto c = cfgs[g];
                if (outer > 1) c.threads = 1;
                try {
                    const auto &learned = inputs.learned.at(c.boundary);
                    const auto shape = model_shape(c, inputs.data);
                    const auto templ = load_template(c, inputs.data, shape);
                    const auto model = build_model(c, learned, templ);
                    rows[g].edges = model.couplings.size();
                    SampleSet samples;
                    if (hw) {
                        const auto res = embed_graph(c, objective_graph(model), *hw);
                        if (!res.embedding) throw Error("no embedding found in " + std::to_string(res.tries) + " tries");
                        rows[g].qubits = res.embedding->n_qubits();
                        samples = run_sampling(c, model, templ, &*res.embedding, &*hw);
                    } else {
                        samples = run_sampling(c, model, templ);
                    }
                    rows[g].report = evaluate(c, samples, empirical_stats(c, inputs.data), shape, templ);
                } catch (const Error &e) {
                    rows[g].error = e.what();
                }
            },
            outer);
    return rows;
}

inline void write_sweep_csv(std::ostream &out, SweepAxis axis, const std::vector<SweepRow> &rows) {
    out << "axis,value,status,r2,d_A_mean,d_A_min,d_A_max,chain_break_rate,beta_eff,edges,qubits,error\n";
    for (const auto &r : rows) {
        out << to_string(axis) << ',' << r.value << ',' << (r.report ? "ok" : "failed") << ',';
        if (r.report) {
            const auto &e = *r.report;
            out << format_double(e.r2) << ',';
            if (e.distance)
                out << format_double(e.distance->mean) << ',' << format_double(e.distance->min) << ','
                    << format_double(e.distance->max) << ',';
            else
                out << ",,,";
            out << format_double(e.chain_break_rate) << ',' << (e.beta_eff ? format_double(*e.beta_eff) : "") << ',';
        } else {
            out << ",,,,,,";
        }
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << r.edges << ',' << r.qubits << ',' << err << '\n';
    }
}

// Line plot of R^2 and mean template distance over the grid, in grid order.
inline void write_sweep_svg(std::ostream &out, SweepAxis axis, const std::vector<SweepRow> &rows) {
    const double w = 480.0, h = 320.0, pad = 48.0;
    const std::size_t n = rows.size();
    auto px = [&](std::size_t k) { return pad + (n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.5) * (w - 2 * pad); };
    auto py = [&](double v) { return h - pad - std::clamp(v, 0.0, 1.0) * (h - 2 * pad); };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w - 2 * pad << "\" height=\"" << h - 2 * pad
        << "\" fill=\"none\" stroke=\"gray\"/>\n";
    auto line = [&](const char *colour, auto &&value) {
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
        for (std::size_t k = 0; k < n; ++k)
            if (auto v = value(rows[k])) out << format_fixed(px(k), 2) << ',' << format_fixed(py(*v), 2) << ' ';
        out << "\"/>\n";
    };
    line("#1f77b4", [](const SweepRow &r) -> std::optional<double> { return r.report ? std::optional(r.report->r2) : std::nullopt; });
    line("#d62728", [](const SweepRow &r) -> std::optional<double> {
        return r.report && r.report->distance ? std::optional(r.report->distance->mean) : std::nullopt;
    });
    for (std::size_t k = 0; k < n; ++k)
        out << "<text x=\"" << format_fixed(px(k), 2) << "\" y=\"" << h - pad + 16 << "\" font-size=\"10\" text-anchor=\"middle\">"
            << rows[k].value << "</text>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"" << h - 8 << "\" font-size=\"12\" text-anchor=\"middle\">" << to_string(axis)
        << "</text>\n";
    out << "<text x=\"" << pad << "\" y=\"" << pad - 10 << "\" font-size=\"12\" fill=\"#1f77b4\">R^2</text>\n";
    out << "<text x=\"" << pad + 40 << "\" y=\"" << pad - 10 << "\" font-size=\"12\" fill=\"#d62728\">mean d_A</text>\n";
    out << "</svg>\n";
}

// Objective graph of a fully coupled Cartesian model: K_M box the nucleosome graph.
inline Graph shape_graph(const ModelShape &s) {
    return cartesian_product(complete_graph(s.markers), nucleosome_intersection_graph(s.nucleosomes, s.max_distance, s.boundary));
}

struct ScalingRow {
    ModelShape shape;
    TopologyKind topology = TopologyKind::pegasus;
    std::size_t topology_m = 0;
    std::size_t successes = 0;
    std::size_t failures = 0;
    double mean_length = 0.0;      // averaged over successful seeds
    double mean_length_sd = 0.0;
    double max_length = 0.0;       // max chain length averaged over seeds
    double max_length_sd = 0.0;
    double qubits = 0.0;
};

// Chain statistics per (shape, topology) over seeds derive_seed(master, k).
inline std::vector<ScalingRow> scaling_sweep(const std::vector<ModelShape> &shapes,
                                             const std::vector<std::pair<TopologyKind, std::size_t>> &topologies,
                                             std::size_t n_seeds, std::uint64_t master, std::size_t tries = 10) {
    std::vector<ScalingRow> rows;
    for (const auto &[kind, m] : topologies) {
        const auto hw = build_hardware(kind, m);
        for (const auto &s : shapes) {
            ScalingRow row{s, kind, m};
            const auto g = shape_graph(s);
            std::vector<double> means, maxes;
            double qubits = 0.0;
            for (std::size_t k = 0; k < n_seeds; ++k) {
                EmbedOptions o;
                o.seed = derive_seed(master, k);
                o.max_tries = tries;
                const auto res = g.size() <= hw.size() ? find_embedding(g, hw, o) : EmbedResult{};
                if (!res.embedding) {
                    ++row.failures;
                    continue;
                }
                const auto cm = chain_metrics(*res.embedding, hw.graph);
                means.push_back(cm.mean_length);
                maxes.push_back(static_cast<double>(cm.max_length));
                qubits += static_cast<double>(cm.qubits);
            }
            auto mean_sd = [](const std::vector<double> &v) -> std::pair<double, double> {
                if (v.empty()) return {0.0, 0.0};
                double m = 0.0, q = 0.0;
                for (double x : v) m += x;
                m /= static_cast<double>(v.size());
                for (double x : v) q += (x - m) * (x - m);
                return {m, v.size() > 1 ? std::sqrt(q / static_cast<double>(v.size() - 1)) : 0.0};
            };
            row.successes = means.size();
            std::tie(row.mean_length, row.mean_length_sd) = mean_sd(means);
            std::tie(row.max_length, row.max_length_sd) = mean_sd(maxes);
            row.qubits = means.empty() ? 0.0 : qubits / static_cast<double>(means.size());
            rows.push_back(row);
        }
    }
    return rows;
}

inline void write_scaling_csv(std::ostream &out, const std::vector<ScalingRow> &rows) {
    out << "M,N,L,boundary,topology,m,successes,failures,mean_chain_length,mean_chain_length_sd,max_chain_length,"
           "max_chain_length_sd,qubits\n";
    for (const auto &r : rows)
        out << r.shape.markers << ',' << r.shape.nucleosomes << ',' << r.shape.max_distance << ','
            << to_string(r.shape.boundary) << ',' << to_string(r.topology) << ',' << r.topology_m << ',' << r.successes
            << ',' << r.failures << ',' << format_double(r.mean_length) << ',' << format_double(r.mean_length_sd) << ','
            << format_double(r.max_length) << ',' << format_double(r.max_length_sd) << ',' << format_double(r.qubits)
            << '\n';
}

}  // namespace chromanneal
