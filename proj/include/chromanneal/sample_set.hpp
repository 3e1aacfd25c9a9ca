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

#include <algorithm>
#include <cmath>
#include <istream>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "shape.hpp"

namespace chromanneal {

struct SampleRecord {
    State state;  // spins in {-1,+1} (vartype spin) or bits in {0,1} (vartype binary)
    double energy = 0.0;
    std::int64_t occurrences = 1;
    double chain_break_fraction = 0.0;  // mean over the occurrences
};

struct SampleParams {
    double anneal_time_us = 0.0;  // T_A
    double chain_strength = 0.0;  // J_C
    std::int64_t n_samples = 0;   // n_smpl, anneals requested
    std::optional<double> beta_eff;
};

struct SampleSet {
    std::vector<SampleRecord> records;
    std::string backend;
    Vartype vartype = Vartype::spin;
    SampleParams params;
    std::optional<ModelShape> shape;

    std::int64_t total_occurrences() const {
        std::int64_t n = 0;
        for (const auto &r : records) n += r.occurrences;
        return n;
    }

    // Occurrence-weighted mean chain-break fraction.
    double chain_break_rate() const {
        const auto total = total_occurrences();
        if (total == 0) return 0.0;
        double s = 0.0;
        for (const auto &r : records) s += r.chain_break_fraction * static_cast<double>(r.occurrences);
        return s / static_cast<double>(total);
    }
};

// Merges identical states; records come out ordered by (energy, state) so the result does not
// depend on the order samples were drawn in.
class SampleAggregator {
  public:
    void add(const State &state, double energy, double chain_break_fraction = 0.0, std::int64_t count = 1) {
        auto [it, inserted] = index_.try_emplace(state, records_.size());
        if (inserted) {
            records_.push_back({state, energy, count, chain_break_fraction * static_cast<double>(count)});
        } else {
            auto &r = records_[it->second];
            r.occurrences += count;
            r.chain_break_fraction += chain_break_fraction * static_cast<double>(count);
        }
    }

    std::vector<SampleRecord> finish() {
        for (auto &r : records_) r.chain_break_fraction /= static_cast<double>(r.occurrences);
        std::sort(records_.begin(), records_.end(), [](const SampleRecord &a, const SampleRecord &b) {
            if (a.energy != b.energy) return a.energy < b.energy;
            return a.state < b.state;
        });
        index_.clear();
        return std::move(records_);
    }

  private:
    std::map<State, std::size_t> index_;
    std::vector<SampleRecord> records_;
};

// Effective inverse temperature from a least-squares fit of log(occurrence) against energy.
// Returns nothing when fewer than two distinct energies were sampled or all counts are equal
// (every state seen once carries no temperature information).
inline std::optional<double> fit_beta_eff(const std::vector<SampleRecord> &records) {
    std::map<double, std::int64_t> by_energy;
    for (const auto &r : records) by_energy[r.energy] += r.occurrences;
    if (by_energy.size() < 2) return std::nullopt;
    if (std::all_of(by_energy.begin(), by_energy.end(), [&](const auto &kv) { return kv.second == by_energy.begin()->second; }))
        return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(by_energy.size());
    for (const auto &[e, c] : by_energy) {
        const double y = std::log(static_cast<double>(c));
        sx += e;
        sy += y;
        sxx += e * e;
        sxy += e * y;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::nullopt;
    return -(n * sxy - sx * sy) / den;
}

inline nlohmann::json record_to_json(const SampleRecord &r) {
    nlohmann::json state = nlohmann::json::array();
    for (auto v : r.state) state.push_back(int(v));
    return nlohmann::json{{"state", state},
                          {"energy", r.energy},
                          {"occurrences", r.occurrences},
                          {"chain_break_fraction", r.chain_break_fraction}};
}

// JSON lines: one header object, then one object per record.
inline void write_sampleset_jsonl(std::ostream &out, const SampleSet &s) {
    nlohmann::json header{{"backend", s.backend},
                          {"vartype", std::string(to_string(s.vartype))},
                          {"anneal_time_us", s.params.anneal_time_us},
                          {"chain_strength", s.params.chain_strength},
                          {"n_samples", s.params.n_samples},
                          {"total_occurrences", s.total_occurrences()},
                          {"chain_break_rate", s.chain_break_rate()}};
    header["beta_eff"] = s.params.beta_eff ? nlohmann::json(*s.params.beta_eff) : nlohmann::json(nullptr);
    if (s.shape) header["shape"] = *s.shape;
    out << header.dump() << '\n';
    for (const auto &r : s.records) out << record_to_json(r).dump() << '\n';
}

inline void write_sampleset_csv(std::ostream &out, const SampleSet &s) {
    out << "record,energy,occurrences,chain_break_fraction,state\n";
    for (std::size_t k = 0; k < s.records.size(); ++k) {
        const auto &r = s.records[k];
        out << k << ',' << format_double(r.energy) << ',' << r.occurrences << ','
            << format_double(r.chain_break_fraction) << ',';
        for (auto v : r.state) out << (s.vartype == Vartype::spin ? (v > 0 ? '+' : '-') : (v ? '1' : '0'));
        out << '\n';
    }
}

inline SampleSet read_sampleset_jsonl(std::istream &in) {
    SampleSet s;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception &e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!have_header) {
            s.backend = j.value("backend", "");
            s.vartype = j.value("vartype", "spin") == "binary" ? Vartype::binary : Vartype::spin;
            s.params.anneal_time_us = j.value("anneal_time_us", 0.0);
            s.params.chain_strength = j.value("chain_strength", 0.0);
            s.params.n_samples = j.value("n_samples", std::int64_t{0});
            if (j.contains("beta_eff") && !j["beta_eff"].is_null()) s.params.beta_eff = j["beta_eff"].get<double>();
            if (j.contains("shape")) s.shape = j["shape"].get<ModelShape>();
            have_header = true;
            continue;
        }
        SampleRecord r;
        for (int v : j.at("state").get<std::vector<int>>()) r.state.push_back(static_cast<Value>(v));
        r.energy = j.at("energy").get<double>();
        r.occurrences = j.at("occurrences").get<std::int64_t>();
        r.chain_break_fraction = j.value("chain_break_fraction", 0.0);
        if (r.occurrences < 1) throw ParseError(lineno, "occurrences must be >= 1");
        s.records.push_back(std::move(r));
    }
    if (!have_header) throw Error("empty sample set file");
    return s;
}

}  // namespace chromanneal
