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

// bedGraph signal tracks -> nucleosome bins -> binary incidence matrix.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "common.hpp"

namespace chromanneal {

inline constexpr std::int64_t default_bin_size = 200;

struct Interval {
    std::int64_t start = 0;  // base pairs, inclusive
    std::int64_t end = 0;    // base pairs, exclusive
    double value = 0.0;

    bool operator==(const Interval &) const = default;
};

struct RawTrack {
    std::string marker_name;
    std::string chrom;
    std::vector<Interval> intervals;  // sorted by start, non-overlapping
};

struct BinnedTrack {
    std::string marker_name;
    std::int64_t bin_size = default_bin_size;
    std::int64_t span_start = 0;
    std::vector<double> values;
};

enum class Aggregation { mean, max };

inline Aggregation parse_aggregation(std::string_view s) {
    if (s == "mean") return Aggregation::mean;
    if (s == "max") return Aggregation::max;
    throw Error("unknown aggregation '" + std::string(s) + "' (expected mean|max)");
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T &out) {
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for doubles is available in libstdc++ >= 11
        auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
    } else {
        auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        return res.ec == std::errc() && res.ptr == s.data() + s.size();
    }
}

}  // namespace detail

// Reads UCSC bedGraph (`chrom start end value`). Blank lines and `#`, `track`, `browser` header
// lines are skipped. Intervals are returned sorted by start; uncovered base pairs mean zero signal.
inline RawTrack parse_bedgraph(std::istream &in, std::string marker_name = {}) {
    RawTrack track;
    track.marker_name = std::move(marker_name);
    std::vector<std::pair<Interval, std::size_t>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fields = detail::split_ws(line);
        if (fields.empty()) continue;
        if (fields[0].starts_with("#") || fields[0] == "track" || fields[0] == "browser") continue;
        if (fields.size() != 4)
            throw ParseError(lineno, "expected 4 fields (chrom start end value), got " +
                                             std::to_string(fields.size()));
        Interval iv;
        if (!detail::parse_number(fields[1], iv.start) || !detail::parse_number(fields[2], iv.end))
            throw ParseError(lineno, "non-integer start/end");
        if (!detail::parse_number(fields[3], iv.value)) throw ParseError(lineno, "non-numeric value");
        if (iv.start < 0) throw ParseError(lineno, "negative start");
        if (iv.start >= iv.end) throw ParseError(lineno, "start must be < end");
        if (track.chrom.empty()) {
            track.chrom = std::string(fields[0]);
        } else if (fields[0] != track.chrom) {
            throw ParseError(lineno, "multiple chromosomes in one stream ('" + track.chrom + "' and '" +
                                             std::string(fields[0]) + "')");
        }
        rows.emplace_back(iv, lineno);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto &a, const auto &b) { return a.first.start < b.first.start; });
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto &prev = rows[k - 1].first;
        const auto &cur = rows[k].first;
        if (cur.start < prev.end) {
            const auto line_no = std::max(rows[k - 1].second, rows[k].second);
            throw ParseError(line_no, "overlapping intervals at " + std::to_string(cur.start) + "-" +
                                              std::to_string(std::min(prev.end, cur.end)));
        }
    }
    track.intervals.reserve(rows.size());
    for (auto &r : rows) track.intervals.push_back(r.first);
    return track;
}

inline RawTrack parse_bedgraph(const std::string &text, std::string marker_name = {}) {
    std::istringstream in(text);
    return parse_bedgraph(in, std::move(marker_name));
}

inline void write_bedgraph(std::ostream &out, const RawTrack &track) {
    const std::string chrom = track.chrom.empty() ? "chrUn" : track.chrom;
    for (const auto &iv : track.intervals)
        out << chrom << '\t' << iv.start << '\t' << iv.end << '\t' << format_double(iv.value) << '\n';
}

// Averages (or maximises) the signal over fixed-size bins covering [span_start, span_end).
// With Aggregation::mean each bin holds the coverage-weighted mean, uncovered base pairs counting
// as zero, so that sum(bin * bin_size) equals the integrated signal inside the span.
inline BinnedTrack bin_signal(const RawTrack &track, std::int64_t bin_size, std::int64_t span_start,
                              std::int64_t span_end, Aggregation agg = Aggregation::mean) {
    if (bin_size <= 0) throw Error("bin_size must be positive");
    if (span_end <= span_start) throw Error("span end must be greater than span start");
    if ((span_end - span_start) % bin_size != 0)
        throw Error("span length " + std::to_string(span_end - span_start) + " is not divisible by bin size " +
                    std::to_string(bin_size));
    const auto n_bins = static_cast<std::size_t>((span_end - span_start) / bin_size);
    BinnedTrack out{track.marker_name, bin_size, span_start, std::vector<double>(n_bins, 0.0)};
    std::vector<std::int64_t> covered(agg == Aggregation::max ? n_bins : 0, 0);
    for (const auto &iv : track.intervals) {
        const auto lo = std::max(iv.start, span_start);
        const auto hi = std::min(iv.end, span_end);
        if (lo >= hi) continue;
        auto b0 = static_cast<std::size_t>((lo - span_start) / bin_size);
        auto b1 = static_cast<std::size_t>((hi - 1 - span_start) / bin_size);
        for (auto b = b0; b <= b1; ++b) {
            const auto bin_lo = span_start + static_cast<std::int64_t>(b) * bin_size;
            const auto overlap = std::min(hi, bin_lo + bin_size) - std::max(lo, bin_lo);
            if (agg == Aggregation::mean) {
                out.values[b] += iv.value * static_cast<double>(overlap);
            } else {
                out.values[b] = covered[b] ? std::max(out.values[b], iv.value) : iv.value;
                covered[b] += overlap;
            }
        }
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (agg == Aggregation::mean) {
            out.values[b] /= static_cast<double>(bin_size);
        } else if (covered[b] < bin_size) {
            out.values[b] = std::max(out.values[b], 0.0);
        }
    }
    return out;
}

// 1 where the bin value exceeds the threshold. `strict = false` switches to >=.
inline std::vector<std::uint8_t> binarize(const BinnedTrack &binned, double threshold, bool strict = true) {
    if (!(threshold >= 0.0)) throw Error("binarization threshold must be >= 0");
    std::vector<std::uint8_t> row(binned.values.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
        const double v = binned.values[i];
        row[i] = strict ? (v > threshold) : (v >= threshold);
    }
    return row;
}

// M x N binary presence/absence of markers on nucleosomes, stored row-major (marker-major).
class IncidenceMatrix {
  public:
    IncidenceMatrix() = default;
    IncidenceMatrix(std::vector<std::string> marker_names, std::size_t n_nucleosomes, std::vector<std::uint8_t> data)
            : names_(std::move(marker_names)), n_(n_nucleosomes), data_(std::move(data)) {
        if (names_.empty()) throw Error("incidence matrix needs at least one marker");
        if (data_.size() != names_.size() * n_) throw Error("incidence data size does not match M x N");
        for (auto v : data_)
            if (v > 1) throw Error("incidence entries must be 0 or 1");
    }

    std::size_t markers() const noexcept { return names_.size(); }
    std::size_t nucleosomes() const noexcept { return n_; }
    const std::vector<std::string> &marker_names() const noexcept { return names_; }
    const std::vector<std::uint8_t> &data() const noexcept { return data_; }

    std::uint8_t operator()(std::size_t m, std::size_t n) const { return data_[m * n_ + n]; }
    std::uint8_t &operator()(std::size_t m, std::size_t n) { return data_[m * n_ + n]; }

    // Window [first, first + count) of nucleosomes.
    IncidenceMatrix window(std::size_t first, std::size_t count) const {
        if (first + count > n_ || count == 0) throw Error("incidence window out of range");
        std::vector<std::uint8_t> d(markers() * count);
        for (std::size_t m = 0; m < markers(); ++m)
            for (std::size_t n = 0; n < count; ++n) d[m * count + n] = (*this)(m, first + n);
        return IncidenceMatrix(names_, count, std::move(d));
    }

    bool operator==(const IncidenceMatrix &) const = default;

  private:
    std::vector<std::string> names_;
    std::size_t n_ = 0;
    std::vector<std::uint8_t> data_;
};

inline IncidenceMatrix assemble(const std::vector<std::pair<std::string, std::vector<std::uint8_t>>> &rows) {
    if (rows.empty()) throw Error("assemble: at least one marker row is required");
    const auto n = rows.front().second.size();
    std::set<std::string> seen;
    std::vector<std::string> names;
    std::vector<std::uint8_t> data;
    data.reserve(rows.size() * n);
    for (const auto &[name, row] : rows) {
        if (row.size() != n)
            throw Error("assemble: ragged rows (marker '" + name + "' has " + std::to_string(row.size()) +
                        " bins, expected " + std::to_string(n) + ")");
        if (!seen.insert(name).second) throw Error("assemble: duplicate marker name '" + name + "'");
        names.push_back(name);
        data.insert(data.end(), row.begin(), row.end());
    }
    return IncidenceMatrix(std::move(names), n, std::move(data));
}

// CSV layout: one row per nucleosome (the long axis), one column per marker.
//   nucleosome,H3K4me1,H3K27ac,...
//   0,1,0,...
inline void write_incidence_csv(std::ostream &out, const IncidenceMatrix &x) {
    out << "nucleosome";
    for (const auto &name : x.marker_names()) out << ',' << name;
    out << '\n';
    for (std::size_t n = 0; n < x.nucleosomes(); ++n) {
        out << n;
        for (std::size_t m = 0; m < x.markers(); ++m) out << ',' << int(x(m, n));
        out << '\n';
    }
}

inline IncidenceMatrix read_incidence_csv(std::istream &in) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> names;
    std::vector<std::vector<std::uint8_t>> cols;
    auto split_csv = [](const std::string &l) {
        std::vector<std::string> f;
        std::stringstream ss(l);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty() && item.back() == '\r') item.pop_back();
            f.push_back(item);
        }
        return f;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (names.empty()) {
            if (f.size() < 2 || f[0] != "nucleosome") throw ParseError(lineno, "expected header 'nucleosome,<markers>'");
            names.assign(f.begin() + 1, f.end());
            cols.resize(names.size());
            continue;
        }
        if (f.size() != names.size() + 1) throw ParseError(lineno, "wrong number of columns");
        for (std::size_t m = 0; m < names.size(); ++m) {
            if (f[m + 1] != "0" && f[m + 1] != "1") throw ParseError(lineno, "incidence must be 0 or 1");
            cols[m].push_back(f[m + 1] == "1");
        }
    }
    if (names.empty()) throw Error("empty incidence CSV");
    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> rows;
    for (std::size_t m = 0; m < names.size(); ++m) rows.emplace_back(names[m], std::move(cols[m]));
    return assemble(rows);
}

inline void to_json(nlohmann::json &j, const IncidenceMatrix &x) {
    j = nlohmann::json{{"M", x.markers()}, {"N", x.nucleosomes()}, {"marker_names", x.marker_names()}};
    auto &d = j["data"] = nlohmann::json::array();
    for (auto v : x.data()) d.push_back(int(v));
}

inline void from_json(const nlohmann::json &j, IncidenceMatrix &x) {
    const auto m = j.at("M").get<std::size_t>();
    const auto n = j.at("N").get<std::size_t>();
    auto names = j.at("marker_names").get<std::vector<std::string>>();
    auto raw = j.at("data").get<std::vector<int>>();
    if (names.size() != m) throw Error("incidence JSON: marker_names length != M");
    std::vector<std::uint8_t> data(raw.begin(), raw.end());
    x = IncidenceMatrix(std::move(names), n, std::move(data));
}

}  // namespace chromanneal
