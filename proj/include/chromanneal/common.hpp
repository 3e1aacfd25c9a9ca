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
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace chromanneal {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Raised by text parsers; carries the 1-based line number of the offending input.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string &what)
            : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

enum class Boundary { open, periodic };

inline std::string_view to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

inline Boundary parse_boundary(std::string_view s) {
    if (s == "open") return Boundary::open;
    if (s == "periodic") return Boundary::periodic;
    throw Error("unknown boundary '" + std::string(s) + "' (expected open|periodic)");
}

// Spin (-1/+1) or binary (0/1) value of a single variable.
using Value = std::int8_t;
using State = std::vector<Value>;

enum class Vartype { spin, binary };

inline std::string_view to_string(Vartype v) { return v == Vartype::spin ? "spin" : "binary"; }

inline Value spin_to_binary(Value s) { return s > 0 ? 1 : 0; }
inline Value binary_to_spin(Value x) { return x ? 1 : -1; }

inline State to_binary(const State &spins) {
    State out(spins.size());
    for (std::size_t i = 0; i < spins.size(); ++i) out[i] = spin_to_binary(spins[i]);
    return out;
}

inline State to_spin(const State &bits) {
    State out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) out[i] = binary_to_spin(bits[i]);
    return out;
}

//
// Randomness. Every random stream in the library is an Rng seeded through make_rng; streams for
// independent work items use derive_seed(master, index) = master XOR index.
//
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) { return master ^ index; }

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

// Uniform double in [0, 1) with 53 random bits; independent of the standard library's
// distribution implementations so results are identical across toolchains.
inline double uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t uniform_index(Rng &rng, std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

inline double uniform_real(Rng &rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline Value random_spin(Rng &rng) { return (rng() >> 63) ? Value{1} : Value{-1}; }

template <typename T>
void shuffle(std::vector<T> &v, Rng &rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

//
// Warnings are routed through a replaceable sink; the default prints to stderr.
//
using WarningSink = std::function<void(const std::string &)>;

inline WarningSink &warning_sink() {
    static WarningSink sink = [](const std::string &msg) { std::cerr << "warning: " << msg << "\n"; };
    return sink;
}

inline void warn(const std::string &msg) {
    if (warning_sink()) warning_sink()(msg);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is executed exactly once and
// workers write only to their own slots, so results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn &&fn, unsigned threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto &th : pool) th.join();
}

// Round-trippable decimal representation used by every text writer.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Fixed-precision formatting for report tables.
inline std::string format_fixed(double v, int digits = 10) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

}  // namespace chromanneal
