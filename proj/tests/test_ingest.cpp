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

#include <sstream>

#include <gtest/gtest.h>

#include "chromanneal/ingest.hpp"

using namespace chromanneal;

TEST(Bedgraph, SingleLine) {
    auto t = parse_bedgraph(std::string("chr9 0 400 1.5\n"));
    ASSERT_EQ(t.intervals.size(), 1u);
    EXPECT_EQ(t.intervals[0].start, 0);
    EXPECT_EQ(t.intervals[0].end, 400);
    EXPECT_DOUBLE_EQ(t.intervals[0].value, 1.5);
}

TEST(Bedgraph, EmptyStream) { EXPECT_TRUE(parse_bedgraph(std::string()).intervals.empty()); }

TEST(Bedgraph, OverlapIsAnError) {
    EXPECT_THROW(parse_bedgraph(std::string("chr9 0 200 1.0\nchr9 100 300 2.0\n")), ParseError);
}

TEST(Bedgraph, SkipsHeadersAndSortsIntervals) {
    auto t = parse_bedgraph(std::string("track type=bedGraph\n# note\nchr1 200 400 2\n\nchr1 0 200 1\n"));
    ASSERT_EQ(t.intervals.size(), 2u);
    EXPECT_EQ(t.intervals[0].start, 0);
    EXPECT_EQ(t.intervals[1].start, 200);
}

TEST(Bedgraph, MalformedLines) {
    EXPECT_THROW(parse_bedgraph(std::string("chr1 0 x 1\n")), ParseError);
    EXPECT_THROW(parse_bedgraph(std::string("chr1 10 5 1\n")), ParseError);
    EXPECT_THROW(parse_bedgraph(std::string("chr1 0 5\n")), ParseError);
}

TEST(Bedgraph, RoundTrip) {
    auto t = parse_bedgraph(std::string("chr2\t0\t150\t0.25\nchr2\t300\t450\t3\n"));
    std::ostringstream os;
    write_bedgraph(os, t);
    auto u = parse_bedgraph(os.str());
    ASSERT_EQ(u.intervals.size(), t.intervals.size());
    for (std::size_t k = 0; k < t.intervals.size(); ++k) {
        EXPECT_EQ(u.intervals[k].start, t.intervals[k].start);
        EXPECT_EQ(u.intervals[k].value, t.intervals[k].value);
    }
}

TEST(Binning, UniformCoverage) {
    auto t = parse_bedgraph(std::string("c 0 400 1.0\n"));
    auto b = bin_signal(t, 200, 0, 400, Aggregation::mean);
    EXPECT_EQ(b.values, (std::vector<double>{1.0, 1.0}));
}

TEST(Binning, WeightedMeanOfPartialCover) {
    // (100 * 2.0 + 100 * 0) / 200
    auto t = parse_bedgraph(std::string("c 0 100 2.0\n"));
    EXPECT_DOUBLE_EQ(bin_signal(t, 200, 0, 200, Aggregation::mean).values.at(0), 1.0);
}

TEST(Binning, NoIntervalsGivesZeros) {
    RawTrack t;
    EXPECT_EQ(bin_signal(t, 200, 0, 600, Aggregation::mean).values, (std::vector<double>{0, 0, 0}));
}

TEST(Binning, MaxAggregation) {
    auto t = parse_bedgraph(std::string("c 0 50 4.0\nc 50 200 1.0\n"));
    EXPECT_DOUBLE_EQ(bin_signal(t, 200, 0, 200, Aggregation::max).values.at(0), 4.0);
}

TEST(Binning, RejectsBadSpan) {
    RawTrack t;
    EXPECT_THROW(bin_signal(t, 200, 0, 300, Aggregation::mean), Error);
    EXPECT_THROW(bin_signal(t, 0, 0, 200, Aggregation::mean), Error);
}

TEST(Binarize, StrictThreshold) {
    BinnedTrack b;
    b.values = {5.0, 1.0};
    EXPECT_EQ(binarize(b, 2.0), (std::vector<std::uint8_t>{1, 0}));
    b.values = {2.0};
    EXPECT_EQ(binarize(b, 2.0), (std::vector<std::uint8_t>{0}));
    b.values = {0, 0, 0};
    EXPECT_EQ(binarize(b, 0.0), (std::vector<std::uint8_t>{0, 0, 0}));
}

TEST(Assemble, Shapes) {
    auto x = assemble({{"a", {1, 0, 1}}, {"b", {0, 0, 1}}});
    EXPECT_EQ(x.markers(), 2u);
    EXPECT_EQ(x.nucleosomes(), 3u);
    EXPECT_EQ(x(1, 2), 1);
    EXPECT_THROW(assemble({{"a", {1, 0, 1}}, {"b", {0, 0, 1, 1}}}), Error);
    EXPECT_THROW(assemble({}), Error);
}

TEST(Incidence, CsvRoundTripAndWindow) {
    auto x = assemble({{"H3K4me1", {1, 0, 1, 1}}, {"H3K27ac", {0, 1, 1, 0}}});
    std::ostringstream os;
    write_incidence_csv(os, x);
    std::istringstream is(os.str());
    EXPECT_EQ(read_incidence_csv(is), x);
    auto w = x.window(1, 2);
    EXPECT_EQ(w.nucleosomes(), 2u);
    EXPECT_EQ(w(0, 0), 0);
    EXPECT_EQ(w(1, 1), 1);
    EXPECT_THROW(x.window(3, 2), Error);
}
