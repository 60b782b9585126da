#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "mnsbs/seeded.hpp"

using mnsbs::SeededInterval;
using mnsbs::SeededIntervalSet;

namespace {

// The defining formula, written independently of the library loop.
std::vector<SeededInterval> layer_by_formula(std::int64_t T, int k) {
    std::vector<SeededInterval> out;
    const double len = static_cast<double>(T) * std::pow(2.0, 1 - k);
    const double shift = len / 2.0;
    const std::int64_t count = (std::int64_t{1} << k) - 1;
    for (std::int64_t i = 1; i <= count; ++i) {
        const double start = static_cast<double>(i - 1) * shift;
        auto s = static_cast<std::int64_t>(std::floor(start));
        auto e = static_cast<std::int64_t>(std::ceil(start + len));
        if (s < 0) s = 0;
        if (e > T) e = T;
        out.push_back({k, s, e});
    }
    return out;
}

}  // namespace

TEST_SUITE("seeded") {

TEST_CASE("layer counts follow the clamped depth rule") {
    CHECK(mnsbs::seeded_layer_count(8, 0.5) == 2);
    CHECK(mnsbs::seeded_layer_count(8, 1.5) == 3);    // depth clamp log2(8)
    CHECK(mnsbs::seeded_layer_count(4, 1.5) == 2);
    CHECK(mnsbs::seeded_layer_count(100, 1.5) == 6);  // ceil(1.5 ln 100) = 7, clamped
    CHECK(mnsbs::seeded_layer_count(256, 1.5) == 8);
    CHECK(mnsbs::seeded_layer_count(5, 0.1) == 1);    // never below one layer
}

TEST_CASE("T=8 with two layers enumerates the textbook set") {
    auto set = mnsbs::generate_seeded_intervals(8, 0.5);
    REQUIRE(set.layers == 2);
    REQUIRE(set.intervals.size() == 4);
    CHECK(set.intervals[0].layer == 1);
    CHECK(set.intervals[0].s == 0);
    CHECK(set.intervals[0].e == 8);
    const std::vector<std::pair<std::int64_t, std::int64_t>> layer2 = {{0, 4}, {2, 6}, {4, 8}};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(set.intervals[i + 1].layer == 2);
        CHECK(set.intervals[i + 1].s == layer2[i].first);
        CHECK(set.intervals[i + 1].e == layer2[i].second);
    }
}

TEST_CASE("layer one is always the whole sample") {
    for (std::int64_t T : {4, 9, 16, 77, 150, 256}) {
        auto set = mnsbs::generate_seeded_intervals(T);
        REQUIRE_FALSE(set.intervals.empty());
        CHECK(set.intervals[0].layer == 1);
        CHECK(set.intervals[0].s == 0);
        CHECK(set.intervals[0].e == T);
        int in_layer1 = 0;
        for (const auto& iv : set.intervals) in_layer1 += (iv.layer == 1);
        CHECK(in_layer1 == 1);
    }
}

TEST_CASE("T=16 layer three is seven length-4 intervals shifted by two") {
    auto set = mnsbs::generate_seeded_intervals(16, 1.5);
    std::vector<SeededInterval> l3;
    for (const auto& iv : set.intervals)
        if (iv.layer == 3) l3.push_back(iv);
    REQUIRE(l3.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(l3[i].s == static_cast<std::int64_t>(2 * i));
        CHECK(l3[i].e == static_cast<std::int64_t>(2 * i + 4));
    }
}

TEST_CASE("every layer matches the defining formula") {
    for (std::int64_t T : {8, 16, 100, 137, 256}) {
        auto set = mnsbs::generate_seeded_intervals(T, 1.5);
        std::size_t pos = 0;
        std::size_t expected_total = 0;
        for (int k = 1; k <= set.layers; ++k) {
            auto ref = layer_by_formula(T, k);
            expected_total += ref.size();
            for (const auto& want : ref) {
                REQUIRE(pos < set.intervals.size());
                const auto& got = set.intervals[pos++];
                CHECK(got.layer == k);
                CHECK(got.s == want.s);
                CHECK(got.e == want.e);
            }
        }
        CHECK(set.intervals.size() == expected_total);
        std::size_t counting = 0;
        for (int k = 1; k <= set.layers; ++k) counting += (std::size_t{1} << k) - 1;
        CHECK(set.intervals.size() == counting);
    }
}

TEST_CASE("intervals are nonempty, in range, and the finest layer is short") {
    for (std::int64_t T : {4, 10, 100, 256, 1000}) {
        auto set = mnsbs::generate_seeded_intervals(T);
        for (const auto& iv : set.intervals) {
            CHECK(iv.s >= 0);
            CHECK(iv.e <= T);
            CHECK(iv.s < iv.e);
        }
        const double finest = static_cast<double>(T) * std::pow(2.0, 1 - set.layers);
        CHECK(finest >= 2.0);
        if (set.layers > 1) CHECK(finest <= 4.0 + 1e-9);
    }
}

TEST_CASE("generation is deterministic") {
    auto a = mnsbs::generate_seeded_intervals(137, 1.5);
    auto b = mnsbs::generate_seeded_intervals(137, 1.5);
    REQUIRE(a.intervals.size() == b.intervals.size());
    CHECK(a.layers == b.layers);
    for (std::size_t i = 0; i < a.intervals.size(); ++i) {
        CHECK(a.intervals[i].layer == b.intervals[i].layer);
        CHECK(a.intervals[i].s == b.intervals[i].s);
        CHECK(a.intervals[i].e == b.intervals[i].e);
    }
}

TEST_CASE("well separated change points get a straddling interval at some scale") {
    // Soft version of the covering lemma: any position with both-sided
    // spacing Delta >= 8 admits an interval whose short side is at least
    // 0.9 Delta / 16 and whose long side is at most 0.9 Delta. The
    // acceptance suite sweeps the sharp small-Delta edge.
    for (std::int64_t T : {64, 100, 150}) {
        auto set = mnsbs::generate_seeded_intervals(T);
        for (std::int64_t eta = 8; eta <= T - 8; ++eta) {
            const std::int64_t max_delta = std::min(eta, T - eta);
            for (std::int64_t delta = 8; delta <= max_delta; ++delta) {
                const double zeta = 0.9 * static_cast<double>(delta);
                bool found = false;
                for (const auto& iv : set.intervals) {
                    if (!(iv.s < eta && eta < iv.e)) continue;
                    const double lo = static_cast<double>(std::min(eta - iv.s, iv.e - eta));
                    const double hi = static_cast<double>(std::max(eta - iv.s, iv.e - eta));
                    if (lo >= zeta / 16.0 && hi <= zeta) {
                        found = true;
                        break;
                    }
                }
                CHECK_MESSAGE(found, "T=", T, " eta=", eta, " delta=", delta);
            }
        }
    }
}

}  // TEST_SUITE
