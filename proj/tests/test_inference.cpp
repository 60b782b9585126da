#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mnsbs/inference.hpp"
#include "oracles.hpp"

using mnsbs::ConfidenceInterval;
using mnsbs::QuantileTable;
using mnsbs::SimulationOptions;

namespace {

QuantileTable stub_table(std::vector<double> alphas, std::vector<double> q) {
    QuantileTable t;
    t.alphas = std::move(alphas);
    t.q_star = std::move(q);
    t.n_draws = 1000;
    t.grid_step = 0.01;
    t.grid_halfwidth = 30.0;
    t.seed = 1;
    return t;
}

SimulationOptions small_sim(std::int64_t n, std::uint64_t seed) {
    SimulationOptions opts;
    opts.n_draws = n;
    opts.seed = seed;
    return opts;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("drift-only argmin draws all sit at zero") {
    std::int64_t hits = -1;
    auto draws = mnsbs::detail::simulate_argmin_draws(0.0, small_sim(1000, 5), &hits);
    REQUIRE(draws.size() == 1000);
    for (double d : draws) CHECK(d == 0.0);
    CHECK(hits == 0);
}

TEST_CASE("oversized noise pushes argmins onto the boundary") {
    // sigma = 6 makes the drift negligible across halfwidth 20, so the path
    // is close to driftless Brownian motion and its argmin ends up arcsine
    // distributed: roughly (2/pi)sqrt(step/(2*20)) ~ 1% of draws land on the
    // last grid point of a side. The counter must flag exactly those draws.
    SimulationOptions opts = small_sim(1000, 7);
    opts.grid_halfwidth = 20.0;
    std::int64_t hits = 0;
    auto draws = mnsbs::detail::simulate_argmin_draws(6.0, opts, &hits);
    REQUIRE(draws.size() == 1000);
    std::int64_t at_edge = 0;
    for (double d : draws) {
        if (std::fabs(d) >= 20.0 - 0.5 * opts.grid_step) ++at_edge;
    }
    CHECK(hits == at_edge);
    CHECK(hits > 0);
}

TEST_CASE("standardized quantile table: shape, determinism, symmetry") {
    auto t1 = mnsbs::simulate_standard_quantiles(small_sim(4000, 31));
    auto t2 = mnsbs::simulate_standard_quantiles(small_sim(4000, 31));
    REQUIRE(t1.alphas.size() == 999);
    REQUIRE(t1.q_star.size() == 999);
    CHECK(t1.alphas.front() == doctest::Approx(0.001));
    CHECK(t1.alphas.back() == doctest::Approx(0.999));
    CHECK(t1.q_star == t2.q_star);  // same seed, same table
    CHECK(std::is_sorted(t1.q_star.begin(), t1.q_star.end()));

    // Reflection symmetry of the two-sided construction, up to Monte-Carlo
    // error at 4000 draws.
    CHECK(std::abs(t1.quantile(0.5)) <= 0.15);
    for (double a : {0.025, 0.05, 0.1}) {
        CHECK(std::abs(t1.quantile(a) + t1.quantile(1.0 - a)) <= 0.5);
    }
    CHECK(std::abs(t1.quantile(0.975) - 2.76) <= 0.4);

    auto t3 = mnsbs::simulate_standard_quantiles(small_sim(4000, 99));
    CHECK(t3.q_star != t1.q_star);  // a different seed actually re-draws
}

TEST_CASE("simulation options are validated") {
    SimulationOptions opts;
    opts.n_draws = 999;
    CHECK_THROWS_AS(mnsbs::simulate_standard_quantiles(opts), mnsbs::config_error);
    opts = SimulationOptions{};
    opts.grid_step = 0.2;
    CHECK_THROWS_AS(mnsbs::simulate_standard_quantiles(opts), mnsbs::config_error);
    opts = SimulationOptions{};
    opts.grid_halfwidth = 10.0;
    CHECK_THROWS_AS(mnsbs::simulate_standard_quantiles(opts), mnsbs::config_error);
}

TEST_CASE("table interpolation is linear and clamped") {
    auto t = stub_table({0.1, 0.5, 0.9}, {-1.0, 0.0, 1.0});
    CHECK(t.quantile(0.5) == 0.0);
    CHECK(t.quantile(0.3) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(t.quantile(0.7) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t.quantile(0.05) == -1.0);
    CHECK(t.quantile(0.99) == 1.0);
    CHECK_THROWS_AS(t.quantile(0.0), mnsbs::input_error);
    CHECK_THROWS_AS(t.quantile(1.0), mnsbs::input_error);
}

TEST_CASE("quantile table JSON round trip and rejection of bad documents") {
    auto t = mnsbs::simulate_standard_quantiles(small_sim(1000, 17));
    auto back = QuantileTable::from_json(t.to_json());
    CHECK(back.alphas == t.alphas);
    CHECK(back.q_star == t.q_star);
    CHECK(back.n_draws == t.n_draws);
    CHECK(back.grid_step == t.grid_step);
    CHECK(back.grid_halfwidth == t.grid_halfwidth);
    CHECK(back.seed == t.seed);

    CHECK_THROWS_AS(QuantileTable::from_json("not json"), mnsbs::input_error);
    CHECK_THROWS_AS(QuantileTable::from_json("{}"), mnsbs::input_error);
    CHECK_THROWS_AS(QuantileTable::from_json(R"({"schema_version": 2})"), mnsbs::input_error);
    CHECK_THROWS_AS(
        QuantileTable::from_json(
            R"({"schema_version":1,"alphas":[0.5,0.1],"q_star":[0,1],"n_draws":1000,"grid_step":0.01,"grid_halfwidth":30,"seed":1})"),
        mnsbs::input_error);
}

TEST_CASE("confidence interval from a symmetric stub table") {
    auto t = stub_table({0.025, 0.975}, {-2.0, 2.0});
    auto ci = mnsbs::confidence_interval(1, 50, 1.0, 1.0, 1, 1.0, 0.05, t, 100);
    // kappa^(p/r + 2) = 1, q = sigma2 * (+-2).
    CHECK(ci.lo == 48);
    CHECK(ci.hi == 52);
    CHECK(ci.lo_real == doctest::Approx(48.0));
    CHECK(ci.hi_real == doctest::Approx(52.0));
    CHECK(ci.level == doctest::Approx(0.95));
    CHECK_FALSE(ci.degenerate);
}

TEST_CASE("zero variance collapses the interval to the point") {
    auto t = stub_table({0.025, 0.975}, {-2.0, 2.0});
    auto ci = mnsbs::confidence_interval(2, 31, 0.7, 0.0, 2, 1000.0, 0.05, t, 300);
    CHECK(ci.degenerate);
    CHECK(ci.lo == 31);
    CHECK(ci.hi == 31);
}

TEST_CASE("interval endpoints clip to the sample and keep the estimate inside") {
    auto t = stub_table({0.025, 0.975}, {-2.0, 2.0});
    auto low = mnsbs::confidence_interval(1, 2, 1.0, 10.0, 1, 1.0, 0.05, t, 100);
    CHECK(low.lo == 1);  // unclipped would be 2 - 20
    CHECK(low.hi == 22);
    auto high = mnsbs::confidence_interval(1, 99, 1.0, 10.0, 1, 1.0, 0.05, t, 100);
    CHECK(high.lo == 79);
    CHECK(high.hi == 100);
    for (const auto& ci : {low, high}) {
        CHECK(ci.lo <= ci.hi);
        CHECK(ci.lo >= 1);
        CHECK(ci.hi <= 100);
    }

    // Asymmetric table whose quantiles are both positive: the estimate is
    // still forced into the interval.
    auto skew = stub_table({0.025, 0.975}, {1.0, 3.0});
    auto forced = mnsbs::confidence_interval(1, 50, 1.0, 1.0, 1, 1.0, 0.05, skew, 100);
    CHECK(forced.lo == 50);
    CHECK(forced.hi == 53);
}

TEST_CASE("interval width is monotone in variance, jump size, and level") {
    auto t = stub_table({0.005, 0.025, 0.05, 0.95, 0.975, 0.995}, {-3.0, -2.0, -1.5, 1.5, 2.0, 3.0});
    auto width = [&](double kappa, double sigma2, double alpha) {
        auto ci = mnsbs::confidence_interval(1, 500, kappa, sigma2, 1, 1.0, alpha, t, 1000);
        return ci.hi_real - ci.lo_real;
    };
    CHECK(width(1.0, 2.0, 0.05) >= width(1.0, 1.0, 0.05));
    CHECK(width(2.0, 1.0, 0.05) <= width(1.0, 1.0, 0.05));
    CHECK(width(1.0, 1.0, 0.01) >= width(1.0, 1.0, 0.05));
    CHECK(width(1.0, 1.0, 0.05) >= width(1.0, 1.0, 0.10));

    // Nesting of the rounded intervals as the level rises.
    auto ci10 = mnsbs::confidence_interval(1, 500, 1.0, 1.0, 1, 1.0, 0.10, t, 1000);
    auto ci05 = mnsbs::confidence_interval(1, 500, 1.0, 1.0, 1, 1.0, 0.05, t, 1000);
    auto ci01 = mnsbs::confidence_interval(1, 500, 1.0, 1.0, 1, 1.0, 0.01, t, 1000);
    CHECK(ci01.lo <= ci05.lo);
    CHECK(ci05.lo <= ci10.lo);
    CHECK(ci10.hi <= ci05.hi);
    CHECK(ci05.hi <= ci01.hi);
}

TEST_CASE("brownian scaling identity: sigma rescales the argmin by sigma squared") {
    // argmin(sigma B(u) + |u|) has the law of sigma^2 argmin(B(u) + |u|).
    // Simulate sigma = 2 directly on a wide grid and compare quantiles
    // against 4 times the standardized table.
    SimulationOptions wide;
    wide.n_draws = 4000;
    wide.seed = 4321;
    wide.grid_halfwidth = 60.0;
    wide.grid_step = 0.02;
    std::int64_t hits = 0;
    auto draws = mnsbs::detail::simulate_argmin_draws(2.0, wide, &hits);
    CHECK(hits <= 40);
    std::sort(draws.begin(), draws.end());
    auto q_at = [&](double beta) {
        const double h = (static_cast<double>(draws.size()) - 1.0) * beta;
        const auto lo = static_cast<std::size_t>(h);
        return draws[lo] * (1.0 - (h - static_cast<double>(lo))) +
               draws[std::min(lo + 1, draws.size() - 1)] * (h - static_cast<double>(lo));
    };
    auto table = mnsbs::simulate_standard_quantiles(small_sim(4000, 8765));
    for (double beta : {0.1, 0.25, 0.75, 0.9}) {
        const double direct = q_at(beta);
        const double scaled = 4.0 * table.quantile(beta);
        // Central quantiles of the sigma=2 law have spread ~4x the standard
        // one; allow a generous Monte-Carlo band.
        CHECK(std::abs(direct - scaled) <= 0.30 * std::max(4.0, std::abs(scaled)));
    }
}

TEST_CASE("confidence interval validation") {
    auto t = stub_table({0.025, 0.975}, {-2.0, 2.0});
    CHECK_THROWS_AS(mnsbs::confidence_interval(1, 50, 1.0, 1.0, 1, 1.0, 0.0, t, 100), mnsbs::input_error);
    CHECK_THROWS_AS(mnsbs::confidence_interval(1, 50, 0.0, 1.0, 1, 1.0, 0.05, t, 100), mnsbs::input_error);
    CHECK_THROWS_AS(mnsbs::confidence_interval(1, 50, 1.0, -1.0, 1, 1.0, 0.05, t, 100), mnsbs::input_error);
    CHECK_THROWS_AS(mnsbs::confidence_interval(1, 50, 1.0, 1.0, 0, 1.0, 0.05, t, 100), mnsbs::config_error);
    CHECK_THROWS_AS(mnsbs::confidence_interval(1, 0, 1.0, 1.0, 1, 1.0, 0.05, t, 100), mnsbs::input_error);
    QuantileTable empty;
    CHECK_THROWS_AS(mnsbs::confidence_interval(1, 50, 1.0, 1.0, 1, 1.0, 0.05, empty, 100), mnsbs::config_error);
}

}  // TEST_SUITE
