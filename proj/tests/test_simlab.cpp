#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mnsbs/rng.hpp"
#include "mnsbs/simlab.hpp"
#include "oracles.hpp"

using mnsbs::ChangePointSet;
using mnsbs::LabeledSeries;
using mnsbs::ScenarioId;
using mnsbs::ScenarioSpec;
using mnsbs::StudyConfig;

namespace {

ScenarioSpec spec_of(ScenarioId id, std::int64_t T, int p, std::uint64_t seed) {
    ScenarioSpec s;
    s.id = id;
    s.T = T;
    s.p = p;
    s.seed = seed;
    return s;
}

double mean_over(const mnsbs::ObservationMatrix& obs, int col, std::int64_t lo, std::int64_t hi) {
    double acc = 0.0;
    for (std::int64_t t = lo; t < hi; ++t) acc += obs(t, col);
    return acc / static_cast<double>(hi - lo);
}

double var_over(const mnsbs::ObservationMatrix& obs, int col, std::int64_t lo, std::int64_t hi) {
    const double m = mean_over(obs, col, lo, hi);
    double acc = 0.0;
    for (std::int64_t t = lo; t < hi; ++t) acc += (obs(t, col) - m) * (obs(t, col) - m);
    return acc / static_cast<double>(hi - lo - 1);
}

}  // namespace

TEST_SUITE("simlab") {

TEST_CASE("scenario names round trip") {
    for (auto id : {ScenarioId::S1, ScenarioId::S2, ScenarioId::S3, ScenarioId::S4, ScenarioId::S5, ScenarioId::INFER}) {
        CHECK(mnsbs::scenario_from_string(mnsbs::to_string(id)) == id);
    }
    CHECK_THROWS_AS(mnsbs::scenario_from_string("S9"), mnsbs::config_error);
}

TEST_CASE("shapes, change-point labels, and determinism") {
    for (auto id : {ScenarioId::S1, ScenarioId::S2, ScenarioId::S3, ScenarioId::S4, ScenarioId::S5}) {
        auto series = mnsbs::generate_scenario(spec_of(id, 151, 3, 9));
        CHECK(series.obs.rows == 151);
        CHECK(series.obs.cols == 3);
        CHECK(series.true_cps == std::vector<std::int64_t>{50, 100});
    }
    auto inf = mnsbs::generate_scenario(spec_of(ScenarioId::INFER, 301, 2, 9));
    CHECK(inf.true_cps == std::vector<std::int64_t>{150});

    auto a = mnsbs::generate_scenario(spec_of(ScenarioId::S3, 100, 2, 42));
    auto b = mnsbs::generate_scenario(spec_of(ScenarioId::S3, 100, 2, 42));
    CHECK(a.obs.data == b.obs.data);
    auto c = mnsbs::generate_scenario(spec_of(ScenarioId::S3, 100, 2, 43));
    CHECK(a.obs.data != c.obs.data);

    ScenarioSpec bad = spec_of(ScenarioId::S1, 20, 1, 1);
    CHECK_THROWS_AS(mnsbs::generate_scenario(bad), mnsbs::config_error);
}

TEST_CASE("S1 shifts only the upper half of the coordinates on the middle third") {
    const std::int64_t T = 30000;
    auto series = mnsbs::generate_scenario(spec_of(ScenarioId::S1, T, 4, 20240915));
    const std::int64_t lo = T / 3, hi = 2 * T / 3;
    // AR(1) with phi = 0.3 and unit innovations: mean-of-n standard error
    // inflated by (1+phi)/(1-phi).
    const double tol = 0.045;
    CHECK(std::abs(mean_over(series.obs, 0, lo, hi)) <= tol);        // mu_1 = 0
    CHECK(std::abs(mean_over(series.obs, 1, lo, hi)) <= tol);        // mu_2 = 0
    CHECK(std::abs(mean_over(series.obs, 2, lo, hi) - 2.0) <= tol);  // mu_3 = 2
    CHECK(std::abs(mean_over(series.obs, 3, lo, hi) - 2.0) <= tol);
    CHECK(std::abs(mean_over(series.obs, 3, 0, lo)) <= tol);
    CHECK(std::abs(mean_over(series.obs, 3, hi, T)) <= tol);
}

TEST_CASE("the AR backbone has the stationary variance it should") {
    // S1 with p=1 has mu_1 = 0, so the signal vanishes and the pure
    // backbone remains: variance 1/(1 - 0.09).
    const std::int64_t T = 30000;
    auto series = mnsbs::generate_scenario(spec_of(ScenarioId::S1, T, 1, 7));
    CHECK(std::abs(var_over(series.obs, 0, 0, T) - 1.0 / 0.91) <= 0.05);
}

TEST_CASE("S2 adds a variance bump on the middle third") {
    const std::int64_t T = 30000;
    auto series = mnsbs::generate_scenario(spec_of(ScenarioId::S2, T, 2, 11));
    const std::int64_t lo = T / 3, hi = 2 * T / 3;
    // Backbone: Unif(-sqrt3, sqrt3) innovations, variance 1/(1-0.09).
    // Signal: AR(1) with Unif(-1,1) innovations, variance (1/3)/(1-0.09).
    const double base = 1.0 / 0.91;
    const double mid = base + (1.0 / 3.0) / 0.91;
    CHECK(std::abs(var_over(series.obs, 0, 0, lo) - base) <= 0.06);
    CHECK(std::abs(var_over(series.obs, 0, lo, hi) - mid) <= 0.08);
    CHECK(std::abs(var_over(series.obs, 1, hi, T) - base) <= 0.06);
}

TEST_CASE("S3 innovations are standardized to mean zero and unit variance") {
    mnsbs::Rng rng(13);
    const int n = 1000000;
    std::vector<double> pareto(n), logn(n);
    for (int i = 0; i < n; ++i) pareto[static_cast<std::size_t>(i)] = rng.std_pareto31();
    for (int i = 0; i < n; ++i) logn[static_cast<std::size_t>(i)] = rng.std_lognormal01();
    CHECK(std::abs(oracle::mean(pareto)) <= 0.005);
    CHECK(std::abs(oracle::sample_sd(pareto) * oracle::sample_sd(pareto) - 1.0) <= 0.05);
    CHECK(std::abs(oracle::mean(logn)) <= 0.005);
    CHECK(std::abs(oracle::sample_sd(logn) * oracle::sample_sd(logn) - 1.0) <= 0.05);

    auto series = mnsbs::generate_scenario(spec_of(ScenarioId::S3, 5000, 1, 13));
    CHECK(series.obs.rows == 5000);  // heavy-tailed path simply runs
}

TEST_CASE("S4 flips all coordinates with one shared coin") {
    // On the middle third Y = u * 1.5 * 1_p + noise with u = +-1, so the
    // product of two coordinates has mean 1.5^2 = 2.25; off the signal the
    // coordinates are independent and the product mean is 0.
    const std::int64_t T = 30000;
    auto series = mnsbs::generate_scenario(spec_of(ScenarioId::S4, T, 2, 17));
    const std::int64_t lo = T / 3, hi = 2 * T / 3;
    double mid = 0.0, outer = 0.0;
    for (std::int64_t t = lo; t < hi; ++t) mid += series.obs(t, 0) * series.obs(t, 1);
    for (std::int64_t t = 0; t < lo; ++t) outer += series.obs(t, 0) * series.obs(t, 1);
    mid /= static_cast<double>(hi - lo);
    outer /= static_cast<double>(lo);
    CHECK(std::abs(mid - 2.25) <= 0.15);
    CHECK(std::abs(outer) <= 0.1);
}

TEST_CASE("S5 drifts the signal mean to 0.5/(1-0.3)") {
    const std::int64_t T = 30000;
    auto series = mnsbs::generate_scenario(spec_of(ScenarioId::S5, T, 1, 19));
    const std::int64_t lo = T / 3, hi = 2 * T / 3;
    CHECK(std::abs(mean_over(series.obs, 0, lo, hi) - 0.5 / 0.7) <= 0.08);
    CHECK(std::abs(mean_over(series.obs, 0, 0, lo)) <= 0.08);
}

TEST_CASE("INFER shifts every coordinate by one on the second half") {
    const std::int64_t T = 20000;
    auto series = mnsbs::generate_scenario(spec_of(ScenarioId::INFER, T, 2, 23));
    const std::int64_t half = T / 2;
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(mean_over(series.obs, j, 0, half)) <= 0.06);
        CHECK(std::abs(mean_over(series.obs, j, half, T) - 1.0) <= 0.06);
    }
}

TEST_CASE("hausdorff distances match hand-evaluated examples") {
    ChangePointSet est;
    est.T = 100;
    est.estimates = {35, 70};
    CHECK(mnsbs::hausdorff(est, {30, 70}, 100) == doctest::Approx(0.05));
    est.estimates = {30, 70};
    CHECK(mnsbs::hausdorff(est, {30, 70}, 100) == 0.0);
    est.estimates = {};
    CHECK(mnsbs::hausdorff(est, {50}, 100) == doctest::Approx(0.49));
    est.estimates = {50};
    CHECK(mnsbs::hausdorff(est, {48}, 100) == doctest::Approx(0.02));
}

TEST_CASE("hausdorff is symmetric, bounded, and matches the oracle") {
    mnsbs::Rng rng(29);
    for (int rep = 0; rep < 30; ++rep) {
        const std::int64_t T = 50 + static_cast<std::int64_t>(rng.uniform(0.0, 200.0));
        auto draw_set = [&](int max_k) {
            std::vector<std::int64_t> v = {1, T + 1};
            const int k = static_cast<int>(rng.uniform(0.0, static_cast<double>(max_k + 1)));
            for (int i = 0; i < k; ++i) v.push_back(2 + static_cast<std::int64_t>(rng.uniform(0.0, static_cast<double>(T - 2))));
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            return v;
        };
        auto a = draw_set(4);
        auto b = draw_set(4);
        const double ab = mnsbs::hausdorff_augmented(a, b, T);
        CHECK(ab == mnsbs::hausdorff_augmented(b, a, T));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(ab == doctest::Approx(oracle::hausdorff(a, b, T)).epsilon(1e-12));
        CHECK((ab == 0.0) == (a == b));
    }
}

TEST_CASE("run_study on a noiseless override is perfect and deterministic") {
    StudyConfig cfg;
    cfg.scenario = spec_of(ScenarioId::S1, 120, 1, 303);
    cfg.reps = 2;
    cfg.detection.bandwidth = 1.0;
    cfg.detection.tau = 1.0;
    cfg.quantile_sim.n_draws = 1000;
    cfg.generator_override = [](int, std::uint64_t) {
        LabeledSeries series;
        series.obs = oracle::atoms(120, 1, {40, 80, 120}, {0.0, 10.0, 20.0});
        series.true_cps = {40, 80};
        return series;
    };
    auto report = mnsbs::run_study(cfg);
    CHECK(report.reps == 2);
    CHECK(report.failures == 0);
    CHECK(report.prop_k_wrong == 0.0);
    CHECK(report.dh_mean == 0.0);
    CHECK(report.dh_sd == 0.0);
    REQUIRE(report.per_alpha.size() == 1);
    CHECK(report.per_alpha[0].alpha == 0.05);
    CHECK(report.per_alpha[0].coverage == 1.0);
    CHECK(report.per_alpha[0].n_intervals == 4);  // 2 reps x 2 change points

    auto again = mnsbs::run_study(cfg);
    CHECK(report.to_json() == again.to_json());
}

TEST_CASE("run_study counts failing reps instead of aborting") {
    StudyConfig cfg;
    cfg.scenario = spec_of(ScenarioId::S1, 120, 1, 304);
    cfg.reps = 3;
    cfg.detection.bandwidth = 1.0;
    cfg.detection.tau = 1.0;
    cfg.quantile_sim.n_draws = 1000;
    cfg.generator_override = [](int rep, std::uint64_t) {
        if (rep == 1) throw mnsbs::input_error("synthetic failure");
        LabeledSeries series;
        series.obs = oracle::atoms(120, 1, {60, 120}, {0.0, 8.0});
        series.true_cps = {60};
        return series;
    };
    auto report = mnsbs::run_study(cfg);
    CHECK(report.failures == 1);
    CHECK(report.prop_k_wrong == 0.0);  // among the two clean reps
    CHECK(report.per_alpha[0].n_intervals == 2);
}

TEST_CASE("run_study on a small noisy batch populates every field") {
    StudyConfig cfg;
    cfg.scenario = spec_of(ScenarioId::S1, 120, 2, 305);
    cfg.reps = 3;
    cfg.alphas = {0.05, 0.01};
    cfg.quantile_sim.n_draws = 1000;
    auto report = mnsbs::run_study(cfg);
    CHECK(report.scenario == "S1");
    CHECK(report.reps == 3);
    CHECK(report.prop_k_wrong >= 0.0);
    CHECK(report.prop_k_wrong <= 1.0);
    CHECK(report.dh_mean >= 0.0);
    CHECK(report.dh_mean <= 1.0);
    REQUIRE(report.per_alpha.size() == 2);
    CHECK(report.per_alpha[0].alpha == 0.05);
    CHECK(report.per_alpha[1].alpha == 0.01);
    if (report.per_alpha[0].n_intervals > 0) {
        CHECK(report.per_alpha[1].width_mean >= report.per_alpha[0].width_mean);
    }
    const auto text = report.to_table_text();
    CHECK(text.find("scenario S1") != std::string::npos);
    CHECK(text.find("prop K wrong") != std::string::npos);
    CHECK(text.find("alpha=0.05") != std::string::npos);
}

TEST_CASE("study configuration validation") {
    StudyConfig cfg;
    cfg.scenario = spec_of(ScenarioId::S1, 120, 1, 1);
    cfg.reps = 0;
    CHECK_THROWS_AS(mnsbs::run_study(cfg), mnsbs::config_error);
    cfg.reps = 1;
    cfg.alphas = {1.5};
    CHECK_THROWS_AS(mnsbs::run_study(cfg), mnsbs::config_error);
}

}  // TEST_SUITE
