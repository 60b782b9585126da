// Limiting-law quantiles and confidence intervals for refined estimates.
//
// The refined estimation error, scaled by kappa^{p/r+2}, converges to
// argmin_u { sigma * B(u) + |u| } with B a two-sided standard Brownian
// motion. Since B(c u) has the law of sqrt(c) B(u), that argmin equals
// sigma^2 times the argmin of the standardized case sigma = 1, so one
// Monte-Carlo table of standardized quantiles serves every change point.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mnsbs/common.hpp"

namespace mnsbs {

struct QuantileTable {
    std::vector<double> alphas;  // sorted probability grid
    std::vector<double> q_star;  // standardized quantiles at alphas
    std::int64_t n_draws = 0;
    double grid_step = 0.0;       // walk resolution delta
    double grid_halfwidth = 0.0;  // walk range [-M, M]
    std::uint64_t seed = 0;

    // Linear interpolation on the alpha grid; clamped at the ends.
    double quantile(double beta) const;

    std::string to_json() const;
    static QuantileTable from_json(const std::string& text);
};

struct SimulationOptions {
    std::int64_t n_draws = 10000;
    double grid_step = 0.01;
    double grid_halfwidth = 30.0;
    std::uint64_t seed = 20240915;
    int threads = 0;
};

namespace detail {
// Raw argmin draws of sigma * B(u) + |u| over the signed grid
// {-M, ..., -step, 0, step, ..., M}. boundary_hits counts draws whose
// argmin landed on +-M (an undersized grid). Deterministic per (seed,
// draw index).
std::vector<double> simulate_argmin_draws(double sigma, const SimulationOptions& opts, std::int64_t* boundary_hits);
}  // namespace detail

// Builds the standardized table on the alpha grid 0.001 .. 0.999 (step
// 0.001) from n_draws argmin draws. Validation: n_draws >= 1000,
// grid_step <= 0.05, halfwidth >= 20. Fails if more than 1% of draws
// attain their argmin at the grid boundary.
QuantileTable simulate_standard_quantiles(const SimulationOptions& opts = {});

struct ConfidenceInterval {
    std::int64_t k = 0;
    double level = 0.0;  // 1 - alpha
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    double lo_real = 0.0;  // endpoints before outward rounding
    double hi_real = 0.0;
    bool degenerate = false;  // sigma2 = 0: the interval is the point itself
};

// CI for change point k: eta_tilde + sigma2 * q_star(beta) / kappa^{p/r+2}
// at beta = alpha/2 and 1 - alpha/2, rounded outward and clipped to
// [1, T]; always contains eta_tilde.
ConfidenceInterval confidence_interval(std::int64_t k, std::int64_t eta_tilde, double kappa_hat, double sigma2_inf,
                                       int p, double r, double alpha, const QuantileTable& table, std::int64_t T);

}  // namespace mnsbs
