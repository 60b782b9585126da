#include "mnsbs/inference.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "mnsbs/rng.hpp"

namespace mnsbs {

double QuantileTable::quantile(double beta) const {
    if (alphas.empty()) throw config_error("quantile table is empty");
    if (!(beta > 0.0 && beta < 1.0)) throw input_error("quantile level must lie in (0, 1)");
    if (beta <= alphas.front()) return q_star.front();
    if (beta >= alphas.back()) return q_star.back();
    const auto it = std::lower_bound(alphas.begin(), alphas.end(), beta);
    const std::size_t hi = static_cast<std::size_t>(it - alphas.begin());
    const std::size_t lo = hi - 1;
    const double w = (beta - alphas[lo]) / (alphas[hi] - alphas[lo]);
    return q_star[lo] * (1.0 - w) + q_star[hi] * w;
}

std::string QuantileTable::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["kind"] = "argmin_quantile_table";
    j["alphas"] = alphas;
    j["q_star"] = q_star;
    j["n_draws"] = n_draws;
    j["grid_step"] = grid_step;
    j["grid_halfwidth"] = grid_halfwidth;
    j["seed"] = seed;
    return j.dump(2);
}

QuantileTable QuantileTable::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        throw input_error(std::string("quantile table JSON malformed: ") + err.what());
    }
    QuantileTable t;
    try {
        if (j.at("schema_version").get<int>() != 1) throw input_error("unsupported quantile table schema version");
        t.alphas = j.at("alphas").get<std::vector<double>>();
        t.q_star = j.at("q_star").get<std::vector<double>>();
        t.n_draws = j.at("n_draws").get<std::int64_t>();
        t.grid_step = j.at("grid_step").get<double>();
        t.grid_halfwidth = j.at("grid_halfwidth").get<double>();
        t.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& err) {
        throw input_error(std::string("quantile table JSON missing fields: ") + err.what());
    }
    if (t.alphas.size() != t.q_star.size() || t.alphas.empty()) {
        throw input_error("quantile table arrays inconsistent");
    }
    if (!std::is_sorted(t.alphas.begin(), t.alphas.end())) {
        throw input_error("quantile table alphas must be sorted");
    }
    return t;
}

namespace detail {

std::vector<double> simulate_argmin_draws(double sigma, const SimulationOptions& opts, std::int64_t* boundary_hits) {
    if (!(sigma >= 0.0)) throw config_error("sigma must be nonnegative");
    if (opts.n_draws < 1000) throw config_error("need at least 1000 draws");
    if (!(opts.grid_step > 0.0) || opts.grid_step > 0.05) throw config_error("grid step must lie in (0, 0.05]");
    if (opts.grid_halfwidth < 20.0) throw config_error("grid halfwidth must be at least 20");

    const std::int64_t nsteps = static_cast<std::int64_t>(std::llround(opts.grid_halfwidth / opts.grid_step));
    const double sqrt_step = std::sqrt(opts.grid_step);
    std::vector<double> draws(static_cast<std::size_t>(opts.n_draws), 0.0);
    std::vector<std::int64_t> hits(static_cast<std::size_t>(opts.n_draws), 0);

    const int threads = resolve_threads(opts.threads);
    parallel_for(opts.n_draws, threads, [&](std::int64_t lo, std::int64_t hi) {
        std::vector<double> neg(static_cast<std::size_t>(nsteps + 1), 0.0);
        for (std::int64_t d = lo; d < hi; ++d) {
            Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(d)));
            // Negative-side path first (fixed draw order), then stream the
            // positive side. W(u) = sigma * B_side(|u|) + |u|; W(0) = 0.
            double b = 0.0;
            for (std::int64_t i = 1; i <= nsteps; ++i) {
                b += sqrt_step * rng.normal();
                neg[static_cast<std::size_t>(i)] = b;
            }
            double best_w = 0.0;  // u = 0
            double best_u = 0.0;
            // Ascending u: most negative first, so ties keep the smallest u.
            for (std::int64_t i = nsteps; i >= 1; --i) {
                const double u = static_cast<double>(i) * opts.grid_step;
                const double w = sigma * neg[static_cast<std::size_t>(i)] + u;
                if (w < best_w) {
                    best_w = w;
                    best_u = -u;
                }
            }
            b = 0.0;
            for (std::int64_t i = 1; i <= nsteps; ++i) {
                b += sqrt_step * rng.normal();
                const double u = static_cast<double>(i) * opts.grid_step;
                const double w = sigma * b + u;
                if (w < best_w) {
                    best_w = w;
                    best_u = u;
                }
            }
            draws[static_cast<std::size_t>(d)] = best_u;
            if (std::fabs(best_u) >= static_cast<double>(nsteps) * opts.grid_step - 0.5 * opts.grid_step) {
                hits[static_cast<std::size_t>(d)] = 1;
            }
        }
    });

    std::int64_t total_hits = 0;
    for (auto h : hits) total_hits += h;
    if (boundary_hits) *boundary_hits = total_hits;
    return draws;
}

}  // namespace detail

namespace {

// Type-7 empirical quantile on a sorted sample. The bracket form plus the
// clamp keeps the result inside [sorted[lo], sorted[hi]], so quantiles of
// one sample are monotone in beta even under heavy ties, where the naive
// two-product interpolation can dip by an ulp.
double sorted_quantile(const std::vector<double>& sorted, double beta) {
    const std::size_t n = sorted.size();
    const double h = (static_cast<double>(n) - 1.0) * beta;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double w = h - static_cast<double>(lo);
    const double v = sorted[lo] + w * (sorted[hi] - sorted[lo]);
    return std::clamp(v, sorted[lo], sorted[hi]);
}

}  // namespace

QuantileTable simulate_standard_quantiles(const SimulationOptions& opts) {
    std::int64_t boundary = 0;
    auto draws = detail::simulate_argmin_draws(1.0, opts, &boundary);
    if (static_cast<double>(boundary) > 0.01 * static_cast<double>(opts.n_draws)) {
        throw numeric_error("halfwidth too small: over 1% of argmin draws sit on the grid boundary");
    }
    std::sort(draws.begin(), draws.end());
    QuantileTable t;
    t.n_draws = opts.n_draws;
    t.grid_step = opts.grid_step;
    t.grid_halfwidth = opts.grid_halfwidth;
    t.seed = opts.seed;
    t.alphas.reserve(999);
    t.q_star.reserve(999);
    for (int i = 1; i <= 999; ++i) {
        const double alpha = static_cast<double>(i) / 1000.0;
        t.alphas.push_back(alpha);
        t.q_star.push_back(sorted_quantile(draws, alpha));
    }
    return t;
}

ConfidenceInterval confidence_interval(std::int64_t k, std::int64_t eta_tilde, double kappa_hat, double sigma2_inf,
                                       int p, double r, double alpha, const QuantileTable& table, std::int64_t T) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must lie in (0, 1)");
    if (!(kappa_hat > 0.0)) throw input_error("confidence interval needs a positive jump size");
    if (!(sigma2_inf >= 0.0)) throw input_error("variance must be nonnegative");
    if (!(r > 0.0) || p < 1) throw config_error("invalid p or r");
    if (eta_tilde < 1 || eta_tilde > T) throw input_error("eta_tilde outside [1, T]");

    ConfidenceInterval ci;
    ci.k = k;
    ci.level = 1.0 - alpha;
    if (sigma2_inf == 0.0) {
        ci.degenerate = true;
        ci.lo = ci.hi = eta_tilde;
        ci.lo_real = ci.hi_real = static_cast<double>(eta_tilde);
        return ci;
    }
    const double denom = std::pow(kappa_hat, static_cast<double>(p) / r + 2.0);
    const double q_lo = sigma2_inf * table.quantile(alpha / 2.0);
    const double q_hi = sigma2_inf * table.quantile(1.0 - alpha / 2.0);
    ci.lo_real = static_cast<double>(eta_tilde) + q_lo / denom;
    ci.hi_real = static_cast<double>(eta_tilde) + q_hi / denom;
    ci.lo = static_cast<std::int64_t>(std::floor(ci.lo_real));
    ci.hi = static_cast<std::int64_t>(std::ceil(ci.hi_real));
    ci.lo = std::clamp<std::int64_t>(ci.lo, 1, T);
    ci.hi = std::clamp<std::int64_t>(ci.hi, 1, T);
    ci.lo = std::min(ci.lo, eta_tilde);
    ci.hi = std::max(ci.hi, eta_tilde);
    return ci;
}

}  // namespace mnsbs
