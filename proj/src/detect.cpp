#include "mnsbs/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mnsbs/rng.hpp"

namespace mnsbs {

std::string to_string(ThresholdMethod m) {
    switch (m) {
        case ThresholdMethod::theory:
            return "theory";
        case ThresholdMethod::permutation:
            return "permutation";
    }
    throw config_error("unknown threshold method");
}

ThresholdMethod threshold_method_from_string(const std::string& name) {
    if (name == "theory") return ThresholdMethod::theory;
    if (name == "permutation") return ThresholdMethod::permutation;
    throw config_error("unknown threshold method: " + name);
}

void DetectionConfig::validate() const {
    if (!(r > 0.0)) throw config_error("smoothness r must be positive");
    if (bandwidth && !(*bandwidth > 0.0)) throw config_error("bandwidth must be positive");
    if (tau && !(*tau > 0.0)) throw config_error("threshold tau must be positive");
    if (!(c_tau > 0.0)) throw config_error("c_tau must be positive");
    if (permutation_count < 10) throw config_error("permutation count must be at least 10");
    if (!(c_frak > 0.0)) throw config_error("c_frak must be positive");
    if (rho_override && *rho_override < 1) throw config_error("rho override must be at least 1");
    if (min_segment < 2) throw config_error("min_segment must be at least 2");
}

double DetectionConfig::resolve_bandwidth(std::int64_t T, int p) const {
    if (bandwidth) return *bandwidth;
    return 2.0 * std::pow(static_cast<double>(T), -1.0 / (2.0 * r + static_cast<double>(p)));
}

std::vector<std::int64_t> ChangePointSet::augmented() const {
    std::vector<std::int64_t> out;
    out.reserve(estimates.size() + 2);
    out.push_back(1);
    out.insert(out.end(), estimates.begin(), estimates.end());
    out.push_back(T + 1);
    return out;
}

std::vector<std::int64_t> ChangePointSet::segment_boundaries() const {
    std::vector<std::int64_t> out;
    out.reserve(estimates.size() + 2);
    out.push_back(0);
    out.insert(out.end(), estimates.begin(), estimates.end());
    out.push_back(T);
    return out;
}

std::optional<ScanBest> scan_intervals(const PrefixSums& prefix, const SeededIntervalSet& seeds, std::int64_t s,
                                       std::int64_t e, std::int64_t rho) {
    ScanBest best;
    bool found = false;
    for (const auto& iv : seeds.intervals) {
        if (iv.s < s || iv.e > e) continue;
        if (iv.e - iv.s <= 2 * rho) continue;
        auto am = cusum_argmax(prefix, iv.s, iv.e, rho);
        if (am && am->a > best.a) {
            best.a = am->a;
            best.b = am->b;
            found = true;
        }
    }
    if (!found) return std::nullopt;
    return best;
}

namespace {

// Trim resolution. The theory recipe rho = ceil(log(T) h^{-p}) can eat the
// whole sample for small T or tiny h; when the root interval itself fails
// the length test the trim is capped at floor(T/10) so the scan stays
// usable, and the cap is reported. An explicit override is honored as
// given; if it exhausts the sample the caller gets an empty result.
struct RhoChoice {
    std::int64_t rho = 1;
    bool fallback = false;
    bool exhausted = false;
};

RhoChoice resolve_rho(std::int64_t T, int p, double h, const DetectionConfig& cfg) {
    RhoChoice out;
    if (cfg.rho_override) {
        out.rho = *cfg.rho_override;
        out.exhausted = (2 * out.rho >= T);
        return out;
    }
    const double raw = std::log(static_cast<double>(T)) * std::pow(h, -static_cast<double>(p));
    out.rho = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw)));
    if (2 * out.rho >= T) {
        out.rho = std::max<std::int64_t>(1, T / 10);
        out.fallback = true;
        out.exhausted = (2 * out.rho >= T);
    }
    return out;
}

double theory_threshold(std::int64_t T, int p, const DetectionConfig& cfg) {
    const double Td = static_cast<double>(T);
    const double expo = static_cast<double>(p) / (4.0 * cfg.r + 2.0 * static_cast<double>(p));
    return cfg.c_tau * std::pow(Td, expo) * std::sqrt(std::log(Td));
}

// Null calibration: the Gram matrix of a time permutation is the original
// matrix with rows and columns relabeled, so each replicate only rebuilds
// the prefix table, O(T^2), with no kernel evaluations.
double permutation_threshold(const GramContext& ctx, const SeededIntervalSet& seeds, std::int64_t rho,
                             const DetectionConfig& cfg) {
    const std::int64_t T = ctx.size();
    Rng rng(derive_seed(cfg.seed, 0x7065726d75746174ull));
    std::vector<std::int64_t> perm(static_cast<std::size_t>(T));
    std::iota(perm.begin(), perm.end(), std::int64_t{1});
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(cfg.permutation_count));
    PrefixSums prefix(T);
    for (int b = 0; b < cfg.permutation_count; ++b) {
        rng.shuffle(perm);
        for (std::int64_t i = 0; i < T; ++i) {
            double acc = 0.0;
            for (std::int64_t j = 0; j < T; ++j) {
                acc += ctx.gram(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
                prefix.at(i + 1, j + 1) = prefix.at(i, j + 1) + acc;
            }
        }
        auto best = scan_intervals(prefix, seeds, 0, T, rho);
        stats.push_back(best ? best->a : 0.0);
    }
    std::sort(stats.begin(), stats.end());
    const double level = 1.0 - 1.0 / static_cast<double>(T);
    auto idx = static_cast<std::int64_t>(std::ceil(level * static_cast<double>(cfg.permutation_count)));
    idx = std::clamp<std::int64_t>(idx, 1, cfg.permutation_count);
    return stats[static_cast<std::size_t>(idx - 1)];
}

double threshold_impl(const GramContext& ctx, const SeededIntervalSet& seeds, std::int64_t rho,
                      const DetectionConfig& cfg, ThresholdMethod method) {
    if (method == ThresholdMethod::theory) {
        return theory_threshold(ctx.size(), ctx.spec().dim, cfg);
    }
    return permutation_threshold(ctx, seeds, rho, cfg);
}

void segment_recurse(const PrefixSums& prefix, const SeededIntervalSet& seeds, std::int64_t s, std::int64_t e,
                     std::int64_t rho, double tau, std::int64_t min_segment, std::vector<std::int64_t>& out) {
    if (e - s < min_segment) return;
    auto best = scan_intervals(prefix, seeds, s, e, rho);
    if (!best || !(best->a > tau)) return;
    out.push_back(best->b);
    segment_recurse(prefix, seeds, s, best->b, rho, tau, min_segment, out);
    segment_recurse(prefix, seeds, best->b + 1, e, rho, tau, min_segment, out);
}

}  // namespace

double select_threshold(const ObservationMatrix& obs, const DetectionConfig& cfg, ThresholdMethod method) {
    cfg.validate();
    obs.validate();
    const std::int64_t T = obs.rows;
    if (T < 4) throw input_error("detection needs at least 4 observations");
    KernelSpec spec{cfg.kernel, cfg.resolve_bandwidth(T, obs.cols), obs.cols};
    GramOptions gopt;
    gopt.store_full = (method == ThresholdMethod::permutation);
    gopt.threads = cfg.threads;
    GramContext ctx(obs, spec, gopt);
    auto seeds = generate_seeded_intervals(T, cfg.c_frak);
    auto rho = resolve_rho(T, obs.cols, spec.bandwidth, cfg);
    return threshold_impl(ctx, seeds, rho.rho, cfg, method);
}

DetectResult detect(const ObservationMatrix& obs, const DetectionConfig& cfg) {
    cfg.validate();
    obs.validate();
    const std::int64_t T = obs.rows;
    if (T < 4) throw input_error("detection needs at least 4 observations");
    const int p = obs.cols;

    DetectResult res;
    res.change_points.T = T;
    res.bandwidth = cfg.resolve_bandwidth(T, p);

    auto rho = resolve_rho(T, p, res.bandwidth, cfg);
    res.rho = rho.rho;
    res.rho_fallback = rho.fallback;
    if (rho.fallback) {
        res.diagnostics.push_back("theoretical trim disabled the root interval; capped rho at " + std::to_string(rho.rho));
    }
    if (rho.exhausted) {
        res.diagnostics.push_back("trimming exhausts sample: 2*rho >= T, returning no estimates");
        res.tau = cfg.tau.value_or(0.0);
        return res;
    }

    KernelSpec spec{cfg.kernel, res.bandwidth, p};
    const bool needs_perm = !cfg.tau && cfg.threshold_method == ThresholdMethod::permutation;
    GramOptions gopt;
    gopt.store_full = needs_perm;
    gopt.threads = cfg.threads;
    GramContext ctx(obs, spec, gopt);
    auto seeds = generate_seeded_intervals(T, cfg.c_frak);

    res.tau = cfg.tau ? *cfg.tau : threshold_impl(ctx, seeds, rho.rho, cfg, cfg.threshold_method);

    std::vector<std::int64_t> found;
    segment_recurse(ctx.prefix(), seeds, 0, T, rho.rho, res.tau, cfg.min_segment, found);
    std::sort(found.begin(), found.end());
    res.change_points.estimates = std::move(found);
    return res;
}

}  // namespace mnsbs
