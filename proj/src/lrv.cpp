#include "mnsbs/lrv.hpp"

#include <algorithm>
#include <cmath>

#include "mnsbs/gram.hpp"

namespace mnsbs {

int default_block_count(const std::vector<RefineWindow>& windows) {
    if (windows.empty()) throw input_error("block-count rule needs at least one window");
    std::int64_t max_len = 0;
    for (const auto& w : windows) max_len = std::max(max_len, w.e - w.s);
    // The nudge keeps exact powers (32^{3/5} = 8) from flooring down on
    // inexact pow results.
    const double raw = std::pow(static_cast<double>(max_len), 0.6) + 1e-9;
    return std::max(2, static_cast<int>(std::floor(raw)));
}

double block_variance(std::span<const double> y, int R) {
    if (R < 2) throw config_error("block count R must be at least 2");
    const std::int64_t n = static_cast<std::int64_t>(y.size());
    const std::int64_t S = n / R;
    if (S < 1) throw input_error("series shorter than the block count");
    double acc = 0.0;
    for (int r = 0; r < R; ++r) {
        double block = 0.0;
        for (std::int64_t i = static_cast<std::int64_t>(r) * S; i < static_cast<std::int64_t>(r + 1) * S; ++i) {
            block += y[static_cast<std::size_t>(i)];
        }
        acc += block * block / static_cast<double>(S);
    }
    return acc / static_cast<double>(R);
}

LrvResult estimate_lrv(const ObservationMatrix& obs, const std::vector<RefinedEstimate>& refined,
                       const LrvOptions& opts) {
    obs.validate();
    if (!(opts.r > 0.0)) throw config_error("smoothness r must be positive");
    LrvResult out;
    if (refined.empty()) return out;

    int R = opts.R;
    if (R == 0) {
        std::vector<RefineWindow> windows;
        windows.reserve(refined.size());
        for (const auto& rec : refined) windows.push_back({rec.s, rec.e});
        R = default_block_count(windows);
    }
    if (R < 2) throw config_error("block count R must be at least 2");

    const int p = obs.cols;
    for (const auto& rec : refined) {
        if (rec.degenerate) {
            LrvEstimate est;
            est.k = rec.k;
            est.R = R;
            est.degenerate = true;
            out.estimates.push_back(std::move(est));
            out.diagnostics.push_back("k=" + std::to_string(rec.k) + ": zero jump size, variance pinned to 0");
            continue;
        }
        const std::int64_t len = rec.e - rec.s;  // number of Y values, t = s .. e-1
        const std::int64_t S = len / R;
        if (S < 2) {
            out.diagnostics.push_back("k=" + std::to_string(rec.k) + ": window too short for " + std::to_string(R) +
                                      " blocks, skipped");
            continue;
        }
        if (rec.s < 1 || rec.e > obs.rows || rec.eta_tilde <= rec.s || rec.eta_tilde >= rec.e) {
            throw input_error("refined record inconsistent with observations");
        }

        // Gram over observations s .. e (1-based), so every needed bump,
        // including F_s just left of the window, is one local index away:
        // local u = t - s + 1 for t in [s, e].
        ObservationMatrix slice;
        slice.rows = len + 1;
        slice.cols = p;
        slice.data.assign(obs.data.begin() + static_cast<std::ptrdiff_t>(rec.s - 1) * p,
                          obs.data.begin() + static_cast<std::ptrdiff_t>(rec.e) * p);
        KernelSpec spec{opts.kernel, rec.h1, p};
        GramContext g(slice, spec, {});

        // Refined segments in local indices: left bumps (1, a], right
        // (a, m] with a = eta_tilde - s + 1 and m = len + 1. Index 1 is
        // the pre-window bump F_s itself.
        const std::int64_t m = len + 1;
        const std::int64_t a = rec.eta_tilde - rec.s + 1;
        const double nl = static_cast<double>(a - 1);
        const double nr = static_cast<double>(m - a);

        // v_u = <F_u, d_hat> with d_hat = mean of left bumps - mean of
        // right bumps; segment sums of v give the mean projections.
        std::vector<double> v(static_cast<std::size_t>(m + 1), 0.0);
        double vl_sum = 0.0, vr_sum = 0.0;
        for (std::int64_t u = 1; u <= m; ++u) {
            const double uv = g.row_block_sum(u, 1, a) / nl - g.row_block_sum(u, a, m) / nr;
            v[static_cast<std::size_t>(u)] = uv;
            if (u >= 2 && u <= a) vl_sum += uv;
            if (u > a) vr_sum += uv;
        }

        const double scale = std::pow(rec.kappa_hat, static_cast<double>(p) / (2.0 * opts.r) - 1.0);
        std::vector<double> y(static_cast<std::size_t>(len), 0.0);
        for (std::int64_t t = rec.s; t < rec.e; ++t) {
            const std::int64_t u = t - rec.s + 1;
            const bool left = (t <= rec.eta_tilde);
            // Leave-one-out segment mean of the segment on t's side; t can
            // sit outside the segment (t = s, or t = e excluded anyway),
            // in which case the plain mean applies.
            double proj_mean;
            if (left) {
                const bool member = (t > rec.s && t <= rec.eta_tilde);
                if (member && nl > 1.0) {
                    proj_mean = (vl_sum - v[static_cast<std::size_t>(u)]) / (nl - 1.0);
                } else if (member) {
                    proj_mean = v[static_cast<std::size_t>(u)];  // single-member segment
                } else {
                    proj_mean = vl_sum / nl;
                }
            } else {
                const bool member = (t > rec.eta_tilde && t <= rec.e);
                if (member && nr > 1.0) {
                    proj_mean = (vr_sum - v[static_cast<std::size_t>(u)]) / (nr - 1.0);
                } else if (member) {
                    proj_mean = v[static_cast<std::size_t>(u)];
                } else {
                    proj_mean = vr_sum / nr;
                }
            }
            y[static_cast<std::size_t>(t - rec.s)] = scale * (v[static_cast<std::size_t>(u)] - proj_mean);
        }

        // Center by side before blocking; the plug-in means leave a small
        // systematic offset that would otherwise enter every block sum.
        double left_mean = 0.0, right_mean = 0.0;
        std::int64_t left_n = 0, right_n = 0;
        for (std::int64_t t = rec.s; t < rec.e; ++t) {
            if (t <= rec.eta_tilde) {
                left_mean += y[static_cast<std::size_t>(t - rec.s)];
                ++left_n;
            } else {
                right_mean += y[static_cast<std::size_t>(t - rec.s)];
                ++right_n;
            }
        }
        if (left_n > 0) left_mean /= static_cast<double>(left_n);
        if (right_n > 0) right_mean /= static_cast<double>(right_n);
        for (std::int64_t t = rec.s; t < rec.e; ++t) {
            y[static_cast<std::size_t>(t - rec.s)] -= (t <= rec.eta_tilde) ? left_mean : right_mean;
        }

        LrvEstimate est;
        est.k = rec.k;
        est.R = R;
        est.S = S;
        est.sigma2_inf = block_variance(y, R);
        if (opts.keep_series) est.y_series = y;
        out.estimates.push_back(std::move(est));
    }
    return out;
}

}  // namespace mnsbs
