#include "mnsbs/refine.hpp"

#include <algorithm>
#include <cmath>

#include "mnsbs/gram.hpp"

namespace mnsbs {

namespace {

void validate_prelim(const ObservationMatrix& obs, const ChangePointSet& prelim) {
    obs.validate();
    if (prelim.T != obs.rows) {
        throw input_error("change-point set and observations disagree on T");
    }
    std::int64_t prev = 0;
    for (auto est : prelim.estimates) {
        if (est <= prev || est >= prelim.T) {
            throw input_error("estimates must be strictly increasing inside (0, T)");
        }
        prev = est;
    }
}

}  // namespace

std::vector<RefineWindow> refinement_intervals(const ChangePointSet& prelim) {
    const auto aug = prelim.augmented();  // {1, estimates..., T+1}
    std::vector<RefineWindow> out;
    const std::size_t K = prelim.estimates.size();
    out.reserve(K);
    for (std::size_t k = 1; k <= K; ++k) {
        const double eta_prev = static_cast<double>(aug[k - 1]);
        const double eta = static_cast<double>(aug[k]);
        const double eta_next = static_cast<double>(aug[k + 1]);
        RefineWindow w;
        w.s = static_cast<std::int64_t>(std::floor(0.9 * eta_prev + 0.1 * eta));
        w.e = static_cast<std::int64_t>(std::ceil(0.9 * eta_next + 0.1 * eta));
        out.push_back(w);
    }
    return out;
}

double estimate_jump(const ObservationMatrix& obs, const ChangePointSet& prelim, double h_tilde, std::int64_t k,
                     KernelFamily family) {
    validate_prelim(obs, prelim);
    if (!(h_tilde > 0.0)) throw config_error("h_tilde must be positive");
    const auto bounds = prelim.segment_boundaries();  // {0, estimates..., T}
    if (k < 1 || k > prelim.k_hat()) throw input_error("change-point index out of range");
    const std::int64_t s = bounds[static_cast<std::size_t>(k - 1)];
    const std::int64_t t = bounds[static_cast<std::size_t>(k)];
    const std::int64_t e = bounds[static_cast<std::size_t>(k + 1)];
    if (t - s < 1 || e - t < 1) throw input_error("degenerate segment at change-point index");

    const int p = obs.cols;
    const double nl = static_cast<double>(t - s);
    const double nr = static_cast<double>(e - t);
    const double n = static_cast<double>(e - s);

    // Block sums of pairwise bump inner products over left x left,
    // left x right, right x right; rows are 0-based [s, t) and [t, e).
    auto inner = [&](std::int64_t i, std::int64_t j) {
        return pairwise_l2_inner(family, p, h_tilde, obs.row(i), h_tilde, obs.row(j));
    };
    double s11 = 0.0, s12 = 0.0, s22 = 0.0;
    for (std::int64_t i = s; i < t; ++i) {
        s11 += inner(i, i);
        for (std::int64_t j = i + 1; j < t; ++j) s11 += 2.0 * inner(i, j);
        for (std::int64_t j = t; j < e; ++j) s12 += inner(i, j);
    }
    for (std::int64_t i = t; i < e; ++i) {
        s22 += inner(i, i);
        for (std::int64_t j = i + 1; j < e; ++j) s22 += 2.0 * inner(i, j);
    }

    const double a = std::sqrt(nr / (n * nl));
    const double b = std::sqrt(nl / (n * nr));
    const double num_sq = a * a * s11 - 2.0 * a * b * s12 + b * b * s22;
    const double denom = std::sqrt(nl * nr / n);
    return std::sqrt(std::max(num_sq, 0.0)) / denom;
}

namespace {

// Argmin of the split objective over candidates eta in (s, e), evaluated
// on a Gram context built over observations s+1 .. e at bandwidth h1.
// Local index u in [1, m] maps to time s + u.
std::int64_t refine_argmin(const GramContext& g, std::int64_t m, std::int64_t split_local, bool candidate_means) {
    std::vector<double> q(static_cast<std::size_t>(m), 0.0);  // q[u-1] = objective at eta = s + u, u in 1..m-1
    if (!candidate_means) {
        // Means pinned to the preliminary split a = split_local:
        // left mean over (0, a], right mean over (a, m]. Per-index squared
        // distances to each mean accumulate into prefix and suffix sums.
        const std::int64_t a = split_local;
        const double na = static_cast<double>(a);
        const double nb = static_cast<double>(m - a);
        const double mLL = g.block_sum(0, a, 0, a) / (na * na);
        const double mRR = g.block_sum(a, m, a, m) / (nb * nb);
        std::vector<double> left(static_cast<std::size_t>(m + 1), 0.0), right(static_cast<std::size_t>(m + 2), 0.0);
        for (std::int64_t u = 1; u <= m; ++u) {
            const double dl = g.diag(u) - 2.0 / na * g.row_block_sum(u, 0, a) + mLL;
            left[static_cast<std::size_t>(u)] = left[static_cast<std::size_t>(u - 1)] + dl;
        }
        for (std::int64_t u = m; u >= 1; --u) {
            const double dr = g.diag(u) - 2.0 / nb * g.row_block_sum(u, a, m) + mRR;
            right[static_cast<std::size_t>(u)] = right[static_cast<std::size_t>(u + 1)] + dr;
        }
        for (std::int64_t u = 1; u < m; ++u) {
            q[static_cast<std::size_t>(u - 1)] = left[static_cast<std::size_t>(u)] + right[static_cast<std::size_t>(u + 1)];
        }
    } else {
        // Means follow the candidate: sum of squared distances to the
        // segment mean collapses to diag sum minus block sum / length.
        double diag_total = 0.0;
        for (std::int64_t u = 1; u <= m; ++u) diag_total += g.diag(u);
        for (std::int64_t u = 1; u < m; ++u) {
            const double nl = static_cast<double>(u);
            const double nr = static_cast<double>(m - u);
            q[static_cast<std::size_t>(u - 1)] =
                diag_total - g.block_sum(0, u, 0, u) / nl - g.block_sum(u, m, u, m) / nr;
        }
    }
    // Ascending scan; a candidate must beat the incumbent by a scaled
    // tolerance, so a flat objective resolves to the first candidate.
    std::int64_t best_u = 1;
    double best_q = q[0];
    for (std::int64_t u = 2; u < m; ++u) {
        const double v = q[static_cast<std::size_t>(u - 1)];
        const double tol = 1e-10 * (1.0 + std::fabs(best_q));
        if (v < best_q - tol) {
            best_q = v;
            best_u = u;
        }
    }
    return best_u;
}

}  // namespace

std::vector<RefinedEstimate> refine(const ObservationMatrix& obs, const ChangePointSet& prelim,
                                    const DetectionConfig& cfg, const RefineOptions& opts) {
    cfg.validate();
    validate_prelim(obs, prelim);
    if (!(opts.c_kappa > 0.0)) throw config_error("c_kappa must be positive");
    if (!(opts.h_tilde > 0.0)) throw config_error("h_tilde must be positive");

    const auto windows = refinement_intervals(prelim);
    const std::int64_t K = prelim.k_hat();
    std::vector<RefinedEstimate> out(static_cast<std::size_t>(K));

    // kappa_hat relative floor: the natural scale of the statistic is the
    // L2 norm of a single bump, sqrt(<F, F>) at h_tilde.
    std::vector<double> origin(static_cast<std::size_t>(obs.cols), 0.0);
    const double bump_scale =
        std::sqrt(pairwise_l2_inner(cfg.kernel, obs.cols, opts.h_tilde, origin, opts.h_tilde, origin));

    for (std::int64_t k = 1; k <= K; ++k) {
        RefinedEstimate& r = out[static_cast<std::size_t>(k - 1)];
        r.k = k;
        r.eta_hat = prelim.estimates[static_cast<std::size_t>(k - 1)];
        r.s = windows[static_cast<std::size_t>(k - 1)].s;
        r.e = windows[static_cast<std::size_t>(k - 1)].e;
        r.h_tilde = opts.h_tilde;
        r.kappa_hat = estimate_jump(obs, prelim, opts.h_tilde, k, cfg.kernel);

        if (r.kappa_hat <= 1e-12 * bump_scale) {
            r.degenerate = true;
            r.kappa_hat = 0.0;
            r.eta_tilde = r.eta_hat;
            continue;
        }
        r.h1 = opts.c_kappa * std::pow(r.kappa_hat, 1.0 / cfg.r);

        const std::int64_t m = r.e - r.s;
        if (m < 2) {
            // No interior candidate; keep the preliminary estimate.
            r.eta_tilde = r.eta_hat;
            continue;
        }
        // Slice observations s+1 .. e (0-based rows s .. e-1).
        ObservationMatrix win;
        win.rows = m;
        win.cols = obs.cols;
        win.data.assign(obs.data.begin() + static_cast<std::ptrdiff_t>(r.s) * obs.cols,
                        obs.data.begin() + static_cast<std::ptrdiff_t>(r.e) * obs.cols);
        KernelSpec spec{cfg.kernel, r.h1, obs.cols};
        GramOptions gopt;
        gopt.threads = opts.threads;
        GramContext g(win, spec, gopt);
        const std::int64_t split_local = r.eta_hat - r.s;  // in [1, m-1] since s < eta_hat < e
        r.eta_tilde = r.s + refine_argmin(g, m, split_local, opts.candidate_means);
    }
    return out;
}

}  // namespace mnsbs
