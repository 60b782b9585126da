// Block-type long-run variance of the projection series around each
// refined change point.
//
// For window (s, e] the series Y_t, t = s .. e-1, projects the centered
// bump F_t onto the estimated density difference between the two refined
// segments, scaled by kappa_hat^{p/(2r)-1}. The long-run variance is the
// average over R contiguous blocks of length S = floor((e-s)/R) of the
// squared normalized block sums, which is consistent under mixing even
// though the Y_t are serially dependent.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mnsbs/common.hpp"
#include "mnsbs/kernels.hpp"
#include "mnsbs/refine.hpp"

namespace mnsbs {

// floor((max window length)^{3/5}), floored at 2.
int default_block_count(const std::vector<RefineWindow>& windows);

// Plain block estimator on a pre-centered series: S = floor(n / R),
// sigma2 = (1/R) sum_r (sum of block r / sqrt(S))^2. The first R*S entries
// are used. Exposed so the estimator can be validated on synthetic series
// with known long-run variance.
double block_variance(std::span<const double> y, int R);

struct LrvEstimate {
    std::int64_t k = 0;  // matches RefinedEstimate::k
    double sigma2_inf = 0.0;
    int R = 0;
    std::int64_t S = 0;
    bool degenerate = false;       // kappa_hat was 0; sigma2 pinned to 0
    std::vector<double> y_series;  // centered projections, diagnostic
};

struct LrvResult {
    std::vector<LrvEstimate> estimates;  // one per refined k that was not skipped
    std::vector<std::string> diagnostics;
};

struct LrvOptions {
    double r = 2.0;  // smoothness, matches the detection config
    KernelFamily kernel = KernelFamily::gaussian;
    int R = 0;  // block count; 0 = default rule from the windows
    bool keep_series = false;
};

LrvResult estimate_lrv(const ObservationMatrix& obs, const std::vector<RefinedEstimate>& refined,
                       const LrvOptions& opts);

}  // namespace mnsbs
