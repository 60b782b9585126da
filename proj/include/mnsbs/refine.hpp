// Local refinement of preliminary change-point estimates.
//
// Around each preliminary estimate a window is cut that reaches 90% of the
// way toward both neighbors. The jump size kappa_hat at the estimate is
// measured at a small fixed bandwidth, an adapted bandwidth
// h1 = c_kappa * kappa_hat^{1/r} is derived from it, and the refined
// location is the split of the window minimizing the within-segment sum of
// squared L2 distances to the segment mean bumps.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mnsbs/common.hpp"
#include "mnsbs/detect.hpp"
#include "mnsbs/kernels.hpp"

namespace mnsbs {

struct RefineWindow {
    std::int64_t s = 0;  // window (s, e]; candidates are the interior s+1 .. e-1
    std::int64_t e = 0;
};

// Window k stretches from 9/10 of the way toward the previous estimate to
// 9/10 of the way toward the next one, with virtual neighbors 1 and T+1 at
// the sample ends; s is floored and e is ceiled so the window is never
// degenerate.
std::vector<RefineWindow> refinement_intervals(const ChangePointSet& prelim);

// Jump size at preliminary estimate k (1-based): the CUSUM-type statistic
// at the estimate over the two adjacent segments, normalized by
// sqrt(n_left * n_right / n) so it estimates the L2 distance between the
// neighboring densities smoothed at bandwidth h_tilde. Streams the kernel
// sums pairwise, so memory stays O(1) and no Gram matrix is formed.
double estimate_jump(const ObservationMatrix& obs, const ChangePointSet& prelim, double h_tilde, std::int64_t k,
                     KernelFamily family = KernelFamily::gaussian);

struct RefineOptions {
    double c_kappa = 2.0;   // h1 = c_kappa * kappa_hat^{1/r}
    double h_tilde = 0.05;  // bandwidth for the jump-size estimate
    // When set, the segment means in the refinement objective follow the
    // candidate split instead of staying fixed at the preliminary one.
    bool candidate_means = false;
    int threads = 0;
};

struct RefinedEstimate {
    std::int64_t k = 0;  // 1-based change-point index
    std::int64_t eta_hat = 0;
    std::int64_t eta_tilde = 0;
    double kappa_hat = 0.0;
    std::int64_t s = 0;  // window (s, e]
    std::int64_t e = 0;
    double h1 = 0.0;  // 0 when degenerate
    double h_tilde = 0.0;
    // kappa_hat vanished; h1 is undefined and eta_tilde was left at the
    // preliminary estimate.
    bool degenerate = false;
};

std::vector<RefinedEstimate> refine(const ObservationMatrix& obs, const ChangePointSet& prelim,
                                    const DetectionConfig& cfg, const RefineOptions& opts = {});

}  // namespace mnsbs
