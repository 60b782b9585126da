// Change-point detection by seeded binary segmentation over kernel CUSUM
// statistics.
//
// The scan works on the Gram prefix table: within the active stretch
// (s, e] every seeded interval that fits and is longer than twice the trim
// rho is scanned for its best CUSUM split; the interval with the largest
// statistic wins, and if that statistic clears the threshold tau its split
// b is recorded and the two halves (s, b], (b+1, e] are segmented
// recursively. Estimates are reported as the last index of the segment
// ending at the change.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mnsbs/common.hpp"
#include "mnsbs/gram.hpp"
#include "mnsbs/kernels.hpp"
#include "mnsbs/seeded.hpp"

namespace mnsbs {

enum class ThresholdMethod {
    // tau = c_tau * T^{p/(4r+2p)} * sqrt(log T). Scale-free in the data,
    // so useful only when the statistic has been normalized to match; kept
    // for completeness and experiments.
    theory,
    // Empirical null: B random time permutations of the observations, full
    // seeded scan on each, tau = the (1 - 1/T) quantile of the resulting
    // max statistics. Default.
    permutation,
};

std::string to_string(ThresholdMethod m);
ThresholdMethod threshold_method_from_string(const std::string& name);

struct DetectionConfig {
    double r = 2.0;                          // smoothness the bandwidth rule targets
    KernelFamily kernel = KernelFamily::gaussian;
    std::optional<double> bandwidth;         // default 2 * T^{-1/(2r+p)}
    std::optional<double> tau;               // fixed threshold; unset = calibrate
    ThresholdMethod threshold_method = ThresholdMethod::permutation;
    double c_tau = 1.0;                      // theory-threshold constant
    int permutation_count = 100;             // B, at least 10
    double c_frak = 1.5;                     // seeded depth constant
    std::optional<std::int64_t> rho_override;
    std::int64_t min_segment = 2;            // stretches shorter than this are not scanned
    int threads = 0;
    std::uint64_t seed = 20240915;           // drives the permutation null only

    void validate() const;
    double resolve_bandwidth(std::int64_t T, int p) const;
};

struct ChangePointSet {
    std::int64_t T = 0;
    std::vector<std::int64_t> estimates;  // strictly increasing, within [1, T-1]

    std::int64_t k_hat() const { return static_cast<std::int64_t>(estimates.size()); }

    // For distance computations both the start and the end of the sample
    // count as (degenerate) change points: {1, estimates..., T+1}.
    std::vector<std::int64_t> augmented() const;

    // Segment view: boundaries {0, estimates..., T}, so segment k is
    // (boundary[k], boundary[k+1]].
    std::vector<std::int64_t> segment_boundaries() const;
};

struct DetectResult {
    ChangePointSet change_points;
    double bandwidth = 0.0;
    double tau = 0.0;
    std::int64_t rho = 0;
    bool rho_fallback = false;  // theoretical trim was unusable, capped at T/10
    std::vector<std::string> diagnostics;
};

// One scan pass: the largest interval statistic over all seeded intervals
// inside (s, e] that are longer than 2 rho, with its split point. Empty
// when nothing qualifies. Ties keep the earliest interval in generation
// order.
struct ScanBest {
    double a = -1.0;
    std::int64_t b = -1;
};
std::optional<ScanBest> scan_intervals(const PrefixSums& prefix, const SeededIntervalSet& seeds, std::int64_t s,
                                       std::int64_t e, std::int64_t rho);

double select_threshold(const ObservationMatrix& obs, const DetectionConfig& cfg, ThresholdMethod method);

DetectResult detect(const ObservationMatrix& obs, const DetectionConfig& cfg);

}  // namespace mnsbs
