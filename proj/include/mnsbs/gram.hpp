// Gram matrix of kernel bumps with prefix-sum acceleration.
//
// For observations X_1..X_T and bumps F_t = K_h(. - X_t), the Gram matrix
// G[i][j] = <F_i, F_j> turns every CUSUM norm and segment-distance query
// into a handful of rectangle sums. Those rectangles are answered in O(1)
// from a 2-D prefix table, so a full segmentation scan costs O(T^2) once
// and O(1) per statistic afterwards.
//
// Index conventions, used across the whole library: observations are
// numbered 1..T and intervals are half-open (s, e] with boundaries in
// [0, T]. An interval (s, e] contains observations s+1..e.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mnsbs/common.hpp"
#include "mnsbs/kernels.hpp"

namespace mnsbs {

// 2-D inclusion-exclusion table: bp(i, j) = sum of G over rows < i, cols < j.
class PrefixSums {
  public:
    PrefixSums() = default;
    explicit PrefixSums(std::int64_t T) : T_(T), bp_(static_cast<std::size_t>((T + 1)) * static_cast<std::size_t>(T + 1), 0.0) {}

    std::int64_t size() const { return T_; }

    double& at(std::int64_t i, std::int64_t j) { return bp_[static_cast<std::size_t>(i) * (T_ + 1) + j]; }
    double at(std::int64_t i, std::int64_t j) const { return bp_[static_cast<std::size_t>(i) * (T_ + 1) + j]; }

    // Sum of G over (s1, e1] x (s2, e2].
    double block_sum(std::int64_t s1, std::int64_t e1, std::int64_t s2, std::int64_t e2) const {
        return at(e1, e2) - at(s1, e2) - at(e1, s2) + at(s1, s2);
    }

  private:
    std::int64_t T_ = 0;
    std::vector<double> bp_;
};

struct GramOptions {
    // With store_full the T x T matrix and per-row prefixes are kept, giving
    // O(1) row-block queries. Without it only the 2-D prefix table and the
    // diagonal survive the build; row-block queries are recomputed from the
    // observations on demand. Memory drops from ~3 T^2 to ~T^2 doubles.
    bool store_full = true;
    int threads = 0;
};

class GramContext {
  public:
    GramContext(const ObservationMatrix& obs, const KernelSpec& spec, GramOptions options = {});

    std::int64_t size() const { return T_; }
    const KernelSpec& spec() const { return spec_; }
    const ObservationMatrix& observations() const { return obs_; }
    bool full() const { return full_; }
    const PrefixSums& prefix() const { return prefix_; }

    // G entry for observations i, j in 1..T.
    double gram(std::int64_t i, std::int64_t j) const;

    // <F_t, F_t>.
    double diag(std::int64_t t) const { return diag_[static_cast<std::size_t>(t - 1)]; }

    // Sum of G over (s1, e1] x (s2, e2], boundaries in [0, T].
    double block_sum(std::int64_t s1, std::int64_t e1, std::int64_t s2, std::int64_t e2) const {
        return prefix_.block_sum(s1, e1, s2, e2);
    }

    // Sum over j in (a, b] of G[t][j].
    double row_block_sum(std::int64_t t, std::int64_t a, std::int64_t b) const;

  private:
    KernelSpec spec_;
    ObservationMatrix obs_;
    std::int64_t T_ = 0;
    bool full_ = true;
    std::vector<double> gram_;        // T x T, only when full_
    std::vector<double> row_prefix_;  // T x (T+1), only when full_
    PrefixSums prefix_;
    std::vector<double> diag_;
};

GramContext build_gram(const ObservationMatrix& obs, const KernelSpec& spec, GramOptions options = {});

// ||F_cusum(s, t, e)||_2 where F_cusum is the weighted difference of bump
// sums over (s, t] and (t, e]:
//   sqrt((e-t)/((e-s)(t-s))) * sum_{(s,t]} F_i
//     - sqrt((t-s)/((e-s)(e-t))) * sum_{(t,e]} F_i
// Expanding the square needs three rectangle sums; rounding can leave a
// tiny negative before the square root, which is clipped.
double cusum_norm(const PrefixSums& prefix, std::int64_t s, std::int64_t t, std::int64_t e);
double cusum_norm(const GramContext& ctx, std::int64_t s, std::int64_t t, std::int64_t e);

struct CusumArgmax {
    std::int64_t b = -1;  // maximizing split
    double a = -1.0;      // maximal norm
};

// Maximizes cusum_norm over t in [s+rho, e-rho]; ties resolve to the
// smallest t. Empty when the interval is too short (e - s <= 2 rho), which
// callers treat as "skip this interval".
std::optional<CusumArgmax> cusum_argmax(const PrefixSums& prefix, std::int64_t s, std::int64_t e, std::int64_t rho);
std::optional<CusumArgmax> cusum_argmax(const GramContext& ctx, std::int64_t s, std::int64_t e, std::int64_t rho);

// ||F_t - mean of F over (a, b]||^2.
double segment_mean_sq_dist(const GramContext& ctx, std::int64_t t, std::int64_t a, std::int64_t b);

}  // namespace mnsbs
