// Kernel evaluations and exact L2 geometry of kernel bumps.
//
// For a kernel K with bandwidth h, K_h(x) = h^{-p} K(x / h) and the
// smoothed indicator of an observation a is the bump F_a = K_h(. - a).
// Everything downstream (CUSUM norms, jump sizes, projections) reduces to
// L2 inner products <F_a, F_b>, which have closed forms for the supported
// families:
//
//   gaussian                <F_a, F_b> = (2 pi (h_a^2 + h_b^2))^{-p/2}
//                                        exp(-|a-b|^2 / (2 (h_a^2 + h_b^2)))
//   uniform_product         per-coordinate overlap of two boxes
//   epanechnikov_product    per-coordinate integral of a quartic polynomial
//
// cubature_l2_norm is an independent numeric check of the same geometry:
// an adaptive tensor Gauss-Legendre scheme over the mixture
// f = sum_i w_i K_h(. - c_i), returning an estimate of ||f||_2. It shares
// no code path with the closed forms above and serves as the accuracy
// oracle in the test suite.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mnsbs/common.hpp"

namespace mnsbs {

enum class KernelFamily { gaussian, uniform_product, epanechnikov_product };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& name);

struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double bandwidth = 1.0;
    int dim = 1;

    void validate() const;
};

// K_h(x), the scaled kernel density at offset x (length dim).
double kernel_value(const KernelSpec& spec, std::span<const double> x);

// <K_h(. - a), K_h(. - b)> over R^p, both bumps at spec.bandwidth.
double pairwise_l2_inner(const KernelSpec& spec, std::span<const double> a, std::span<const double> b);

// Cross-bandwidth variant: <K_{ha}(. - a), K_{hb}(. - b)>.
double pairwise_l2_inner(KernelFamily family, int dim, double ha, std::span<const double> a, double hb,
                         std::span<const double> b);

struct CubatureOptions {
    double tol = 1e-6;                 // relative tolerance on the squared norm
    std::int64_t max_evals = 100000;   // integrand evaluation budget
};

struct CubatureResult {
    double value = 0.0;      // estimate of ||sum_i w_i K_h(. - c_i)||_2
    double rel_error = 0.0;  // estimated relative error of `value`
    std::int64_t evals = 0;
    bool converged = false;  // false when the budget ran out first
};

CubatureResult cubature_l2_norm(const KernelSpec& spec, const std::vector<std::vector<double>>& centers,
                                const std::vector<double>& weights, CubatureOptions options = {});

}  // namespace mnsbs
