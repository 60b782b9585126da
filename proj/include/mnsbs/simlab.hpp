// Synthetic scenario generators and batch evaluation.
//
// All scenarios share an AR(1) backbone X_t = ar_coef * X_{t-1} + eps_t
// run past a burn-in, with a scenario-specific signal Z_t added on the
// middle third of the sample (or the second half for the inference
// scenario). Metrics follow the usual conventions: proportion of runs
// with a wrong change-point count, scaled Hausdorff distance between
// endpoint-augmented sets, and confidence-interval coverage among the
// runs that found the right count.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mnsbs/common.hpp"
#include "mnsbs/detect.hpp"
#include "mnsbs/inference.hpp"
#include "mnsbs/lrv.hpp"
#include "mnsbs/refine.hpp"

namespace mnsbs {

enum class ScenarioId { S1, S2, S3, S4, S5, INFER };

std::string to_string(ScenarioId id);
ScenarioId scenario_from_string(const std::string& name);

struct ScenarioSpec {
    ScenarioId id = ScenarioId::S1;
    std::int64_t T = 150;
    int p = 3;
    std::uint64_t seed = 1;
    double ar_coef = 0.3;
    int burn_in = 500;

    void validate() const;  // T >= 30, p >= 1
};

struct LabeledSeries {
    ObservationMatrix obs;
    std::vector<std::int64_t> true_cps;
    ScenarioSpec scenario;
};

// Deterministic given a ScenarioSpec (seed included). Signals:
//   S1: constant mean shift, zero on the first ceil(p/2) coordinates, 2 on
//       the rest; gaussian innovations.
//   S2: AR(1) signal with Unif(-1,1) innovations on top of a backbone with
//       Unif(-sqrt 3, sqrt 3) innovations (variance change).
//   S3: as S2 with standardized Pareto(3,1) signal innovations and
//       standardized LogNormal(0,1) backbone innovations.
//   S4: random-sign +-1.5 * 1_p signal, fair coin per time point; gaussian
//       backbone.
//   S5: AR(1) signal with Unif(-sqrt 3, sqrt 3) innovations plus a +0.5
//       drift per step, heavy-tailed Pareto backbone.
//   INFER: mean shift 1_p on the second half, gaussian backbone.
LabeledSeries generate_scenario(const ScenarioSpec& spec);

// Scaled Hausdorff distance between two endpoint-augmented change-point
// sets (both nonempty, already containing 1 and T+1).
double hausdorff_augmented(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b, std::int64_t T);

// Convenience: augments the estimate set and the truth with {1, T+1}.
double hausdorff(const ChangePointSet& est, const std::vector<std::int64_t>& truth, std::int64_t T);

struct StudyConfig {
    ScenarioSpec scenario;  // scenario.seed is the master seed
    int reps = 50;
    DetectionConfig detection;
    RefineOptions refine;
    int lrv_blocks = 0;  // 0 = length-based default rule
    std::vector<double> alphas = {0.05};
    SimulationOptions quantile_sim;
    int threads = 0;
    // Test hook: replaces generate_scenario; receives the rep index and
    // its derived seed.
    std::function<LabeledSeries(int rep, std::uint64_t rep_seed)> generator_override;
};

struct AlphaStats {
    double alpha = 0.0;
    double coverage = 0.0;  // among reps with the correct count
    double width_mean = 0.0;
    double width_sd = 0.0;
    std::int64_t n_intervals = 0;  // (rep, k) pairs entering the averages
};

struct EvalReport {
    std::string scenario;
    std::int64_t T = 0;
    int p = 0;
    std::uint64_t seed = 0;
    int reps = 0;
    int failures = 0;
    std::int64_t skipped_cis = 0;  // windows too short for the block rule
    double prop_k_wrong = 0.0;
    double dh_mean = 0.0;
    double dh_sd = 0.0;
    std::vector<AlphaStats> per_alpha;

    std::string to_json() const;
    std::string to_table_text() const;
};

EvalReport run_study(const StudyConfig& cfg);

}  // namespace mnsbs
