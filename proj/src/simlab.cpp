#include "mnsbs/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "mnsbs/rng.hpp"

namespace mnsbs {

std::string to_string(ScenarioId id) {
    switch (id) {
        case ScenarioId::S1: return "S1";
        case ScenarioId::S2: return "S2";
        case ScenarioId::S3: return "S3";
        case ScenarioId::S4: return "S4";
        case ScenarioId::S5: return "S5";
        case ScenarioId::INFER: return "INFER";
    }
    throw config_error("unknown scenario id");
}

ScenarioId scenario_from_string(const std::string& name) {
    if (name == "S1") return ScenarioId::S1;
    if (name == "S2") return ScenarioId::S2;
    if (name == "S3") return ScenarioId::S3;
    if (name == "S4") return ScenarioId::S4;
    if (name == "S5") return ScenarioId::S5;
    if (name == "INFER") return ScenarioId::INFER;
    throw config_error("unknown scenario: " + name);
}

void ScenarioSpec::validate() const {
    if (T < 30) throw config_error("scenario needs T >= 30");
    if (p < 1) throw config_error("scenario needs p >= 1");
    if (burn_in < 0) throw config_error("burn-in must be nonnegative");
}

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

enum class SignalKind { constant_mu, ar_signal, coin_sign, none_mean_shift };

}  // namespace

LabeledSeries generate_scenario(const ScenarioSpec& spec) {
    spec.validate();
    const std::int64_t T = spec.T;
    const int p = spec.p;

    LabeledSeries out;
    out.scenario = spec;
    out.obs.rows = T;
    out.obs.cols = p;
    out.obs.data.assign(static_cast<std::size_t>(T) * p, 0.0);

    std::int64_t sig_lo = 0, sig_hi = 0;  // signal on t in (sig_lo, sig_hi]
    if (spec.id == ScenarioId::INFER) {
        sig_lo = T / 2;
        sig_hi = T;
        out.true_cps = {T / 2};
    } else {
        sig_lo = T / 3;
        sig_hi = 2 * T / 3;
        out.true_cps = {T / 3, 2 * T / 3};
    }

    const bool z_is_ar = (spec.id == ScenarioId::S2 || spec.id == ScenarioId::S3 || spec.id == ScenarioId::S5);
    const double z_drift = (spec.id == ScenarioId::S5) ? 0.5 : 0.0;

    Rng rng(spec.seed);
    auto draw_x_innov = [&]() -> double {
        switch (spec.id) {
            case ScenarioId::S1:
            case ScenarioId::S4:
            case ScenarioId::INFER: return rng.normal();
            case ScenarioId::S2: return rng.uniform(-kSqrt3, kSqrt3);
            case ScenarioId::S3: return rng.std_lognormal01();
            case ScenarioId::S5: return rng.std_pareto31();
        }
        throw config_error("unknown scenario id");
    };
    auto draw_z_innov = [&]() -> double {
        switch (spec.id) {
            case ScenarioId::S2: return rng.uniform(-1.0, 1.0);
            case ScenarioId::S3: return rng.std_pareto31();
            case ScenarioId::S5: return rng.uniform(-kSqrt3, kSqrt3);
            default: throw config_error("scenario has no AR signal");
        }
    };

    std::vector<double> x(static_cast<std::size_t>(p), 0.0);
    std::vector<double> z(static_cast<std::size_t>(p), 0.0);

    // Draw order per time step is fixed: signal-stream values first (AR
    // innovations or the coin), then the backbone innovations, coordinates
    // ascending. Burn-in advances only the recursions.
    for (int b = 0; b < spec.burn_in; ++b) {
        if (z_is_ar) {
            for (int j = 0; j < p; ++j) z[static_cast<std::size_t>(j)] = spec.ar_coef * z[static_cast<std::size_t>(j)] + draw_z_innov() + z_drift;
        }
        for (int j = 0; j < p; ++j) x[static_cast<std::size_t>(j)] = spec.ar_coef * x[static_cast<std::size_t>(j)] + draw_x_innov();
    }

    for (std::int64_t t = 1; t <= T; ++t) {
        double coin_sign = 0.0;
        if (z_is_ar) {
            for (int j = 0; j < p; ++j) z[static_cast<std::size_t>(j)] = spec.ar_coef * z[static_cast<std::size_t>(j)] + draw_z_innov() + z_drift;
        } else if (spec.id == ScenarioId::S4) {
            coin_sign = rng.bernoulli_half() ? 1.5 : -1.5;
        }
        for (int j = 0; j < p; ++j) x[static_cast<std::size_t>(j)] = spec.ar_coef * x[static_cast<std::size_t>(j)] + draw_x_innov();

        const bool in_signal = (t > sig_lo && t <= sig_hi);
        double* row = &out.obs.data[static_cast<std::size_t>(t - 1) * p];
        for (int j = 0; j < p; ++j) {
            double y = x[static_cast<std::size_t>(j)];
            if (in_signal) {
                switch (spec.id) {
                    case ScenarioId::S1: y += (j + 1 > (p + 1) / 2) ? 2.0 : 0.0; break;
                    case ScenarioId::S2:
                    case ScenarioId::S3:
                    case ScenarioId::S5: y += z[static_cast<std::size_t>(j)]; break;
                    case ScenarioId::S4: y += coin_sign; break;
                    case ScenarioId::INFER: y += 1.0; break;
                }
            }
            row[j] = y;
        }
    }
    return out;
}

double hausdorff_augmented(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b, std::int64_t T) {
    if (a.empty() || b.empty()) throw input_error("hausdorff needs nonempty augmented sets");
    auto directed = [](const std::vector<std::int64_t>& from, const std::vector<std::int64_t>& to) {
        std::int64_t worst = 0;
        for (auto x : from) {
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (auto y : to) best = std::min<std::int64_t>(best, std::abs(x - y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    const std::int64_t d = std::max(directed(a, b), directed(b, a));
    return static_cast<double>(d) / static_cast<double>(T);
}

double hausdorff(const ChangePointSet& est, const std::vector<std::int64_t>& truth, std::int64_t T) {
    std::vector<std::int64_t> truth_aug;
    truth_aug.reserve(truth.size() + 2);
    truth_aug.push_back(1);
    truth_aug.insert(truth_aug.end(), truth.begin(), truth.end());
    truth_aug.push_back(T + 1);
    return hausdorff_augmented(est.augmented(), truth_aug, T);
}

namespace {

double sample_sd(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

struct RepOutcome {
    bool failed = false;
    bool k_correct = false;
    double dh = 0.0;
    // Per alpha: covered flags and widths for each refined k, only filled
    // when k_correct.
    std::vector<std::vector<int>> covered;
    std::vector<std::vector<double>> widths;
    std::int64_t skipped = 0;
};

}  // namespace

EvalReport run_study(const StudyConfig& cfg) {
    cfg.scenario.validate();
    cfg.detection.validate();
    if (cfg.reps < 1) throw config_error("study needs at least one rep");
    for (double a : cfg.alphas) {
        if (!(a > 0.0 && a < 1.0)) throw config_error("alpha must lie in (0, 1)");
    }

    // One standardized quantile table serves all reps and levels.
    SimulationOptions qopt = cfg.quantile_sim;
    qopt.seed = derive_seed(cfg.scenario.seed, 0x7175616e74696c65ull);
    const QuantileTable table = simulate_standard_quantiles(qopt);

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.reps));
    const int threads = resolve_threads(cfg.threads);

    parallel_for(cfg.reps, threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t rep = lo; rep < hi; ++rep) {
            RepOutcome& oc = outcomes[static_cast<std::size_t>(rep)];
            oc.covered.resize(cfg.alphas.size());
            oc.widths.resize(cfg.alphas.size());
            try {
                const std::uint64_t rep_seed = derive_seed(cfg.scenario.seed, static_cast<std::uint64_t>(rep));
                LabeledSeries series;
                if (cfg.generator_override) {
                    series = cfg.generator_override(static_cast<int>(rep), rep_seed);
                } else {
                    ScenarioSpec spec = cfg.scenario;
                    spec.seed = rep_seed;
                    series = generate_scenario(spec);
                }
                DetectionConfig det = cfg.detection;
                det.seed = derive_seed(rep_seed, 0x7065726dull);
                det.threads = 1;
                auto detected = detect(series.obs, det);

                RefineOptions ref = cfg.refine;
                ref.threads = 1;
                auto refined = refine(series.obs, detected.change_points, det, ref);

                ChangePointSet refined_set;
                refined_set.T = series.obs.rows;
                for (const auto& r : refined) refined_set.estimates.push_back(r.eta_tilde);
                std::sort(refined_set.estimates.begin(), refined_set.estimates.end());
                refined_set.estimates.erase(std::unique(refined_set.estimates.begin(), refined_set.estimates.end()),
                                            refined_set.estimates.end());

                oc.dh = hausdorff(refined_set, series.true_cps, series.obs.rows);
                oc.k_correct = (detected.change_points.k_hat() == static_cast<std::int64_t>(series.true_cps.size()));

                if (oc.k_correct && !cfg.alphas.empty() && !refined.empty()) {
                    LrvOptions lopt;
                    lopt.r = det.r;
                    lopt.kernel = det.kernel;
                    lopt.R = cfg.lrv_blocks;
                    auto lrv = estimate_lrv(series.obs, refined, lopt);
                    for (const auto& rec : refined) {
                        const LrvEstimate* est = nullptr;
                        for (const auto& e : lrv.estimates) {
                            if (e.k == rec.k) {
                                est = &e;
                                break;
                            }
                        }
                        if (!est || rec.degenerate) {
                            ++oc.skipped;
                            continue;
                        }
                        // True location: estimates are matched to truth by
                        // index once the count is right.
                        const std::int64_t truth = series.true_cps[static_cast<std::size_t>(rec.k - 1)];
                        for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
                            auto ci = confidence_interval(rec.k, rec.eta_tilde, rec.kappa_hat, est->sigma2_inf,
                                                          series.obs.cols, det.r, cfg.alphas[ai], table,
                                                          series.obs.rows);
                            oc.covered[ai].push_back((truth >= ci.lo && truth <= ci.hi) ? 1 : 0);
                            oc.widths[ai].push_back(static_cast<double>(ci.hi - ci.lo));
                        }
                    }
                }
            } catch (const std::exception&) {
                oc.failed = true;
            }
        }
    });

    EvalReport rep;
    rep.scenario = to_string(cfg.scenario.id);
    rep.T = cfg.scenario.T;
    rep.p = cfg.scenario.p;
    rep.seed = cfg.scenario.seed;
    rep.reps = cfg.reps;

    std::vector<double> dhs;
    std::int64_t wrong = 0, ok_reps = 0;
    for (const auto& oc : outcomes) {
        if (oc.failed) {
            ++rep.failures;
            continue;
        }
        ++ok_reps;
        dhs.push_back(oc.dh);
        if (!oc.k_correct) ++wrong;
        rep.skipped_cis += oc.skipped;
    }
    if (ok_reps > 0) {
        rep.prop_k_wrong = static_cast<double>(wrong) / static_cast<double>(ok_reps);
        double mean = 0.0;
        for (double d : dhs) mean += d;
        mean /= static_cast<double>(dhs.size());
        rep.dh_mean = mean;
        rep.dh_sd = sample_sd(dhs, mean);
    }

    for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
        AlphaStats st;
        st.alpha = cfg.alphas[ai];
        std::vector<double> widths;
        std::int64_t covered = 0, total = 0;
        for (const auto& oc : outcomes) {
            if (oc.failed || !oc.k_correct) continue;
            for (std::size_t i = 0; i < oc.covered[ai].size(); ++i) {
                covered += oc.covered[ai][i];
                widths.push_back(oc.widths[ai][i]);
                ++total;
            }
        }
        st.n_intervals = total;
        if (total > 0) {
            st.coverage = static_cast<double>(covered) / static_cast<double>(total);
            double mean = 0.0;
            for (double w : widths) mean += w;
            mean /= static_cast<double>(widths.size());
            st.width_mean = mean;
            st.width_sd = sample_sd(widths, mean);
        }
        rep.per_alpha.push_back(st);
    }
    return rep;
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["scenario"] = scenario;
    j["T"] = T;
    j["p"] = p;
    j["seed"] = seed;
    j["reps"] = reps;
    j["failures"] = failures;
    j["skipped_cis"] = skipped_cis;
    j["prop_k_wrong"] = prop_k_wrong;
    j["dh_mean"] = dh_mean;
    j["dh_sd"] = dh_sd;
    j["per_alpha"] = nlohmann::json::array();
    for (const auto& st : per_alpha) {
        nlohmann::json a;
        a["alpha"] = st.alpha;
        a["coverage"] = st.coverage;
        a["width_mean"] = st.width_mean;
        a["width_sd"] = st.width_sd;
        a["n_intervals"] = st.n_intervals;
        j["per_alpha"].push_back(a);
    }
    return j.dump(2);
}

std::string EvalReport::to_table_text() const {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << "scenario " << scenario << "  T=" << T << "  p=" << p << "  reps=" << reps;
    if (failures > 0) os << "  failures=" << failures;
    os << "\n";
    os << "prop K wrong: " << prop_k_wrong << "\n";
    os << "d_H:          " << dh_mean << " (" << dh_sd << ")\n";
    for (const auto& st : per_alpha) {
        os << "alpha=" << st.alpha << "  coverage: " << st.coverage << "  width: " << st.width_mean << " ("
           << st.width_sd << ")  n=" << st.n_intervals << "\n";
    }
    if (skipped_cis > 0) os << "intervals skipped: " << skipped_cis << "\n";
    return os.str();
}

}  // namespace mnsbs
