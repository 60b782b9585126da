// Command line front end: scenario simulation, change-point detection,
// refinement plus confidence intervals, and batch evaluation.
//
// Exit codes: 0 success, 1 usage or configuration problem, 2 data or file
// problem, 3 numeric failure. Every run is deterministic given --seed;
// the runtime_ms field in outputs is the one exception, it reports wall
// time.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mnsbs/csv.hpp"
#include "mnsbs/detect.hpp"
#include "mnsbs/inference.hpp"
#include "mnsbs/lrv.hpp"
#include "mnsbs/refine.hpp"
#include "mnsbs/rng.hpp"
#include "mnsbs/simlab.hpp"

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mnsbs::input_error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) throw mnsbs::input_error("cannot read file: " + path);
    return os.str();
}

// Empty path means stdout.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mnsbs::input_error("cannot write file: " + path);
    out << text;
    if (!out) throw mnsbs::input_error("write failed: " + path);
}

std::string sidecar_path(std::string csv_path) {
    const std::string suffix = ".csv";
    if (csv_path.size() > suffix.size() && csv_path.compare(csv_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        csv_path.resize(csv_path.size() - suffix.size());
    return csv_path + ".meta.json";
}

std::string format_alpha(double alpha) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", alpha);
    return buf;
}

// Shared detection flag bundle; infer and detect expose the same knobs.
struct DetectFlags {
    double r = 2.0;
    std::string kernel = "gaussian";
    double bandwidth = 0.0;  // 0 = rule 2 T^{-1/(2r+p)}
    std::string tau = "permutation";
    double c_tau = 1.0;
    int permutations = 100;
    double c_frak = 1.5;
    std::int64_t rho = 0;  // 0 = rule
    std::int64_t min_segment = 2;
    std::uint64_t seed = 20240915;
    int threads = 0;

    void add_options(CLI::App* cmd, double default_r, std::uint64_t default_seed) {
        r = default_r;
        seed = default_seed;
        // Frees the single-letter help alias so --h can mean the bandwidth.
        cmd->set_help_flag("--help", "Print this help message and exit");
        cmd->add_option("--r", r, "Smoothness the bandwidth rule targets")->capture_default_str();
        cmd->add_option("--kernel", kernel, "Kernel family: gaussian, uniform, epanechnikov")->capture_default_str();
        cmd->add_option("--h", bandwidth, "Bandwidth (default: 2 T^{-1/(2r+p)})");
        cmd->add_option("--tau", tau, "Threshold: a number, 'theory', or 'permutation'")->capture_default_str();
        cmd->add_option("--c-tau", c_tau, "Constant in the theory threshold")->capture_default_str();
        cmd->add_option("--B,--permutations", permutations, "Permutation count for calibration")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--c-frak", c_frak, "Seeded interval depth constant")->capture_default_str();
        cmd->add_option("--rho", rho, "Trim override (default: ceil(log(T) h^{-p}))");
        cmd->add_option("--min-segment", min_segment, "Shortest stretch still scanned")->capture_default_str();
        cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
        cmd->add_option("--threads", threads, "Worker cap, 0 = auto")->capture_default_str();
    }

    mnsbs::DetectionConfig to_config() const {
        mnsbs::DetectionConfig cfg;
        cfg.r = r;
        cfg.kernel = mnsbs::kernel_family_from_string(kernel);
        if (bandwidth != 0.0) cfg.bandwidth = bandwidth;
        char* end = nullptr;
        const double fixed = std::strtod(tau.c_str(), &end);
        if (end != tau.c_str() && *end == '\0') {
            cfg.tau = fixed;
        } else {
            cfg.threshold_method = mnsbs::threshold_method_from_string(tau);
        }
        cfg.c_tau = c_tau;
        cfg.permutation_count = permutations;
        cfg.c_frak = c_frak;
        if (rho != 0) cfg.rho_override = rho;
        cfg.min_segment = min_segment;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.validate();
        return cfg;
    }
};

json tuning_json(const mnsbs::DetectionConfig& cfg) {
    json t;
    t["r"] = cfg.r;
    t["kernel"] = mnsbs::to_string(cfg.kernel);
    t["threshold_method"] = cfg.tau ? "fixed" : mnsbs::to_string(cfg.threshold_method);
    t["c_tau"] = cfg.c_tau;
    t["permutations"] = cfg.permutation_count;
    t["c_frak"] = cfg.c_frak;
    t["min_segment"] = cfg.min_segment;
    t["seed"] = cfg.seed;
    return t;
}

int cmd_simulate(const std::string& scenario, std::int64_t T, int p, std::uint64_t seed, double ar_coef, int burn_in,
                 const std::string& out) {
    mnsbs::ScenarioSpec spec;
    spec.id = mnsbs::scenario_from_string(scenario);
    spec.T = T;
    spec.p = p;
    spec.seed = seed;
    spec.ar_coef = ar_coef;
    spec.burn_in = burn_in;
    spec.validate();
    const auto series = mnsbs::generate_scenario(spec);
    mnsbs::write_observations_csv(out, series.obs);

    json meta;
    meta["schema_version"] = 1;
    meta["true_cps"] = series.true_cps;
    meta["scenario"] = mnsbs::to_string(spec.id);
    meta["seed"] = spec.seed;
    meta["T"] = spec.T;
    meta["p"] = spec.p;
    meta["ar_coef"] = spec.ar_coef;
    meta["burn_in"] = spec.burn_in;
    const std::string meta_path = sidecar_path(out);
    emit(meta_path, meta.dump(2) + "\n");
    std::cout << "wrote " << out << " (" << series.obs.rows << " rows, " << series.obs.cols << " cols) and "
              << meta_path << "\n";
    return 0;
}

int cmd_detect(const std::string& input, const DetectFlags& flags, const std::string& out) {
    const auto t0 = Clock::now();
    const auto obs = mnsbs::read_observations_csv(input);
    const auto cfg = flags.to_config();
    const auto res = mnsbs::detect(obs, cfg);

    json j;
    j["schema_version"] = 1;
    j["K_hat"] = res.change_points.k_hat();
    j["estimates"] = res.change_points.estimates;
    j["tau_used"] = res.tau;
    j["rho_used"] = res.rho;
    j["h_used"] = res.bandwidth;
    j["T"] = obs.rows;
    j["p"] = obs.cols;
    j["tuning"] = tuning_json(cfg);
    j["tuning"]["rho_fallback"] = res.rho_fallback;
    j["diagnostics"] = res.diagnostics;
    j["runtime_ms"] = ms_since(t0);
    emit(out, j.dump(2) + "\n");
    return 0;
}

int cmd_infer(const std::string& input, const std::string& detect_json, const DetectFlags& flags,
              std::vector<double> alphas, double h_tilde, double c_kappa, int blocks,
              const std::string& table_path, std::int64_t n_draws, const std::string& out) {
    const auto t0 = Clock::now();
    const auto obs = mnsbs::read_observations_csv(input);
    const auto cfg = flags.to_config();

    std::sort(alphas.begin(), alphas.end());
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
    if (alphas.empty()) throw mnsbs::config_error("at least one alpha level is required");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0)) throw mnsbs::config_error("alpha must lie in (0, 1)");

    json j;
    j["schema_version"] = 1;
    j["T"] = obs.rows;
    j["p"] = obs.cols;
    j["alphas"] = alphas;
    j["tuning"] = tuning_json(cfg);
    j["tuning"]["h_tilde"] = h_tilde;
    j["tuning"]["c_kappa"] = c_kappa;
    std::vector<std::string> diagnostics;

    mnsbs::ChangePointSet prelim;
    prelim.T = obs.rows;
    if (!detect_json.empty()) {
        json dj;
        try {
            dj = json::parse(slurp(detect_json));
            prelim.estimates = dj.at("estimates").get<std::vector<std::int64_t>>();
        } catch (const json::exception& err) {
            throw mnsbs::input_error(detect_json + ": not a detect result: " + err.what());
        }
        for (std::size_t i = 0; i < prelim.estimates.size(); ++i) {
            const std::int64_t e = prelim.estimates[i];
            if (e < 1 || e >= obs.rows || (i > 0 && e <= prelim.estimates[i - 1]))
                throw mnsbs::input_error(detect_json + ": estimates must be strictly increasing within [1, T-1]");
        }
        j["tuning"]["estimates_from"] = detect_json;
    } else {
        const auto res = mnsbs::detect(obs, cfg);
        prelim = res.change_points;
        j["tau_used"] = res.tau;
        j["rho_used"] = res.rho;
        j["h_used"] = res.bandwidth;
        j["tuning"]["rho_fallback"] = res.rho_fallback;
        diagnostics.insert(diagnostics.end(), res.diagnostics.begin(), res.diagnostics.end());
    }

    j["K_hat"] = prelim.k_hat();
    j["change_points"] = json::array();
    if (prelim.estimates.empty()) {
        j["note"] = "no change points detected; nothing to refine";
        j["diagnostics"] = diagnostics;
        j["runtime_ms"] = ms_since(t0);
        emit(out, j.dump(2) + "\n");
        return 0;
    }

    mnsbs::RefineOptions ropt;
    ropt.h_tilde = h_tilde;
    ropt.c_kappa = c_kappa;
    ropt.threads = flags.threads;
    const auto refined = mnsbs::refine(obs, prelim, cfg, ropt);

    mnsbs::LrvOptions lopt;
    lopt.r = cfg.r;
    lopt.kernel = cfg.kernel;
    lopt.R = blocks;
    const auto lrv = mnsbs::estimate_lrv(obs, refined, lopt);
    diagnostics.insert(diagnostics.end(), lrv.diagnostics.begin(), lrv.diagnostics.end());

    // The standardized quantile table is expensive; an existing file is
    // reused, otherwise the table is simulated and, when a path was given,
    // saved there.
    mnsbs::QuantileTable table;
    std::ifstream probe(table_path.empty() ? std::string() : table_path);
    if (!table_path.empty() && probe.good()) {
        probe.close();
        table = mnsbs::QuantileTable::from_json(slurp(table_path));
        j["quantile_table"] = {{"source", table_path}, {"n_draws", table.n_draws}, {"seed", table.seed}};
    } else {
        mnsbs::SimulationOptions sopt;
        sopt.n_draws = n_draws;
        sopt.seed = mnsbs::derive_seed(flags.seed, 0x7175616e74696c65ull);
        sopt.threads = flags.threads;
        table = mnsbs::simulate_standard_quantiles(sopt);
        j["quantile_table"] = {{"source", "simulated"}, {"n_draws", table.n_draws}, {"seed", table.seed}};
        if (!table_path.empty()) {
            emit(table_path, table.to_json() + "\n");
            j["quantile_table"]["saved_to"] = table_path;
        }
    }

    for (const auto& rec : refined) {
        json c;
        c["k"] = rec.k;
        c["eta_hat"] = rec.eta_hat;
        c["eta_tilde"] = rec.eta_tilde;
        c["kappa_hat"] = rec.kappa_hat;
        c["window"] = {rec.s, rec.e};
        c["h1"] = rec.h1;
        c["degenerate"] = rec.degenerate;
        const mnsbs::LrvEstimate* est = nullptr;
        for (const auto& e : lrv.estimates)
            if (e.k == rec.k) est = &e;
        if (est) {
            c["sigma2_inf"] = est->sigma2_inf;
            c["blocks"] = est->R;
            c["block_length"] = est->S;
            c["ci"] = json::object();
            for (double a : alphas) {
                const auto ci = mnsbs::confidence_interval(rec.k, rec.eta_tilde, rec.kappa_hat, est->sigma2_inf,
                                                           obs.cols, cfg.r, a, table, obs.rows);
                c["ci"][format_alpha(a)] = {ci.lo, ci.hi};
            }
        } else {
            c["skipped"] = "window too short for the block rule";
        }
        j["change_points"].push_back(c);
    }
    j["diagnostics"] = diagnostics;
    j["runtime_ms"] = ms_since(t0);
    emit(out, j.dump(2) + "\n");
    return 0;
}

int cmd_evaluate(const std::string& scenario, int reps, std::int64_t T, int p, std::uint64_t seed,
                 const DetectFlags& flags, bool r_given, std::vector<double> alphas, double h_tilde, double c_kappa,
                 int blocks, std::int64_t n_draws, const std::string& out_json) {
    mnsbs::StudyConfig sc;
    sc.scenario.id = mnsbs::scenario_from_string(scenario);
    sc.scenario.T = T;
    sc.scenario.p = p;
    sc.scenario.seed = seed;
    sc.reps = reps;
    sc.detection = flags.to_config();
    if (!r_given) sc.detection.r = (sc.scenario.id == mnsbs::ScenarioId::INFER) ? 1000.0 : 2.0;
    sc.refine.h_tilde = h_tilde;
    sc.refine.c_kappa = c_kappa;
    sc.lrv_blocks = blocks;
    std::sort(alphas.begin(), alphas.end());
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
    sc.alphas = alphas;
    sc.quantile_sim.n_draws = n_draws;
    sc.threads = flags.threads;

    const auto report = mnsbs::run_study(sc);
    std::cout << report.to_table_text();
    if (!out_json.empty()) emit(out_json, report.to_json() + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multivariate nonparametric change-point detection and inference"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic scenario as CSV plus a truth sidecar");
    std::string sim_scenario;
    std::int64_t sim_T = 150;
    int sim_p = 3;
    std::uint64_t sim_seed = 1;
    double sim_ar = 0.3;
    int sim_burn = 500;
    std::string sim_out;
    sim->add_option("--scenario", sim_scenario, "One of S1, S2, S3, S4, S5, INFER")->required();
    sim->add_option("--T", sim_T, "Sample length")->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--p", sim_p, "Dimension")->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--seed", sim_seed, "Generator seed")->capture_default_str();
    sim->add_option("--ar-coef", sim_ar, "Backbone AR(1) coefficient")->capture_default_str();
    sim->add_option("--burn-in", sim_burn, "Backbone burn-in steps")->capture_default_str();
    sim->add_option("--out", sim_out, "Output CSV path; sidecar lands next to it")->required();

    // detect
    auto* det = app.add_subcommand("detect", "Locate change points in a CSV series");
    std::string det_input, det_out;
    DetectFlags det_flags;
    det->add_option("--input", det_input, "Input CSV (header x1..xp)")->required();
    det->add_option("--out", det_out, "Output JSON path (default: stdout)");
    det_flags.add_options(det, 2.0, 20240915);

    // infer
    auto* inf = app.add_subcommand("infer", "Refine change points and attach confidence intervals");
    std::string inf_input, inf_detect_json, inf_out, inf_table;
    DetectFlags inf_flags;
    std::vector<double> inf_alphas{0.05};
    double inf_h_tilde = 0.05;
    double inf_c_kappa = 2.0;
    int inf_blocks = 0;
    std::int64_t inf_draws = 10000;
    inf->add_option("--input", inf_input, "Input CSV (header x1..xp)")->required();
    inf->add_option("--detect-json", inf_detect_json, "Reuse estimates from a detect result instead of rescanning");
    inf->add_option("--out", inf_out, "Output JSON path (default: stdout)");
    inf->add_option("--alpha", inf_alphas, "Miscoverage levels")->delimiter(',')->capture_default_str();
    inf->add_option("--h-tilde", inf_h_tilde, "Bandwidth of the jump-size estimate")->capture_default_str();
    inf->add_option("--c-kappa", inf_c_kappa, "Refinement bandwidth constant")->capture_default_str();
    inf->add_option("--blocks", inf_blocks, "Block count for the long-run variance, 0 = rule");
    inf->add_option("--quantile-table", inf_table, "Quantile table cache: loaded if present, else simulated and saved");
    inf->add_option("--n-draws", inf_draws, "Monte Carlo draws for the quantile table")->capture_default_str();
    inf_flags.add_options(inf, 1000.0, 20240915);

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "Replicated scenario study with summary metrics");
    std::string eva_scenario, eva_out_json;
    int eva_reps = 50;
    std::int64_t eva_T = 150;
    int eva_p = 3;
    DetectFlags eva_flags;
    std::vector<double> eva_alphas{0.05};
    double eva_h_tilde = 0.05;
    double eva_c_kappa = 2.0;
    int eva_blocks = 0;
    std::int64_t eva_draws = 10000;
    eva->add_option("--scenario", eva_scenario, "One of S1, S2, S3, S4, S5, INFER")->required();
    eva->add_option("--reps", eva_reps, "Replicates")->check(CLI::PositiveNumber)->capture_default_str();
    eva->add_option("--T", eva_T, "Sample length")->check(CLI::PositiveNumber)->capture_default_str();
    eva->add_option("--p", eva_p, "Dimension")->check(CLI::PositiveNumber)->capture_default_str();
    eva->add_option("--alpha", eva_alphas, "Miscoverage levels")->delimiter(',')->capture_default_str();
    eva->add_option("--h-tilde", eva_h_tilde, "Bandwidth of the jump-size estimate")->capture_default_str();
    eva->add_option("--c-kappa", eva_c_kappa, "Refinement bandwidth constant")->capture_default_str();
    eva->add_option("--blocks", eva_blocks, "Block count for the long-run variance, 0 = rule");
    eva->add_option("--n-draws", eva_draws, "Monte Carlo draws for the quantile table")->capture_default_str();
    eva->add_option("--out-json", eva_out_json, "Also write the report as JSON here");
    // The master seed doubles as the scenario seed; per-rep detection seeds
    // derive from it inside the study runner.
    eva_flags.add_options(eva, 2.0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_scenario, sim_T, sim_p, sim_seed, sim_ar, sim_burn, sim_out);
        if (det->parsed()) return cmd_detect(det_input, det_flags, det_out);
        if (inf->parsed())
            return cmd_infer(inf_input, inf_detect_json, inf_flags, inf_alphas, inf_h_tilde, inf_c_kappa, inf_blocks,
                             inf_table, inf_draws, inf_out);
        if (eva->parsed())
            return cmd_evaluate(eva_scenario, eva_reps, eva_T, eva_p, eva_flags.seed, eva_flags,
                                eva->count("--r") > 0, eva_alphas, eva_h_tilde, eva_c_kappa, eva_blocks, eva_draws,
                                eva_out_json);
    } catch (const mnsbs::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const mnsbs::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mnsbs::numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
