// Python bindings for the main library operations. The interface is a
// small functional facade: numpy arrays in, plain dicts and lists out, so
// the module stays useful for quick analysis without mirroring the whole
// C++ surface.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mnsbs/detect.hpp"
#include "mnsbs/inference.hpp"
#include "mnsbs/lrv.hpp"
#include "mnsbs/refine.hpp"
#include "mnsbs/rng.hpp"
#include "mnsbs/simlab.hpp"

namespace py = pybind11;

namespace {

mnsbs::ObservationMatrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw mnsbs::input_error("data must be a 2d array of shape (T, p)");
    mnsbs::ObservationMatrix obs(arr.shape(0), static_cast<int>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + arr.size(), obs.data.begin());
    obs.validate();
    return obs;
}

py::array_t<double> to_array(const mnsbs::ObservationMatrix& obs) {
    py::array_t<double> arr({obs.rows, static_cast<std::int64_t>(obs.cols)});
    std::copy(obs.data.begin(), obs.data.end(), arr.mutable_data());
    return arr;
}

mnsbs::DetectionConfig make_config(double r, const std::string& kernel, std::optional<double> bandwidth,
                                   const std::variant<std::string, double>& tau, int permutations, double c_frak,
                                   std::optional<std::int64_t> rho, std::int64_t min_segment, std::uint64_t seed,
                                   int threads) {
    mnsbs::DetectionConfig cfg;
    cfg.r = r;
    cfg.kernel = mnsbs::kernel_family_from_string(kernel);
    cfg.bandwidth = bandwidth;
    if (std::holds_alternative<double>(tau)) {
        cfg.tau = std::get<double>(tau);
    } else {
        cfg.threshold_method = mnsbs::threshold_method_from_string(std::get<std::string>(tau));
    }
    cfg.permutation_count = permutations;
    cfg.c_frak = c_frak;
    cfg.rho_override = rho;
    cfg.min_segment = min_segment;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.validate();
    return cfg;
}

py::dict detect_py(const py::array_t<double, py::array::c_style | py::array::forcecast>& data, double r,
                   const std::string& kernel, std::optional<double> bandwidth,
                   const std::variant<std::string, double>& tau, int permutations, double c_frak,
                   std::optional<std::int64_t> rho, std::int64_t min_segment, std::uint64_t seed, int threads) {
    auto obs = to_matrix(data);
    auto cfg = make_config(r, kernel, bandwidth, tau, permutations, c_frak, rho, min_segment, seed, threads);
    mnsbs::DetectResult res;
    {
        py::gil_scoped_release release;
        res = mnsbs::detect(obs, cfg);
    }
    py::dict out;
    out["k_hat"] = res.change_points.k_hat();
    out["estimates"] = res.change_points.estimates;
    out["tau"] = res.tau;
    out["rho"] = res.rho;
    out["bandwidth"] = res.bandwidth;
    out["rho_fallback"] = res.rho_fallback;
    out["diagnostics"] = res.diagnostics;
    return out;
}

py::dict infer_py(const py::array_t<double, py::array::c_style | py::array::forcecast>& data,
                  std::optional<std::vector<std::int64_t>> estimates, double r, const std::string& kernel,
                  std::optional<double> bandwidth, const std::variant<std::string, double>& tau, int permutations,
                  double c_frak, std::optional<std::int64_t> rho, std::int64_t min_segment, std::vector<double> alphas,
                  double h_tilde, double c_kappa, int blocks, std::int64_t n_draws, std::uint64_t seed, int threads) {
    auto obs = to_matrix(data);
    auto cfg = make_config(r, kernel, bandwidth, tau, permutations, c_frak, rho, min_segment, seed, threads);
    std::sort(alphas.begin(), alphas.end());
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
    if (alphas.empty()) throw mnsbs::config_error("at least one alpha level is required");

    mnsbs::ChangePointSet prelim;
    prelim.T = obs.rows;
    std::vector<std::string> diagnostics;
    std::optional<double> tau_used;
    std::optional<std::int64_t> rho_used;

    std::vector<mnsbs::RefinedEstimate> refined;
    mnsbs::LrvResult lrv;
    mnsbs::QuantileTable table;
    {
        py::gil_scoped_release release;
        if (estimates) {
            prelim.estimates = *estimates;
            for (std::size_t i = 0; i < prelim.estimates.size(); ++i) {
                const std::int64_t e = prelim.estimates[i];
                if (e < 1 || e >= obs.rows || (i > 0 && e <= prelim.estimates[i - 1]))
                    throw mnsbs::input_error("estimates must be strictly increasing within [1, T-1]");
            }
        } else {
            auto res = mnsbs::detect(obs, cfg);
            prelim = res.change_points;
            tau_used = res.tau;
            rho_used = res.rho;
            diagnostics = res.diagnostics;
        }
        if (!prelim.estimates.empty()) {
            mnsbs::RefineOptions ropt;
            ropt.h_tilde = h_tilde;
            ropt.c_kappa = c_kappa;
            ropt.threads = threads;
            refined = mnsbs::refine(obs, prelim, cfg, ropt);

            mnsbs::LrvOptions lopt;
            lopt.r = cfg.r;
            lopt.kernel = cfg.kernel;
            lopt.R = blocks;
            lrv = mnsbs::estimate_lrv(obs, refined, lopt);
            diagnostics.insert(diagnostics.end(), lrv.diagnostics.begin(), lrv.diagnostics.end());

            mnsbs::SimulationOptions sopt;
            sopt.n_draws = n_draws;
            sopt.seed = mnsbs::derive_seed(seed, 0x7175616e74696c65ull);
            sopt.threads = threads;
            table = mnsbs::simulate_standard_quantiles(sopt);
        }
    }

    py::dict out;
    out["k_hat"] = prelim.k_hat();
    if (tau_used) out["tau"] = *tau_used;
    if (rho_used) out["rho"] = *rho_used;
    py::list cps;
    for (const auto& rec : refined) {
        py::dict c;
        c["k"] = rec.k;
        c["eta_hat"] = rec.eta_hat;
        c["eta_tilde"] = rec.eta_tilde;
        c["kappa_hat"] = rec.kappa_hat;
        c["window"] = py::make_tuple(rec.s, rec.e);
        c["h1"] = rec.h1;
        c["degenerate"] = rec.degenerate;
        const mnsbs::LrvEstimate* est = nullptr;
        for (const auto& e : lrv.estimates)
            if (e.k == rec.k) est = &e;
        if (est) {
            c["sigma2_inf"] = est->sigma2_inf;
            py::dict cis;
            for (double a : alphas) {
                auto ci = mnsbs::confidence_interval(rec.k, rec.eta_tilde, rec.kappa_hat, est->sigma2_inf, obs.cols,
                                                     cfg.r, a, table, obs.rows);
                cis[py::cast(a)] = py::make_tuple(ci.lo, ci.hi);
            }
            c["ci"] = cis;
        }
        cps.append(c);
    }
    out["change_points"] = cps;
    out["diagnostics"] = diagnostics;
    return out;
}

py::tuple simulate_py(const std::string& scenario, std::int64_t T, int p, std::uint64_t seed, double ar_coef,
                      int burn_in) {
    mnsbs::ScenarioSpec spec;
    spec.id = mnsbs::scenario_from_string(scenario);
    spec.T = T;
    spec.p = p;
    spec.seed = seed;
    spec.ar_coef = ar_coef;
    spec.burn_in = burn_in;
    spec.validate();
    mnsbs::LabeledSeries series;
    {
        py::gil_scoped_release release;
        series = mnsbs::generate_scenario(spec);
    }
    return py::make_tuple(to_array(series.obs), series.true_cps);
}

py::dict quantile_table_py(std::int64_t n_draws, std::uint64_t seed, int threads) {
    mnsbs::SimulationOptions opts;
    opts.n_draws = n_draws;
    opts.seed = seed;
    opts.threads = threads;
    mnsbs::QuantileTable table;
    {
        py::gil_scoped_release release;
        table = mnsbs::simulate_standard_quantiles(opts);
    }
    py::dict out;
    out["alphas"] = table.alphas;
    out["q_star"] = table.q_star;
    out["n_draws"] = table.n_draws;
    out["seed"] = table.seed;
    return out;
}

double hausdorff_py(std::vector<std::int64_t> est, std::vector<std::int64_t> truth, std::int64_t T) {
    mnsbs::ChangePointSet set;
    set.T = T;
    std::sort(est.begin(), est.end());
    set.estimates = std::move(est);
    return mnsbs::hausdorff(set, truth, T);
}

}  // namespace

PYBIND11_MODULE(_mnsbs, m) {
    m.doc() = "Multivariate nonparametric change-point detection and inference";

    py::register_exception<mnsbs::input_error>(m, "InputError", PyExc_ValueError);
    py::register_exception<mnsbs::config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<mnsbs::numeric_error>(m, "NumericError", PyExc_ArithmeticError);

    m.def("detect", &detect_py, py::arg("data"), py::kw_only(), py::arg("r") = 2.0, py::arg("kernel") = "gaussian",
          py::arg("bandwidth") = py::none(), py::arg("tau") = "permutation", py::arg("permutations") = 100,
          py::arg("c_frak") = 1.5, py::arg("rho") = py::none(), py::arg("min_segment") = 2,
          py::arg("seed") = 20240915, py::arg("threads") = 0,
          "Locate change points; returns a dict with k_hat, estimates and the resolved tuning values.");

    m.def("infer", &infer_py, py::arg("data"), py::kw_only(), py::arg("estimates") = py::none(),
          py::arg("r") = 1000.0, py::arg("kernel") = "gaussian", py::arg("bandwidth") = py::none(),
          py::arg("tau") = "permutation", py::arg("permutations") = 100, py::arg("c_frak") = 1.5,
          py::arg("rho") = py::none(), py::arg("min_segment") = 2, py::arg("alphas") = std::vector<double>{0.05},
          py::arg("h_tilde") = 0.05, py::arg("c_kappa") = 2.0, py::arg("blocks") = 0, py::arg("n_draws") = 10000,
          py::arg("seed") = 20240915, py::arg("threads") = 0,
          "Refine change points and attach confidence intervals; detection runs first unless estimates are given.");

    m.def("simulate", &simulate_py, py::arg("scenario"), py::kw_only(), py::arg("T") = 150, py::arg("p") = 3,
          py::arg("seed") = 1, py::arg("ar_coef") = 0.3, py::arg("burn_in") = 500,
          "Generate a synthetic scenario; returns (data, true_change_points).");

    m.def("quantile_table", &quantile_table_py, py::kw_only(), py::arg("n_draws") = 10000,
          py::arg("seed") = 20240915, py::arg("threads") = 0,
          "Standardized quantiles of argmin_u { B(u) + |u| } on the 0.001 .. 0.999 grid.");

    m.def("hausdorff", &hausdorff_py, py::arg("estimates"), py::arg("truth"), py::arg("T"),
          "Scaled Hausdorff distance between endpoint-augmented change-point sets.");
}
