// pybind11 bindings for the main operations.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "plrm/dist.hpp"
#include "plrm/robustness.hpp"
#include "plrm/simulation.hpp"
#include "plrm/tuning.hpp"

namespace py = pybind11;
using namespace plrm;

namespace {

Dataset make_dataset(const Matrix& x, const IMatrix& y) {
    Dataset data;
    data.X = x;
    data.Y = y;
    data.trials = y.rowwise().sum();
    data.dims = ModelDims(static_cast<int>(x.cols()) - 1,
                          static_cast<int>(y.cols()) - 1);
    data.validate();
    return data;
}

py::dict fit_to_dict(const FitResult& fit) {
    py::dict out;
    out["beta"] = fit.beta_hat;
    out["lambda"] = fit.lambda;
    out["objective"] = fit.objective;
    out["divergence"] = fit.divergence;
    out["converged"] = fit.converged;
    out["iterations"] = fit.iterations;
    out["psi"] = fit.psi;
    out["omega"] = fit.omega;
    out["sandwich_ok"] = fit.sandwich_ok;
    if (fit.sandwich_ok) {
        out["sandwich"] = fit.sandwich;
        out["se"] = fit.se;
    }
    return out;
}

SimDesign design_from_kwargs(const Vector& beta_true, int n, int k, int d,
                             double contamination_pct, std::uint64_t seed,
                             bool code_compat) {
    SimDesign design;
    design.beta_true = beta_true;
    design.N = n;
    design.k = k;
    design.d = d;
    design.contamination_pct = contamination_pct;
    design.seed = seed;
    design.code_compat = code_compat;
    return design;
}

py::dict study_to_dict(const StudyResult& r) {
    py::dict out;
    out["metric"] = r.metric;
    py::list cells;
    for (const auto& c : r.cells) {
        py::dict cell;
        cell["lambda"] = c.lambda;
        cell["N"] = c.N;
        cell["value"] = c.value;
        cell["valid_reps"] = c.valid_replications;
        cell["discarded"] = c.discarded;
        if (c.per_coordinate.size() > 0) cell["per_coordinate"] = c.per_coordinate;
        cells.append(cell);
    }
    out["cells"] = cells;
    out["csv"] = r.to_csv();
    return out;
}

}  // namespace

PYBIND11_MODULE(_plrm, m) {
    m.doc() = "Robust polytomous logistic regression (density power divergence)";

    m.def("category_probabilities",
          [](const Vector& x, const Vector& beta, int k, int d) {
              return category_probabilities(x, beta, ModelDims(k, d));
          },
          py::arg("x"), py::arg("beta"), py::arg("k"), py::arg("d"));

    m.def("dpd_objective",
          [](const Matrix& x, const IMatrix& y, const Vector& beta, double lam,
             bool grouped_scaling) {
              return dpd_objective(make_dataset(x, y), beta,
                                   DpdConfig(lam, grouped_scaling));
          },
          py::arg("X"), py::arg("Y"), py::arg("beta"), py::arg("lambda_"),
          py::arg("grouped_scaling") = true);

    m.def("estimating_function",
          [](const Matrix& x, const IMatrix& y, const Vector& beta, double lam) {
              return estimating_function(make_dataset(x, y), beta, lam);
          },
          py::arg("X"), py::arg("Y"), py::arg("beta"), py::arg("lambda_"));

    m.def("fit",
          [](const Matrix& x, const IMatrix& y, double lam, bool grouped_scaling,
             const Vector& init) {
              FitOptions opts;
              opts.grouped_scaling = grouped_scaling;
              if (init.size() > 0) opts.init = init;
              return fit_to_dict(fit_mdpde(make_dataset(x, y), lam, opts));
          },
          py::arg("X"), py::arg("Y"), py::arg("lambda_") = 0.0,
          py::arg("grouped_scaling") = true, py::arg("init") = Vector());

    m.def("wald_test",
          [](const Matrix& x, const IMatrix& y, double lam, int coefficient,
             double value) {
              const Dataset data = make_dataset(x, y);
              const auto hyp = LinearHypothesis::single_coefficient(
                  data.dims.nu(), coefficient, value);
              const auto fit = fit_mdpde(data, lam);
              const auto w = wald_statistic(fit, hyp);
              py::dict out;
              out["statistic"] = w.statistic;
              out["df"] = w.df;
              out["p_value"] = w.p_value;
              out["converged"] = fit.converged;
              return out;
          },
          py::arg("X"), py::arg("Y"), py::arg("lambda_"), py::arg("coefficient"),
          py::arg("value"));

    m.def("select_lambda",
          [](const Matrix& x, const IMatrix& y, const std::vector<double>& grid,
             double pilot) {
              TuningConfig cfg;
              if (!grid.empty()) cfg.grid = grid;
              cfg.pilot_lambda = pilot;
              const auto trace = select_lambda(make_dataset(x, y), cfg);
              py::dict out;
              out["lambda_opt"] = trace.lambda_opt;
              out["beta_opt"] = trace.beta_opt;
              py::list records;
              for (const auto& rec : trace.records) {
                  py::dict r;
                  r["lambda"] = rec.lambda;
                  r["bias_sq"] = rec.bias_sq;
                  r["variance"] = rec.variance;
                  r["mse"] = rec.mse;
                  r["skipped"] = rec.skipped;
                  records.append(r);
              }
              out["trace"] = records;
              return out;
          },
          py::arg("X"), py::arg("Y"), py::arg("grid") = std::vector<double>(),
          py::arg("pilot") = 0.3);

    m.def("influence",
          [](const Matrix& x, const IMatrix& y, const Vector& beta, double lam,
             long long row, int category, const Vector& x_override) {
              ContaminationPoint cp;
              cp.row = row;
              const Dataset data = make_dataset(x, y);
              cp.t = Vector::Zero(data.dims.n_categories());
              cp.t[category] = 1.0;
              if (x_override.size() > 0) cp.x_override = x_override;
              return if_single_index(beta, data, lam, cp);
          },
          py::arg("X"), py::arg("Y"), py::arg("beta"), py::arg("lambda_"),
          py::arg("row"), py::arg("category"), py::arg("x_override") = Vector());

    m.def("mse_study",
          [](const Vector& beta_true, int k, int d, double contamination_pct,
             std::uint64_t seed, const std::vector<double>& lambdas,
             const std::vector<int>& n_grid, int reps, int threads) {
              const auto design = design_from_kwargs(beta_true, n_grid.front(), k, d,
                                                     contamination_pct, seed, false);
              return study_to_dict(mse_study(design, lambdas, n_grid, reps, threads));
          },
          py::arg("beta_true"), py::arg("k"), py::arg("d"),
          py::arg("contamination_pct"), py::arg("seed"), py::arg("lambdas"),
          py::arg("n_grid"), py::arg("reps"), py::arg("threads") = 0);

    m.def("level_study",
          [](const Vector& beta_true, int k, int d, double contamination_pct,
             std::uint64_t seed, const std::vector<double>& lambdas,
             const std::vector<int>& n_grid, int reps, int coefficient,
             double value, double alpha, int threads) {
              const auto design = design_from_kwargs(beta_true, n_grid.front(), k, d,
                                                     contamination_pct, seed, false);
              const auto hyp = LinearHypothesis::single_coefficient(
                  design.dims().nu(), coefficient, value);
              return study_to_dict(
                  level_study(design, lambdas, n_grid, reps, hyp, alpha, threads));
          },
          py::arg("beta_true"), py::arg("k"), py::arg("d"),
          py::arg("contamination_pct"), py::arg("seed"), py::arg("lambdas"),
          py::arg("n_grid"), py::arg("reps"), py::arg("coefficient"),
          py::arg("value"), py::arg("alpha") = 0.05, py::arg("threads") = 0);

    m.def("approximate_power",
          [](const Matrix& lt, const Vector& h, const Vector& beta_star,
             const Matrix& sigma, double n, double alpha) {
              const LinearHypothesis hyp(lt.transpose(), h);
              return approximate_power(hyp, beta_star, sigma, n, alpha);
          },
          py::arg("LT"), py::arg("h"), py::arg("beta_star"), py::arg("sigma"),
          py::arg("N"), py::arg("alpha") = 0.05);

    m.def("required_sample_size",
          [](const Matrix& lt, const Vector& h, const Vector& beta_star,
             const Matrix& sigma, double alpha, double target) {
              const LinearHypothesis hyp(lt.transpose(), h);
              return required_sample_size(hyp, beta_star, sigma, alpha, target);
          },
          py::arg("LT"), py::arg("h"), py::arg("beta_star"), py::arg("sigma"),
          py::arg("alpha"), py::arg("target_power"));

    m.def("normal_cdf", &normal_cdf);
    m.def("normal_quantile", &normal_quantile);
    m.def("chisq_cdf", &chisq_cdf);
    m.def("chisq_quantile", &chisq_quantile);
    m.def("noncentral_chisq_cdf", &noncentral_chisq_cdf);

    m.attr("__version__") = "0.1.0";
}
