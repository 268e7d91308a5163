#pragma once

#include <vector>

#include "plrm/estimator.hpp"

namespace plrm {

struct TuningConfig {
    double pilot_lambda = 0.3;
    std::vector<double> grid;  // default: 0, 0.01, ..., 1
    bool grouped_scaling = true;

    TuningConfig();
    void validate() const;
};

struct TuningRecord {
    double lambda = 0.0;
    double bias_sq = 0.0;
    double variance = 0.0;
    double mse = 0.0;
    bool skipped = false;  // singular J-hat or failed fit
    bool converged = false;
    Vector beta;
};

struct TuningTrace {
    std::vector<TuningRecord> records;  // ascending lambda
    double lambda_opt = 0.0;
    Vector beta_opt;
    double pilot_lambda = 0.0;
    Vector beta_pilot;
};

/// Model-robust variance estimate V-hat = Omega_{N,lambda}(beta_hat).
Matrix model_robust_v_hat(const Dataset& data,
                          const Eigen::Ref<const Vector>& beta_hat,
                          double lambda);

/// Model-robust J-hat: (lambda+1) Psi + the data-dependent correction terms
/// built from the observed per-trial scores. Grouped rows are handled as
/// their exploded unit trials. Equals Psi exactly at lambda = 0.
Matrix model_robust_j_hat(const Dataset& data,
                          const Eigen::Ref<const Vector>& beta_hat,
                          double lambda);

struct MseEstimate {
    double bias_sq = 0.0;
    double variance = 0.0;
    double mse = 0.0;
    bool j_singular = false;
};

/// Estimated asymptotic MSE at lambda given the pilot estimate and the fit
/// beta_hat at that lambda: B = ||beta_hat - pilot||^2,
/// V = trace(J^-1 V J^-1) / N.
MseEstimate estimated_mse(const Dataset& data, double lambda,
                          const Eigen::Ref<const Vector>& pilot_beta,
                          const Eigen::Ref<const Vector>& beta_hat);

/// Convenience overload fitting at lambda internally (zero start).
MseEstimate estimated_mse(const Dataset& data, double lambda,
                          const Eigen::Ref<const Vector>& pilot_beta);

/// Grid sweep with warm starts: fits the pilot, scans ascending lambda,
/// skips singular grid points, returns the full trace and the argmin with a
/// smallest-lambda tie break.
TuningTrace select_lambda(const Dataset& data, const TuningConfig& cfg = {},
                          const FitOptions& base_opts = {});

}  // namespace plrm
