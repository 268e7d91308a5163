#pragma once

#include "plrm/model.hpp"

namespace plrm {

/// Tuning configuration for the density power divergence.
/// grouped_scaling selects the (n pi)^lambda convention for rows with more
/// than one trial; with it off, a grouped row contributes exactly as its
/// exploded unit-trial rows would, for every lambda.
struct DpdConfig {
    double lambda = 0.0;
    bool grouped_scaling = true;

    DpdConfig() = default;
    explicit DpdConfig(double lam, bool grouped = true)
        : lambda(lam), grouped_scaling(grouped) {
        if (!(lambda >= 0.0 && lambda <= 2.0))
            throw contract_error("DpdConfig: lambda must lie in [0, 2]");
    }
};

/// Per-row DPD kernel, lambda > 0. Unit-trial rows give
/// sum_j {pi_j - (1+1/lambda) y_j} pi_j^lambda; grouped rows follow the
/// configured scaling convention.
double dpd_row(const Eigen::Ref<const IVector>& y,
               const Eigen::Ref<const Vector>& pi, double lambda,
               bool grouped_scaling = true);

/// Per-row Kullback-Leibler term sum_{y_j > 0} y_j log(y_j / (n pi_j)),
/// the lambda = 0 branch. 0 log 0 = 0.
double kl_row(const Eigen::Ref<const IVector>& y,
              const Eigen::Ref<const Vector>& pi);

/// Sum of per-row divergences over the dataset (compensated summation).
/// The 1/N^{lambda+1} normalizer is omitted here -- it does not move the
/// argmin -- and applied by reported_divergence.
double dpd_objective(const Dataset& data, const Eigen::Ref<const Vector>& beta,
                     const DpdConfig& cfg);

/// objective / N^{lambda+1}, the normalized divergence for reporting.
double reported_divergence(double objective, long long n_trials, double lambda);

/// The estimating function u_lambda(beta): minus the objective gradient with
/// the (lambda+1) constant divided out. Its root is the MDPDE; at lambda = 0
/// it is the multinomial-logit score.
Vector estimating_function(const Dataset& data,
                           const Eigen::Ref<const Vector>& beta, double lambda,
                           bool grouped_scaling = true);

namespace detail {

/// Stable per-row score kernel (length d, reduced space):
///   sum_l y_l pi_l^lambda (e*_l - pi*) - n_trials * zeta,
/// with zeta = pi*^(lambda+1) - (sum_j pi_j^(lambda+1)) pi*.
/// This equals (I_d, 0_d) Delta(pi) diag^{lambda-1}{pi} (y - n pi) without
/// forming any negative power of pi; y may be fractional (contamination
/// probes use that).
void score_kernel(const Vector& pi, const Eigen::Ref<const Vector>& y,
                  double n_trials, double lambda, Vector& out);

/// Accumulates objective and gradient for one row; shared by the objective,
/// the estimating function and the fitter. Returns the row objective value;
/// adds the row's -(lambda+1)-scaled score into grad if grad != nullptr.
double row_objective_grad(const Eigen::Ref<const Vector>& x,
                          const Eigen::Ref<const IVector>& y, int n_trials,
                          const Vector& pi, double lambda, bool grouped_scaling,
                          Vector* u_accum, const ModelDims& dims);

}  // namespace detail

}  // namespace plrm
