#pragma once

#include <map>

#include "plrm/estimator.hpp"

namespace plrm {

/// Linear hypothesis L^T beta = h with L of full column rank r.
struct LinearHypothesis {
    Matrix L;  // nu x r
    Vector h;  // r

    LinearHypothesis(Matrix L_, Vector h_);
    int r() const { return static_cast<int>(L.cols()); }

    /// Sugar for H0: beta_i = value.
    static LinearHypothesis single_coefficient(int nu, int flat_index, double value);
};

struct WaldResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    std::map<double, bool> reject_at;  // alpha -> decision at 0.10 / 0.05 / 0.01
};

/// Quadratic form q_{beta1}(Sigma) = (L^T beta1 - h)^T {L^T Sigma L}^-1 (L^T beta1 - h).
/// The evaluation point of Sigma is the caller's choice (kept explicit).
double hypothesis_quadratic(const LinearHypothesis& hyp,
                            const Eigen::Ref<const Vector>& beta,
                            const Matrix& sigma);

/// M_{N,lambda}(beta) evaluated at an explicit beta.
Matrix sigma_at(const Dataset& data, const Eigen::Ref<const Vector>& beta,
                double lambda);

/// W_N = N (L^T beta_hat - h)^T {L^T M L}^-1 (L^T beta_hat - h) with the
/// chi-square(r) p-value.
WaldResult wald_statistic(const FitResult& fit, const LinearHypothesis& hyp);

/// First-order power approximation at a fixed alternative beta_star with
/// covariance scale sigma evaluated at beta_star.
double approximate_power(const LinearHypothesis& hyp,
                         const Eigen::Ref<const Vector>& beta_star,
                         const Matrix& sigma, double n, double alpha);

/// Smallest integer N whose approximate power reaches target_power
/// (exact inversion of the power approximation).
long long required_sample_size(const LinearHypothesis& hyp,
                               const Eigen::Ref<const Vector>& beta_star,
                               const Matrix& sigma, double alpha,
                               double target_power);

enum class DirectionKind { shift, contrast };  // d in parameter space vs delta = L^T d

/// Asymptotic power under contiguous alternatives beta_0 + d / sqrt(N)
/// (or L^T beta_N = h - delta / sqrt(N)): noncentral chi-square survival at
/// the central critical value.
double contiguous_power(const LinearHypothesis& hyp,
                        const Eigen::Ref<const Vector>& beta0,
                        const Eigen::Ref<const Vector>& direction,
                        DirectionKind kind, double alpha, const Matrix& sigma);

}  // namespace plrm
