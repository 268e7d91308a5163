#include "plrm/inference.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "plrm/dist.hpp"

namespace plrm {

namespace {

constexpr double rcond_gate = 1e-12;

// Inverse of the r x r projected covariance with the singularity gate.
Matrix projected_inverse(const LinearHypothesis& hyp, const Matrix& sigma) {
    const Matrix lsl = hyp.L.transpose() * sigma * hyp.L;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (lsl + lsl.transpose()));
    const Vector ev = es.eigenvalues();
    const double hi = ev.cwiseAbs().maxCoeff();
    const double lo = ev.cwiseAbs().minCoeff();
    const double rcond = hi == 0.0 ? 0.0 : lo / hi;
    if (rcond < rcond_gate)
        throw singular_contrast("L^T Sigma L reciprocal condition " +
                                    std::to_string(rcond) + " below 1e-12",
                                rcond);
    return es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

}  // namespace

LinearHypothesis::LinearHypothesis(Matrix L_, Vector h_)
    : L(std::move(L_)), h(std::move(h_)) {
    if (L.rows() < L.cols() || L.cols() < 1)
        throw contract_error("LinearHypothesis: L must be nu x r with r <= nu");
    if (h.size() != L.cols())
        throw contract_error("LinearHypothesis: h has wrong length");
    Eigen::JacobiSVD<Matrix> svd(L);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 1e-10 * smax))
        throw contract_error("LinearHypothesis: L is not of full column rank");
}

LinearHypothesis LinearHypothesis::single_coefficient(int nu, int flat_index,
                                                      double value) {
    if (flat_index < 0 || flat_index >= nu)
        throw contract_error("single_coefficient: index out of range");
    Matrix L = Matrix::Zero(nu, 1);
    L(flat_index, 0) = 1.0;
    Vector h(1);
    h << value;
    return LinearHypothesis(std::move(L), std::move(h));
}

double hypothesis_quadratic(const LinearHypothesis& hyp,
                            const Eigen::Ref<const Vector>& beta,
                            const Matrix& sigma) {
    if (beta.size() != hyp.L.rows())
        throw contract_error("hypothesis_quadratic: beta has wrong length");
    const Vector resid = hyp.L.transpose() * beta - hyp.h;
    const Matrix inv = projected_inverse(hyp, sigma);
    return resid.dot(inv * resid);
}

Matrix sigma_at(const Dataset& data, const Eigen::Ref<const Vector>& beta,
                double lambda) {
    return sandwich_covariance(psi_matrix(data, beta, lambda),
                               omega_matrix(data, beta, lambda));
}

WaldResult wald_statistic(const FitResult& fit, const LinearHypothesis& hyp) {
    if (fit.beta_hat.size() != hyp.L.rows())
        throw contract_error("wald_statistic: hypothesis dimension mismatch");
    WaldResult out;
    out.df = hyp.r();
    const double q = hypothesis_quadratic(hyp, fit.beta_hat, fit.covariance_scale());
    out.statistic = static_cast<double>(fit.n_trials) * q;
    if (out.statistic < 0.0) out.statistic = 0.0;
    out.p_value = 1.0 - chisq_cdf(out.statistic, out.df);
    for (double alpha : {0.10, 0.05, 0.01})
        out.reject_at[alpha] = out.statistic > chisq_quantile(1.0 - alpha, out.df);
    return out;
}

double approximate_power(const LinearHypothesis& hyp,
                         const Eigen::Ref<const Vector>& beta_star,
                         const Matrix& sigma, double n, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw contract_error("approximate_power: alpha must lie in (0,1)");
    if (!(n > 0.0)) throw contract_error("approximate_power: need N > 0");
    const double q = hypothesis_quadratic(hyp, beta_star, sigma);
    if (!(q > 0.0))
        throw null_parameter_error("approximate_power: beta_star satisfies the null (q = 0)");
    const double sigma_l = 2.0 * std::sqrt(q);
    const double crit = chisq_quantile(1.0 - alpha, hyp.r());
    const double arg = (crit / std::sqrt(n) - std::sqrt(n) * q) / sigma_l;
    return 1.0 - normal_cdf(arg);
}

long long required_sample_size(const LinearHypothesis& hyp,
                               const Eigen::Ref<const Vector>& beta_star,
                               const Matrix& sigma, double alpha,
                               double target_power) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw contract_error("required_sample_size: alpha must lie in (0,1)");
    if (!(target_power > alpha && target_power < 1.0))
        throw contract_error("required_sample_size: target power must lie in (alpha, 1)");
    const double q = hypothesis_quadratic(hyp, beta_star, sigma);
    if (!(q > 0.0))
        throw null_parameter_error("required_sample_size: beta_star satisfies the null (q = 0)");
    const double sigma_l = 2.0 * std::sqrt(q);
    const double crit = chisq_quantile(1.0 - alpha, hyp.r());
    const double z = normal_quantile(1.0 - target_power);
    // Solve q N + z sigma sqrt(N) - crit = 0 for sqrt(N).
    const double root = (-z * sigma_l +
                         std::sqrt(z * z * sigma_l * sigma_l + 4.0 * q * crit)) /
                        (2.0 * q);
    const double n_star = root * root;
    return static_cast<long long>(std::floor(n_star)) + 1;
}

double contiguous_power(const LinearHypothesis& hyp,
                        const Eigen::Ref<const Vector>& beta0,
                        const Eigen::Ref<const Vector>& direction,
                        DirectionKind kind, double alpha, const Matrix& sigma) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw contract_error("contiguous_power: alpha must lie in (0,1)");
    if (beta0.size() != hyp.L.rows())
        throw contract_error("contiguous_power: beta0 has wrong length");
    const Vector null_resid = hyp.L.transpose() * beta0 - hyp.h;
    if (null_resid.lpNorm<Eigen::Infinity>() > 1e-8)
        throw contract_error("contiguous_power: beta0 does not satisfy the null");
    Vector delta;
    if (kind == DirectionKind::shift) {
        if (direction.size() != hyp.L.rows())
            throw contract_error("contiguous_power: d has wrong length");
        delta = hyp.L.transpose() * direction;
    } else {
        if (direction.size() != hyp.r())
            throw contract_error("contiguous_power: delta has wrong length");
        delta = direction;
    }
    const Matrix inv = projected_inverse(hyp, sigma);
    const double ncp = delta.dot(inv * delta);
    const double crit = chisq_quantile(1.0 - alpha, hyp.r());
    return 1.0 - noncentral_chisq_cdf(crit, hyp.r(), ncp);
}

}  // namespace plrm
