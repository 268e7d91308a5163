#include "plrm/tuning.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace plrm {

namespace {
constexpr double rcond_gate = 1e-12;
}

TuningConfig::TuningConfig() {
    grid.reserve(101);
    for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
}

void TuningConfig::validate() const {
    if (grid.empty()) throw contract_error("TuningConfig: empty grid");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw contract_error("TuningConfig: grid must be sorted ascending");
    if (grid.front() < 0.0 || grid.back() > 1.0)
        throw contract_error("TuningConfig: grid must lie in [0, 1]");
    if (pilot_lambda < 0.0 || pilot_lambda > 1.0)
        throw contract_error("TuningConfig: pilot lambda must lie in [0, 1]");
}

Matrix model_robust_v_hat(const Dataset& data,
                          const Eigen::Ref<const Vector>& beta_hat,
                          double lambda) {
    return omega_matrix(data, beta_hat, lambda);
}

Matrix model_robust_j_hat(const Dataset& data,
                          const Eigen::Ref<const Vector>& beta_hat,
                          double lambda) {
    if (beta_hat.size() != data.dims.nu())
        throw contract_error("model_robust_j_hat: beta has wrong length");
    const int d = data.dims.d;
    const int cols = data.dims.n_columns();
    const int nu = data.dims.nu();
    const double n_eff = static_cast<double>(data.total_trials());

    Matrix j = (lambda + 1.0) * psi_matrix(data, beta_hat, lambda);
    Vector eta, pi;
    Vector u(nu);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        category_probabilities_into(data.X.row(i), beta_hat, data.dims, eta, pi);
        const Vector ps = pi.head(d);
        const Matrix delta = Matrix(ps.asDiagonal()) - ps * ps.transpose();
        const Matrix xxT = data.X.row(i).transpose() * data.X.row(i);
        double s1 = 0.0;
        for (int c = 0; c <= d; ++c) s1 += std::pow(pi[c], lambda + 1.0);
        // + Delta(pi*) (sum_j pi_j^{lambda+1}) kron x x^T, once per trial
        const double w_model = data.trials[i] * s1 / n_eff;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                j.block(a * cols, b * cols, cols, cols) += w_model * delta(a, b) * xxT;
        // - { lambda u u^T + Delta kron x x^T } f^lambda per observed trial
        for (int c = 0; c <= d; ++c) {
            const int count = data.Y(i, c);
            if (count == 0) continue;
            const double f_lam = std::pow(pi[c], lambda);
            const double w = count * f_lam / n_eff;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    j.block(a * cols, b * cols, cols, cols) -= w * delta(a, b) * xxT;
            if (lambda != 0.0) {
                u.setZero();
                for (int v = 0; v < d; ++v) {
                    const double resid = (v == c ? 1.0 : 0.0) - ps[v];
                    u.segment(v * cols, cols) = resid * data.X.row(i).transpose();
                }
                j.noalias() -= (lambda * w) * (u * u.transpose());
            }
        }
    }
    return 0.5 * (j + j.transpose());
}

MseEstimate estimated_mse(const Dataset& data, double lambda,
                          const Eigen::Ref<const Vector>& pilot_beta,
                          const Eigen::Ref<const Vector>& beta_hat) {
    MseEstimate out;
    const Vector diff = beta_hat - pilot_beta;
    out.bias_sq = diff.squaredNorm();
    const Matrix j = model_robust_j_hat(data, beta_hat, lambda);
    const Matrix v = model_robust_v_hat(data, beta_hat, lambda);
    Eigen::SelfAdjointEigenSolver<Matrix> es(j);
    const Vector ev = es.eigenvalues();
    const double hi = ev.cwiseAbs().maxCoeff();
    const double lo = ev.cwiseAbs().minCoeff();
    if (hi == 0.0 || lo / hi < rcond_gate) {
        out.j_singular = true;
        return out;
    }
    const Matrix jinv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                        es.eigenvectors().transpose();
    out.variance =
        (jinv * v * jinv).trace() / static_cast<double>(data.total_trials());
    out.mse = out.bias_sq + out.variance;
    return out;
}

MseEstimate estimated_mse(const Dataset& data, double lambda,
                          const Eigen::Ref<const Vector>& pilot_beta) {
    FitOptions opts;
    opts.compute_matrices = false;
    const FitResult fit = fit_mdpde(data, lambda, opts);
    return estimated_mse(data, lambda, pilot_beta, fit.beta_hat);
}

TuningTrace select_lambda(const Dataset& data, const TuningConfig& cfg,
                          const FitOptions& base_opts) {
    cfg.validate();
    TuningTrace trace;
    trace.pilot_lambda = cfg.pilot_lambda;

    FitOptions opts = base_opts;
    opts.grouped_scaling = cfg.grouped_scaling;
    opts.compute_matrices = false;

    FitOptions pilot_opts = opts;
    const FitResult pilot = fit_mdpde(data, cfg.pilot_lambda, pilot_opts);
    if (!pilot.converged)
        throw tuning_failed("select_lambda: pilot fit did not converge");
    trace.beta_pilot = pilot.beta_hat;

    bool have_best = false;
    double best_mse = 0.0;
    Vector warm;  // last converged estimate along the ascending sweep
    for (double lam : cfg.grid) {
        TuningRecord rec;
        rec.lambda = lam;
        FitOptions fit_opts = opts;
        if (warm.size() > 0) fit_opts.init = warm;
        const FitResult fit = fit_mdpde(data, lam, fit_opts);
        rec.converged = fit.converged;
        rec.beta = fit.beta_hat;
        if (!fit.converged) {
            rec.skipped = true;
        } else {
            warm = fit.beta_hat;
            const MseEstimate est =
                estimated_mse(data, lam, trace.beta_pilot, fit.beta_hat);
            if (est.j_singular) {
                rec.skipped = true;
            } else {
                rec.bias_sq = est.bias_sq;
                rec.variance = est.variance;
                rec.mse = est.mse;
            }
        }
        if (!rec.skipped && (!have_best || rec.mse < best_mse)) {
            have_best = true;
            best_mse = rec.mse;
            trace.lambda_opt = rec.lambda;
            trace.beta_opt = rec.beta;
        }
        trace.records.push_back(std::move(rec));
    }
    if (!have_best)
        throw tuning_failed("select_lambda: every grid point was skipped");
    return trace;
}

}  // namespace plrm
