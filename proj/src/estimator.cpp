#include "plrm/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

namespace plrm {

namespace {

constexpr double rcond_gate = 1e-12;

// out += weight * kron(K, x x^T) in the category-major layout.
void accumulate_kron(Matrix& out, const Matrix& K, const Matrix& xxT,
                     double weight, int cols) {
    const int d = static_cast<int>(K.rows());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            out.block(a * cols, b * cols, cols, cols) += weight * K(a, b) * xxT;
}

enum class Kind { psi, omega };

Matrix expanded_matrix(const Dataset& data, const Eigen::Ref<const Vector>& beta,
                       double lambda, Kind kind) {
    if (beta.size() != data.dims.nu())
        throw contract_error("psi/omega: beta has wrong length");
    const int d = data.dims.d;
    const int cols = data.dims.n_columns();
    Matrix out = Matrix::Zero(data.dims.nu(), data.dims.nu());
    Vector eta, pi;
    Matrix K(d, d), xxT(cols, cols);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        category_probabilities_into(data.X.row(i), beta, data.dims, eta, pi);
        const Vector ps = pi.head(d);
        if (kind == Kind::psi) {
            double s1 = 0.0;
            for (int j = 0; j <= d; ++j) s1 += std::pow(pi[j], lambda + 1.0);
            const Vector a = ps.array().pow(lambda + 1.0).matrix();
            K = Matrix(a.asDiagonal());
            K.noalias() -= a * ps.transpose();
            K.noalias() -= ps * a.transpose();
            K.noalias() += s1 * ps * ps.transpose();
        } else {
            double s1 = 0.0, s2 = 0.0;
            for (int j = 0; j <= d; ++j) {
                s1 += std::pow(pi[j], lambda + 1.0);
                s2 += std::pow(pi[j], 2.0 * lambda + 1.0);
            }
            const Vector a = ps.array().pow(lambda + 1.0).matrix();
            const Vector b = ps.array().pow(2.0 * lambda + 1.0).matrix();
            const Vector xi = a - s1 * ps;
            K = Matrix(b.asDiagonal());
            K.noalias() -= b * ps.transpose();
            K.noalias() -= ps * b.transpose();
            K.noalias() += s2 * ps * ps.transpose();
            K.noalias() -= xi * xi.transpose();
        }
        xxT.noalias() = data.X.row(i).transpose() * data.X.row(i);
        accumulate_kron(out, K, xxT, static_cast<double>(data.trials[i]), cols);
    }
    out /= static_cast<double>(data.total_trials());
    return out;
}

Matrix compact_matrix(const Dataset& data, const Eigen::Ref<const Vector>& beta,
                      double lambda, Kind kind) {
    if (beta.size() != data.dims.nu())
        throw contract_error("psi/omega compact: beta has wrong length");
    const int d = data.dims.d;
    const int cols = data.dims.n_columns();
    Matrix out = Matrix::Zero(data.dims.nu(), data.dims.nu());
    Vector eta, pi;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        category_probabilities_into(data.X.row(i), beta, data.dims, eta, pi);
        const Matrix delta =
            Matrix(pi.asDiagonal()) - pi * pi.transpose();
        const Matrix dl = pi.array().pow(lambda - 1.0).matrix().asDiagonal();
        Matrix full = delta * dl * delta;
        if (kind == Kind::omega) full = full * dl * delta;
        const Matrix K = full.topLeftCorner(d, d);
        const Matrix xxT = data.X.row(i).transpose() * data.X.row(i);
        accumulate_kron(out, K, xxT, static_cast<double>(data.trials[i]), cols);
    }
    out /= static_cast<double>(data.total_trials());
    return out;
}

}  // namespace

const Matrix& FitResult::covariance_scale() const {
    if (!sandwich_ok)
        throw singular_information("FitResult: Psi is numerically singular", psi_rcond);
    return sandwich;
}

void check_design_rank(const Dataset& data) {
    Eigen::ColPivHouseholderQR<Matrix> qr(data.X);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    const int cols = data.dims.n_columns();
    if (rank >= cols) return;
    std::string names;
    const auto perm = qr.colsPermutation().indices();
    for (int j = rank; j < cols; ++j) {
        const int col = perm[j];
        if (!names.empty()) names += ", ";
        names += col < static_cast<int>(data.column_names.size())
                     ? data.column_names[col]
                     : "column " + std::to_string(col);
    }
    throw contract_error("design matrix is rank deficient; collinear: " + names);
}

Matrix psi_matrix(const Dataset& data, const Eigen::Ref<const Vector>& beta,
                  double lambda) {
    return expanded_matrix(data, beta, lambda, Kind::psi);
}

Matrix omega_matrix(const Dataset& data, const Eigen::Ref<const Vector>& beta,
                    double lambda) {
    return expanded_matrix(data, beta, lambda, Kind::omega);
}

Matrix psi_matrix_compact(const Dataset& data,
                          const Eigen::Ref<const Vector>& beta, double lambda) {
    return compact_matrix(data, beta, lambda, Kind::psi);
}

Matrix omega_matrix_compact(const Dataset& data,
                            const Eigen::Ref<const Vector>& beta, double lambda) {
    return compact_matrix(data, beta, lambda, Kind::omega);
}

double reciprocal_condition(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    const double lo = es.eigenvalues().cwiseAbs().minCoeff();
    if (hi == 0.0) return 0.0;
    return lo / hi;
}

Matrix sandwich_covariance(const Matrix& psi, const Matrix& omega) {
    if (psi.rows() != psi.cols() || omega.rows() != omega.cols() ||
        psi.rows() != omega.rows())
        throw contract_error("sandwich_covariance: shape mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(psi);
    const Vector ev = es.eigenvalues();
    const double hi = ev.cwiseAbs().maxCoeff();
    const double lo = ev.cwiseAbs().minCoeff();
    const double rcond = hi == 0.0 ? 0.0 : lo / hi;
    if (rcond < rcond_gate)
        throw singular_information("sandwich_covariance: Psi reciprocal condition " +
                                       std::to_string(rcond) + " below 1e-12",
                                   rcond);
    const Matrix inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                       es.eigenvectors().transpose();
    Matrix m = inv * omega * inv;
    return 0.5 * (m + m.transpose());
}

FitResult fit_mdpde(const Dataset& data, double lambda, FitOptions opts) {
    data.validate();
    if (lambda < 0.0 || lambda > 2.0)
        throw contract_error("fit_mdpde: lambda must lie in [0, 2]");
    check_design_rank(data);

    const int nu = data.dims.nu();
    const double n_eff = static_cast<double>(data.total_trials());
    const DpdConfig cfg(lambda, opts.grouped_scaling);

    Vector beta = opts.init.size() == 0 ? Vector::Zero(nu) : opts.init;
    if (beta.size() != nu) throw contract_error("fit_mdpde: init has wrong length");

    Vector eta, pi;
    auto eval = [&](const Vector& b, Vector* grad) {
        if (grad) grad->setZero();
        double sum = 0.0, comp = 0.0;
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            category_probabilities_into(data.X.row(i), b, data.dims, eta, pi);
            const double term = detail::row_objective_grad(
                data.X.row(i), data.Y.row(i), data.trials[i], pi, lambda,
                opts.grouped_scaling, grad, data.dims);
            const double t = sum + term;
            if (std::fabs(sum) >= std::fabs(term))
                comp += (sum - t) + term;
            else
                comp += (term - t) + sum;
            sum = t;
        }
        // grad accumulates u_lambda; the objective gradient is -(lambda+1) u.
        if (grad) *grad *= -(lambda + 1.0);
        return sum + comp;
    };

    FitResult result;
    result.lambda = lambda;
    result.n_trials = data.total_trials();

    Vector grad(nu), grad_new(nu);
    double f = eval(beta, &grad);
    Matrix H = Matrix::Identity(nu, nu);
    bool first_update = true;
    int iter = 0;
    bool converged = grad.lpNorm<Eigen::Infinity>() / ((lambda + 1.0) * n_eff) <
                     opts.grad_tol;

    while (!converged && iter < opts.max_iter) {
        ++iter;
        Vector direction = -(H * grad);
        double slope = direction.dot(grad);
        if (!(slope < 0.0)) {  // reset to steepest descent
            H.setIdentity();
            first_update = true;
            direction = -grad;
            slope = direction.dot(grad);
            if (!(slope < 0.0)) break;  // zero gradient
        }
        double t = 1.0;
        double f_new = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            f_new = eval(beta + t * direction, nullptr);
            if (std::isfinite(f_new) && f_new <= f + opts.armijo_c1 * t * slope) {
                accepted = true;
                break;
            }
            t *= opts.backtrack;
        }
        if (!accepted) break;
        const Vector step = t * direction;
        beta += step;
        f = eval(beta, &grad_new);

        if (grad_new.lpNorm<Eigen::Infinity>() / ((lambda + 1.0) * n_eff) <
                opts.grad_tol ||
            step.lpNorm<Eigen::Infinity>() < opts.step_tol) {
            converged = true;
            grad = grad_new;
            break;
        }
        const Vector yv = grad_new - grad;
        const double sy = step.dot(yv);
        if (sy > 1e-12 * step.norm() * yv.norm()) {
            if (first_update) {
                H = (sy / yv.squaredNorm()) * Matrix::Identity(nu, nu);
                first_update = false;
            }
            const Vector Hy = H * yv;
            const double yHy = yv.dot(Hy);
            H += ((sy + yHy) / (sy * sy)) * (step * step.transpose());
            const Matrix cross = Hy * step.transpose();
            H -= (cross + cross.transpose()) / sy;
        }
        grad = grad_new;
    }

    result.beta_hat = beta;
    result.objective = f;
    result.divergence = reported_divergence(f, result.n_trials, lambda);
    result.converged = converged;
    result.iterations = iter;

    if (opts.compute_matrices) {
        result.psi = psi_matrix(data, beta, lambda);
        result.omega = omega_matrix(data, beta, lambda);
        result.psi_rcond = reciprocal_condition(result.psi);
        if (result.psi_rcond >= rcond_gate) {
            result.sandwich = sandwich_covariance(result.psi, result.omega);
            result.se = (result.sandwich.diagonal() / n_eff).cwiseMax(0.0).cwiseSqrt();
            result.sandwich_ok = true;
        }
    }
    return result;
}

}  // namespace plrm
