#pragma once

#include "plrm/divergence.hpp"

namespace plrm {

struct FitOptions {
    Vector init;  // empty = zero vector
    int max_iter = 500;
    double grad_tol = 1e-8;   // inf-norm of estimating_function / N
    double step_tol = 1e-10;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    bool grouped_scaling = true;
    bool compute_matrices = true;
};

struct FitResult {
    Vector beta_hat;
    double lambda = 0.0;
    double objective = 0.0;    // minimized sum, no 1/N^(lambda+1)
    double divergence = 0.0;   // normalized for reporting
    bool converged = false;
    int iterations = 0;
    long long n_trials = 0;
    Matrix psi;
    Matrix omega;
    Matrix sandwich;           // Psi^-1 Omega Psi^-1, symmetrized
    Vector se;                 // sqrt(sandwich_ii / N)
    bool sandwich_ok = false;
    double psi_rcond = 0.0;

    /// Sandwich accessor that enforces the invertibility gate.
    const Matrix& covariance_scale() const;
};

/// Raises contract_error naming the collinear columns when the design
/// matrix is rank deficient.
void check_design_rank(const Dataset& data);

/// Minimizes the DPD objective (KL branch at lambda = 0) by BFGS with the
/// analytic gradient and Armijo backtracking. Non-convergence yields
/// converged = false, never a hard failure.
FitResult fit_mdpde(const Dataset& data, double lambda, FitOptions opts = {});

/// Psi_{N,lambda}(beta): per-row blocks in the elementwise-expanded form
///   diag^{l+1}{pi*} - pi*^(l+1) pi*^T - pi* pi*^(l+1)T + (sum_j pi_j^(l+1)) pi* pi*^T
/// Kronecker'd with x x^T, averaged over trials. Stable for clamped
/// probabilities (only nonnegative powers appear).
Matrix psi_matrix(const Dataset& data, const Eigen::Ref<const Vector>& beta,
                  double lambda);

/// Omega_{N,lambda}(beta), expanded form (includes the -xi xi^T centering).
Matrix omega_matrix(const Dataset& data, const Eigen::Ref<const Vector>& beta,
                    double lambda);

/// Matrix-product route for Psi: (I_d,0) Delta(pi) diag^{l-1}{pi} Delta(pi) (I_d,0)^T
/// on the full probability vector. Kept as an independent algebraic route for
/// cross-checking the expanded form.
Matrix psi_matrix_compact(const Dataset& data,
                          const Eigen::Ref<const Vector>& beta, double lambda);

/// Triple-Delta matrix-product route for Omega.
Matrix omega_matrix_compact(const Dataset& data,
                            const Eigen::Ref<const Vector>& beta, double lambda);

/// Reciprocal condition number of a symmetric matrix (|eig|_min / |eig|_max).
double reciprocal_condition(const Matrix& sym);

/// M = Psi^-1 Omega Psi^-1, symmetrized. Throws singular_information when
/// rcond(Psi) < 1e-12.
Matrix sandwich_covariance(const Matrix& psi, const Matrix& omega);

}  // namespace plrm
