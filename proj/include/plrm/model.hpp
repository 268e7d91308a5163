#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "plrm/errors.hpp"

namespace plrm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IVector = Eigen::VectorXi;
using IMatrix = Eigen::MatrixXi;

/// Model dimensions: k non-intercept covariates, d non-baseline categories.
/// The flat parameter vector has length nu = d*(k+1), category-major:
/// beta[c*(k+1)+u] is the coefficient of covariate u (u=0: intercept) for
/// category c+1; the last category d+1 is the baseline and is never stored.
struct ModelDims {
    int k = 0;
    int d = 1;

    ModelDims() = default;
    ModelDims(int k_, int d_) : k(k_), d(d_) {
        if (k < 0 || d < 1) throw contract_error("ModelDims: need k >= 0, d >= 1");
    }
    int nu() const noexcept { return d * (k + 1); }
    int n_categories() const noexcept { return d + 1; }
    int n_columns() const noexcept { return k + 1; }
    int flat_index(int category, int covariate) const {
        return category * (k + 1) + covariate;
    }
};

/// Rows of covariates (first column identically 1) with tabulated
/// multinomial responses. trials(i) = Y.row(i).sum(); unit-trial rows have
/// trials(i) == 1 and a one-hot response.
struct Dataset {
    Matrix X;    // N x (k+1)
    IMatrix Y;   // N x (d+1) counts
    IVector trials;
    ModelDims dims;
    std::vector<std::string> column_names;   // size k+1, for diagnostics
    std::vector<std::string> level_names;    // size d+1, last = baseline

    Eigen::Index rows() const { return X.rows(); }
    long long total_trials() const { return trials.cast<long long>().sum(); }
    void validate() const;
};

/// Coefficient label "level:column" for the flat parameter index.
std::string coefficient_name(const Dataset& data, int flat_index);

namespace detail {

/// Stabilized softmax over the full predictor vector (baseline slot
/// included). Entries are clamped below at min_probability so that
/// negative powers stay finite downstream.
constexpr double min_probability = 1e-300;
void softmax(const Vector& eta_full, Vector& pi_out);

/// Fills eta_full = (x.beta_1, ..., x.beta_d, 0).
void linear_predictors(const Eigen::Ref<const Vector>& x,
                       const Eigen::Ref<const Vector>& beta,
                       const ModelDims& dims, Vector& eta_out);

}  // namespace detail

/// Category probabilities pi_j(x, beta), j = 1..d+1 (last = baseline).
Vector category_probabilities(const Eigen::Ref<const Vector>& x,
                              const Eigen::Ref<const Vector>& beta,
                              const ModelDims& dims);

/// In-place variant used by hot loops; pi must have length d+1.
void category_probabilities_into(const Eigen::Ref<const Vector>& x,
                                 const Eigen::Ref<const Vector>& beta,
                                 const ModelDims& dims, Vector& eta_scratch,
                                 Vector& pi);

/// nu x (d+1) matrix whose column j holds d pi_j / d beta in the flat
/// category-major layout: d pi_j / d beta_{uv} = x_u pi_j (delta_{jv} - pi_v).
Matrix probability_jacobian(const Eigen::Ref<const Vector>& x,
                            const Eigen::Ref<const Vector>& beta,
                            const ModelDims& dims);

/// Multinomial log pmf sum_j y_j log pi_j. The multinomial coefficient is
/// excluded by default (divergences never include it) and added only when
/// include_coefficient is set, for likelihood reporting on grouped rows.
double log_pmf(const Eigen::Ref<const IVector>& y,
               const Eigen::Ref<const Vector>& pi,
               bool include_coefficient = false);

}  // namespace plrm
