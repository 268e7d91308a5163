#include "plrm/model.hpp"

#include <cmath>

namespace plrm {

void Dataset::validate() const {
    if (X.rows() != Y.rows() || X.rows() != trials.size())
        throw contract_error("Dataset: X, Y and trials row counts differ");
    if (X.rows() < 1) throw contract_error("Dataset: need at least one row");
    if (X.cols() != dims.n_columns())
        throw contract_error("Dataset: X has " + std::to_string(X.cols()) +
                             " columns, dims expect " + std::to_string(dims.n_columns()));
    if (Y.cols() != dims.n_categories())
        throw contract_error("Dataset: Y has " + std::to_string(Y.cols()) +
                             " columns, dims expect " + std::to_string(dims.n_categories()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (X(i, 0) != 1.0)
            throw contract_error("Dataset: row " + std::to_string(i) + " lacks the intercept 1");
        if (Y.row(i).sum() != trials(i) || trials(i) < 1)
            throw contract_error("Dataset: row " + std::to_string(i) +
                                 " counts do not sum to its trial count");
    }
}

std::string coefficient_name(const Dataset& data, int flat_index) {
    const int cols = data.dims.n_columns();
    const int cat = flat_index / cols;
    const int cov = flat_index % cols;
    std::string level = cat < static_cast<int>(data.level_names.size())
                            ? data.level_names[cat]
                            : "cat" + std::to_string(cat + 1);
    std::string col = cov < static_cast<int>(data.column_names.size())
                          ? data.column_names[cov]
                          : "x" + std::to_string(cov);
    return level + ":" + col;
}

namespace detail {

void softmax(const Vector& eta_full, Vector& pi_out) {
    const Eigen::Index m = eta_full.size();
    pi_out.resize(m);
    const double shift = eta_full.maxCoeff();
    double denom = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        pi_out[j] = std::exp(eta_full[j] - shift);
        denom += pi_out[j];
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        pi_out[j] /= denom;
        if (pi_out[j] < min_probability) pi_out[j] = min_probability;
    }
}

void linear_predictors(const Eigen::Ref<const Vector>& x,
                       const Eigen::Ref<const Vector>& beta,
                       const ModelDims& dims, Vector& eta_out) {
    const int cols = dims.n_columns();
    eta_out.resize(dims.n_categories());
    for (int c = 0; c < dims.d; ++c)
        eta_out[c] = x.dot(beta.segment(c * cols, cols));
    eta_out[dims.d] = 0.0;
}

}  // namespace detail

void category_probabilities_into(const Eigen::Ref<const Vector>& x,
                                 const Eigen::Ref<const Vector>& beta,
                                 const ModelDims& dims, Vector& eta_scratch,
                                 Vector& pi) {
    detail::linear_predictors(x, beta, dims, eta_scratch);
    detail::softmax(eta_scratch, pi);
}

Vector category_probabilities(const Eigen::Ref<const Vector>& x,
                              const Eigen::Ref<const Vector>& beta,
                              const ModelDims& dims) {
    if (x.size() != dims.n_columns())
        throw contract_error("category_probabilities: x has wrong length");
    if (beta.size() != dims.nu())
        throw contract_error("category_probabilities: beta has wrong length");
    Vector eta, pi;
    category_probabilities_into(x, beta, dims, eta, pi);
    return pi;
}

Matrix probability_jacobian(const Eigen::Ref<const Vector>& x,
                            const Eigen::Ref<const Vector>& beta,
                            const ModelDims& dims) {
    if (x.size() != dims.n_columns())
        throw contract_error("probability_jacobian: x has wrong length");
    if (beta.size() != dims.nu())
        throw contract_error("probability_jacobian: beta has wrong length");
    const Vector pi = category_probabilities(x, beta, dims);
    const int cols = dims.n_columns();
    Matrix jac = Matrix::Zero(dims.nu(), dims.n_categories());
    for (int j = 0; j < dims.n_categories(); ++j) {
        for (int v = 0; v < dims.d; ++v) {
            const double factor = pi[j] * ((j == v ? 1.0 : 0.0) - pi[v]);
            jac.block(v * cols, j, cols, 1) = factor * x;
        }
    }
    return jac;
}

double log_pmf(const Eigen::Ref<const IVector>& y,
               const Eigen::Ref<const Vector>& pi,
               bool include_coefficient) {
    if (y.size() != pi.size()) throw contract_error("log_pmf: length mismatch");
    double value = 0.0;
    int n = 0;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        if (y[j] < 0) throw contract_error("log_pmf: negative count");
        if (y[j] > 0) value += y[j] * std::log(pi[j]);
        n += y[j];
    }
    if (include_coefficient && n > 1) {
        value += std::lgamma(n + 1.0);
        for (Eigen::Index j = 0; j < y.size(); ++j)
            value -= std::lgamma(y[j] + 1.0);
    }
    return value;
}

}  // namespace plrm
