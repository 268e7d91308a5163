#include "plrm/divergence.hpp"

#include <cmath>

namespace plrm {

namespace detail {

void score_kernel(const Vector& pi, const Eigen::Ref<const Vector>& y,
                  double n_trials, double lambda, Vector& out) {
    const Eigen::Index d = pi.size() - 1;
    double s1 = 0.0;
    for (Eigen::Index j = 0; j <= d; ++j) s1 += std::pow(pi[j], lambda + 1.0);
    out.resize(d);
    for (Eigen::Index v = 0; v < d; ++v)
        out[v] = -n_trials * (std::pow(pi[v], lambda + 1.0) - s1 * pi[v]);
    for (Eigen::Index l = 0; l <= d; ++l) {
        if (y[l] == 0.0) continue;
        const double w = y[l] * std::pow(pi[l], lambda);
        for (Eigen::Index v = 0; v < d; ++v) out[v] -= w * pi[v];
        if (l < d) out[l] += w;
    }
}

double row_objective_grad(const Eigen::Ref<const Vector>& x,
                          const Eigen::Ref<const IVector>& y, int n_trials,
                          const Vector& pi, double lambda, bool grouped_scaling,
                          Vector* u_accum, const ModelDims& dims) {
    const int cats = dims.n_categories();
    double value = 0.0;
    if (lambda == 0.0) {
        for (int l = 0; l < cats; ++l)
            if (y[l] > 0) value += y[l] * std::log(y[l] / (n_trials * pi[l]));
    } else if (grouped_scaling && n_trials > 1) {
        const double c = 1.0 + 1.0 / lambda;
        for (int l = 0; l < cats; ++l) {
            const double np = n_trials * pi[l];
            value += std::pow(np, 1.0 + lambda) - c * y[l] * std::pow(np, lambda);
        }
    } else {
        const double c = 1.0 + 1.0 / lambda;
        for (int l = 0; l < cats; ++l)
            value += n_trials * std::pow(pi[l], 1.0 + lambda) -
                     c * y[l] * std::pow(pi[l], lambda);
    }
    if (u_accum) {
        Vector kernel;
        score_kernel(pi, y.cast<double>(), n_trials, lambda, kernel);
        double factor = 1.0;
        if (grouped_scaling && n_trials > 1) factor = std::pow(n_trials, lambda);
        const int cols = dims.n_columns();
        for (int v = 0; v < dims.d; ++v)
            u_accum->segment(v * cols, cols) += factor * kernel[v] * x;
    }
    return value;
}

}  // namespace detail

double dpd_row(const Eigen::Ref<const IVector>& y,
               const Eigen::Ref<const Vector>& pi, double lambda,
               bool grouped_scaling) {
    if (y.size() != pi.size()) throw contract_error("dpd_row: length mismatch");
    if (!(lambda > 0.0))
        throw contract_error("dpd_row: lambda must be positive; use kl_row at lambda = 0");
    const int n = y.sum();
    ModelDims dims(0, static_cast<int>(pi.size()) - 1);
    return detail::row_objective_grad(Vector::Ones(1), y, n, pi, lambda,
                                      grouped_scaling, nullptr, dims);
}

double kl_row(const Eigen::Ref<const IVector>& y,
              const Eigen::Ref<const Vector>& pi) {
    if (y.size() != pi.size()) throw contract_error("kl_row: length mismatch");
    const int n = y.sum();
    double value = 0.0;
    for (Eigen::Index l = 0; l < y.size(); ++l)
        if (y[l] > 0) value += y[l] * std::log(y[l] / (n * pi[l]));
    return value;
}

double dpd_objective(const Dataset& data, const Eigen::Ref<const Vector>& beta,
                     const DpdConfig& cfg) {
    if (beta.size() != data.dims.nu())
        throw contract_error("dpd_objective: beta has wrong length");
    Vector eta, pi;
    double sum = 0.0, comp = 0.0;  // Kahan
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        category_probabilities_into(data.X.row(i), beta, data.dims, eta, pi);
        const double term = detail::row_objective_grad(
            data.X.row(i), data.Y.row(i), data.trials[i], pi, cfg.lambda,
            cfg.grouped_scaling, nullptr, data.dims);
        const double t = sum + term;
        if (std::fabs(sum) >= std::fabs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    }
    return sum + comp;
}

double reported_divergence(double objective, long long n_trials, double lambda) {
    return objective / std::pow(static_cast<double>(n_trials), lambda + 1.0);
}

Vector estimating_function(const Dataset& data,
                           const Eigen::Ref<const Vector>& beta, double lambda,
                           bool grouped_scaling) {
    if (beta.size() != data.dims.nu())
        throw contract_error("estimating_function: beta has wrong length");
    if (lambda < 0.0) throw contract_error("estimating_function: lambda must be >= 0");
    Vector u = Vector::Zero(data.dims.nu());
    Vector eta, pi;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        category_probabilities_into(data.X.row(i), beta, data.dims, eta, pi);
        detail::row_objective_grad(data.X.row(i), data.Y.row(i), data.trials[i],
                                   pi, lambda, grouped_scaling, &u, data.dims);
    }
    return u;
}

}  // namespace plrm
