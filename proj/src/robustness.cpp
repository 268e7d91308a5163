#include "plrm/robustness.hpp"

#include <Eigen/Eigenvalues>

namespace plrm {

namespace {

constexpr double rcond_gate = 1e-12;

// (1/N) kron(score kernel at (x, t), x) for a single contamination point.
Vector contamination_term(const Eigen::Ref<const Vector>& beta0,
                          const Dataset& data, double lambda,
                          const ContaminationPoint& cp) {
    if (cp.row < 0 || cp.row >= data.rows())
        throw contract_error("influence: contamination row out of range");
    if (cp.t.size() != data.dims.n_categories())
        throw contract_error("influence: contamination point t has wrong length");
    Vector x = cp.x_override ? *cp.x_override : Vector(data.X.row(cp.row));
    if (x.size() != data.dims.n_columns())
        throw contract_error("influence: x_override has wrong length");
    const Vector pi = category_probabilities(x, beta0, data.dims);
    Vector kernel;
    detail::score_kernel(pi, cp.t, 1.0, lambda, kernel);
    const int cols = data.dims.n_columns();
    Vector out = Vector::Zero(data.dims.nu());
    for (int v = 0; v < data.dims.d; ++v)
        out.segment(v * cols, cols) = kernel[v] * x;
    return out / static_cast<double>(data.total_trials());
}

Vector solve_psi(const Matrix& psi, const Vector& rhs) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(psi);
    const Vector ev = es.eigenvalues();
    const double hi = ev.cwiseAbs().maxCoeff();
    const double lo = ev.cwiseAbs().minCoeff();
    const double rcond = hi == 0.0 ? 0.0 : lo / hi;
    if (rcond < rcond_gate)
        throw singular_information("influence: Psi reciprocal condition " +
                                       std::to_string(rcond) + " below 1e-12",
                                   rcond);
    return es.eigenvectors() *
           (ev.cwiseInverse().asDiagonal() *
            (es.eigenvectors().transpose() * rhs));
}

double quadratic_form(const Eigen::Ref<const Vector>& beta0,
                      const Dataset& data, double lambda,
                      const LinearHypothesis& hyp, const Vector& inf) {
    const Vector null_resid = hyp.L.transpose() * beta0 - hyp.h;
    if (null_resid.lpNorm<Eigen::Infinity>() > 1e-8)
        throw contract_error("second_order_if_test: beta0 does not satisfy the null");
    const Matrix m = sigma_at(data, beta0, lambda);
    const Matrix lml = hyp.L.transpose() * m * hyp.L;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (lml + lml.transpose()));
    const Vector ev = es.eigenvalues();
    const double hi = ev.cwiseAbs().maxCoeff();
    const double lo = ev.cwiseAbs().minCoeff();
    const double rcond = hi == 0.0 ? 0.0 : lo / hi;
    if (rcond < rcond_gate)
        throw singular_contrast("second_order_if_test: L^T M L reciprocal condition " +
                                    std::to_string(rcond) + " below 1e-12",
                                rcond);
    const Vector proj = hyp.L.transpose() * inf;
    const Vector solved = es.eigenvectors() *
                          (ev.cwiseInverse().asDiagonal() *
                           (es.eigenvectors().transpose() * proj));
    double value = 2.0 * proj.dot(solved);
    return value < 0.0 ? 0.0 : value;
}

}  // namespace

Vector if_single_index(const Eigen::Ref<const Vector>& beta0,
                       const Dataset& data, double lambda,
                       const ContaminationPoint& cp) {
    const Matrix psi = psi_matrix(data, beta0, lambda);
    return solve_psi(psi, contamination_term(beta0, data, lambda, cp));
}

Vector if_all_indices(const Eigen::Ref<const Vector>& beta0,
                      const Dataset& data, double lambda,
                      const std::vector<ContaminationPoint>& points) {
    Vector rhs = Vector::Zero(data.dims.nu());
    for (const auto& cp : points)
        rhs += contamination_term(beta0, data, lambda, cp);
    const Matrix psi = psi_matrix(data, beta0, lambda);
    return solve_psi(psi, rhs);
}

double second_order_if_test(const Eigen::Ref<const Vector>& beta0,
                            const Dataset& data, double lambda,
                            const LinearHypothesis& hyp,
                            const ContaminationPoint& cp) {
    const Vector inf = if_single_index(beta0, data, lambda, cp);
    return quadratic_form(beta0, data, lambda, hyp, inf);
}

double second_order_if_test(const Eigen::Ref<const Vector>& beta0,
                            const Dataset& data, double lambda,
                            const LinearHypothesis& hyp,
                            const std::vector<ContaminationPoint>& points) {
    const Vector inf = if_all_indices(beta0, data, lambda, points);
    return quadratic_form(beta0, data, lambda, hyp, inf);
}

}  // namespace plrm
