#pragma once

#include <optional>
#include <vector>

#include "plrm/inference.hpp"

namespace plrm {

/// Contamination at one observation index: a response point t in the sample
/// space (unit vector; fractional probes are allowed in diagnostics) and an
/// optional covariate override for leverage-ray probes.
struct ContaminationPoint {
    Eigen::Index row = 0;
    Vector t;  // length d+1
    std::optional<Vector> x_override;
};

/// First-order influence function of the estimator functional under
/// contamination at a single index.
Vector if_single_index(const Eigen::Ref<const Vector>& beta0,
                       const Dataset& data, double lambda,
                       const ContaminationPoint& cp);

/// Influence function when every listed index is contaminated (rows not
/// listed contribute a vanishing residual term).
Vector if_all_indices(const Eigen::Ref<const Vector>& beta0,
                      const Dataset& data, double lambda,
                      const std::vector<ContaminationPoint>& points);

/// Second-order influence function of the Wald-type test functional at a
/// null parameter value: 2 IF^T L (L^T M L)^-1 L^T IF. The first-order test
/// influence vanishes at the null.
double second_order_if_test(const Eigen::Ref<const Vector>& beta0,
                            const Dataset& data, double lambda,
                            const LinearHypothesis& hyp,
                            const ContaminationPoint& cp);

double second_order_if_test(const Eigen::Ref<const Vector>& beta0,
                            const Dataset& data, double lambda,
                            const LinearHypothesis& hyp,
                            const std::vector<ContaminationPoint>& points);

}  // namespace plrm
