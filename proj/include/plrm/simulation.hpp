#pragma once

#include <string>
#include <vector>

#include "plrm/inference.hpp"
#include "plrm/rng.hpp"

namespace plrm {

/// Monte-Carlo design: unit-trial multinomial responses at beta_true with
/// standard-normal covariates, optionally contaminating the last p% of rows
/// by the cyclic category shift (categories 1..d+1 relabelled 2..d+1,1).
struct SimDesign {
    Vector beta_true;
    int N = 100;
    int k = 2;
    int d = 2;
    double contamination_pct = 0.0;  // p in [0, 100)
    std::uint64_t seed = 0;
    bool code_compat = false;  // reference-code block indexing and count permutation

    ModelDims dims() const { return ModelDims(k, d); }
    void validate() const;
};

/// Fresh covariates and pure responses for one replication.
Dataset generate_pure(const SimDesign& design, RngStream& rng);

/// Contaminated copy: default mode redraws the last ceil(p N / 100) rows
/// from the cyclically shifted probabilities; code-compat mode permutes the
/// existing counts over rows floor((1 - p/100) N) .. N (1-based).
Dataset contaminate(const Dataset& data, const SimDesign& design, RngStream& rng);

struct StudyCell {
    double lambda = 0.0;
    int N = 0;
    double value = 0.0;
    double std_error = 0.0;  // Monte-Carlo standard error of value
    int valid_replications = 0;
    int discarded = 0;
    Vector per_coordinate;  // per-coordinate MSE (mse studies only)
};

struct StudyResult {
    std::string metric;  // "mse" | "level" | "power"
    std::vector<StudyCell> cells;  // ordered by (N, lambda)

    std::string to_csv() const;
    std::string to_json() const;
};

int default_thread_count();

/// The counter-based stream a study uses for one replication cell. Purpose 0
/// draws the pure data, purpose 1 the contamination; exposed so single
/// replications can be reproduced outside the study loop.
RngStream replication_stream(std::uint64_t seed, std::size_t n_index, int rep,
                             int purpose);

/// Mean squared estimation error ||beta_hat - beta_true||^2 per (lambda, N),
/// with non-convergent or singular replications discarded and counted.
StudyResult mse_study(const SimDesign& design, const std::vector<double>& lambdas,
                      const std::vector<int>& n_grid, int reps, int threads = 0);

/// Rejection rate of the Wald-type test per (lambda, N) on data generated at
/// design.beta_true (empirical level when the null holds there).
StudyResult level_study(const SimDesign& design, const std::vector<double>& lambdas,
                        const std::vector<int>& n_grid, int reps,
                        const LinearHypothesis& hyp, double alpha,
                        int threads = 0);

/// Same engine with design.beta_true violating the null: empirical power.
StudyResult power_study(const SimDesign& design, const std::vector<double>& lambdas,
                        const std::vector<int>& n_grid, int reps,
                        const LinearHypothesis& hyp, double alpha,
                        int threads = 0);

}  // namespace plrm
