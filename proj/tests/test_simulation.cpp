#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "plrm/rng.hpp"
#include "plrm/simulation.hpp"

using namespace plrm;

namespace {

SimDesign protocol_design(int n, double contamination, std::uint64_t seed) {
    SimDesign design;
    design.beta_true = oracle::protocol_beta();
    design.N = n;
    design.contamination_pct = contamination;
    design.seed = seed;
    return design;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
    const SimDesign design = protocol_design(50, 0.0, 9);
    RngStream a(design.seed, 0), b(design.seed, 0);
    const Dataset d1 = generate_pure(design, a);
    const Dataset d2 = generate_pure(design, b);
    CHECK(d1.X == d2.X);
    CHECK(d1.Y == d2.Y);
}

TEST_CASE("law of large numbers for generated frequencies") {
    SUBCASE("zero parameters give uniform thirds") {
        SimDesign design = protocol_design(100000, 0.0, 3);
        design.beta_true = Vector::Zero(6);
        RngStream rng(design.seed, 0);
        const Dataset data = generate_pure(design, rng);
        for (int j = 0; j < 3; ++j) {
            const double freq = data.Y.col(j).sum() / 100000.0;
            CHECK(std::fabs(freq - 1.0 / 3) < 0.01);
        }
    }

    SUBCASE("protocol parameters match the mean model probabilities") {
        const SimDesign design = protocol_design(100000, 0.0, 4);
        RngStream rng(design.seed, 0);
        const Dataset data = generate_pure(design, rng);
        Vector mean_pi = Vector::Zero(3), eta, pi;
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            category_probabilities_into(data.X.row(i), design.beta_true,
                                        data.dims, eta, pi);
            mean_pi += pi;
        }
        mean_pi /= static_cast<double>(data.rows());
        for (int j = 0; j < 3; ++j) {
            const double freq = data.Y.col(j).sum() / 100000.0;
            CHECK(std::fabs(freq - mean_pi[j]) < 0.01);
        }
    }
}

TEST_CASE("contamination block placement and semantics") {
    SUBCASE("p = 0 is the identity") {
        const SimDesign design = protocol_design(40, 0.0, 5);
        RngStream gen(5, 0), crng(5, 1);
        const Dataset data = generate_pure(design, gen);
        const Dataset out = contaminate(data, design, crng);
        CHECK(out.Y == data.Y);
    }

    SUBCASE("prose mode touches exactly the last ceil(pN/100) rows") {
        for (int n : {40, 100, 101, 333}) {
            for (double p : {1.0, 5.0, 12.5, 20.0}) {
                const SimDesign design = protocol_design(n, p, 6);
                RngStream gen(6, 0), crng(6, 1);
                const Dataset data = generate_pure(design, gen);
                const Dataset out = contaminate(data, design, crng);
                const int block = static_cast<int>(std::ceil(p * n / 100.0));
                for (int i = 0; i < n - block; ++i)
                    CHECK(out.Y.row(i) == data.Y.row(i));
                // the block was redrawn from the shifted law; counts still unit
                for (int i = n - block; i < n; ++i) CHECK(out.Y.row(i).sum() == 1);
            }
        }
    }

    SUBCASE("code-compat mode permutes counts over the reference block") {
        SimDesign design = protocol_design(100, 5.0, 7);
        design.code_compat = true;
        RngStream gen(7, 0), crng(7, 1);
        const Dataset data = generate_pure(design, gen);
        const Dataset out = contaminate(data, design, crng);
        const int first = static_cast<int>(std::floor(0.95 * 100)) - 1;  // 0-based
        for (int i = 0; i < first; ++i) CHECK(out.Y.row(i) == data.Y.row(i));
        for (int i = first; i < 100; ++i) {
            CHECK(out.Y(i, 0) == data.Y(i, 2));
            CHECK(out.Y(i, 1) == data.Y(i, 0));
            CHECK(out.Y(i, 2) == data.Y(i, 1));
        }
    }

    SUBCASE("degenerate probabilities land in the shifted slot") {
        // With beta pushing all mass to category 1, the cyclic shift makes
        // contaminated responses land in category 2.
        SimDesign design = protocol_design(20, 100.0, 8);
        CHECK_THROWS_AS(design.validate(), contract_error);  // p < 100 enforced
        design.contamination_pct = 99.0;
        design.beta_true << 50.0, 0.0, 0.0, -50.0, 0.0, 0.0;
        RngStream gen(8, 0), crng(8, 1);
        const Dataset data = generate_pure(design, gen);
        const Dataset out = contaminate(data, design, crng);
        const int block = static_cast<int>(std::ceil(99.0 * 20 / 100.0));
        for (int i = 20 - block; i < 20; ++i) CHECK(out.Y(i, 1) == 1);
    }
}

TEST_CASE("single-replication study equals a hand-assembled fit") {
    const SimDesign design = protocol_design(120, 0.0, 11);
    const StudyResult study = mse_study(design, {0.3}, {120}, 1, 1);
    REQUIRE(study.cells.size() == 1);
    REQUIRE(study.cells[0].valid_replications == 1);

    // replicate the engine's data path by hand via the public stream helper
    SimDesign local = design;
    RngStream gen = replication_stream(design.seed, 0, 0, 0);
    const Dataset data = generate_pure(local, gen);
    const FitResult fit = fit_mdpde(data, 0.3);
    const double expected = (fit.beta_hat - design.beta_true).squaredNorm();
    CHECK(study.cells[0].value == doctest::Approx(expected).epsilon(1e-14));
    CHECK(study.cells[0].per_coordinate.sum() ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("studies are bit-identical across thread counts and reruns") {
    const SimDesign design = protocol_design(80, 5.0, 13);
    const std::vector<double> lambdas{0.0, 0.5};
    const std::vector<int> n_grid{80, 120};
    const StudyResult t1 = mse_study(design, lambdas, n_grid, 24, 1);
    const StudyResult t2 = mse_study(design, lambdas, n_grid, 24, 2);
    const StudyResult t4 = mse_study(design, lambdas, n_grid, 24, 4);
    CHECK(t1.to_csv() == t2.to_csv());
    CHECK(t1.to_csv() == t4.to_csv());
    const StudyResult again = mse_study(design, lambdas, n_grid, 24, 3);
    CHECK(t1.to_csv() == again.to_csv());
    CHECK(t1.to_json() == t4.to_json());
}

TEST_CASE("discard accounting adds up") {
    const SimDesign design = protocol_design(60, 5.0, 17);
    const int reps = 30;
    const StudyResult study = mse_study(design, {0.0, 0.7}, {60}, reps, 2);
    for (const auto& cell : study.cells) {
        CHECK(cell.valid_replications + cell.discarded == reps);
        CHECK(cell.discarded <= reps / 20);  // < 5% on protocol-scale designs
    }
}

TEST_CASE("level study rejects everything at alpha = 1 in the limit sense") {
    // alpha close to 1 drives the critical value toward 0.
    const SimDesign design = protocol_design(60, 0.0, 19);
    const auto hyp = LinearHypothesis::single_coefficient(6, 3, 0.6);
    const StudyResult study =
        level_study(design, {0.0}, {60}, 10, hyp, 0.999999999, 2);
    CHECK(study.cells[0].value == doctest::Approx(1.0));
}

TEST_CASE("study csv and json formats") {
    const SimDesign design = protocol_design(60, 0.0, 23);
    const StudyResult study = mse_study(design, {0.1}, {60}, 3, 1);
    const std::string csv = study.to_csv();
    CHECK(csv.rfind("lambda,N,metric,value,valid_reps,discarded\n", 0) == 0);
    CHECK(csv.find("mse_coord_0") != std::string::npos);
    CHECK(study.to_json().find("\"metric\": \"mse\"") != std::string::npos);
}
