#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "plrm/model.hpp"

using namespace plrm;

TEST_CASE("category probabilities: symmetry and known values") {
    const ModelDims dims(2, 2);
    const Vector x = (Vector(3) << 1.0, 0.0, 0.0).finished();

    SUBCASE("zero parameters give the uniform distribution") {
        const Vector pi = category_probabilities(x, Vector::Zero(6), dims);
        for (int j = 0; j < 3; ++j) CHECK(pi[j] == doctest::Approx(1.0 / 3).epsilon(1e-14));
    }

    SUBCASE("protocol parameter at the origin covariate") {
        // exp(0.6) = 1.8221188...; 1/(2 + e^0.6), e^0.6/(2 + e^0.6)
        const Vector pi = category_probabilities(x, oracle::protocol_beta(), dims);
        CHECK(pi[0] == doctest::Approx(0.2616346).epsilon(1e-5));
        CHECK(pi[1] == doctest::Approx(0.4767307).epsilon(1e-5));
        CHECK(pi[2] == doctest::Approx(0.2616346).epsilon(1e-5));
    }

    SUBCASE("binary logit with odds 3:1") {
        const ModelDims binary(0, 1);
        const Vector pi = category_probabilities(
            Vector::Ones(1), (Vector(1) << std::log(3.0)).finished(), binary);
        CHECK(pi[0] == doctest::Approx(0.75).epsilon(1e-14));
        CHECK(pi[1] == doctest::Approx(0.25).epsilon(1e-14));
    }

    SUBCASE("dimension mismatch is a contract violation") {
        CHECK_THROWS_AS(category_probabilities(Vector::Ones(2), Vector::Zero(6), dims),
                        contract_error);
        CHECK_THROWS_AS(category_probabilities(x, Vector::Zero(5), dims),
                        contract_error);
    }
}

TEST_CASE("probabilities sum to one and stay inside (0,1)") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 200; ++rep) {
        const int k = static_cast<int>(rng() % 4);
        const int d = 1 + static_cast<int>(rng() % 3);
        const ModelDims dims(k, d);
        const Vector beta = oracle::random_beta(rng, dims.nu(), 3.0);
        Vector x(k + 1);
        x[0] = 1.0;
        for (int u = 1; u <= k; ++u) x[u] = oracle::random_beta(rng, 1, 3.0)[0];
        const Vector pi = category_probabilities(x, beta, dims);
        CHECK(std::fabs(pi.sum() - 1.0) < 1e-12);
        for (int j = 0; j <= d; ++j) {
            CHECK(pi[j] > 0.0);
            CHECK(pi[j] < 1.0);
        }
    }
}

TEST_CASE("no overflow at extreme linear predictors") {
    const ModelDims dims(1, 2);
    const Vector beta = (Vector(4) << 700.0, 1.0, -700.0, 1.0).finished();
    const Vector x = (Vector(2) << 1.0, 0.5).finished();
    const Vector pi = category_probabilities(x, beta, dims);
    CHECK(std::isfinite(pi.sum()));
    CHECK(pi.minCoeff() >= 1e-300);
    CHECK(std::fabs(pi.sum() - 1.0) < 1e-12);
}

TEST_CASE("softmax shift invariance of the stabilized kernel") {
    Vector eta(3), pi_a, pi_b;
    eta << 0.3, -1.7, 0.0;
    detail::softmax(eta, pi_a);
    detail::softmax(Vector(eta.array() + 123.25), pi_b);
    for (int j = 0; j < 3; ++j) CHECK(pi_a[j] == doctest::Approx(pi_b[j]).epsilon(1e-12));
}

TEST_CASE("d = 1 reduces to binary logistic regression") {
    std::mt19937_64 rng(5);
    const ModelDims dims(2, 1);
    for (int rep = 0; rep < 50; ++rep) {
        const Vector beta = oracle::random_beta(rng, 3);
        Vector x(3);
        x << 1.0, oracle::random_beta(rng, 1)[0], oracle::random_beta(rng, 1)[0];
        const double eta = x.dot(beta);
        const double sigmoid = 1.0 / (1.0 + std::exp(-eta));
        const Vector pi = category_probabilities(x, beta, dims);
        CHECK(pi[0] == doctest::Approx(sigmoid).epsilon(1e-15));
    }
}

TEST_CASE("probability jacobian") {
    SUBCASE("columns sum to zero") {
        std::mt19937_64 rng(9);
        const ModelDims dims(2, 2);
        const Vector beta = oracle::random_beta(rng, 6);
        Vector x(3);
        x << 1.0, 0.4, -1.1;
        const Matrix jac = probability_jacobian(x, beta, dims);
        const Vector rowsum = jac.rowwise().sum();
        CHECK(rowsum.lpNorm<Eigen::Infinity>() < 1e-14);
    }

    SUBCASE("logistic derivative at p = 1/2") {
        const ModelDims dims(0, 1);
        const Matrix jac =
            probability_jacobian(Vector::Ones(1), Vector::Zero(1), dims);
        CHECK(jac(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    }

    SUBCASE("matches central finite differences on random draws") {
        std::mt19937_64 rng(123);
        std::uniform_real_distribution<double> unif(-3.0, 3.0);
        for (int rep = 0; rep < 100; ++rep) {
            const int k = static_cast<int>(rng() % 3);
            const int d = 1 + static_cast<int>(rng() % 3);
            const ModelDims dims(k, d);
            Vector beta(dims.nu());
            for (int i = 0; i < dims.nu(); ++i) beta[i] = unif(rng);
            Vector x(k + 1);
            x[0] = 1.0;
            for (int u = 1; u <= k; ++u) x[u] = unif(rng);
            const Matrix jac = probability_jacobian(x, beta, dims);
            const double h = 1e-6;
            for (int j = 0; j <= d; ++j) {
                for (int a = 0; a < dims.nu(); ++a) {
                    Vector bp = beta, bm = beta;
                    bp[a] += h;
                    bm[a] -= h;
                    const double fd = (category_probabilities(x, bp, dims)[j] -
                                       category_probabilities(x, bm, dims)[j]) /
                                      (2.0 * h);
                    const double denom = std::max(std::fabs(fd), 1e-4);
                    CHECK(std::fabs(jac(a, j) - fd) / denom < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("log pmf") {
    Vector pi(3);
    pi << 1.0 / 3, 1.0 / 3, 1.0 / 3;
    IVector y = IVector::Zero(3);
    y[0] = 1;
    CHECK(log_pmf(y, pi) == doctest::Approx(-std::log(3.0)).epsilon(1e-14));

    // grouped counts, coefficient-free
    Vector pi2(3);
    pi2 << 0.5, 0.25, 0.25;
    IVector y2(3);
    y2 << 2, 1, 0;
    CHECK(log_pmf(y2, pi2) ==
          doctest::Approx(2.0 * std::log(0.5) + std::log(0.25)).epsilon(1e-14));
    // with the multinomial coefficient: + log(3!/2!) = log 3
    CHECK(log_pmf(y2, pi2, true) ==
          doctest::Approx(2.0 * std::log(0.5) + std::log(0.25) + std::log(3.0))
              .epsilon(1e-14));

    // unit y picks out log pi_j (inner-product identity)
    for (int j = 0; j < 3; ++j) {
        IVector e = IVector::Zero(3);
        e[j] = 1;
        CHECK(log_pmf(e, pi2) == doctest::Approx(std::log(pi2[j])).epsilon(1e-14));
    }
}

TEST_CASE("dataset validation") {
    Dataset data;
    data.dims = ModelDims(1, 1);
    data.X.resize(2, 2);
    data.X << 1.0, 0.5, 1.0, -0.5;
    data.Y.resize(2, 2);
    data.Y << 1, 0, 0, 1;
    data.trials = IVector::Ones(2);
    CHECK_NOTHROW(data.validate());

    Dataset bad = data;
    bad.X(0, 0) = 2.0;  // intercept violated
    CHECK_THROWS_AS(bad.validate(), contract_error);

    Dataset bad2 = data;
    bad2.trials[1] = 3;
    CHECK_THROWS_AS(bad2.validate(), contract_error);
}
