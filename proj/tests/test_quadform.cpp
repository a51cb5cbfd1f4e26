#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vinetrunc/error.hpp"
#include "vinetrunc/quadform.hpp"

using namespace vinetrunc;
using doctest::Approx;

TEST_CASE("chi-square special cases") {
    CHECK(std::abs(quadform_cdf(3.841459, Eigen::VectorXd::Ones(1)) - 0.95) < 1e-5);
    CHECK(std::abs(quadform_cdf(5.991465, Eigen::VectorXd::Ones(2)) - 0.95) < 1e-5);
    for (int m = 1; m <= 6; ++m) {
        for (double x : {0.05, 0.5, 1.0, 2.5, 5.0, 9.0, 15.0}) {
            CHECK(std::abs(quadform_cdf(x, Eigen::VectorXd::Ones(m)) - oracle::chi2_cdf(x, m)) < 1e-5);
        }
    }
    for (double x : {0.3, 2.0, 7.0}) {
        CHECK(std::abs(quadform_cdf(x, Eigen::VectorXd::Ones(2)) - (1.0 - std::exp(-x / 2.0))) < 1e-6);
    }
}

TEST_CASE("symmetric difference and trivial sides") {
    CHECK(std::abs(quadform_cdf(0.0, Eigen::Vector2d(1.0, -1.0)) - 0.5) < 1e-7);
    CHECK(quadform_cdf(-1.0, Eigen::Vector3d(1.0, 2.0, 0.5)) == 0.0);
    CHECK(quadform_cdf(0.0, Eigen::Vector2d(1.0, 2.0)) == 0.0);
    CHECK(quadform_cdf(0.5, Eigen::Vector2d(-1.0, -2.0)) == 1.0);
    CHECK(quadform_cdf(0.0, Eigen::VectorXd::Zero(2)) == 1.0);
    CHECK(quadform_cdf(-0.1, Eigen::VectorXd::Zero(1)) == 0.0);
    // Negated weights mirror the distribution.
    const Eigen::Vector3d w(0.9, -0.4, 0.2);
    for (double x : {-1.0, 0.3, 2.0}) {
        CHECK(std::abs(quadform_cdf(x, w) + quadform_cdf(-x, -w) - 1.0) < 1e-6);
    }
}

TEST_CASE("tiny weights are dropped") {
    Eigen::Vector3d w(1.0, 1e-12, -1e-13);
    CHECK(std::abs(quadform_cdf(2.0, w) - oracle::chi2_cdf(2.0, 1)) < 1e-6);
}

TEST_CASE("monotone in x and scale invariant") {
    CounterRng rng(4);
    for (int c = 0; c < 10; ++c) {
        Eigen::VectorXd w(4);
        for (auto& v : w) v = 6.0 * rng.uniform() - 3.0;
        double prev = -1.0;
        for (double x = -15.0; x <= 15.0; x += 0.5) {
            const double cur = quadform_cdf(x, w);
            CHECK(cur >= prev - 1e-9);
            prev = cur;
            CHECK(std::abs(quadform_cdf(2.5 * x, 2.5 * w) - cur) < 1e-6);
        }
    }
}

TEST_CASE("agrees with Monte Carlo") {
    CounterRng rng(12);
    const Eigen::Vector3d w(1.0, 2.0, 3.0);
    const std::int64_t draws = 1000000;
    const double p = quadform_cdf(6.0, w);
    const double mc = quadform_mc_cdf(6.0, w, draws, rng);
    CHECK(std::abs(p - mc) <= 3.0 * std::sqrt(p * (1.0 - p) / draws));
}

TEST_CASE("Monte Carlo oracle basics") {
    CounterRng rng(3);
    const double c = 2.5, x = 4.0;
    const std::int64_t draws = 200000;
    const double expected = oracle::chi2_cdf(x / c, 1);
    CHECK(std::abs(quadform_mc_cdf(x, Eigen::VectorXd::Constant(1, c), draws, rng) - expected) <=
          3.0 * std::sqrt(expected * (1.0 - expected) / draws));
    CHECK(quadform_mc_cdf(0.0, Eigen::VectorXd::Zero(1), 10000, rng) == 1.0);
    CHECK(quadform_mc_cdf(3.0, Eigen::VectorXd::Zero(1), 10000, rng) == 1.0);
    CHECK_THROWS_AS(quadform_mc_cdf(1.0, Eigen::VectorXd::Ones(1), 0, rng), Error);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(quadform_cdf(1.0, Eigen::VectorXd()), Error);
    CHECK_THROWS_AS(quadform_cdf(std::nan(""), Eigen::VectorXd::Ones(1)), Error);
    CHECK_THROWS_AS(quadform_cdf(1.0, Eigen::VectorXd::Constant(1, INFINITY)), Error);
}
