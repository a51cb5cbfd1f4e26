#include <doctest.h>

#include <cmath>
#include <numeric>

#include "vinetrunc/error.hpp"
#include "vinetrunc/fit.hpp"
#include "vinetrunc/optimize.hpp"

using namespace vinetrunc;
using doctest::Approx;

namespace {

Dataset draw(const VineModel& m, Eigen::Index n, std::uint64_t key) {
    CounterRng rng(key);
    return sample(m, n, rng);
}

VineModel three_d(double t1, double t2) {
    const double r[] = {tau_to_rho(t1), tau_to_rho(t2)};
    return VineModel::gaussian_by_tree(dvine(3), r, 2);
}

}  // namespace

TEST_CASE("BFGS on smooth test functions") {
    const Objective rosenbrock = [](const Eigen::VectorXd& x) {
        return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
    };
    const auto r = minimize_bfgs(rosenbrock, Eigen::Vector2d(-1.2, 1.0));
    CHECK(r.converged);
    CHECK(r.x(0) == Approx(1.0).epsilon(1e-5));
    CHECK(r.x(1) == Approx(1.0).epsilon(1e-5));

    const Objective bowl = [](const Eigen::VectorXd& x) { return (x.array() - 3.0).square().sum() + 2.0; };
    const auto b = minimize_bfgs(bowl, Eigen::VectorXd::Zero(4));
    CHECK((b.x.array() - 3.0).abs().maxCoeff() < 1e-6);
    CHECK(b.value == Approx(2.0));

    const auto empty = minimize_bfgs([](const Eigen::VectorXd&) { return 1.5; }, Eigen::VectorXd());
    CHECK(empty.value == 1.5);
    CHECK(empty.converged);
}

TEST_CASE("scalar Brent minimization") {
    CHECK(minimize_scalar([](double x) { return (x - 0.3) * (x - 0.3); }, -1.0, 1.0) == Approx(0.3).epsilon(1e-7));
    CHECK(minimize_scalar([](double x) { return std::cosh(x + 2.0); }, -5.0, 5.0) == Approx(-2.0).epsilon(1e-7));
}

TEST_CASE("numeric gradient") {
    const Objective f = [](const Eigen::VectorXd& x) { return std::sin(x(0)) * x(1) * x(1); };
    const Eigen::Vector2d x(0.7, -1.3);
    const Eigen::VectorXd g = numeric_gradient(f, x);
    CHECK(g(0) == Approx(std::cos(0.7) * 1.69).epsilon(1e-9));
    CHECK(g(1) == Approx(2.0 * std::sin(0.7) * -1.3).epsilon(1e-9));
}

TEST_CASE("sequential estimates") {
    const auto s = dvine(3);
    const auto data = draw(three_d(0.2, 0.08), 300, 1);
    const auto ind = sequential_estimate(s, truncated_families(s, 0), data);
    CHECK(ind.truncation_level() == 0);
    CHECK(log_likelihood(ind, data) == 0.0);

    const double r[] = {tau_to_rho(0.2)};
    const auto pair = VineModel::gaussian_by_tree(dvine(2), r, 1);
    const auto big = draw(pair, 5000, 2);
    const auto est = sequential_estimate(dvine(2), truncated_families(dvine(2), 1), big);
    CHECK(std::abs(est.parameters()(0) - 0.3090170) < 0.05);

    // Per-edge estimates coincide with the joint optimum for a single tree.
    const auto one = sequential_estimate(s, truncated_families(s, 1), data);
    const auto joint = fit_mle(s, truncated_families(s, 1), data, one.parameters());
    CHECK((one.parameters() - joint.model.parameters()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("joint maximum likelihood") {
    const auto s = dvine(3);
    const auto truth = three_d(0.2, 0.08);
    const auto data = draw(truth, 500, 3);

    const auto full = fit_mle(s, truncated_families(s, 2), data, truth.parameters());
    CHECK(full.converged);
    CHECK(full.loglik == Approx(log_likelihood(full.model, data)).epsilon(1e-12));
    CHECK(full.loglik >= log_likelihood(truth, data) - 1e-9);
    CHECK(full.model.truncation_level() == 2);
    CHECK((full.model.parameters().array().abs() < kRhoBound).all());

    SUBCASE("stationary start") {
        const auto again = fit_mle(s, truncated_families(s, 2), data, full.model.parameters());
        CHECK((again.model.parameters() - full.model.parameters()).cwiseAbs().maxCoeff() < 1e-4);
        CHECK(std::abs(again.loglik - full.loglik) < 1e-8);
    }
    SUBCASE("gradient at the optimum") {
        const Objective ll = [&](const Eigen::VectorXd& rho) {
            return log_likelihood(full.model.with_parameters(rho), data);
        };
        const Eigen::VectorXd g = numeric_gradient(ll, full.model.parameters());
        CHECK(g.lpNorm<Eigen::Infinity>() <= 1e-4 * std::max(1.0, std::abs(full.loglik)));
    }
    SUBCASE("nesting dominance with a warm start") {
        const auto small = fit_mle(s, truncated_families(s, 1), data, truncate(truth, 1).parameters());
        Eigen::Vector3d warm;
        warm << small.model.parameters(), 0.0;
        const auto large = fit_mle(s, truncated_families(s, 2), data, warm);
        CHECK(large.loglik >= small.loglik - 1e-9);
        CHECK(full.loglik >= small.loglik);
    }
    SUBCASE("default start") {
        const auto seq = fit_mle(s, truncated_families(s, 2), data);
        CHECK((seq.model.parameters() - full.model.parameters()).cwiseAbs().maxCoeff() < 1e-4);
    }
    SUBCASE("row order does not matter") {
        std::vector<Eigen::Index> rows(500);
        std::iota(rows.rbegin(), rows.rend(), 0);
        const auto flipped = fit_mle(s, truncated_families(s, 2), data.select(rows), truth.parameters());
        CHECK((flipped.model.parameters() - full.model.parameters()).cwiseAbs().maxCoeff() < 1e-6);
    }
    SUBCASE("start validation") {
        CHECK_THROWS_AS(fit_mle(s, truncated_families(s, 2), data, Eigen::Vector2d(0.1, 0.1)), Error);
        CHECK_THROWS_AS(fit_mle(s, truncated_families(s, 2), data, Eigen::Vector3d(0.1, 1.0, 0.1)), Error);
        CHECK_THROWS_AS(fit_mle(dvine(4), truncated_families(dvine(4), 1), data), Error);
    }
    SUBCASE("no parameters") {
        const auto none = fit_mle(s, truncated_families(s, 0), data);
        CHECK(none.loglik == 0.0);
        CHECK(none.model.parameter_count() == 0);
    }
}

TEST_CASE("parameter recovery over replicates") {
    const auto s = dvine(3);
    const auto truth = three_d(0.2, 0.08);
    const Eigen::VectorXd target = truth.parameters();
    Eigen::Vector3d bias = Eigen::Vector3d::Zero();
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        const auto fit = fit_mle(s, truncated_families(s, 2), draw(truth, 5000, 100 + r), target);
        const Eigen::VectorXd err = fit.model.parameters() - target;
        CHECK(err.cwiseAbs().maxCoeff() < 0.06);
        bias += err;
    }
    CHECK((bias / reps).cwiseAbs().maxCoeff() < 0.01);
}
