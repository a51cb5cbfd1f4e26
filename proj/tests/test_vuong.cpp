#include <doctest.h>

#include <complex>
#include <vector>

#include "oracles.hpp"
#include "vinetrunc/error.hpp"
#include "vinetrunc/fit.hpp"
#include "vinetrunc/normal.hpp"
#include "vinetrunc/vuong.hpp"

using namespace vinetrunc;
using doctest::Approx;

namespace {

Dataset draw(const VineModel& m, Eigen::Index n, std::uint64_t key) {
    CounterRng rng(key);
    return sample(m, n, rng);
}

VineModel pair_model(double rho) {
    const double r[] = {rho};
    return VineModel::gaussian_by_tree(dvine(2), r, 1);
}

double gaussian_dlogc(double rho, double x, double y) {
    const double s = 1.0 - rho * rho;
    return rho / s + (x * y * (1.0 + rho * rho) - rho * (x * x + y * y)) / (s * s);
}

// Five-point stencils on the per-observation log-density.
Eigen::MatrixXd scores5(const VineModel& m, const Dataset& data) {
    const Eigen::VectorXd th = m.parameters();
    Eigen::MatrixXd S(data.size(), th.size());
    const double h = 1e-4;
    for (Eigen::Index j = 0; j < th.size(); ++j) {
        auto at = [&](double k) {
            Eigen::VectorXd t = th;
            t(j) += k * h;
            return log_density_terms(m.with_parameters(t), data);
        };
        S.col(j) = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
    }
    return S;
}

Eigen::MatrixXd hessian5(const VineModel& m, const Dataset& data) {
    const Eigen::VectorXd th = m.parameters();
    const Eigen::Index p = th.size();
    const double h = 1e-3;
    auto f = [&](const Eigen::VectorXd& t) { return log_density_terms(m.with_parameters(t), data).mean(); };
    auto grad = [&](const Eigen::VectorXd& t, Eigen::Index i) {
        auto at = [&](double k) {
            Eigen::VectorXd u = t;
            u(i) += k * h;
            return f(u);
        };
        return (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
    };
    Eigen::MatrixXd H(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            auto at = [&](double k) {
                Eigen::VectorXd u = th;
                u(j) += k * h;
                return grad(u, i);
            };
            H(i, j) = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
        }
    }
    return 0.5 * (H + H.transpose());
}

// Gil-Pelaez inversion with complex arithmetic, integrated piecewise.
double quadform_cdf_oracle(double x, const Eigen::VectorXd& w) {
    using C = std::complex<double>;
    auto integrand = [&](double t) {
        if (t == 0.0) return 0.5 * w.sum() - 0.5 * x;
        C phi(1.0, 0.0);
        for (double l : w) phi *= std::pow(C(1.0, -2.0 * l * t), -0.5);
        return std::imag(std::exp(C(0.0, -t * x)) * phi) / t;
    };
    double total = 0.0;
    for (double a = 0.0; a < 4000.0; a += 0.5) {
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, a + 0.5, 0);
    }
    return 0.5 - total / std::numbers::pi;
}

VineModel three_d_truth() {
    const double r[] = {tau_to_rho(0.2), tau_to_rho(0.08)};
    return VineModel::gaussian_by_tree(dvine(3), r, 2);
}

}  // namespace

TEST_CASE("score matrix") {
    const auto data = draw(pair_model(0.4), 300, 1);
    SUBCASE("no parameters") {
        const auto S = score_matrix(VineModel::independence(dvine(2)), data);
        CHECK(S.rows() == 300);
        CHECK(S.cols() == 0);
    }
    SUBCASE("analytic derivative") {
        for (double rho : {-0.7, 0.0, 0.4, 0.9}) {
            const auto S = score_matrix(pair_model(rho), data);
            double worst = 0.0;
            for (Eigen::Index t = 0; t < data.size(); ++t) {
                const double exact = gaussian_dlogc(rho, data.scores()(t, 0), data.scores()(t, 1));
                worst = std::max(worst, std::abs(S(t, 0) - exact));
            }
            CHECK(worst <= 1e-6);
        }
    }
    SUBCASE("first-order condition at the optimum") {
        const auto s = dvine(3);
        const auto sample3 = draw(three_d_truth(), 500, 2);
        const auto fit = fit_mle(s, truncated_families(s, 2), sample3, three_d_truth().parameters());
        CHECK(score_matrix(fit.model, sample3).colwise().mean().cwiseAbs().maxCoeff() <= 1e-4);
    }
}

TEST_CASE("information matrices") {
    SUBCASE("information equality") {
        const auto data = draw(pair_model(0.5), 10000, 3);
        const auto fit = fit_mle(dvine(2), truncated_families(dvine(2), 1), data);
        const auto info = info_matrices(fit.model, data);
        CHECK(std::abs(info.A(0, 0) + info.B(0, 0)) <= 10.0 / std::sqrt(10000.0));
        const double rho = fit.model.parameters()(0);
        CHECK(info.A(0, 0) == Approx(-(1.0 + rho * rho) / std::pow(1.0 - rho * rho, 2)).epsilon(0.05));
    }
    SUBCASE("empty model") {
        const auto data = draw(pair_model(0.5), 50, 4);
        const auto info = info_matrices(VineModel::independence(dvine(2)), data);
        CHECK(info.A.size() == 0);
        CHECK(info.B.size() == 0);
    }
    SUBCASE("symmetry and duplicated data") {
        const auto truth = three_d_truth();
        const auto data = draw(truth, 400, 5);
        const auto info = info_matrices(truth, data);
        CHECK(info.A.rows() == 3);
        CHECK((info.A - info.A.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((info.B - info.B.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
        RowMatrixXd twice(800, 3);
        twice << data.values(), data.values();
        const auto dup = info_matrices(truth, Dataset(twice));
        CHECK((dup.A - info.A).cwiseAbs().maxCoeff() <= 1e-5 * info.A.cwiseAbs().maxCoeff());
        CHECK((dup.B - info.B).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("cross matrix") {
    const auto truth = three_d_truth();
    const auto data = draw(truth, 500, 6);
    const auto small = truncate(truth, 1);
    CHECK(cross_matrix(truth, VineModel::independence(dvine(3)), data).cols() == 0);
    CHECK((cross_matrix(truth, truth, data) - info_matrices(truth, data).B).cwiseAbs().maxCoeff() <= 1e-14);

    const Eigen::MatrixXd Sf = score_matrix(truth, data), Sg = score_matrix(small, data);
    Eigen::MatrixXd brute = Eigen::MatrixXd::Zero(3, 2);
    for (Eigen::Index t = 0; t < data.size(); ++t) brute += Sf.row(t).transpose() * Sg.row(t);
    brute /= 500.0;
    CHECK((cross_matrix(truth, small, data) - brute).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("W matrix") {
    SUBCASE("scalar blocks against the characteristic polynomial") {
        const Eigen::MatrixXd Af = Eigen::MatrixXd::Constant(1, 1, -2.0), Bf = Eigen::MatrixXd::Constant(1, 1, 2.0);
        const Eigen::MatrixXd Ag = Eigen::MatrixXd::Constant(1, 1, -1.0), Bg = Eigen::MatrixXd::Constant(1, 1, 1.0);
        const Eigen::MatrixXd Bfg = Eigen::MatrixXd::Constant(1, 1, 1.0);
        const auto w = w_matrix(Af, Bf, Ag, Bg, Bfg);
        Eigen::Matrix2d expected;
        expected << 1.0, 1.0, -0.5, -1.0;
        CHECK((w.W - expected).cwiseAbs().maxCoeff() == 0.0);
        // lambda^2 - tr lambda + det = 0
        const double tr = expected.trace(), det = expected.determinant();
        const double disc = std::sqrt(tr * tr - 4.0 * det);
        CHECK(w.eigenvalues(0) == Approx((tr + disc) / 2.0).epsilon(1e-12));
        CHECK(w.eigenvalues(1) == Approx((tr - disc) / 2.0).epsilon(1e-12));
    }
    SUBCASE("identical models give a nilpotent W") {
        const auto truth = three_d_truth();
        const auto data = draw(truth, 500, 7);
        const auto info = info_matrices(truth, data);
        const auto w = w_matrix(info.A, info.B, info.A, info.B, info.B);
        CHECK((w.W * w.W).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(w.eigenvalues.size() == 6);
        CHECK(w.eigenvalues.cwiseAbs().maxCoeff() <= 1e-8);
    }
    SUBCASE("no parameters in the smaller model") {
        const auto data = draw(pair_model(0.5), 10000, 8);
        const auto fit = fit_mle(dvine(2), truncated_families(dvine(2), 1), data);
        const auto info = info_matrices(fit.model, data);
        const auto w = w_matrix(info.A, info.B, Eigen::MatrixXd(0, 0), Eigen::MatrixXd(0, 0), Eigen::MatrixXd(1, 0));
        CHECK(w.eigenvalues.size() == 1);
        CHECK(w.eigenvalues(0) == Approx(-info.B(0, 0) / info.A(0, 0)).epsilon(1e-12));
        CHECK(std::abs(w.eigenvalues(0) - 1.0) < 0.1);
    }
    SUBCASE("complex spectrum is a numerical failure") {
        const Eigen::MatrixXd Af = Eigen::MatrixXd::Constant(1, 1, -1.0), Bf = Eigen::MatrixXd::Constant(1, 1, 1.0);
        const Eigen::MatrixXd Ag = Eigen::MatrixXd::Constant(1, 1, -1.0), Bg = Eigen::MatrixXd::Constant(1, 1, -1.0);
        const Eigen::MatrixXd Bfg = Eigen::MatrixXd::Constant(1, 1, 2.0);
        try {
            w_matrix(Af, Bf, Ag, Bg, Bfg);
            FAIL("expected NumericalFailure");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NumericalFailure);
        }
    }
    SUBCASE("singular and misshapen inputs") {
        const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0), zero = Eigen::MatrixXd::Zero(1, 1);
        try {
            w_matrix(zero, one, one, one, one);
            FAIL("expected SingularInformation");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::SingularInformation);
        }
        CHECK_THROWS_AS(w_matrix(one, one, one, one, Eigen::MatrixXd::Zero(2, 1)), Error);
    }
}

TEST_CASE("nested test") {
    const auto s = dvine(3);
    const auto truth = three_d_truth();

    SUBCASE("identical models are degenerate") {
        const auto data = draw(truth, 300, 9);
        const auto r = vuong_nested(truth, truth, data);
        CHECK(r.statistic == 0.0);
        CHECK(r.degenerate);
        CHECK(r.p_value == 1.0);
        CHECK(r.eigenvalues.size() == 6);
        CHECK(decide(r, 0.05) == Decision::PreferSmaller);
    }
    SUBCASE("nesting is required") {
        const auto data = draw(truth, 100, 10);
        try {
            vuong_nested(truth, truncate(truth, 1), data);
            FAIL("expected NotNested");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NotNested);
        }
        const double r[] = {0.3, 0.1};
        CHECK_THROWS_AS(vuong_nested(VineModel::gaussian_by_tree(cvine(4), r, 1),
                                     VineModel::gaussian_by_tree(dvine(4), r, 2), draw(truth, 10, 1)),
                        Error);
        CHECK(is_nested(truncate(truth, 1), truth));
        CHECK(!is_nested(truth, truncate(truth, 1)));
    }
    SUBCASE("fitted models") {
        const auto data = draw(truth, 500, 11);
        const auto g = fit_mle(s, truncated_families(s, 1), data, truncate(truth, 1).parameters());
        const auto f = fit_mle(s, truncated_families(s, 2), data, truth.parameters());
        const auto r = vuong_nested(g.model, f.model, data);
        CHECK(r.kind == TestKind::Nested);
        CHECK(r.statistic == 2.0 * r.lr);
        CHECK(r.lr == Approx(f.loglik - g.loglik).epsilon(1e-9));
        CHECK(r.statistic >= -1e-6);
        CHECK(r.eigenvalues.size() == 5);
        CHECK(r.terms.size() == 500);
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
        CHECK(r.p_value == Approx(1.0 - quadform_cdf_oracle(r.statistic, r.eigenvalues)).epsilon(1e-6));
    }
    SUBCASE("ten-point dataset against an independent recomputation") {
        const auto data = draw(truth, 10, 12);
        const auto g = fit_mle(s, truncated_families(s, 1), data, truncate(truth, 1).parameters());
        Eigen::Vector3d warm;
        warm << g.model.parameters(), 0.0;
        const auto f = fit_mle(s, truncated_families(s, 2), data, warm);
        const auto r = vuong_nested(g.model, f.model, data);

        const Eigen::MatrixXd Sf = scores5(f.model, data), Sg = scores5(g.model, data);
        const double n = 10.0;
        const Eigen::MatrixXd Af = hessian5(f.model, data), Ag = hessian5(g.model, data);
        const Eigen::MatrixXd Bf = Sf.transpose() * Sf / n, Bg = Sg.transpose() * Sg / n, Bfg = Sf.transpose() * Sg / n;
        Eigen::MatrixXd W(5, 5);
        W << -Bf * Af.inverse(), -Bfg * Ag.inverse(), Bfg.transpose() * Af.inverse(), Bg * Ag.inverse();
        const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(W).eigenvalues();
        CHECK(ev.imag().cwiseAbs().maxCoeff() < 1e-6);
        const double lr = (log_density_terms(f.model, data) - log_density_terms(g.model, data)).sum();
        const double p = 1.0 - quadform_cdf_oracle(2.0 * lr, ev.real());
        CHECK(std::abs(r.p_value - p) < 1e-4);
    }
}

TEST_CASE("non-nested test") {
    const auto truth = three_d_truth();
    const auto data = draw(truth, 500, 13);
    const auto small = truncate(truth, 1);

    SUBCASE("antisymmetric differences") {
        RowMatrixXd u(4, 2);
        u << 0.25, 0.625, 0.75, 0.625, 0.125, 0.375, 0.875, 0.375;
        const auto r = vuong_snn(pair_model(0.4), pair_model(-0.4), Dataset(u));
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
        CHECK(decide(r, 0.05) == Decision::Indistinguishable);
    }
    SUBCASE("identical models") {
        try {
            vuong_snn(truth, truth, data);
            FAIL("expected ZeroVariance");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ZeroVariance);
        }
    }
    SUBCASE("antisymmetry and p-value") {
        const auto a = vuong_snn(truth, small, data);
        const auto b = vuong_snn(small, truth, data);
        CHECK(a.statistic == -b.statistic);
        CHECK(a.p_value == b.p_value);
        CHECK(a.p_value == Approx(2.0 * (1.0 - std_normal_cdf(std::abs(a.statistic)))).epsilon(1e-12));
        const Eigen::ArrayXd m = a.terms.array();
        const double omega = std::sqrt((m.square().mean() - m.mean() * m.mean()));
        CHECK(a.omega_hat == Approx(omega).epsilon(1e-9));
        CHECK(a.statistic == Approx(std::sqrt(500.0) * m.mean() / omega).epsilon(1e-9));
    }
}

TEST_CASE("decisions") {
    VuongReport nested;
    nested.kind = TestKind::Nested;
    nested.p_value = 0.039;
    CHECK(decide(nested, 0.05) == Decision::PreferLarger);
    nested.p_value = 1.0;
    CHECK(decide(nested, 0.05) == Decision::PreferSmaller);

    VuongReport snn;
    snn.kind = TestKind::StrictlyNonNested;
    snn.statistic = std_normal_quantile(1.0 - 0.18 / 2.0);
    snn.p_value = 0.18;
    CHECK(decide(snn, 0.05) == Decision::Indistinguishable);
    snn.statistic = 2.5;
    CHECK(decide(snn, 0.05) == Decision::PreferLarger);
    snn.statistic = -2.5;
    CHECK(decide(snn, 0.05) == Decision::PreferSmaller);
    CHECK_THROWS_AS(decide(snn, 0.0), Error);
    CHECK_THROWS_AS(decide(snn, 1.0), Error);
}
