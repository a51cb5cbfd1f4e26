#include "vinetrunc/optimize.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

namespace vinetrunc {

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x) {
    const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = base * std::max(1.0, std::abs(x(j)));
        probe(j) = x(j) + h;
        const double up = f(probe);
        probe(j) = x(j) - h;
        const double down = f(probe);
        probe(j) = x(j);
        g(j) = (up - down) / (2.0 * h);
    }
    return g;
}

MinimizeResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const MinimizeOptions& options) {
    const Eigen::Index p = x0.size();
    MinimizeResult r;
    r.x = x0;
    r.value = f(x0);
    if (p == 0) {
        r.gradient = Eigen::VectorXd(0);
        r.converged = true;
        return r;
    }
    r.gradient = numeric_gradient(f, r.x);

    Eigen::MatrixXd inverse_hessian = Eigen::MatrixXd::Identity(p, p);
    bool scaled = false;
    for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
        if (r.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
            r.converged = true;
            break;
        }
        Eigen::VectorXd direction = -inverse_hessian * r.gradient;
        double slope = r.gradient.dot(direction);
        if (!(slope < 0.0)) {
            inverse_hessian.setIdentity();
            scaled = false;
            direction = -r.gradient;
            slope = r.gradient.dot(direction);
        }
        if (!scaled) {
            // First step after a reset moves at most 0.1 in any coordinate.
            const double largest = direction.lpNorm<Eigen::Infinity>();
            if (largest > 0.1) {
                direction *= 0.1 / largest;
                slope *= 0.1 / largest;
            }
        }

        double step = 1.0;
        double trial_value = std::numeric_limits<double>::infinity();
        Eigen::VectorXd trial;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            trial = r.x + step * direction;
            trial_value = f(trial);
            if (std::isfinite(trial_value) && trial_value <= r.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        const Eigen::VectorXd s = trial - r.x;
        const Eigen::VectorXd gradient = numeric_gradient(f, trial);
        const Eigen::VectorXd y = gradient - r.gradient;
        r.x = trial;
        r.value = trial_value;
        r.gradient = gradient;
        if (s.lpNorm<Eigen::Infinity>() <= options.step_tolerance) {
            r.converged = true;
            ++r.iterations;
            break;
        }

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                inverse_hessian = Eigen::MatrixXd::Identity(p, p) * (sy / y.squaredNorm());
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(p, p) - rho * s * y.transpose();
            inverse_hessian = left * inverse_hessian * left.transpose() + rho * s * s.transpose();
        }
    }
    return r;
}

double minimize_scalar(const std::function<double(double)>& f, double lo, double hi) {
    // Half the mantissa is the finest location accuracy a bracketing search can reach.
    constexpr int bits = std::numeric_limits<double>::digits / 2;
    std::uintmax_t max_iter = 500;
    return boost::math::tools::brent_find_minima(f, lo, hi, bits, max_iter).first;
}

}  // namespace vinetrunc
