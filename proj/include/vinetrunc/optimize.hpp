#pragma once

#include <Eigen/Dense>

#include <functional>

namespace vinetrunc {

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Central finite-difference gradient, step eps^(1/3) max(1, |x_j|).
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x);

struct MinimizeOptions {
    double gradient_tolerance = 1e-6;
    double step_tolerance = 1e-8;
    int max_iterations = 500;
};

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    /// Stopped on the gradient or step criterion rather than the iteration
    /// cap or a failed line search.
    bool converged = false;
};

/// BFGS with finite-difference gradients and a backtracking Armijo line
/// search. Never returns a point worse than `x0`.
MinimizeResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const MinimizeOptions& options = {});

/// Brent minimization on [lo, hi], located to about sqrt(machine epsilon).
double minimize_scalar(const std::function<double(double)>& f, double lo, double hi);

}  // namespace vinetrunc
