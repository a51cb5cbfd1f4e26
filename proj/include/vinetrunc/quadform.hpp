#pragma once

#include <Eigen/Core>

#include <cstdint>

#include "vinetrunc/rng.hpp"

namespace vinetrunc {

/// Weights with |w| <= kWeightDropRatio * max|w| are treated as zero.
inline constexpr double kWeightDropRatio = 1e-10;

/// P(sum_i w_i Z_i^2 <= x) for independent standard normal Z_i, weights of
/// either sign, by Imhof's inversion of the characteristic function. Throws
/// NumericalFailure when the quadrature error estimate exceeds 1e-6.
double quadform_cdf(double x, const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Monte Carlo estimate of the same probability from `draws` samples.
double quadform_mc_cdf(double x, const Eigen::Ref<const Eigen::VectorXd>& weights, std::int64_t draws,
                       CounterRng& rng);

}  // namespace vinetrunc
