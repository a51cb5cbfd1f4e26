#pragma once

#include <Eigen/Dense>

#include <optional>

#include "vinetrunc/vine.hpp"

namespace vinetrunc {

/// Correlations stay inside (-kRhoBound, kRhoBound) during estimation.
inline constexpr double kRhoBound = 1.0 - 1e-6;

struct FitResult {
    VineModel model;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Gaussian in trees 1..level, independence above.
EdgeTable<Family> truncated_families(const RVineStructure& structure, int level);

/// Tree-by-tree estimation: each Gaussian edge maximizes its own pair
/// likelihood on pseudo-data built from the trees below.
VineModel sequential_estimate(const RVineStructure& structure, const EdgeTable<Family>& families,
                              const Dataset& data);

/// Joint maximum likelihood over every Gaussian edge, optimized in
/// rho = tanh(psi). Starts from `start` (one correlation per Gaussian edge)
/// or from sequential_estimate. Throws NonConvergence if the optimizer stops
/// away from a stationary point.
FitResult fit_mle(const RVineStructure& structure, const EdgeTable<Family>& families, const Dataset& data,
                  const std::optional<Eigen::VectorXd>& start = std::nullopt);

}  // namespace vinetrunc
