#pragma once

#include <span>
#include <vector>

namespace vinetrunc {

/// Kendall's tau-b in O(n log n) (Knight's merge-sort count).
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Sample median; NaN for an empty input.
double median(std::vector<double> values);

/// rank / (n + 1) with average ranks for ties.
std::vector<double> pseudo_observations(std::span<const double> column);

}  // namespace vinetrunc
