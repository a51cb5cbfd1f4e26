#pragma once

namespace vinetrunc {

/// Standard normal density.
double std_normal_pdf(double x) noexcept;

/// Standard normal distribution function. Saturates to 0/1 in the far tails.
double std_normal_cdf(double x) noexcept;

/// Inverse of the standard normal distribution function. Throws DomainError
/// unless 0 < p < 1.
double std_normal_quantile(double p);

}  // namespace vinetrunc
