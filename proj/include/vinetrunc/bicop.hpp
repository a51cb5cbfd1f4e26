#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <string_view>

namespace vinetrunc {

enum class Family { Independence, Gaussian };

std::string_view to_string(Family family) noexcept;
Family family_from_string(std::string_view name);

/// Pseudo-observations are clamped to [kUnitClamp, 1 - kUnitClamp] before
/// they reach the normal quantile.
inline constexpr double kUnitClamp = 1e-12;

/// Bivariate copula: Gaussian with correlation `rho`, or independence.
class PairCopula {
public:
    PairCopula() = default;

    static PairCopula independence() noexcept { return PairCopula(); }
    /// Throws DomainError unless -1 < rho < 1.
    static PairCopula gaussian(double rho);

    Family family() const noexcept { return family_; }
    double rho() const noexcept { return rho_; }
    int parameter_count() const noexcept { return family_ == Family::Gaussian ? 1 : 0; }

    bool operator==(const PairCopula&) const = default;

private:
    Family family_ = Family::Independence;
    double rho_ = 0.0;
};

/// Kendall's tau to Gaussian correlation, rho = sin(pi tau / 2).
double tau_to_rho(double tau);
double rho_to_tau(double rho);

/// Gaussian copula log-density on the normal scores x = Phi^-1(u), y = Phi^-1(v).
template <typename Scalar>
Scalar gaussian_log_density_scores(Scalar rho, Scalar x, Scalar y) {
    using std::log;
    const Scalar one_minus = Scalar(1) - rho * rho;
    return Scalar(-0.5) * log(one_minus) +
           (Scalar(2) * rho * x * y - rho * rho * (x * x + y * y)) / (Scalar(2) * one_minus);
}

/// Coefficient-wise version for arrays of normal scores.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> gaussian_log_density_scores(
    typename Derived::Scalar rho, const Eigen::ArrayBase<Derived>& x, const Eigen::ArrayBase<Derived>& y) {
    using Scalar = typename Derived::Scalar;
    const Scalar one_minus = Scalar(1) - rho * rho;
    return Scalar(-0.5) * std::log(one_minus) +
           (Scalar(2) * rho * x * y - rho * rho * (x.square() + y.square())) / (Scalar(2) * one_minus);
}

/// Score z-value of the Gaussian h-function, (x - rho y) / sqrt(1 - rho^2).
template <typename Scalar>
Scalar gaussian_hfunc_score(Scalar rho, Scalar x, Scalar y) {
    using std::sqrt;
    return (x - rho * y) / sqrt(Scalar(1) - rho * rho);
}

double log_density(const PairCopula& copula, double u, double v);

/// Conditional distribution C(u | v) = dC(u, v)/dv, clamped into
/// [kUnitClamp, 1 - kUnitClamp].
double hfunc(const PairCopula& copula, double u, double v);

/// Inverse of hfunc in its first argument.
double hinv(const PairCopula& copula, double w, double v);

}  // namespace vinetrunc
