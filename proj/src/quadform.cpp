#include "vinetrunc/quadform.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "vinetrunc/error.hpp"

namespace vinetrunc {

namespace {

constexpr double kAbsoluteTolerance = 1e-6;

// Imhof: P(Q <= x) = 1/2 - (1/pi) int_0^inf sin(theta(u)) / (u rho(u)) du with
// theta(u) = sum atan(w u)/2 - x u/2 and rho(u) = prod (1 + w^2 u^2)^(1/4).
// Writing theta = phase(u) - omega u, omega = x/2, splits the integrand into
// a cosine and a sine transform of smooth, algebraically decaying envelopes.
struct Envelope {
    std::vector<double> w;

    double phase(double u) const {
        double g = 0.0;
        for (double wi : w) g += std::atan(wi * u);
        return 0.5 * g;
    }

    double log_rho(double u) const {
        double r = 0.0;
        for (double wi : w) r += std::log1p(wi * wi * u * u);
        return 0.25 * r;
    }

    // sin(phase(u)) / (u rho(u)); finite at 0 with limit sum(w)/2.
    double cos_part(double u) const {
        if (u == 0.0) {
            double s = 0.0;
            for (double wi : w) s += wi;
            return 0.5 * s;
        }
        return std::sin(phase(u)) / u * std::exp(-log_rho(u));
    }

    // cos(phase(u)) / (u rho(u)); behaves like 1/u at 0.
    double sin_part(double u) const { return std::cos(phase(u)) / u * std::exp(-log_rho(u)); }
};

struct FourierIntegrators {
    boost::math::quadrature::ooura_fourier_sin<double> sin_transform{1e-10};
    boost::math::quadrature::ooura_fourier_cos<double> cos_transform{1e-10};
    boost::math::quadrature::exp_sinh<double> half_line;
};

}  // namespace

double quadform_cdf(double x, const Eigen::Ref<const Eigen::VectorXd>& weights) {
    if (!std::isfinite(x)) throw Error(ErrorKind::DomainError, "quadratic-form argument must be finite");
    if (weights.size() == 0 || !weights.allFinite()) {
        throw Error(ErrorKind::DomainError, "weights must be a nonempty finite vector");
    }
    const double largest = weights.cwiseAbs().maxCoeff();
    Envelope env;
    for (double wi : weights) {
        if (std::abs(wi) > kWeightDropRatio * largest) env.w.push_back(wi);
    }
    if (env.w.empty()) return x >= 0.0 ? 1.0 : 0.0;

    const bool all_positive = std::all_of(env.w.begin(), env.w.end(), [](double v) { return v > 0.0; });
    const bool all_negative = std::all_of(env.w.begin(), env.w.end(), [](double v) { return v < 0.0; });
    if (all_positive && x <= 0.0) return 0.0;
    if (all_negative && x >= 0.0) return 1.0;

    const double omega = 0.5 * x;
    FourierIntegrators q;
    double integral = 0.0;
    double error = 0.0;
    if (omega == 0.0) {
        integral = q.half_line.integrate([&](double u) { return env.cos_part(u); }, 0.0,
                                         std::numeric_limits<double>::infinity(), 1e-10, &error);
    } else {
        const double sign = omega > 0.0 ? 1.0 : -1.0;
        const double freq = std::abs(omega);
        const auto [c, c_err] = q.cos_transform.integrate([&](double u) { return env.cos_part(u); }, freq);
        const auto [s, s_err] = q.sin_transform.integrate([&](double u) { return env.sin_part(u); }, freq);
        integral = c - sign * s;
        error = std::abs(c) * c_err + std::abs(s) * s_err;
    }
    if (!std::isfinite(integral) || error / std::numbers::pi > kAbsoluteTolerance) {
        throw Error(ErrorKind::NumericalFailure,
                    "Imhof quadrature error estimate " + std::to_string(error / std::numbers::pi) + " too large");
    }
    return std::clamp(0.5 - integral / std::numbers::pi, 0.0, 1.0);
}

double quadform_mc_cdf(double x, const Eigen::Ref<const Eigen::VectorXd>& weights, std::int64_t draws,
                       CounterRng& rng) {
    if (draws < 1) throw Error(ErrorKind::DomainError, "need at least one draw");
    std::int64_t below = 0;
    for (std::int64_t i = 0; i < draws; ++i) {
        double q = 0.0;
        for (double wi : weights) {
            const double z = rng.normal();
            q += wi * z * z;
        }
        below += q <= x;
    }
    return static_cast<double>(below) / static_cast<double>(draws);
}

}  // namespace vinetrunc
