#include "vinetrunc/bicop.hpp"

#include <algorithm>
#include <numbers>

#include "vinetrunc/error.hpp"
#include "vinetrunc/normal.hpp"

namespace vinetrunc {

namespace {

double checked_unit(double u, const char* what) {
    if (!(u > 0.0 && u < 1.0)) {
        throw Error(ErrorKind::DomainError, std::string(what) + " must lie strictly inside (0,1)");
    }
    return std::clamp(u, kUnitClamp, 1.0 - kUnitClamp);
}

double clamp_unit(double p) { return std::clamp(p, kUnitClamp, 1.0 - kUnitClamp); }

}  // namespace

std::string_view to_string(Family family) noexcept {
    return family == Family::Gaussian ? "gaussian" : "independence";
}

Family family_from_string(std::string_view name) {
    if (name == "gaussian") return Family::Gaussian;
    if (name == "independence") return Family::Independence;
    throw Error(ErrorKind::ParseError, "unknown copula family '" + std::string(name) + "'");
}

PairCopula PairCopula::gaussian(double rho) {
    if (!(rho > -1.0 && rho < 1.0)) {
        throw Error(ErrorKind::DomainError, "Gaussian correlation must lie in (-1,1)");
    }
    PairCopula c;
    c.family_ = Family::Gaussian;
    c.rho_ = rho;
    return c;
}

double tau_to_rho(double tau) {
    if (!(tau > -1.0 && tau < 1.0)) throw Error(ErrorKind::DomainError, "Kendall's tau must lie in (-1,1)");
    return std::sin(std::numbers::pi * tau / 2.0);
}

double rho_to_tau(double rho) {
    if (!(rho > -1.0 && rho < 1.0)) throw Error(ErrorKind::DomainError, "correlation must lie in (-1,1)");
    return 2.0 / std::numbers::pi * std::asin(rho);
}

double log_density(const PairCopula& copula, double u, double v) {
    const double uc = checked_unit(u, "u");
    const double vc = checked_unit(v, "v");
    if (copula.family() == Family::Independence) return 0.0;
    return gaussian_log_density_scores(copula.rho(), std_normal_quantile(uc), std_normal_quantile(vc));
}

double hfunc(const PairCopula& copula, double u, double v) {
    const double uc = checked_unit(u, "u");
    const double vc = checked_unit(v, "v");
    if (copula.family() == Family::Independence) return uc;
    const double z = gaussian_hfunc_score(copula.rho(), std_normal_quantile(uc), std_normal_quantile(vc));
    return clamp_unit(std_normal_cdf(z));
}

double hinv(const PairCopula& copula, double w, double v) {
    const double wc = checked_unit(w, "w");
    const double vc = checked_unit(v, "v");
    if (copula.family() == Family::Independence) return wc;
    const double rho = copula.rho();
    const double z = std_normal_quantile(wc) * std::sqrt(1.0 - rho * rho) + rho * std_normal_quantile(vc);
    return clamp_unit(std_normal_cdf(z));
}

}  // namespace vinetrunc
