#include "vinetrunc/vuong.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "vinetrunc/error.hpp"
#include "vinetrunc/normal.hpp"
#include "vinetrunc/quadform.hpp"

namespace vinetrunc {

namespace {

constexpr double kDegenerateEigenvalue = 1e-8;
constexpr double kZeroVariance = 1e-12;

// Keeps rho +- h inside (-1, 1).
double fd_step(double base, double rho) {
    return std::min(base * std::max(1.0, std::abs(rho)), 0.5 * (1.0 - std::abs(rho)));
}

Eigen::VectorXd terms_at(const VineModel& model, const Dataset& data, const Eigen::VectorXd& rho) {
    return log_density_terms(model.with_parameters(rho), data);
}

void require_same_data(const VineModel& model, const Dataset& data) {
    if (model.dimension() != data.dimension()) {
        throw Error(ErrorKind::StructureMismatch, "model and data dimensions differ");
    }
}

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& A, const char* which) {
    if (A.size() == 0) return A;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    const Eigen::VectorXd magnitude = eig.eigenvalues().cwiseAbs();
    if (!(magnitude.minCoeff() > 1e-10 * magnitude.maxCoeff())) {
        throw Error(ErrorKind::SingularInformation, std::string(which) + " is not invertible");
    }
    return eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

std::string_view to_string(TestKind kind) noexcept {
    return kind == TestKind::Nested ? "nested" : "snn";
}

std::string_view to_string(Decision decision) noexcept {
    switch (decision) {
        case Decision::PreferLarger: return "PreferLarger";
        case Decision::PreferSmaller: return "PreferSmaller";
        case Decision::Indistinguishable: return "Indistinguishable";
    }
    return "Unknown";
}

Eigen::MatrixXd score_matrix(const VineModel& model, const Dataset& data) {
    require_same_data(model, data);
    const Eigen::VectorXd theta = model.parameters();
    const double base = std::sqrt(std::numeric_limits<double>::epsilon());
    Eigen::MatrixXd scores(data.size(), theta.size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const double h = fd_step(base, theta(j));
        Eigen::VectorXd up = theta, down = theta;
        up(j) += h;
        down(j) -= h;
        scores.col(j) = (terms_at(model, data, up) - terms_at(model, data, down)) / (up(j) - down(j));
    }
    return scores;
}

InfoMatrices info_matrices(const VineModel& model, const Dataset& data) {
    require_same_data(model, data);
    const Eigen::VectorXd theta = model.parameters();
    const Eigen::Index p = theta.size();
    const double n = static_cast<double>(data.size());
    if (data.size() == 0) throw Error(ErrorKind::EmptyInput, "information matrices need observations");

    const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    const auto mean_loglik = [&](const Eigen::VectorXd& rho) { return terms_at(model, data, rho).sum() / n; };
    Eigen::VectorXd h(p);
    for (Eigen::Index j = 0; j < p; ++j) h(j) = fd_step(base, theta(j));

    Eigen::MatrixXd A(p, p);
    const double center = p > 0 ? mean_loglik(theta) : 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        Eigen::VectorXd probe = theta;
        probe(i) = theta(i) + h(i);
        const double up = mean_loglik(probe);
        probe(i) = theta(i) - h(i);
        const double down = mean_loglik(probe);
        A(i, i) = (up - 2.0 * center + down) / (h(i) * h(i));
        for (Eigen::Index j = i + 1; j < p; ++j) {
            const auto corner = [&](double si, double sj) {
                Eigen::VectorXd c = theta;
                c(i) += si * h(i);
                c(j) += sj * h(j);
                return mean_loglik(c);
            };
            A(i, j) = (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4.0 * h(i) * h(j));
            A(j, i) = A(i, j);
        }
    }
    symmetric_inverse(A, "empirical Hessian A");

    const Eigen::MatrixXd S = score_matrix(model, data);
    return {A, S.transpose() * S / n};
}

Eigen::MatrixXd cross_matrix(const VineModel& model_f, const VineModel& model_g, const Dataset& data) {
    if (data.size() == 0) throw Error(ErrorKind::EmptyInput, "cross matrix needs observations");
    const Eigen::MatrixXd Sf = score_matrix(model_f, data);
    const Eigen::MatrixXd Sg = score_matrix(model_g, data);
    return Sf.transpose() * Sg / static_cast<double>(data.size());
}

WMatrix w_matrix(const Eigen::MatrixXd& A_f, const Eigen::MatrixXd& B_f, const Eigen::MatrixXd& A_g,
                 const Eigen::MatrixXd& B_g, const Eigen::MatrixXd& B_fg) {
    const Eigen::Index p = A_f.rows(), q = A_g.rows();
    if (A_f.cols() != p || B_f.rows() != p || B_f.cols() != p || A_g.cols() != q || B_g.rows() != q ||
        B_g.cols() != q || B_fg.rows() != p || B_fg.cols() != q) {
        throw Error(ErrorKind::DimensionMismatch, "information blocks have inconsistent shapes");
    }
    const Eigen::MatrixXd Af_inv = symmetric_inverse(A_f, "A_f");
    const Eigen::MatrixXd Ag_inv = symmetric_inverse(A_g, "A_g");

    WMatrix out;
    out.W.resize(p + q, p + q);
    out.W.topLeftCorner(p, p) = -B_f * Af_inv;
    out.W.topRightCorner(p, q) = -B_fg * Ag_inv;
    out.W.bottomLeftCorner(q, p) = B_fg.transpose() * Af_inv;
    out.W.bottomRightCorner(q, q) = B_g * Ag_inv;
    if (p + q == 0) {
        out.eigenvalues.resize(0);
        return out;
    }

    // W = J B M' with J = diag(-I, I), B the joint score Gram matrix and
    // M' = diag(A_f^-1, A_g^-1). Its nonzero spectrum equals that of L' M L
    // with B = L L' and M = diag(-A_f^-1, A_g^-1) symmetric, so it is real
    // whenever B is positive semidefinite. Directions of B at roundoff level
    // contribute zero eigenvalues.
    Eigen::MatrixXd B(p + q, p + q);
    B << B_f, B_fg, B_fg.transpose(), B_g;
    B = 0.5 * (B + B.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> b_eig(B);
    const double scale = std::max(b_eig.eigenvalues().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    if (b_eig.eigenvalues().minCoeff() >= -1e-10 * scale) {
        std::vector<Eigen::Index> kept;
        for (Eigen::Index i = 0; i < p + q; ++i) {
            if (b_eig.eigenvalues()(i) > 1e-12 * scale) kept.push_back(i);
        }
        Eigen::MatrixXd L(p + q, static_cast<Eigen::Index>(kept.size()));
        for (std::size_t k = 0; k < kept.size(); ++k) {
            L.col(static_cast<Eigen::Index>(k)) =
                b_eig.eigenvectors().col(kept[k]) * std::sqrt(b_eig.eigenvalues()(kept[k]));
        }
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p + q, p + q);
        M.topLeftCorner(p, p) = -Af_inv;
        M.bottomRightCorner(q, q) = Ag_inv;
        Eigen::MatrixXd S = L.transpose() * M * L;
        S = 0.5 * (S + S.transpose()).eval();
        out.eigenvalues = Eigen::VectorXd::Zero(p + q);
        if (S.size() > 0) {
            out.eigenvalues.head(S.rows()) =
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues();
        }
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> general(out.W, false);
        const Eigen::VectorXcd values = general.eigenvalues();
        const double radius = values.cwiseAbs().maxCoeff();
        if (values.imag().cwiseAbs().maxCoeff() > 1e-8 * (1.0 + radius)) {
            throw Error(ErrorKind::NumericalFailure, "W has eigenvalues with non-negligible imaginary parts");
        }
        out.eigenvalues = values.real();
    }
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());
    return out;
}

bool is_nested(const VineModel& small, const VineModel& large) {
    if (!(small.structure() == large.structure())) return false;
    const auto& s = small.pair_copulas();
    const auto& l = large.pair_copulas();
    for (std::size_t t = 0; t < s.size(); ++t) {
        for (std::size_t e = 0; e < s[t].size(); ++e) {
            if (s[t][e].family() == Family::Gaussian && l[t][e].family() != Family::Gaussian) return false;
        }
    }
    return true;
}

VuongReport vuong_nested(const VineModel& small, const VineModel& large, const Dataset& data) {
    if (!is_nested(small, large)) {
        throw Error(ErrorKind::NotNested, "the smaller model is not nested in the larger model");
    }
    require_same_data(large, data);

    VuongReport r;
    r.kind = TestKind::Nested;
    r.n = data.size();
    r.terms = log_density_terms(large, data) - log_density_terms(small, data);
    r.lr = r.terms.sum();
    r.statistic = 2.0 * r.lr;

    const InfoMatrices f = info_matrices(large, data);
    const InfoMatrices g = info_matrices(small, data);
    const Eigen::MatrixXd fg = cross_matrix(large, small, data);
    r.eigenvalues = w_matrix(f.A, f.B, g.A, g.B, fg).eigenvalues;

    if (r.eigenvalues.size() == 0 || r.eigenvalues.cwiseAbs().maxCoeff() <= kDegenerateEigenvalue) {
        r.degenerate = true;
        r.p_value = 1.0;
        return r;
    }
    r.p_value = std::clamp(1.0 - quadform_cdf(r.statistic, r.eigenvalues), 0.0, 1.0);
    return r;
}

VuongReport vuong_snn(const VineModel& model_f, const VineModel& model_g, const Dataset& data) {
    require_same_data(model_f, data);
    require_same_data(model_g, data);
    if (data.size() == 0) throw Error(ErrorKind::EmptyInput, "the test needs observations");

    VuongReport r;
    r.kind = TestKind::StrictlyNonNested;
    r.n = data.size();
    r.terms = log_density_terms(model_f, data) - log_density_terms(model_g, data);
    r.lr = r.terms.sum();
    const double n = static_cast<double>(r.n);
    const double mean = r.lr / n;
    r.omega_hat = std::sqrt((r.terms.array() - mean).square().sum() / n);
    if (!(r.omega_hat >= kZeroVariance)) {
        throw Error(ErrorKind::ZeroVariance, "per-observation log-density differences have zero variance");
    }
    r.statistic = std::sqrt(n) * mean / r.omega_hat;
    r.p_value = std::clamp(std::erfc(std::abs(r.statistic) / std::numbers::sqrt2), 0.0, 1.0);
    return r;
}

Decision decide(const VuongReport& report, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::DomainError, "significance level must lie in (0,1)");
    if (report.kind == TestKind::Nested) {
        return report.p_value < alpha ? Decision::PreferLarger : Decision::PreferSmaller;
    }
    const double critical = std_normal_quantile(1.0 - alpha / 2.0);
    if (report.statistic > critical) return Decision::PreferLarger;
    if (report.statistic < -critical) return Decision::PreferSmaller;
    return Decision::Indistinguishable;
}

}  // namespace vinetrunc
