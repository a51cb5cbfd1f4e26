#pragma once

#include <Eigen/Dense>

#include <string_view>

#include "vinetrunc/vine.hpp"

namespace vinetrunc {

/// Empirical information matrices in correlation space.
struct InfoMatrices {
    Eigen::MatrixXd A;  ///< mean Hessian of the per-observation log-density
    Eigen::MatrixXd B;  ///< mean outer product of per-observation scores
};

struct WMatrix {
    Eigen::MatrixXd W;
    Eigen::VectorXd eigenvalues;  ///< sorted decreasing, length p + q
};

enum class TestKind { Nested, StrictlyNonNested };

enum class Decision { PreferLarger, PreferSmaller, Indistinguishable };

std::string_view to_string(TestKind kind) noexcept;
std::string_view to_string(Decision decision) noexcept;

/// Outcome of a Vuong test of a first model F against a second model G.
/// For the nested test F is the larger model; for the non-nested test the
/// "larger" side in Decision refers to F.
struct VuongReport {
    TestKind kind = TestKind::Nested;
    Eigen::Index n = 0;
    double lr = 0.0;         ///< sum_t log f(u_t) - log g(u_t)
    double statistic = 0.0;  ///< 2 lr (nested) or sqrt(n) mean(m) / omega (non-nested)
    Eigen::VectorXd eigenvalues;  ///< nested only
    double omega_hat = 0.0;       ///< non-nested only
    double p_value = 1.0;
    bool degenerate = false;      ///< nested test with all-zero eigenvalues; p forced to 1
    Eigen::VectorXd terms;        ///< per-observation m_t
};

/// n x p central-difference scores of the per-observation log-density with
/// respect to the Gaussian correlations, step sqrt(eps) max(1, |rho|).
Eigen::MatrixXd score_matrix(const VineModel& model, const Dataset& data);

/// A from central-difference Hessians (step eps^(1/3) max(1, |rho|)), B from
/// the scores. Throws SingularInformation if A is not invertible.
InfoMatrices info_matrices(const VineModel& model, const Dataset& data);

/// (1/n) S_F' S_G.
Eigen::MatrixXd cross_matrix(const VineModel& model_f, const VineModel& model_g, const Dataset& data);

/// Assembles W = [[-B_f A_f^-1, -B_fg A_g^-1], [B_gf A_f^-1, B_g A_g^-1]] and
/// its eigenvalues. Throws SingularInformation or NumericalFailure.
WMatrix w_matrix(const Eigen::MatrixXd& A_f, const Eigen::MatrixXd& B_f, const Eigen::MatrixXd& A_g,
                 const Eigen::MatrixXd& B_g, const Eigen::MatrixXd& B_fg);

/// True when both models share a structure and every Gaussian edge of
/// `small` is Gaussian in `large`.
bool is_nested(const VineModel& small, const VineModel& large);

/// One-sided likelihood-ratio test of `small` nested in `large`, null law a
/// weighted sum of chi-square(1) variables.
VuongReport vuong_nested(const VineModel& small, const VineModel& large, const Dataset& data);

/// Normal test for strictly non-nested models; positive statistic favours
/// `model_f`.
VuongReport vuong_snn(const VineModel& model_f, const VineModel& model_g, const Dataset& data);

Decision decide(const VuongReport& report, double alpha);

}  // namespace vinetrunc
