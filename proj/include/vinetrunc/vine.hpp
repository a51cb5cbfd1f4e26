#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

#include "vinetrunc/bicop.hpp"
#include "vinetrunc/rng.hpp"
#include "vinetrunc/structure.hpp"

namespace vinetrunc {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-tree, per-edge values aligned with RVineStructure::trees().
template <typename T>
using EdgeTable = std::vector<std::vector<T>>;

/// n x d pseudo-observations strictly inside (0,1). The normal scores
/// Phi^-1(u) are computed once at construction.
class Dataset {
public:
    Dataset() = default;
    /// Throws DomainError if any entry is outside (0,1).
    explicit Dataset(RowMatrixXd values);

    Eigen::Index size() const noexcept { return values_.rows(); }
    int dimension() const noexcept { return static_cast<int>(values_.cols()); }

    const RowMatrixXd& values() const noexcept { return values_; }
    const RowMatrixXd& scores() const noexcept { return scores_; }

    /// Rows [begin, begin + count).
    Dataset slice(Eigen::Index begin, Eigen::Index count) const;
    /// Rows in the given order.
    Dataset select(std::span<const Eigen::Index> rows) const;

private:
    RowMatrixXd values_;
    RowMatrixXd scores_;
};

/// Structure plus one pair copula per edge plus truncation level. Trees above
/// the truncation level carry only independence copulas.
class VineModel {
public:
    /// Throws StructureMismatch if the table shape disagrees with the
    /// structure and BadTruncationLevel if a non-independence copula sits
    /// above `truncation_level`.
    VineModel(RVineStructure structure, EdgeTable<PairCopula> pairs, int truncation_level);

    /// Every edge independent, truncation level 0.
    static VineModel independence(RVineStructure structure);

    /// Gaussian copulas in trees 1..level, correlation given per tree.
    static VineModel gaussian_by_tree(RVineStructure structure, std::span<const double> rho_per_tree,
                                      int truncation_level);

    const RVineStructure& structure() const noexcept { return *structure_; }
    const std::shared_ptr<const RVineStructure>& shared_structure() const noexcept { return structure_; }
    int dimension() const noexcept { return structure_->dimension(); }
    int truncation_level() const noexcept { return truncation_; }

    const EdgeTable<PairCopula>& pair_copulas() const noexcept { return pairs_; }
    const PairCopula& pair(int level, int edge) const { return pairs_.at(level).at(edge); }
    EdgeTable<Family> families() const;

    /// Number of Gaussian edges.
    int parameter_count() const noexcept;
    /// Gaussian correlations in (tree, edge) order.
    Eigen::VectorXd parameters() const;
    /// Copy with the Gaussian correlations replaced, same order as parameters().
    VineModel with_parameters(const Eigen::Ref<const Eigen::VectorXd>& rho) const;

    bool operator==(const VineModel& other) const;

private:
    VineModel(std::shared_ptr<const RVineStructure> structure, EdgeTable<PairCopula> pairs, int truncation_level);

    std::shared_ptr<const RVineStructure> structure_;
    EdgeTable<PairCopula> pairs_;
    int truncation_ = 0;
};

/// Log-density of the vine copula at an interior point.
double log_density(const VineModel& model, std::span<const double> u);

/// Per-observation log-densities.
Eigen::VectorXd log_density_terms(const VineModel& model, const Dataset& data);

double log_likelihood(const VineModel& model, const Dataset& data);

/// Replaces every copula above tree `level` by independence.
VineModel truncate(const VineModel& model, int level);

/// `n` draws by conditional inversion along the structure.
Dataset sample(const VineModel& model, Eigen::Index n, CounterRng& rng);

}  // namespace vinetrunc
