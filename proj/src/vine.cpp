#include "vinetrunc/vine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vinetrunc/error.hpp"
#include "vinetrunc/normal.hpp"

namespace vinetrunc {

namespace {

// Normal score of the clamp bound; conditional values are carried as scores.
const double kScoreLimit = -std_normal_quantile(kUnitClamp);

Eigen::ArrayXd clamp_scores(Eigen::ArrayXd z) { return z.max(-kScoreLimit).min(kScoreLimit); }

double clamp_score(double z) { return std::clamp(z, -kScoreLimit, kScoreLimit); }

void require_dimension(const VineModel& model, int d) {
    if (d != model.dimension()) {
        throw Error(ErrorKind::StructureMismatch, "data has " + std::to_string(d) + " columns, model has dimension " +
                                                      std::to_string(model.dimension()));
    }
}

}  // namespace

Dataset::Dataset(RowMatrixXd values) : values_(std::move(values)), scores_(values_.rows(), values_.cols()) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        for (Eigen::Index j = 0; j < values_.cols(); ++j) {
            const double u = values_(i, j);
            if (!(u > 0.0 && u < 1.0)) {
                throw Error(ErrorKind::DomainError, "observation " + std::to_string(i + 1) + ", column " +
                                                        std::to_string(j + 1) + " is not inside (0,1)");
            }
            scores_(i, j) = std_normal_quantile(std::clamp(u, kUnitClamp, 1.0 - kUnitClamp));
        }
    }
}

Dataset Dataset::slice(Eigen::Index begin, Eigen::Index count) const {
    Dataset out;
    out.values_ = values_.middleRows(begin, count);
    out.scores_ = scores_.middleRows(begin, count);
    return out;
}

Dataset Dataset::select(std::span<const Eigen::Index> rows) const {
    Dataset out;
    out.values_.resize(static_cast<Eigen::Index>(rows.size()), values_.cols());
    out.scores_.resize(static_cast<Eigen::Index>(rows.size()), values_.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.values_.row(static_cast<Eigen::Index>(i)) = values_.row(rows[i]);
        out.scores_.row(static_cast<Eigen::Index>(i)) = scores_.row(rows[i]);
    }
    return out;
}

VineModel::VineModel(RVineStructure structure, EdgeTable<PairCopula> pairs, int truncation_level)
    : VineModel(std::make_shared<const RVineStructure>(std::move(structure)), std::move(pairs), truncation_level) {}

VineModel::VineModel(std::shared_ptr<const RVineStructure> structure, EdgeTable<PairCopula> pairs,
                     int truncation_level)
    : structure_(std::move(structure)), pairs_(std::move(pairs)), truncation_(truncation_level) {
    const int d = structure_->dimension();
    if (truncation_ < 0 || truncation_ > d - 1) {
        throw Error(ErrorKind::BadTruncationLevel, "truncation level must lie in 0..d-1");
    }
    if (static_cast<int>(pairs_.size()) != structure_->tree_count()) {
        throw Error(ErrorKind::StructureMismatch, "pair-copula table has the wrong number of trees");
    }
    for (int level = 0; level < structure_->tree_count(); ++level) {
        if (pairs_[level].size() != structure_->tree(level).size()) {
            throw Error(ErrorKind::StructureMismatch, "pair-copula table has the wrong number of edges");
        }
        if (level >= truncation_) {
            for (const auto& pc : pairs_[level]) {
                if (pc.family() != Family::Independence) {
                    throw Error(ErrorKind::BadTruncationLevel,
                                "tree " + std::to_string(level + 1) + " lies above the truncation level");
                }
            }
        }
    }
}

VineModel VineModel::independence(RVineStructure structure) {
    EdgeTable<PairCopula> pairs;
    for (const auto& tree : structure.trees()) pairs.emplace_back(tree.size(), PairCopula::independence());
    return VineModel(std::move(structure), std::move(pairs), 0);
}

VineModel VineModel::gaussian_by_tree(RVineStructure structure, std::span<const double> rho_per_tree,
                                      int truncation_level) {
    if (truncation_level < 0 || truncation_level > structure.tree_count()) {
        throw Error(ErrorKind::BadTruncationLevel, "truncation level must lie in 0..d-1");
    }
    if (static_cast<int>(rho_per_tree.size()) < truncation_level) {
        throw Error(ErrorKind::DimensionMismatch, "need one correlation per retained tree");
    }
    EdgeTable<PairCopula> pairs;
    for (int level = 0; level < structure.tree_count(); ++level) {
        const auto edges = structure.tree(level).size();
        pairs.emplace_back(edges, level < truncation_level ? PairCopula::gaussian(rho_per_tree[level])
                                                           : PairCopula::independence());
    }
    return VineModel(std::move(structure), std::move(pairs), truncation_level);
}

EdgeTable<Family> VineModel::families() const {
    EdgeTable<Family> out;
    for (const auto& tree : pairs_) {
        auto& level = out.emplace_back();
        for (const auto& pc : tree) level.push_back(pc.family());
    }
    return out;
}

int VineModel::parameter_count() const noexcept {
    int count = 0;
    for (const auto& tree : pairs_) {
        for (const auto& pc : tree) count += pc.parameter_count();
    }
    return count;
}

Eigen::VectorXd VineModel::parameters() const {
    Eigen::VectorXd out(parameter_count());
    Eigen::Index i = 0;
    for (const auto& tree : pairs_) {
        for (const auto& pc : tree) {
            if (pc.family() == Family::Gaussian) out(i++) = pc.rho();
        }
    }
    return out;
}

VineModel VineModel::with_parameters(const Eigen::Ref<const Eigen::VectorXd>& rho) const {
    if (rho.size() != parameter_count()) {
        throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(parameter_count()) + " parameters");
    }
    EdgeTable<PairCopula> pairs = pairs_;
    Eigen::Index i = 0;
    for (auto& tree : pairs) {
        for (auto& pc : tree) {
            if (pc.family() == Family::Gaussian) pc = PairCopula::gaussian(rho(i++));
        }
    }
    return VineModel(structure_, std::move(pairs), truncation_);
}

bool VineModel::operator==(const VineModel& other) const {
    return truncation_ == other.truncation_ && pairs_ == other.pairs_ && structure() == other.structure();
}

Eigen::VectorXd log_density_terms(const VineModel& model, const Dataset& data) {
    require_dimension(model, data.dimension());
    const auto& structure = model.structure();
    const Eigen::Index n = data.size();
    Eigen::ArrayXd total = Eigen::ArrayXd::Zero(n);

    // Normal scores of C(first | D u {second}) and C(second | D u {first}) per
    // edge of the previous tree.
    std::vector<Eigen::ArrayXd> prev_first, prev_second;
    const auto& previous_edges = [&](int level) -> const std::vector<VineEdge>& { return structure.tree(level - 1); };

    for (int level = 0; level < model.truncation_level(); ++level) {
        const auto& edges = structure.tree(level);
        std::vector<Eigen::ArrayXd> next_first(edges.size()), next_second(edges.size());
        const bool need_outputs = level + 1 < model.truncation_level();
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const VineEdge& edge = edges[e];
            Eigen::ArrayXd x, y;
            if (level == 0) {
                x = data.scores().col(edge.label.first - 1);
                y = data.scores().col(edge.label.second - 1);
            } else {
                const auto& below = previous_edges(level);
                x = below[edge.left].label.first == edge.label.first ? prev_first[edge.left] : prev_second[edge.left];
                y = below[edge.right].label.first == edge.label.second ? prev_first[edge.right]
                                                                      : prev_second[edge.right];
            }
            const PairCopula& pc = model.pair(level, static_cast<int>(e));
            if (pc.family() == Family::Gaussian) {
                const double rho = pc.rho();
                total += gaussian_log_density_scores(rho, x, y);
                if (need_outputs) {
                    const double s = std::sqrt(1.0 - rho * rho);
                    next_first[e] = clamp_scores((x - rho * y) / s);
                    next_second[e] = clamp_scores((y - rho * x) / s);
                }
            } else if (need_outputs) {
                next_first[e] = std::move(x);
                next_second[e] = std::move(y);
            }
        }
        prev_first = std::move(next_first);
        prev_second = std::move(next_second);
    }
    return total.matrix();
}

double log_likelihood(const VineModel& model, const Dataset& data) { return log_density_terms(model, data).sum(); }

double log_density(const VineModel& model, std::span<const double> u) {
    require_dimension(model, static_cast<int>(u.size()));
    RowMatrixXd point(1, static_cast<Eigen::Index>(u.size()));
    for (std::size_t j = 0; j < u.size(); ++j) point(0, static_cast<Eigen::Index>(j)) = u[j];
    return log_density_terms(model, Dataset(std::move(point)))(0);
}

VineModel truncate(const VineModel& model, int level) {
    if (level < 0 || level > model.dimension() - 1) {
        throw Error(ErrorKind::BadTruncationLevel, "truncation level must lie in 0..d-1");
    }
    EdgeTable<PairCopula> pairs = model.pair_copulas();
    for (int t = level; t < static_cast<int>(pairs.size()); ++t) {
        std::fill(pairs[t].begin(), pairs[t].end(), PairCopula::independence());
    }
    return VineModel(model.structure(), std::move(pairs), std::min(level, model.truncation_level()));
}

namespace {

struct EdgeRef {
    int level;
    int edge;
    int partner;  // the other conditioned variable
};

struct SamplingStep {
    int variable;                // 1-based
    std::vector<EdgeRef> edges;  // one per tree, tree 1 first
};

// Peels variables off the top tree: the chosen variable is conditioned in
// exactly one remaining edge per tree, and the rest is a vine on the
// remaining variables. Returned in sampling order.
std::vector<SamplingStep> sampling_plan(const RVineStructure& structure) {
    const int d = structure.dimension();
    EdgeTable<bool> removed;
    for (const auto& tree : structure.trees()) removed.emplace_back(tree.size(), false);
    std::vector<bool> taken(d + 1, false);
    std::vector<SamplingStep> reversed;

    for (int m = d; m > 1; --m) {
        const int top = m - 2;
        int top_edge = -1;
        for (std::size_t e = 0; e < removed[top].size(); ++e) {
            if (!removed[top][e]) {
                if (top_edge >= 0) throw std::logic_error("vine peeling left several top edges");
                top_edge = static_cast<int>(e);
            }
        }
        if (top_edge < 0) throw std::logic_error("vine peeling ran out of edges");
        SamplingStep step;
        step.variable = structure.tree(top)[top_edge].label.second;
        for (int level = 0; level <= top; ++level) {
            int found = -1;
            for (std::size_t e = 0; e < removed[level].size(); ++e) {
                const auto& label = structure.tree(level)[e].label;
                if (!removed[level][e] && (label.first == step.variable || label.second == step.variable)) {
                    if (found >= 0) throw std::logic_error("variable conditioned twice in one tree");
                    found = static_cast<int>(e);
                }
            }
            if (found < 0) throw std::logic_error("variable missing from a tree during peeling");
            removed[level][found] = true;
            const auto& label = structure.tree(level)[found].label;
            step.edges.push_back({level, found, label.first == step.variable ? label.second : label.first});
        }
        taken[step.variable] = true;
        reversed.push_back(std::move(step));
    }
    for (int v = 1; v <= d; ++v) {
        if (!taken[v]) reversed.push_back(SamplingStep{v, {}});
    }
    return {reversed.rbegin(), reversed.rend()};
}

// Memoized normal scores of conditional distributions for one point.
class ConditionalScores {
public:
    ConditionalScores(const VineModel& model, std::span<const double> z) : model_(model), z_(z) {
        for (const auto& tree : model.structure().trees()) {
            memo_.emplace_back(2 * tree.size(), std::numeric_limits<double>::quiet_NaN());
        }
    }

    /// Score of C(var | D(edge)).
    double argument(int level, int edge, int var) {
        if (level == 0) return z_[var - 1];
        const VineEdge& e = model_.structure().tree(level)[edge];
        const int child = var == e.label.first ? e.left : e.right;
        return output(level - 1, child, var);
    }

    /// Score of C(var | D(edge) u {other conditioned variable}).
    double output(int level, int edge, int var) {
        const VineEdge& e = model_.structure().tree(level)[edge];
        const bool is_first = var == e.label.first;
        double& slot = memo_[level][2 * edge + (is_first ? 0 : 1)];
        if (!std::isnan(slot)) return slot;
        const int other = is_first ? e.label.second : e.label.first;
        const double x = argument(level, edge, var);
        const PairCopula& pc = model_.pair(level, edge);
        if (pc.family() == Family::Independence) {
            slot = x;
        } else {
            const double y = argument(level, edge, other);
            slot = clamp_score(gaussian_hfunc_score(pc.rho(), x, y));
        }
        return slot;
    }

private:
    const VineModel& model_;
    std::span<const double> z_;
    EdgeTable<double> memo_;
};

}  // namespace

Dataset sample(const VineModel& model, Eigen::Index n, CounterRng& rng) {
    if (n < 0) throw Error(ErrorKind::DomainError, "sample size must be nonnegative");
    const int d = model.dimension();
    const auto plan = sampling_plan(model.structure());
    RowMatrixXd values(n, d);
    std::vector<double> z(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> w(d);
        for (int s = 0; s < d; ++s) w[s] = std_normal_quantile(rng.uniform());
        ConditionalScores conditional(model, z);
        for (int s = 0; s < d; ++s) {
            const SamplingStep& step = plan[s];
            double score = w[s];
            for (auto it = step.edges.rbegin(); it != step.edges.rend(); ++it) {
                const PairCopula& pc = model.pair(it->level, it->edge);
                if (pc.family() == Family::Independence) continue;
                const double rho = pc.rho();
                const double given = conditional.argument(it->level, it->edge, it->partner);
                score = clamp_score(score * std::sqrt(1.0 - rho * rho) + rho * given);
            }
            z[step.variable - 1] = score;
        }
        for (int j = 0; j < d; ++j) {
            values(i, j) = std::clamp(std_normal_cdf(z[j]), kUnitClamp, 1.0 - kUnitClamp);
        }
    }
    return Dataset(std::move(values));
}

}  // namespace vinetrunc
