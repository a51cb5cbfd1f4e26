#include "vinetrunc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vinetrunc/error.hpp"
#include "vinetrunc/optimize.hpp"

namespace vinetrunc {

namespace {

const double kPsiBound = std::atanh(kRhoBound);

int implied_truncation(const EdgeTable<Family>& families) {
    int level = 0;
    for (std::size_t t = 0; t < families.size(); ++t) {
        if (std::any_of(families[t].begin(), families[t].end(), [](Family f) { return f != Family::Independence; })) {
            level = static_cast<int>(t) + 1;
        }
    }
    return level;
}

void check_families(const RVineStructure& structure, const EdgeTable<Family>& families) {
    if (static_cast<int>(families.size()) != structure.tree_count()) {
        throw Error(ErrorKind::DimensionMismatch, "family table has the wrong number of trees");
    }
    for (int t = 0; t < structure.tree_count(); ++t) {
        if (families[t].size() != structure.tree(t).size()) {
            throw Error(ErrorKind::DimensionMismatch, "family table has the wrong number of edges");
        }
    }
}

VineModel model_from(const RVineStructure& structure, const EdgeTable<Family>& families,
                     const Eigen::VectorXd& rho) {
    EdgeTable<PairCopula> pairs;
    Eigen::Index i = 0;
    for (const auto& tree : families) {
        auto& level = pairs.emplace_back();
        for (Family f : tree) {
            level.push_back(f == Family::Gaussian ? PairCopula::gaussian(rho(i++)) : PairCopula::independence());
        }
    }
    return VineModel(structure, std::move(pairs), implied_truncation(families));
}

int gaussian_count(const EdgeTable<Family>& families) {
    int count = 0;
    for (const auto& tree : families) count += static_cast<int>(std::count(tree.begin(), tree.end(), Family::Gaussian));
    return count;
}

}  // namespace

EdgeTable<Family> truncated_families(const RVineStructure& structure, int level) {
    if (level < 0 || level > structure.tree_count()) {
        throw Error(ErrorKind::BadTruncationLevel, "truncation level must lie in 0..d-1");
    }
    EdgeTable<Family> out;
    for (int t = 0; t < structure.tree_count(); ++t) {
        out.emplace_back(structure.tree(t).size(), t < level ? Family::Gaussian : Family::Independence);
    }
    return out;
}

VineModel sequential_estimate(const RVineStructure& structure, const EdgeTable<Family>& families,
                              const Dataset& data) {
    check_families(structure, families);
    if (data.dimension() != structure.dimension()) {
        throw Error(ErrorKind::DimensionMismatch, "data columns do not match the structure dimension");
    }
    const int levels = implied_truncation(families);
    Eigen::VectorXd rho(gaussian_count(families));
    Eigen::Index next = 0;

    // Normal scores of the h-function outputs of the previous tree.
    std::vector<Eigen::ArrayXd> prev_first, prev_second;
    for (int level = 0; level < levels; ++level) {
        const auto& edges = structure.tree(level);
        std::vector<Eigen::ArrayXd> next_first(edges.size()), next_second(edges.size());
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const VineEdge& edge = edges[e];
            Eigen::ArrayXd x, y;
            if (level == 0) {
                x = data.scores().col(edge.label.first - 1);
                y = data.scores().col(edge.label.second - 1);
            } else {
                const auto& below = structure.tree(level - 1);
                x = below[edge.left].label.first == edge.label.first ? prev_first[edge.left] : prev_second[edge.left];
                y = below[edge.right].label.first == edge.label.second ? prev_first[edge.right]
                                                                      : prev_second[edge.right];
            }
            if (families[level][e] == Family::Gaussian) {
                const auto negative_loglik = [&](double psi) {
                    return -gaussian_log_density_scores(std::tanh(psi), x, y).sum();
                };
                const double r = std::tanh(minimize_scalar(negative_loglik, -kPsiBound, kPsiBound));
                rho(next++) = r;
                const double s = std::sqrt(1.0 - r * r);
                next_first[e] = (x - r * y) / s;
                next_second[e] = (y - r * x) / s;
            } else {
                next_first[e] = std::move(x);
                next_second[e] = std::move(y);
            }
        }
        prev_first = std::move(next_first);
        prev_second = std::move(next_second);
    }
    return model_from(structure, families, rho);
}

FitResult fit_mle(const RVineStructure& structure, const EdgeTable<Family>& families, const Dataset& data,
                  const std::optional<Eigen::VectorXd>& start) {
    check_families(structure, families);
    if (data.dimension() != structure.dimension()) {
        throw Error(ErrorKind::DimensionMismatch, "data columns do not match the structure dimension");
    }
    const int p = gaussian_count(families);
    Eigen::VectorXd rho0;
    if (start) {
        if (start->size() != p) {
            throw Error(ErrorKind::DimensionMismatch,
                        "start vector needs " + std::to_string(p) + " entries, got " + std::to_string(start->size()));
        }
        if (((start->array() <= -1.0) || (start->array() >= 1.0)).any()) {
            throw Error(ErrorKind::DomainError, "start correlations must lie in (-1,1)");
        }
        rho0 = *start;
    } else {
        rho0 = sequential_estimate(structure, families, data).parameters();
    }

    const VineModel base = model_from(structure, families, Eigen::VectorXd::Zero(p));
    const auto to_rho = [](const Eigen::VectorXd& psi) {
        return Eigen::VectorXd(psi.array().max(-kPsiBound).min(kPsiBound).tanh());
    };
    const Objective negative_loglik = [&](const Eigen::VectorXd& psi) {
        return -log_likelihood(base.with_parameters(to_rho(psi)), data);
    };

    const Eigen::VectorXd psi0 = rho0.array().max(-kRhoBound).min(kRhoBound).atanh();
    const MinimizeResult m = minimize_bfgs(negative_loglik, psi0);

    FitResult out{base.with_parameters(to_rho(m.x)), -m.value, m.converged, m.iterations};
    const double loose = 1e-4 * std::max(1.0, std::abs(m.value));
    if (p > 0 && m.gradient.lpNorm<Eigen::Infinity>() > loose) {
        throw Error(ErrorKind::NonConvergence, "optimizer stopped with gradient norm " +
                                                   std::to_string(m.gradient.lpNorm<Eigen::Infinity>()) +
                                                   " after " + std::to_string(m.iterations) + " iterations");
    }
    return out;
}

}  // namespace vinetrunc
