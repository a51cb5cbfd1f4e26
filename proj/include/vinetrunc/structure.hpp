#pragma once

#include <utility>
#include <vector>

namespace vinetrunc {

/// Edge label {j, k | D} with 1-based variable indices, j < k and D sorted.
struct EdgeSpec {
    int first = 0;
    int second = 0;
    std::vector<int> conditioning;

    bool operator==(const EdgeSpec&) const = default;
};

/// A validated edge. `left`/`right` index the edges of the previous tree that
/// this edge joins; `left` is the one whose complete union contains `first`.
/// Both are -1 in the first tree.
struct VineEdge {
    EdgeSpec label;
    std::vector<int> complete_union;
    int left = -1;
    int right = -1;
};

/// One tree given as node pairs. In the first tree the pairs are 1-based
/// variable labels; in tree i >= 2 they are 0-based positions in the list
/// given for tree i - 1.
using RawTree = std::vector<std::pair<int, int>>;

/// Regular-vine tree sequence. Immutable once built; edges in each tree are
/// sorted by (first, second).
class RVineStructure {
public:
    int dimension() const noexcept { return dimension_; }
    int tree_count() const noexcept { return static_cast<int>(trees_.size()); }
    int edge_count() const noexcept { return dimension_ * (dimension_ - 1) / 2; }

    /// Tree T_{level+1}; `level` is 0-based.
    const std::vector<VineEdge>& tree(int level) const { return trees_.at(level); }
    const std::vector<std::vector<VineEdge>>& trees() const noexcept { return trees_; }

    std::vector<std::vector<EdgeSpec>> labels() const;

    bool operator==(const RVineStructure& other) const;

private:
    friend RVineStructure validate(int d, const std::vector<RawTree>& trees);

    int dimension_ = 0;
    std::vector<std::vector<VineEdge>> trees_;
};

/// Validates a raw tree list and derives conditioned/conditioning sets.
/// Throws NotATree, ProximityViolation, BadIndex or BadDimension.
RVineStructure validate(int d, const std::vector<RawTree>& trees);

/// Rebuilds a structure from edge labels (the serialized form).
RVineStructure from_labels(int d, const std::vector<std::vector<EdgeSpec>>& trees);

/// Path vine 1-2-...-d.
RVineStructure dvine(int d);

/// Star vine; tree i is rooted at node i.
RVineStructure cvine(int d);

/// Number of pair copulas in trees 1..level: level(2d - level - 1)/2.
int pair_count(int d, int level);

}  // namespace vinetrunc
