#include "vinetrunc/structure.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <string>
#include <tuple>

#include "vinetrunc/error.hpp"

namespace vinetrunc {

namespace {

struct DisjointSets {
    std::vector<int> parent;

    explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }

    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

std::vector<int> set_intersection(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<int> set_difference(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::string tree_name(int level) { return "tree " + std::to_string(level + 1); }

}  // namespace

std::vector<std::vector<EdgeSpec>> RVineStructure::labels() const {
    std::vector<std::vector<EdgeSpec>> out;
    out.reserve(trees_.size());
    for (const auto& tree : trees_) {
        auto& level = out.emplace_back();
        for (const auto& edge : tree) level.push_back(edge.label);
    }
    return out;
}

bool RVineStructure::operator==(const RVineStructure& other) const {
    return dimension_ == other.dimension_ && labels() == other.labels();
}

RVineStructure validate(int d, const std::vector<RawTree>& trees) {
    if (d < 2) throw Error(ErrorKind::BadDimension, "dimension must be at least 2");
    if (static_cast<int>(trees.size()) != d - 1) {
        throw Error(ErrorKind::BadDimension,
                    "expected " + std::to_string(d - 1) + " trees, got " + std::to_string(trees.size()));
    }

    // Edges in the order given, children referencing the given order.
    std::vector<std::vector<VineEdge>> raw(d - 1);
    for (int level = 0; level < d - 1; ++level) {
        const RawTree& tree = trees[level];
        const int nodes = d - level;
        if (static_cast<int>(tree.size()) != nodes - 1) {
            throw Error(ErrorKind::NotATree, tree_name(level) + " needs " + std::to_string(nodes - 1) +
                                                 " edges, got " + std::to_string(tree.size()));
        }
        const int base = level == 0 ? 1 : 0;
        DisjointSets components(nodes);
        for (auto [a, b] : tree) {
            if (a < base || a >= base + nodes || b < base || b >= base + nodes) {
                throw Error(ErrorKind::BadIndex, tree_name(level) + " references a node out of range");
            }
            if (a == b || !components.unite(a - base, b - base)) {
                throw Error(ErrorKind::NotATree, tree_name(level) + " contains a cycle");
            }

            VineEdge edge;
            if (level == 0) {
                edge.complete_union = {std::min(a, b), std::max(a, b)};
                edge.label = EdgeSpec{std::min(a, b), std::max(a, b), {}};
                raw[level].push_back(std::move(edge));
                continue;
            }

            const VineEdge& ea = raw[level - 1][a];
            const VineEdge& eb = raw[level - 1][b];
            // Proximity: the joined edges share exactly one node of the previous tree.
            const auto& prev = trees[level - 1];
            const auto [a1, a2] = prev[a];
            const auto [b1, b2] = prev[b];
            const int shared = (a1 == b1) + (a1 == b2) + (a2 == b1) + (a2 == b2);
            if (shared != 1) {
                throw Error(ErrorKind::ProximityViolation,
                            tree_name(level) + " joins edges sharing " + std::to_string(shared) + " nodes");
            }

            std::vector<int> conditioning = set_intersection(ea.complete_union, eb.complete_union);
            const auto ca = set_difference(ea.complete_union, conditioning);
            const auto cb = set_difference(eb.complete_union, conditioning);
            if (ca.size() != 1 || cb.size() != 1 || static_cast<int>(conditioning.size()) != level) {
                throw Error(ErrorKind::ProximityViolation, tree_name(level) + " has a non-singleton conditioned set");
            }
            edge.complete_union = set_union(ea.complete_union, eb.complete_union);
            if (ca[0] < cb[0]) {
                edge.label = EdgeSpec{ca[0], cb[0], std::move(conditioning)};
                edge.left = a;
                edge.right = b;
            } else {
                edge.label = EdgeSpec{cb[0], ca[0], std::move(conditioning)};
                edge.left = b;
                edge.right = a;
            }
            raw[level].push_back(std::move(edge));
        }
    }

    // Canonical order within each tree, children remapped accordingly.
    RVineStructure out;
    out.dimension_ = d;
    out.trees_.resize(d - 1);
    std::vector<int> previous_position;
    for (int level = 0; level < d - 1; ++level) {
        auto& edges = raw[level];
        std::vector<int> order(edges.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            const auto& lx = edges[x].label;
            const auto& ly = edges[y].label;
            return std::tie(lx.first, lx.second) < std::tie(ly.first, ly.second);
        });
        std::vector<int> position(edges.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            VineEdge edge = edges[order[i]];
            if (level > 0) {
                edge.left = previous_position[edge.left];
                edge.right = previous_position[edge.right];
            }
            position[order[i]] = static_cast<int>(i);
            out.trees_[level].push_back(std::move(edge));
        }
        previous_position = std::move(position);
    }

    std::vector<std::pair<int, int>> conditioned;
    for (const auto& tree : out.trees_) {
        for (const auto& edge : tree) conditioned.emplace_back(edge.label.first, edge.label.second);
    }
    std::sort(conditioned.begin(), conditioned.end());
    if (std::adjacent_find(conditioned.begin(), conditioned.end()) != conditioned.end()) {
        throw Error(ErrorKind::ProximityViolation, "conditioned pairs are not distinct");
    }
    return out;
}

RVineStructure from_labels(int d, const std::vector<std::vector<EdgeSpec>>& trees) {
    if (d < 2) throw Error(ErrorKind::BadDimension, "dimension must be at least 2");
    if (static_cast<int>(trees.size()) != d - 1) {
        throw Error(ErrorKind::BadDimension, "expected " + std::to_string(d - 1) + " trees");
    }
    std::vector<RawTree> raw(d - 1);
    std::vector<std::vector<int>> previous_unions;
    for (int level = 0; level < d - 1; ++level) {
        std::vector<std::vector<int>> unions;
        for (const EdgeSpec& label : trees[level]) {
            const int j = std::min(label.first, label.second);
            const int k = std::max(label.first, label.second);
            std::vector<int> cond = label.conditioning;
            std::sort(cond.begin(), cond.end());
            const auto out_of_range = [d](int v) { return v < 1 || v > d; };
            if (out_of_range(j) || out_of_range(k) || std::any_of(cond.begin(), cond.end(), out_of_range)) {
                throw Error(ErrorKind::BadIndex, tree_name(level) + " label references a variable out of range");
            }
            if (j == k || std::binary_search(cond.begin(), cond.end(), j) ||
                std::binary_search(cond.begin(), cond.end(), k) ||
                std::adjacent_find(cond.begin(), cond.end()) != cond.end()) {
                throw Error(ErrorKind::BadIndex, tree_name(level) + " label has overlapping sets");
            }
            if (static_cast<int>(cond.size()) != level) {
                throw Error(ErrorKind::ProximityViolation,
                            tree_name(level) + " label needs a conditioning set of size " + std::to_string(level));
            }
            if (level == 0) {
                raw[0].emplace_back(j, k);
            } else {
                const auto locate = [&](int v) {
                    std::vector<int> target = set_union(cond, {v});
                    auto it = std::find(previous_unions.begin(), previous_unions.end(), target);
                    if (it == previous_unions.end()) {
                        throw Error(ErrorKind::ProximityViolation,
                                    tree_name(level) + " label does not join two edges of the previous tree");
                    }
                    return static_cast<int>(it - previous_unions.begin());
                };
                raw[level].emplace_back(locate(j), locate(k));
            }
            std::vector<int> u = set_union(cond, {j, k});
            unions.push_back(std::move(u));
        }
        previous_unions = std::move(unions);
    }
    return validate(d, raw);
}

RVineStructure dvine(int d) {
    if (d < 2) throw Error(ErrorKind::BadDimension, "dimension must be at least 2");
    std::vector<RawTree> trees(d - 1);
    for (int v = 1; v < d; ++v) trees[0].emplace_back(v, v + 1);
    for (int level = 1; level < d - 1; ++level) {
        for (int i = 0; i + 1 < d - level; ++i) trees[level].emplace_back(i, i + 1);
    }
    return validate(d, trees);
}

RVineStructure cvine(int d) {
    if (d < 2) throw Error(ErrorKind::BadDimension, "dimension must be at least 2");
    // Tree 1: star at 1, edges {1,v} listed for v = 2..d. In tree i the nodes are
    // the previous star's edges; the root is the edge pairing root i-1 with node i.
    std::vector<RawTree> trees(d - 1);
    for (int v = 2; v <= d; ++v) trees[0].emplace_back(1, v);
    for (int level = 1; level < d - 1; ++level) {
        const int nodes = d - level;
        for (int other = 1; other < nodes; ++other) trees[level].emplace_back(0, other);
    }
    return validate(d, trees);
}

int pair_count(int d, int level) {
    if (d < 1) throw Error(ErrorKind::BadDimension, "dimension must be positive");
    if (level < 0 || level > d - 1) {
        throw Error(ErrorKind::BadTruncationLevel, "truncation level must lie in 0..d-1");
    }
    return level * (2 * d - (level + 1)) / 2;
}

}  // namespace vinetrunc
