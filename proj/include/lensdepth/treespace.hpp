#pragma once

// Phylogenetic trees as weighted split systems, Newick I/O and the
// Billera-Holmes-Vogtmann (BHV) geodesic distance.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lensdepth/random.hpp"

namespace lensdepth::tree {

using LeafSet = std::uint64_t;
inline constexpr std::size_t kMaxLeaves = 64;

// Bipartition of an ordered leaf universe, stored as the side that does not
// contain leaf 0 so that a split and its complement compare equal.
class Split {
public:
    Split() = default;
    // `side` may be either side of the bipartition; it is canonicalized.
    Split(LeafSet side, std::size_t leaf_count);

    LeafSet side() const noexcept { return side_; }
    std::size_t leaf_count() const noexcept { return leaf_count_; }
    LeafSet universe() const noexcept;
    std::size_t side_size() const noexcept;

    // One side is a single leaf.
    bool pendant() const noexcept;
    // Both sides hold at least two leaves.
    bool interior() const noexcept { return !pendant(); }
    // The singleton leaf of a pendant split (the canonical side's leaf, or 0).
    std::size_t pendant_leaf() const noexcept;

    friend bool operator==(const Split&, const Split&) = default;
    friend auto operator<=>(const Split&, const Split&) = default;

private:
    LeafSet side_ = 0;
    std::size_t leaf_count_ = 0;
};

// True iff at least one of the four side intersections is empty.
// Throws MismatchError when the splits use different leaf universes.
bool compatible(const Split& a, const Split& b);

struct Edge {
    Split split;
    double length = 0.0;
};

// Unrooted tree: interior splits with positive lengths plus one pendant
// length per leaf. For two leaves the single edge is stored as the pendant
// length of leaf 1 and leaf 0 carries 0.
class Tree {
public:
    Tree() = default;
    // Validates label uniqueness, split compatibility, positive interior
    // lengths and non-negative pendant lengths.
    Tree(std::vector<std::string> leaves, std::vector<Edge> interior, std::vector<double> pendant);

    const std::vector<std::string>& leaves() const noexcept { return leaves_; }
    std::size_t leaf_count() const noexcept { return leaves_.size(); }
    // Sorted by split.
    const std::vector<Edge>& interior() const noexcept { return interior_; }
    const std::vector<double>& pendant() const noexcept { return pendant_; }
    bool is_binary() const noexcept;

    std::optional<double> interior_length(const Split& s) const;

    // Same universe, same splits, bitwise-equal lengths.
    friend bool operator==(const Tree&, const Tree&) = default;

private:
    std::vector<std::string> leaves_;
    std::vector<Edge> interior_;
    std::vector<double> pendant_;
};

// Parses one Newick expression terminated by ';'. Every non-root node needs
// a branch length. A degree-2 root is suppressed and interior splits shorter
// than 1e-12 are dropped. Without `universe` the leaf order is the sorted
// label list; with one, the tree's leaves must be exactly the universe.
Tree parse_newick(std::string_view text,
                  std::optional<std::span<const std::string>> universe = std::nullopt);

// Newick text that parses back to a tree with identical splits and lengths.
std::string to_newick(const Tree& t);

struct NewickRecord {
    std::size_t line = 0;  // 1-based line number in the file
    Tree tree;
};

// One tree per line; blank lines and lines starting with '#' are skipped.
// Parse errors are rethrown as ParseError prefixed with "path:line".
std::vector<NewickRecord> read_newick_file(const std::filesystem::path& path,
                                           std::optional<std::span<const std::string>> universe = std::nullopt);

struct SupportPair {
    std::vector<Split> from;  // splits of the first tree dropped at this leg
    std::vector<Split> to;    // splits of the second tree added at this leg
    double from_norm = 0.0;
    double to_norm = 0.0;
};

struct GeodesicResult {
    double distance = 0.0;
    // Norm of the length differences over splits handled without crossing
    // an orthant boundary (shared splits, pendant edges and splits
    // compatible with the whole other tree).
    double common_norm = 0.0;
    // Support sequence with nondecreasing from_norm / to_norm.
    std::vector<SupportPair> support;
};

// Exact BHV geodesic by iterated extension: each support pair is split while
// the min-weight vertex cover of its incompatibility graph weighs below 1.
GeodesicResult bhv_distance(const Tree& a, const Tree& b);

// Reference geodesic length: minimum over every support sequence that
// satisfies the orthant and ratio conditions. Refuses trees with more than
// 7 leaves.
double bhv_distance_exhaustive(const Tree& a, const Tree& b);

// Random binary tree by stepwise leaf insertion on uniformly chosen edges;
// every edge length is uniform in [min_length, max_length].
Tree random_binary_tree(std::vector<std::string> leaves, Rng& rng, double min_length = 0.05,
                        double max_length = 1.0);

// The same tree with leaf labels renamed through `rename` (old index ->
// new label). The result uses the sorted new labels as its universe.
Tree relabel(const Tree& t, std::span<const std::string> rename);

// Rebuilds `t` with every interior and pendant length replaced by
// `edit(old_length)`; interior edges mapped to <= 1e-12 are contracted.
template <class LengthEdit>
Tree map_lengths(const Tree& t, LengthEdit&& edit) {
    std::vector<Edge> interior;
    for (const Edge& e : t.interior()) {
        const double len = edit(e.length);
        if (len > 1e-12) interior.push_back({e.split, len});
    }
    std::vector<double> pendant;
    for (double len : t.pendant()) pendant.push_back(edit(len));
    if (t.leaf_count() == 2) pendant[0] = 0.0;
    return Tree(t.leaves(), std::move(interior), std::move(pendant));
}

}  // namespace lensdepth::tree
