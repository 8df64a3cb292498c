#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "lensdepth/error.hpp"
#include "lensdepth/treespace.hpp"
#include "test_util.hpp"

using namespace lensdepth;
using namespace lensdepth::tree;

namespace {

// Split from the labels on one side, over the universe A, B, C, ...
Split split_of(std::string_view side, std::size_t leaves) {
    LeafSet bits = 0;
    for (char c : side) bits |= LeafSet{1} << (c - 'A');
    return Split(bits, leaves);
}

std::size_t parse_error_offset(std::string_view text, std::string_view expected_message) {
    try {
        parse_newick(text);
    } catch (const ParseError& e) {
        EXPECT_NE(e.message().find(expected_message), std::string::npos) << e.what();
        return e.offset();
    }
    ADD_FAILURE() << "no parse error for " << text;
    return 0;
}

bool same_tree(const Tree& a, const Tree& b) {
    if (a.leaves() != b.leaves() || a.pendant() != b.pendant() || a.interior().size() != b.interior().size())
        return false;
    for (std::size_t i = 0; i < a.interior().size(); ++i)
        if (a.interior()[i].split != b.interior()[i].split || a.interior()[i].length != b.interior()[i].length)
            return false;
    return true;
}

// Norm of the length differences over shared splits, pendant edges and
// splits compatible with every split of the other tree; and the norms of
// the remaining (incompatible) split sets of each tree.
struct Decomposition {
    double common = 0.0;
    double only_a = 0.0;
    double only_b = 0.0;
};

Decomposition decompose(const Tree& a, const Tree& b) {
    Decomposition d;
    double common2 = 0.0, a2 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < a.leaf_count(); ++i) common2 += std::pow(a.pendant()[i] - b.pendant()[i], 2);
    auto compatible_with_all = [](const Split& s, const Tree& t) {
        return std::all_of(t.interior().begin(), t.interior().end(),
                           [&](const Edge& e) { return compatible(s, e.split); });
    };
    for (const Edge& e : a.interior()) {
        const auto other = b.interior_length(e.split);
        if (other) common2 += std::pow(e.length - *other, 2);
        else if (compatible_with_all(e.split, b)) common2 += e.length * e.length;
        else a2 += e.length * e.length;
    }
    for (const Edge& e : b.interior()) {
        if (a.interior_length(e.split)) continue;
        if (compatible_with_all(e.split, a)) common2 += e.length * e.length;
        else b2 += e.length * e.length;
    }
    d.common = std::sqrt(common2);
    d.only_a = std::sqrt(a2);
    d.only_b = std::sqrt(b2);
    return d;
}

const char* kT1 = "((A:1,B:1):0.3,C:1,(D:1,E:1):0.5);";
const char* kT2 = "((A:1,C:1):0.4,B:1,(D:1,E:1):0.5);";

}  // namespace

TEST(Newick, FiveLeafExample) {
    const Tree t = parse_newick("((A:1,B:1):0.5,(C:1,D:1):0.5,E:1);");
    ASSERT_EQ(t.leaf_count(), 5u);
    EXPECT_EQ(t.leaves(), (std::vector<std::string>{"A", "B", "C", "D", "E"}));
    ASSERT_EQ(t.interior().size(), 2u);
    EXPECT_EQ(t.interior_length(split_of("AB", 5)), 0.5);
    EXPECT_EQ(t.interior_length(split_of("CD", 5)), 0.5);
    // a split and its complement encode identically
    EXPECT_EQ(split_of("CDE", 5), split_of("AB", 5));
    EXPECT_TRUE(t.is_binary());
    EXPECT_EQ(t.pendant(), (std::vector<double>{1, 1, 1, 1, 1}));
}

TEST(Newick, TwoLeafTree) {
    const Tree t = parse_newick("(A:1,B:2);");
    EXPECT_EQ(t.leaf_count(), 2u);
    EXPECT_TRUE(t.interior().empty());
    EXPECT_DOUBLE_EQ(t.pendant()[0] + t.pendant()[1], 3.0);
}

TEST(Newick, RootedBinaryRootIsSuppressed) {
    const Tree rooted = parse_newick("((A:1,B:1):0.2,(C:1,(D:1,E:1):0.4):0.3);");
    // the two root edges merge into one interior edge AB|CDE of length 0.5
    EXPECT_EQ(rooted.interior().size(), 2u);
    EXPECT_DOUBLE_EQ(*rooted.interior_length(split_of("AB", 5)), 0.5);
    EXPECT_DOUBLE_EQ(*rooted.interior_length(split_of("DE", 5)), 0.4);
}

TEST(Newick, ZeroLengthInteriorSplitIsDropped) {
    const Tree t = parse_newick("((A:1,B:1):0,C:1,(D:1,E:1):0.5);");
    EXPECT_EQ(t.interior().size(), 1u);
    EXPECT_FALSE(t.is_binary());
}

TEST(Newick, DistinctErrorsWithOffsets) {
    EXPECT_EQ(parse_error_offset("((A:1,B:1):0.5,C:1", "unbalanced parentheses"), 18u);
    EXPECT_EQ(parse_error_offset("(A:1,B:1));", "unbalanced parentheses"), 9u);
    EXPECT_EQ(parse_error_offset("(A:1,A:1,B:1);", "duplicate leaf label"), 5u);
    EXPECT_EQ(parse_error_offset("(A:1,B,C:1);", "missing branch length"), 6u);
    EXPECT_EQ(parse_error_offset("(A:1,B:-1,C:1);", "negative branch length"), 7u);
    const std::vector<std::string> universe{"A", "B", "C"};
    try {
        parse_newick("(A:1,B:1,D:1);", std::span<const std::string>(universe));
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(e.message().find("not in the leaf universe"), std::string::npos);
        EXPECT_EQ(e.offset(), 9u);
    }
}

TEST(Newick, UniverseFixesLeafOrder) {
    const std::vector<std::string> universe{"C", "B", "A"};
    const Tree t = parse_newick("(A:1,B:2,C:3);", std::span<const std::string>(universe));
    EXPECT_EQ(t.leaves(), universe);
    EXPECT_EQ(t.pendant(), (std::vector<double>{3, 2, 1}));
}

TEST(Newick, FileErrorsCarryPathAndLine) {
    const auto path = std::filesystem::temp_directory_path() / "lensdepth_newick_test.nwk";
    {
        std::ofstream out(path);
        out << "# header\n" << kT1 << "\n\n((A:1,B:1):0.5,C:1\n";
    }
    try {
        read_newick_file(path);
        FAIL();
    } catch (const ParseError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find(path.string() + ":4:"), std::string::npos) << what;
        EXPECT_NE(what.find("unbalanced"), std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST(Compatible, Examples) {
    EXPECT_TRUE(compatible(split_of("AB", 5), split_of("ABC", 5)));
    EXPECT_FALSE(compatible(split_of("AB", 5), split_of("AC", 5)));
    for (const char* s : {"AB", "AC", "BD", "CDE"}) EXPECT_TRUE(compatible(split_of(s, 5), split_of(s, 5)));
    EXPECT_THROW(compatible(split_of("AB", 5), split_of("AB", 6)), MismatchError);
}

TEST(Bhv, IdenticalTreesAreAtZero) {
    const Tree t = parse_newick(kT1);
    EXPECT_EQ(bhv_distance(t, t).distance, 0.0);
    EXPECT_EQ(bhv_distance_exhaustive(t, t), 0.0);
}

TEST(Bhv, SingleIncompatiblePairPassesThroughTheCone) {
    const Tree a = parse_newick(kT1), b = parse_newick(kT2);
    const GeodesicResult g = bhv_distance(a, b);
    EXPECT_NEAR(g.distance, 0.7, 1e-12);
    EXPECT_NEAR(bhv_distance_exhaustive(a, b), 0.7, 1e-12);
    EXPECT_NEAR(g.common_norm, 0.0, 1e-15);
    ASSERT_EQ(g.support.size(), 1u);
}

TEST(Bhv, UniverseMismatch) {
    const Tree a = parse_newick("(A:1,B:1,C:1);"), b = parse_newick("(A:1,B:1,D:1);");
    EXPECT_THROW(bhv_distance(a, b), MismatchError);
}

TEST(Bhv, ExhaustiveRefusesLargeTrees) {
    Rng rng(2);
    const Tree a = random_binary_tree(testutil::labels(8), rng);
    EXPECT_THROW(bhv_distance_exhaustive(a, a), DomainError);
}

TEST(Bhv, SameTopologyIsEuclidean) {
    Rng rng(21);
    std::uniform_real_distribution<double> shift(-0.04, 0.5);
    for (int k = 0; k < 200; ++k) {
        const Tree a = random_binary_tree(testutil::labels(5), rng);
        const Tree b = map_lengths(a, [&](double len) { return len + shift(rng); });
        double sum = 0.0;
        for (std::size_t i = 0; i < a.interior().size(); ++i)
            sum += std::pow(a.interior()[i].length - b.interior()[i].length, 2);
        for (std::size_t i = 0; i < 5; ++i) sum += std::pow(a.pendant()[i] - b.pendant()[i], 2);
        ASSERT_NEAR(bhv_distance(a, b).distance, std::sqrt(sum), 1e-12);
    }
}

TEST(Bhv, MatchesExhaustiveOracle) {
    Rng rng(33);
    for (std::size_t leaves : {4u, 5u, 6u, 7u}) {
        for (int k = 0; k < 60; ++k) {
            const Tree a = random_binary_tree(testutil::labels(leaves), rng);
            const Tree b = random_binary_tree(testutil::labels(leaves), rng);
            ASSERT_NEAR(bhv_distance(a, b).distance, bhv_distance_exhaustive(a, b), 1e-9) << to_newick(a) << " "
                                                                                         << to_newick(b);
        }
    }
}

TEST(Bhv, MatchesOracleOnNonBinaryTrees) {
    Rng rng(34);
    std::bernoulli_distribution drop(0.3);
    for (int k = 0; k < 100; ++k) {
        const Tree a = map_lengths(random_binary_tree(testutil::labels(6), rng),
                                   [&](double len) { return drop(rng) ? 0.0 : len; });
        const Tree b = random_binary_tree(testutil::labels(6), rng);
        ASSERT_NEAR(bhv_distance(a, b).distance, bhv_distance_exhaustive(a, b), 1e-9);
    }
}

TEST(Bhv, SupportSequenceAndBounds) {
    Rng rng(35);
    for (int k = 0; k < 300; ++k) {
        const std::size_t leaves = 5 + k % 6;
        const Tree a = random_binary_tree(testutil::labels(leaves), rng);
        const Tree b = random_binary_tree(testutil::labels(leaves), rng);
        const GeodesicResult g = bhv_distance(a, b);
        const Decomposition d = decompose(a, b);
        ASSERT_NEAR(g.common_norm, d.common, 1e-12);
        ASSERT_GE(g.distance, d.common - 1e-12);
        ASSERT_LE(g.distance, std::hypot(d.common, d.only_a + d.only_b) + 1e-12);
        double legs = 0.0, from2 = 0.0, to2 = 0.0;
        for (std::size_t i = 0; i < g.support.size(); ++i) {
            const SupportPair& p = g.support[i];
            ASSERT_FALSE(p.from.empty());
            ASSERT_FALSE(p.to.empty());
            legs += (p.from_norm + p.to_norm) * (p.from_norm + p.to_norm);
            from2 += p.from_norm * p.from_norm;
            to2 += p.to_norm * p.to_norm;
            if (i > 0) {
                const SupportPair& q = g.support[i - 1];
                ASSERT_LE(q.from_norm * p.to_norm, p.from_norm * q.to_norm * (1 + 1e-12));
            }
        }
        ASSERT_NEAR(std::sqrt(from2), d.only_a, 1e-12);
        ASSERT_NEAR(std::sqrt(to2), d.only_b, 1e-12);
        ASSERT_NEAR(g.distance, std::sqrt(d.common * d.common + legs), 1e-12);
    }
}

TEST(Bhv, MetricAxiomsOnTriples) {
    Rng rng(36);
    for (int k = 0; k < 100; ++k) {
        const Tree a = random_binary_tree(testutil::labels(5), rng);
        const Tree b = random_binary_tree(testutil::labels(5), rng);
        const Tree c = random_binary_tree(testutil::labels(5), rng);
        const double ab = bhv_distance(a, b).distance, ba = bhv_distance(b, a).distance;
        ASSERT_NEAR(ab, ba, 1e-12);
        ASSERT_EQ(bhv_distance(a, a).distance, 0.0);
        ASSERT_LE(bhv_distance(a, c).distance, ab + bhv_distance(b, c).distance + 1e-9);
    }
}

TEST(Bhv, RelabelingBothTreesPreservesDistance) {
    Rng rng(37);
    for (int k = 0; k < 100; ++k) {
        auto labels = testutil::labels(6);
        const Tree a = random_binary_tree(labels, rng);
        const Tree b = random_binary_tree(labels, rng);
        std::vector<std::string> rename = {"u", "v", "w", "x", "y", "z"};
        std::shuffle(rename.begin(), rename.end(), rng);
        ASSERT_NEAR(bhv_distance(relabel(a, rename), relabel(b, rename)).distance, bhv_distance(a, b).distance,
                    1e-12);
    }
}

TEST(Newick, RoundTripIsExact) {
    Rng rng(38);
    for (int k = 0; k < 1000; ++k) {
        const std::size_t leaves = 2 + k % 20;
        const Tree t = random_binary_tree(testutil::labels(leaves), rng);
        ASSERT_TRUE(same_tree(parse_newick(to_newick(t)), t)) << to_newick(t);
    }
}

TEST(RandomTree, IsBinaryWithLengthsInRange) {
    Rng rng(39);
    for (int k = 0; k < 50; ++k) {
        const Tree t = random_binary_tree(testutil::labels(7), rng, 0.1, 0.2);
        EXPECT_TRUE(t.is_binary());
        EXPECT_EQ(t.interior().size(), 4u);
        for (const Edge& e : t.interior()) {
            EXPECT_GE(e.length, 0.1);
            EXPECT_LE(e.length, 0.2);
        }
    }
}
