#include "lensdepth/treespace.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "lensdepth/error.hpp"

namespace lensdepth::tree {

namespace {

constexpr double kZeroLength = 1e-12;

LeafSet full_set(std::size_t leaf_count) {
    return leaf_count >= 64 ? ~LeafSet{0} : (LeafSet{1} << leaf_count) - 1;
}

bool valid_label(std::string_view s) {
    if (s.empty()) return false;
    return std::none_of(s.begin(), s.end(), [](char c) {
        return c == '(' || c == ')' || c == ',' || c == ':' || c == ';' || c == '#' ||
               std::isspace(static_cast<unsigned char>(c));
    });
}

}  // namespace

Split::Split(LeafSet side, std::size_t leaf_count) : leaf_count_(leaf_count) {
    if (leaf_count < 2 || leaf_count > kMaxLeaves)
        throw DomainError("split: leaf count must lie in [2, 64]");
    const LeafSet all = full_set(leaf_count);
    if ((side & ~all) != 0) throw ValidationError("split: side references leaves outside the universe");
    if (side & 1) side = all & ~side;
    if (side == 0) throw ValidationError("split: one side of the bipartition is empty");
    side_ = side;
}

LeafSet Split::universe() const noexcept { return full_set(leaf_count_); }

std::size_t Split::side_size() const noexcept { return static_cast<std::size_t>(std::popcount(side_)); }

bool Split::pendant() const noexcept {
    const std::size_t k = side_size();
    return k == 1 || k + 1 == leaf_count_;
}

std::size_t Split::pendant_leaf() const noexcept {
    if (side_size() == 1) return static_cast<std::size_t>(std::countr_zero(side_));
    return 0;
}

bool compatible(const Split& a, const Split& b) {
    if (a.leaf_count() != b.leaf_count())
        throw MismatchError("compatible: splits over universes of " + std::to_string(a.leaf_count()) +
                            " and " + std::to_string(b.leaf_count()) + " leaves");
    const LeafSet all = a.universe();
    const LeafSet a1 = a.side(), a2 = all & ~a.side();
    const LeafSet b1 = b.side(), b2 = all & ~b.side();
    return (a1 & b1) == 0 || (a1 & b2) == 0 || (a2 & b1) == 0 || (a2 & b2) == 0;
}

// ---------------------------------------------------------------------------
// Tree

Tree::Tree(std::vector<std::string> leaves, std::vector<Edge> interior, std::vector<double> pendant)
    : leaves_(std::move(leaves)), interior_(std::move(interior)), pendant_(std::move(pendant)) {
    const std::size_t n = leaves_.size();
    if (n < 2 || n > kMaxLeaves) throw DomainError("tree: leaf count must lie in [2, 64]");
    std::unordered_set<std::string> seen;
    for (const auto& label : leaves_) {
        if (!valid_label(label)) throw ValidationError("tree: invalid leaf label '" + label + "'");
        if (!seen.insert(label).second) throw ValidationError("tree: duplicate leaf label '" + label + "'");
    }
    if (pendant_.size() != n) throw ValidationError("tree: one pendant length per leaf required");
    for (double len : pendant_)
        if (!(len >= 0.0) || !std::isfinite(len)) throw ValidationError("tree: pendant lengths must be finite and >= 0");
    std::sort(interior_.begin(), interior_.end(),
              [](const Edge& x, const Edge& y) { return x.split < y.split; });
    for (std::size_t i = 0; i < interior_.size(); ++i) {
        const Edge& e = interior_[i];
        if (e.split.leaf_count() != n) throw MismatchError("tree: split built over a different universe");
        if (!e.split.interior()) throw ValidationError("tree: pendant split listed as interior");
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            throw ValidationError("tree: interior lengths must be finite and > 0");
        if (i > 0 && interior_[i - 1].split == e.split) throw ValidationError("tree: repeated interior split");
        for (std::size_t j = 0; j < i; ++j)
            if (!compatible(interior_[j].split, e.split)) throw ValidationError("tree: incompatible interior splits");
    }
    if (n >= 3 && interior_.size() > n - 3) throw ValidationError("tree: too many interior splits");
    if (n < 4 && !interior_.empty()) throw ValidationError("tree: too many interior splits");
}

bool Tree::is_binary() const noexcept {
    return leaves_.size() < 3 ? true : interior_.size() == leaves_.size() - 3;
}

std::optional<double> Tree::interior_length(const Split& s) const {
    auto it = std::lower_bound(interior_.begin(), interior_.end(), s,
                               [](const Edge& e, const Split& key) { return e.split < key; });
    if (it != interior_.end() && it->split == s) return it->length;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Newick parsing

namespace {

struct ParsedNode {
    std::vector<std::size_t> children;
    std::string label;
    std::size_t label_offset = 0;
    std::optional<double> length;
    std::size_t offset = 0;
};

class NewickParser {
public:
    explicit NewickParser(std::string_view text) : text_(text) {}

    std::vector<ParsedNode> run() {
        skip_ws();
        const std::size_t root = subtree(0);
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("newick: missing terminating ';'", pos_);
        if (text_[pos_] == ')') throw ParseError("newick: unbalanced parentheses", pos_);
        if (text_[pos_] != ';') throw ParseError("newick: unexpected character", pos_);
        ++pos_;
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("newick: trailing text after ';'", pos_);
        if (nodes_[root].length) {
            // A root edge carries no split; tolerate and ignore it.
            nodes_[root].length.reset();
        }
        root_ = root;
        return std::move(nodes_);
    }

    std::size_t root() const { return root_; }

private:
    std::size_t subtree(int depth) {
        skip_ws();
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        nodes_[id].offset = pos_;
        if (peek() == '(') {
            ++pos_;
            for (;;) {
                const std::size_t child = subtree(depth + 1);
                nodes_[id].children.push_back(child);
                skip_ws();
                if (pos_ >= text_.size()) throw ParseError("newick: unbalanced parentheses", pos_);
                const char c = text_[pos_];
                if (c == ',') {
                    ++pos_;
                    continue;
                }
                if (c == ')') {
                    ++pos_;
                    break;
                }
                throw ParseError("newick: expected ',' or ')'", pos_);
            }
            skip_ws();
            nodes_[id].label_offset = pos_;
            nodes_[id].label = label();  // internal labels are ignored
        } else {
            nodes_[id].label_offset = pos_;
            nodes_[id].label = label();
            if (nodes_[id].label.empty()) {
                if (pos_ >= text_.size()) throw ParseError("newick: unbalanced parentheses", pos_);
                throw ParseError("newick: empty leaf label", pos_);
            }
        }
        skip_ws();
        if (peek() == ':') {
            ++pos_;
            skip_ws();
            const std::size_t at = pos_;
            std::size_t end = pos_;
            while (end < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[end])) ||
                                          text_[end] == '.' || text_[end] == '-' || text_[end] == '+' ||
                                          text_[end] == 'e' || text_[end] == 'E'))
                ++end;
            if (end == at) throw ParseError("newick: missing branch length", at);
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(text_.data() + at, text_.data() + end, value);
            if (ec != std::errc() || ptr != text_.data() + end || !std::isfinite(value))
                throw ParseError("newick: malformed branch length", at);
            if (value < 0.0) throw ParseError("newick: negative branch length", at);
            nodes_[id].length = value;
            pos_ = end;
        } else if (depth > 0) {
            throw ParseError("newick: missing branch length", pos_);
        }
        return id;
    }

    std::string label() {
        const std::size_t start = pos_;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
                std::isspace(static_cast<unsigned char>(c)))
                break;
            ++pos_;
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t root_ = 0;
    std::vector<ParsedNode> nodes_;
};

}  // namespace

Tree parse_newick(std::string_view text, std::optional<std::span<const std::string>> universe) {
    NewickParser parser(text);
    std::vector<ParsedNode> nodes = parser.run();
    const std::size_t root = parser.root();

    // Leaves in order of appearance, with duplicate detection.
    std::vector<std::size_t> leaf_nodes;
    std::unordered_map<std::string, std::size_t> label_node;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].children.empty()) continue;
        if (!label_node.emplace(nodes[i].label, i).second)
            throw ParseError("newick: duplicate leaf label '" + nodes[i].label + "'", nodes[i].label_offset);
        leaf_nodes.push_back(i);
    }

    std::vector<std::string> leaves;
    if (universe) {
        leaves.assign(universe->begin(), universe->end());
    } else {
        for (std::size_t i : leaf_nodes) leaves.push_back(nodes[i].label);
        std::sort(leaves.begin(), leaves.end());
    }
    if (leaves.size() < 2) throw ParseError("newick: a tree needs at least two leaves", 0);
    if (leaves.size() > kMaxLeaves) throw ParseError("newick: more than 64 leaves", 0);

    std::unordered_map<std::string, std::size_t> leaf_index;
    for (std::size_t i = 0; i < leaves.size(); ++i) leaf_index.emplace(leaves[i], i);
    for (std::size_t i : leaf_nodes) {
        if (!leaf_index.count(nodes[i].label))
            throw ParseError("newick: label '" + nodes[i].label + "' is not in the leaf universe",
                             nodes[i].label_offset);
    }
    if (leaf_nodes.size() != leaves.size())
        throw ParseError("newick: tree does not cover the leaf universe", text.size());

    const std::size_t n = leaves.size();
    const LeafSet all = full_set(n);
    std::vector<LeafSet> mask(nodes.size(), 0);
    // Children are always created after their parent, so a reverse sweep
    // visits every child before its parent.
    for (std::size_t i = nodes.size(); i-- > 0;) {
        if (nodes[i].children.empty()) {
            mask[i] = LeafSet{1} << leaf_index.at(nodes[i].label);
        } else {
            for (std::size_t c : nodes[i].children) mask[i] |= mask[c];
        }
    }

    std::map<Split, double> interior;
    std::vector<double> pendant(n, 0.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i == root) continue;
        if (mask[i] == all || mask[i] == 0) continue;  // unary chain at the root
        const Split s(mask[i], n);
        const double len = *nodes[i].length;
        if (s.pendant()) {
            pendant[s.pendant_leaf()] += len;
        } else {
            interior[s] += len;
        }
    }
    std::vector<Edge> edges;
    for (const auto& [s, len] : interior)
        if (len > kZeroLength) edges.push_back({s, len});
    try {
        return Tree(std::move(leaves), std::move(edges), std::move(pendant));
    } catch (const ValidationError& e) {
        throw ParseError(std::string("newick: ") + e.what(), 0);
    }
}

namespace {

void append_length(std::string& out, double len) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, len);
    out += ':';
    out.append(buf, ptr);
}

}  // namespace

std::string to_newick(const Tree& t) {
    const std::size_t n = t.leaf_count();
    // Clades hanging off the node adjacent to leaf 0: leaves 1..n-1 and the
    // canonical sides of the interior splits. These form a laminar family.
    struct Clade {
        LeafSet set;
        double length;
        std::string label;  // non-empty for leaves
        std::vector<std::size_t> children;
    };
    std::vector<Clade> clades;
    for (std::size_t i = 1; i < n; ++i) clades.push_back({LeafSet{1} << i, t.pendant()[i], t.leaves()[i], {}});
    for (const Edge& e : t.interior()) clades.push_back({e.split.side(), e.length, {}, {}});

    std::vector<std::size_t> top;
    for (std::size_t i = 0; i < clades.size(); ++i) {
        std::size_t parent = clades.size();
        int parent_size = std::numeric_limits<int>::max();
        for (std::size_t j = 0; j < clades.size(); ++j) {
            if (j == i || clades[j].set == clades[i].set) continue;
            if ((clades[i].set & ~clades[j].set) == 0 && std::popcount(clades[j].set) < parent_size) {
                parent = j;
                parent_size = std::popcount(clades[j].set);
            }
        }
        if (parent == clades.size())
            top.push_back(i);
        else
            clades[parent].children.push_back(i);
    }
    auto by_lowest_leaf = [&](std::size_t a, std::size_t b) {
        return std::countr_zero(clades[a].set) < std::countr_zero(clades[b].set);
    };
    std::function<void(std::size_t, std::string&)> emit = [&](std::size_t c, std::string& out) {
        Clade& cl = clades[c];
        if (!cl.label.empty()) {
            out += cl.label;
        } else {
            std::sort(cl.children.begin(), cl.children.end(), by_lowest_leaf);
            out += '(';
            for (std::size_t k = 0; k < cl.children.size(); ++k) {
                if (k) out += ',';
                emit(cl.children[k], out);
            }
            out += ')';
        }
        append_length(out, cl.length);
    };

    std::sort(top.begin(), top.end(), by_lowest_leaf);
    std::string out = "(" + t.leaves()[0];
    append_length(out, t.pendant()[0]);
    for (std::size_t c : top) {
        out += ',';
        emit(c, out);
    }
    out += ");";
    return out;
}

std::vector<NewickRecord> read_newick_file(const std::filesystem::path& path,
                                           std::optional<std::span<const std::string>> universe) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<NewickRecord> out;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> shared;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            if (!universe && !shared.empty()) universe = std::span<const std::string>(shared);
            Tree t = parse_newick(line, universe);
            if (shared.empty() && !universe) {
                shared = t.leaves();
                universe = std::span<const std::string>(shared);
            }
            out.push_back({line_no, std::move(t)});
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.message(), e.offset());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// BHV geodesic

namespace {

struct WeightedSplit {
    Split split;
    double length;
};

double norm_of(const std::vector<WeightedSplit>& xs) {
    double s = 0.0;
    for (const auto& x : xs) s += x.length * x.length;
    return std::sqrt(s);
}

bool tree_less(const Tree& a, const Tree& b) {
    if (a.interior().size() != b.interior().size()) return a.interior().size() < b.interior().size();
    for (std::size_t i = 0; i < a.interior().size(); ++i) {
        const Edge& x = a.interior()[i];
        const Edge& y = b.interior()[i];
        if (x.split != y.split) return x.split < y.split;
        if (x.length != y.length) return x.length < y.length;
    }
    return a.pendant() < b.pendant();
}

// Squared length of the part of the path that never leaves a shared orthant
// face, plus the splits that still need an orthant change.
struct Decomposition {
    double common_sq = 0.0;
    std::vector<WeightedSplit> from;
    std::vector<WeightedSplit> to;
};

Decomposition decompose(const Tree& a, const Tree& b) {
    if (a.leaves() != b.leaves()) throw MismatchError("bhv_distance: trees have different leaf universes");
    Decomposition d;
    for (std::size_t i = 0; i < a.leaf_count(); ++i) {
        const double diff = a.pendant()[i] - b.pendant()[i];
        d.common_sq += diff * diff;
    }
    auto compatible_with_all = [](const Split& s, const Tree& other) {
        return std::all_of(other.interior().begin(), other.interior().end(),
                           [&](const Edge& e) { return compatible(s, e.split); });
    };
    for (const Edge& e : a.interior()) {
        if (auto other = b.interior_length(e.split)) {
            const double diff = e.length - *other;
            d.common_sq += diff * diff;
        } else if (compatible_with_all(e.split, b)) {
            d.common_sq += e.length * e.length;
        } else {
            d.from.push_back({e.split, e.length});
        }
    }
    for (const Edge& e : b.interior()) {
        if (a.interior_length(e.split)) continue;
        if (compatible_with_all(e.split, a)) {
            d.common_sq += e.length * e.length;
        } else {
            d.to.push_back({e.split, e.length});
        }
    }
    return d;
}

struct Cover {
    double weight = 0.0;
    std::vector<bool> from_in;  // per `from` split
    std::vector<bool> to_in;    // per `to` split
};

// Min-weight vertex cover of the bipartite incompatibility graph between
// `from` and `to`, with weights normalized per side to sum to 1. Solved as a
// min s-t cut (Edmonds-Karp).
Cover min_weight_cover(const std::vector<WeightedSplit>& from, const std::vector<WeightedSplit>& to) {
    const std::size_t na = from.size(), nb = to.size();
    const std::size_t source = 0, sink = 1 + na + nb, nodes = sink + 1;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> cap(nodes * nodes, 0.0);
    auto c = [&](std::size_t u, std::size_t v) -> double& { return cap[u * nodes + v]; };
    const double na2 = std::pow(norm_of(from), 2), nb2 = std::pow(norm_of(to), 2);
    for (std::size_t i = 0; i < na; ++i) c(source, 1 + i) = from[i].length * from[i].length / na2;
    for (std::size_t j = 0; j < nb; ++j) c(1 + na + j, sink) = to[j].length * to[j].length / nb2;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j)
            if (!compatible(from[i].split, to[j].split)) c(1 + i, 1 + na + j) = inf;

    constexpr double eps = 1e-14;
    std::vector<std::size_t> parent(nodes);
    auto reachable = [&]() {
        std::vector<bool> seen(nodes, false);
        std::queue<std::size_t> q;
        q.push(source);
        seen[source] = true;
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t v = 0; v < nodes; ++v) {
                if (!seen[v] && c(u, v) > eps) {
                    seen[v] = true;
                    parent[v] = u;
                    q.push(v);
                }
            }
        }
        return seen;
    };
    for (;;) {
        auto seen = reachable();
        if (!seen[sink]) break;
        double bottleneck = inf;
        for (std::size_t v = sink; v != source; v = parent[v]) bottleneck = std::min(bottleneck, c(parent[v], v));
        for (std::size_t v = sink; v != source; v = parent[v]) {
            c(parent[v], v) -= bottleneck;
            c(v, parent[v]) += bottleneck;
        }
    }
    const auto seen = reachable();
    Cover cover;
    cover.from_in.resize(na);
    cover.to_in.resize(nb);
    for (std::size_t i = 0; i < na; ++i) {
        cover.from_in[i] = !seen[1 + i];
        if (cover.from_in[i]) cover.weight += from[i].length * from[i].length / na2;
    }
    for (std::size_t j = 0; j < nb; ++j) {
        cover.to_in[j] = seen[1 + na + j];
        if (cover.to_in[j]) cover.weight += to[j].length * to[j].length / nb2;
    }
    return cover;
}

struct WorkingPair {
    std::vector<WeightedSplit> from;
    std::vector<WeightedSplit> to;
};

GeodesicResult geodesic_ordered(const Tree& a, const Tree& b) {
    Decomposition d = decompose(a, b);
    GeodesicResult result;
    result.common_norm = std::sqrt(d.common_sq);
    if (d.from.empty() && d.to.empty()) {
        result.distance = result.common_norm;
        return result;
    }

    std::vector<WorkingPair> support{{std::move(d.from), std::move(d.to)}};
    std::size_t i = 0;
    while (i < support.size()) {
        const WorkingPair& pair = support[i];
        const Cover cover = min_weight_cover(pair.from, pair.to);
        WorkingPair first, second;
        for (std::size_t k = 0; k < pair.from.size(); ++k)
            (cover.from_in[k] ? first.from : second.from).push_back(pair.from[k]);
        for (std::size_t k = 0; k < pair.to.size(); ++k)
            (cover.to_in[k] ? second.to : first.to).push_back(pair.to[k]);
        const bool proper = !first.from.empty() && !first.to.empty() && !second.from.empty() &&
                            !second.to.empty();
        if (cover.weight < 1.0 - 1e-12 && proper) {
            support[i] = std::move(first);
            support.insert(support.begin() + static_cast<std::ptrdiff_t>(i) + 1, std::move(second));
        } else {
            ++i;
        }
    }

    double total = d.common_sq;
    for (const WorkingPair& p : support) {
        SupportPair out;
        for (const auto& w : p.from) out.from.push_back(w.split);
        for (const auto& w : p.to) out.to.push_back(w.split);
        out.from_norm = norm_of(p.from);
        out.to_norm = norm_of(p.to);
        total += (out.from_norm + out.to_norm) * (out.from_norm + out.to_norm);
        result.support.push_back(std::move(out));
    }
    result.distance = std::sqrt(total);
    return result;
}

}  // namespace

GeodesicResult bhv_distance(const Tree& a, const Tree& b) {
    // Evaluate in a canonical argument order so that d(a, b) == d(b, a) bitwise.
    if (!tree_less(b, a)) return geodesic_ordered(a, b);
    GeodesicResult r = geodesic_ordered(b, a);
    std::reverse(r.support.begin(), r.support.end());
    for (SupportPair& p : r.support) {
        std::swap(p.from, p.to);
        std::swap(p.from_norm, p.to_norm);
    }
    return r;
}

double bhv_distance_exhaustive(const Tree& a, const Tree& b) {
    if (a.leaf_count() > 7 || b.leaf_count() > 7)
        throw DomainError("bhv_distance_exhaustive: refusing trees with more than 7 leaves");
    if (a.leaves() != b.leaves()) throw MismatchError("bhv_distance_exhaustive: different leaf universes");

    // Independent split bookkeeping: shared splits and splits compatible with
    // the entire other tree are straight-line coordinates.
    double base = 0.0;
    for (std::size_t i = 0; i < a.leaf_count(); ++i) base += std::pow(a.pendant()[i] - b.pendant()[i], 2);
    std::vector<Edge> from, to;
    for (const Edge& e : a.interior()) {
        bool shared = false, crosses = false;
        for (const Edge& f : b.interior()) {
            if (f.split == e.split) {
                shared = true;
                base += std::pow(e.length - f.length, 2);
            } else if (!compatible(e.split, f.split)) {
                crosses = true;
            }
        }
        if (shared) continue;
        if (crosses)
            from.push_back(e);
        else
            base += e.length * e.length;
    }
    for (const Edge& f : b.interior()) {
        bool shared = false, crosses = false;
        for (const Edge& e : a.interior()) {
            if (f.split == e.split) shared = true;
            else if (!compatible(e.split, f.split)) crosses = true;
        }
        if (shared) continue;
        if (crosses)
            to.push_back(f);
        else
            base += f.length * f.length;
    }
    if (from.empty() && to.empty()) return std::sqrt(base);

    const unsigned na = static_cast<unsigned>(from.size()), nb = static_cast<unsigned>(to.size());
    auto sq_norm = [](const std::vector<Edge>& es, unsigned mask) {
        double s = 0.0;
        for (unsigned k = 0; k < es.size(); ++k)
            if (mask >> k & 1u) s += es[k].length * es[k].length;
        return s;
    };
    // cross[i] = bitmask of `to` splits incompatible with from[i].
    std::vector<unsigned> cross(na, 0);
    for (unsigned i = 0; i < na; ++i)
        for (unsigned j = 0; j < nb; ++j)
            if (!compatible(from[i].split, to[j].split)) cross[i] |= 1u << j;

    double best = std::numeric_limits<double>::infinity();
    // Depth-first over ordered partitions. At each leg, the `to` block added
    // must be compatible with every `from` split still present afterwards.
    std::function<void(unsigned, unsigned, double, double)> extend = [&](unsigned rem_a, unsigned rem_b,
                                                                          double acc, double last_ratio) {
        if (rem_a == 0 && rem_b == 0) {
            best = std::min(best, acc);
            return;
        }
        if (rem_a == 0 || rem_b == 0) return;
        for (unsigned sa = rem_a; sa; sa = (sa - 1) & rem_a) {
            const unsigned left_a = rem_a & ~sa;
            unsigned blocked = 0;
            for (unsigned i = 0; i < na; ++i)
                if (left_a >> i & 1u) blocked |= cross[i];
            const double norm_a = std::sqrt(sq_norm(from, sa));
            for (unsigned sb = rem_b; sb; sb = (sb - 1) & rem_b) {
                if (sb & blocked) continue;
                const double norm_b = std::sqrt(sq_norm(to, sb));
                const double ratio = norm_a / norm_b;
                if (ratio < last_ratio * (1.0 - 1e-12)) continue;
                const double leg = (norm_a + norm_b) * (norm_a + norm_b);
                extend(left_a, rem_b & ~sb, acc + leg, ratio);
            }
        }
    };
    extend((1u << na) - 1, (1u << nb) - 1, 0.0, 0.0);
    return std::sqrt(base + best);
}

// ---------------------------------------------------------------------------
// Generators

Tree random_binary_tree(std::vector<std::string> leaves, Rng& rng, double min_length, double max_length) {
    const std::size_t n = leaves.size();
    if (n < 2 || n > kMaxLeaves) throw DomainError("random_binary_tree: leaf count must lie in [2, 64]");
    std::uniform_real_distribution<double> length(min_length, max_length);
    if (n == 2) return Tree(std::move(leaves), {}, {0.0, length(rng)});

    // Nodes 0..n-1 are leaves; internal nodes follow.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t next = n;
    const std::size_t center = next++;
    for (std::size_t i = 0; i < 3; ++i) edges.emplace_back(center, i);
    for (std::size_t leaf = 3; leaf < n; ++leaf) {
        std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
        const std::size_t k = pick(rng);
        const auto [u, v] = edges[k];
        const std::size_t w = next++;
        edges[k] = {u, w};
        edges.emplace_back(w, v);
        edges.emplace_back(w, leaf);
    }
    std::vector<std::vector<std::size_t>> adj(next);
    for (auto [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    // Subtree masks with leaf 0 as the root.
    std::vector<LeafSet> mask(next, 0);
    std::vector<std::size_t> parent(next, next), order;
    std::vector<std::size_t> stack{0};
    parent[0] = 0;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        order.push_back(u);
        for (std::size_t v : adj[u])
            if (parent[v] == next) {
                parent[v] = u;
                stack.push_back(v);
            }
    }
    for (std::size_t k = order.size(); k-- > 0;) {
        const std::size_t u = order[k];
        if (u < n) mask[u] |= LeafSet{1} << u;
        if (u != 0) mask[parent[u]] |= mask[u];
    }
    std::vector<Edge> interior;
    std::vector<double> pendant(n, 0.0);
    for (std::size_t u : order) {
        if (u == 0) continue;
        const Split s(mask[u], n);
        if (s.pendant())
            pendant[s.pendant_leaf()] = length(rng);
        else
            interior.push_back({s, length(rng)});
    }
    return Tree(std::move(leaves), std::move(interior), std::move(pendant));
}

Tree relabel(const Tree& t, std::span<const std::string> rename) {
    const std::size_t n = t.leaf_count();
    if (rename.size() != n) throw MismatchError("relabel: one new label per leaf required");
    std::vector<std::string> leaves(rename.begin(), rename.end());
    std::sort(leaves.begin(), leaves.end());
    std::vector<std::size_t> to_new(n);
    for (std::size_t i = 0; i < n; ++i)
        to_new[i] = static_cast<std::size_t>(std::lower_bound(leaves.begin(), leaves.end(), rename[i]) - leaves.begin());
    auto remap = [&](LeafSet s) {
        LeafSet out = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (s >> i & 1u) out |= LeafSet{1} << to_new[i];
        return out;
    };
    std::vector<Edge> interior;
    for (const Edge& e : t.interior()) interior.push_back({Split(remap(e.split.side()), n), e.length});
    std::vector<double> pendant(n, 0.0);
    if (n == 2) {
        pendant[1] = t.pendant()[1];
    } else {
        for (std::size_t i = 0; i < n; ++i) pendant[to_new[i]] = t.pendant()[i];
    }
    return Tree(std::move(leaves), std::move(interior), std::move(pendant));
}

}  // namespace lensdepth::tree
