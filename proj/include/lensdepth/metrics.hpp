#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lensdepth/treespace.hpp"

namespace lensdepth {

struct RealVector {
    std::vector<double> coords;
};

// Unit-norm vector; construct through make_unit_vector to enforce the norm.
struct UnitVector {
    std::vector<double> coords;
};

// rows x cols matrix with orthonormal columns, row-major.
struct Frame {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct TreePoint {
    std::shared_ptr<const tree::Tree> tree;
};

using Point = std::variant<RealVector, UnitVector, Frame, TreePoint>;

inline constexpr double kRepresentationTolerance = 1e-9;
// Points closer than this count as equal.
inline constexpr double kPointEqualityTolerance = 1e-12;

// Throws ValidationError if |coords| deviates from 1 by more than 1e-9.
UnitVector make_unit_vector(std::vector<double> coords);
// Rescales to unit norm. Throws DomainError on the zero vector.
UnitVector normalized(std::vector<double> coords);
// Throws ValidationError unless the Gram matrix is the identity within 1e-9.
Frame make_frame(std::size_t rows, std::size_t cols, std::vector<double> data);
// Gram-Schmidt on the columns of a rows x cols matrix.
Frame orthonormalized(std::size_t rows, std::size_t cols, std::vector<double> data);
TreePoint make_tree_point(tree::Tree t);

enum class MetricKind { euclidean, sphere, stiefel_chordal, stiefel_procrustes, bhv };
enum class StiefelMode { chordal, procrustes };

std::string_view to_string(MetricKind kind);
// Accepts the CLI spellings: euclidean, sphere, stiefel-chordal,
// stiefel-procrustes, bhv.
MetricKind parse_metric_kind(std::string_view name);

struct MetricSpace {
    MetricKind kind = MetricKind::euclidean;
    std::size_t dim = 0;   // coordinates, ambient dimension, frame rows or leaf count
    std::size_t cols = 0;  // frame columns (Stiefel only)

    static MetricSpace euclidean(std::size_t d) { return {MetricKind::euclidean, d, 0}; }
    static MetricSpace sphere(std::size_t ambient) { return {MetricKind::sphere, ambient, 0}; }
    static MetricSpace stiefel(std::size_t rows, std::size_t cols, StiefelMode mode = StiefelMode::chordal) {
        return {mode == StiefelMode::chordal ? MetricKind::stiefel_chordal : MetricKind::stiefel_procrustes, rows,
                cols};
    }
    static MetricSpace bhv(std::size_t leaves) { return {MetricKind::bhv, leaves, 0}; }

    std::string describe() const;
    friend bool operator==(const MetricSpace&, const MetricSpace&) = default;
};

std::string describe(const Point& p);

// Throws MismatchError unless `p` is a valid element of `space`.
void check_member(const Point& p, const MetricSpace& space);

// Throws MismatchError naming both operands when either is not in `space`.
double distance(const Point& p, const Point& q, const MetricSpace& space);

// Frobenius distance (chordal) or its minimum over right O(k) alignment
// (procrustes), the latter through the SVD of b^T a.
double stiefel_distance(const Frame& a, const Frame& b, StiefelMode mode);

// Symmetric n x n matrix with an exact zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {entries_.data() + i * n_, n_}; }
    void set(std::size_t i, std::size_t j, double v) noexcept {
        entries_[i * n_ + j] = v;
        entries_[j * n_ + i] = v;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> entries_;
};

// entries(i, j) = distance(points[i], points[j]), computed in parallel over
// rows; identical to the sequential result. Errors name the index pair.
DistanceMatrix pairwise_matrix(std::span<const Point> points, const MetricSpace& space);

}  // namespace lensdepth
