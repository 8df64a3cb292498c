#include "lensdepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "lensdepth/error.hpp"
#include "lensdepth/parallel.hpp"

namespace lensdepth {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

UnitVector make_unit_vector(std::vector<double> coords) {
    if (coords.empty()) throw ValidationError("unit vector: no coordinates");
    const double n = norm2(coords);
    if (std::abs(n - 1.0) > kRepresentationTolerance)
        throw ValidationError("unit vector: norm " + std::to_string(n) + " differs from 1");
    return UnitVector{std::move(coords)};
}

UnitVector normalized(std::vector<double> coords) {
    const double n = norm2(coords);
    if (!(n > 0.0)) throw DomainError("normalized: zero vector");
    for (double& x : coords) x /= n;
    return UnitVector{std::move(coords)};
}

Frame make_frame(std::size_t rows, std::size_t cols, std::vector<double> data) {
    if (rows == 0 || cols == 0 || cols > rows) throw ValidationError("frame: shape must satisfy 0 < cols <= rows");
    if (data.size() != rows * cols) throw ValidationError("frame: data size does not match shape");
    Frame f{rows, cols, std::move(data)};
    for (std::size_t a = 0; a < cols; ++a) {
        for (std::size_t b = a; b < cols; ++b) {
            double g = 0.0;
            for (std::size_t r = 0; r < rows; ++r) g += f(r, a) * f(r, b);
            const double want = a == b ? 1.0 : 0.0;
            if (std::abs(g - want) > kRepresentationTolerance)
                throw ValidationError("frame: columns are not orthonormal (Gram entry " + std::to_string(a) + "," +
                                      std::to_string(b) + " = " + std::to_string(g) + ")");
        }
    }
    return f;
}

Frame orthonormalized(std::size_t rows, std::size_t cols, std::vector<double> data) {
    if (data.size() != rows * cols || cols == 0 || cols > rows) throw ValidationError("frame: bad shape");
    for (std::size_t c = 0; c < cols; ++c) {
        // Two Gram-Schmidt passes keep the result orthonormal to rounding.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < c; ++p) {
                double dot = 0.0;
                for (std::size_t r = 0; r < rows; ++r) dot += data[r * cols + c] * data[r * cols + p];
                for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] -= dot * data[r * cols + p];
            }
        }
        double n = 0.0;
        for (std::size_t r = 0; r < rows; ++r) n += data[r * cols + c] * data[r * cols + c];
        n = std::sqrt(n);
        if (!(n > 1e-12)) throw DomainError("frame: columns are linearly dependent");
        for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] /= n;
    }
    return Frame{rows, cols, std::move(data)};
}

TreePoint make_tree_point(tree::Tree t) { return TreePoint{std::make_shared<const tree::Tree>(std::move(t))}; }

std::string_view to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::euclidean: return "euclidean";
        case MetricKind::sphere: return "sphere";
        case MetricKind::stiefel_chordal: return "stiefel-chordal";
        case MetricKind::stiefel_procrustes: return "stiefel-procrustes";
        case MetricKind::bhv: return "bhv";
    }
    return "unknown";
}

MetricKind parse_metric_kind(std::string_view name) {
    for (MetricKind k : {MetricKind::euclidean, MetricKind::sphere, MetricKind::stiefel_chordal,
                         MetricKind::stiefel_procrustes, MetricKind::bhv})
        if (to_string(k) == name) return k;
    throw DomainError("unknown metric '" + std::string(name) + "'");
}

std::string MetricSpace::describe() const {
    std::string out(to_string(kind));
    switch (kind) {
        case MetricKind::euclidean:
        case MetricKind::sphere: return out + "(" + std::to_string(dim) + ")";
        case MetricKind::stiefel_chordal:
        case MetricKind::stiefel_procrustes: return out + "(" + std::to_string(dim) + "x" + std::to_string(cols) + ")";
        case MetricKind::bhv: return out + "(" + std::to_string(dim) + " leaves)";
    }
    return out;
}

std::string describe(const Point& p) {
    return std::visit(overloaded{
                          [](const RealVector& v) { return "RealVector[" + std::to_string(v.coords.size()) + "]"; },
                          [](const UnitVector& v) { return "UnitVector[" + std::to_string(v.coords.size()) + "]"; },
                          [](const Frame& f) {
                              return "Frame[" + std::to_string(f.rows) + "x" + std::to_string(f.cols) + "]";
                          },
                          [](const TreePoint& t) {
                              return "Tree[" + std::to_string(t.tree ? t.tree->leaf_count() : 0) + " leaves]";
                          },
                      },
                      p);
}

namespace {

bool is_member(const Point& p, const MetricSpace& space) {
    switch (space.kind) {
        case MetricKind::euclidean: {
            const auto* v = std::get_if<RealVector>(&p);
            return v && v->coords.size() == space.dim;
        }
        case MetricKind::sphere: {
            const auto* v = std::get_if<UnitVector>(&p);
            return v && v->coords.size() == space.dim;
        }
        case MetricKind::stiefel_chordal:
        case MetricKind::stiefel_procrustes: {
            const auto* f = std::get_if<Frame>(&p);
            return f && f->rows == space.dim && f->cols == space.cols;
        }
        case MetricKind::bhv: {
            const auto* t = std::get_if<TreePoint>(&p);
            return t && t->tree && t->tree->leaf_count() == space.dim;
        }
    }
    return false;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// Great-circle distance. 2 atan2(|p - q|, |p + q|) equals the arccos of the
// clamped inner product but stays accurate near 0 and pi, and is exactly
// zero for identical inputs.
double geodesic(std::span<const double> a, std::span<const double> b) {
    double minus = 0.0, plus = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        minus += (a[i] - b[i]) * (a[i] - b[i]);
        plus += (a[i] + b[i]) * (a[i] + b[i]);
    }
    return 2.0 * std::atan2(std::sqrt(minus), std::sqrt(plus));
}

}  // namespace

void check_member(const Point& p, const MetricSpace& space) {
    if (!is_member(p, space)) throw MismatchError(describe(p) + " is not a point of " + space.describe());
}

double stiefel_distance(const Frame& a, const Frame& b, StiefelMode mode) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw MismatchError("stiefel_distance: shapes " + describe(Point{a}) + " and " + describe(Point{b}));
    if (mode == StiefelMode::chordal) return euclidean(a.data, b.data);
    if (a.data == b.data) return 0.0;

    // Canonical argument order keeps the SVD path identical for (a, b) and (b, a).
    const Frame& x = std::lexicographical_compare(b.data.begin(), b.data.end(), a.data.begin(), a.data.end()) ? b : a;
    const Frame& y = &x == &a ? b : a;
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> mx(x.data.data(), static_cast<Eigen::Index>(x.rows), static_cast<Eigen::Index>(x.cols));
    Eigen::Map<const RowMajor> my(y.data.data(), static_cast<Eigen::Index>(y.rows), static_cast<Eigen::Index>(y.cols));
    // Residual of the optimal right rotation R = U V^T of y onto x, where
    // y^T x = U S V^T; computing it directly avoids cancellation near 0.
    const Eigen::MatrixXd cross = my.transpose() * mx;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd rotation = svd.matrixU() * svd.matrixV().transpose();
    return (mx - my * rotation).norm();
}

double distance(const Point& p, const Point& q, const MetricSpace& space) {
    if (!is_member(p, space) || !is_member(q, space))
        throw MismatchError("distance: operands " + describe(p) + " and " + describe(q) + " are not both in " +
                            space.describe());
    switch (space.kind) {
        case MetricKind::euclidean:
            return euclidean(std::get<RealVector>(p).coords, std::get<RealVector>(q).coords);
        case MetricKind::sphere:
            return geodesic(std::get<UnitVector>(p).coords, std::get<UnitVector>(q).coords);
        case MetricKind::stiefel_chordal:
            return stiefel_distance(std::get<Frame>(p), std::get<Frame>(q), StiefelMode::chordal);
        case MetricKind::stiefel_procrustes:
            return stiefel_distance(std::get<Frame>(p), std::get<Frame>(q), StiefelMode::procrustes);
        case MetricKind::bhv:
            return tree::bhv_distance(*std::get<TreePoint>(p).tree, *std::get<TreePoint>(q).tree).distance;
    }
    return 0.0;
}

DistanceMatrix pairwise_matrix(std::span<const Point> points, const MetricSpace& space) {
    const std::size_t n = points.size();
    DistanceMatrix m(n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            try {
                m.set(i, j, distance(points[i], points[j], space));
            } catch (const Error& e) {
                throw MismatchError("pairwise_matrix: points " + std::to_string(i) + " and " + std::to_string(j) +
                                    ": " + e.what());
            }
        }
    });
    return m;
}

}  // namespace lensdepth
