#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lensdepth/depth.hpp"
#include "lensdepth/levelsets.hpp"

namespace lensdepth {

enum class PsiKind { diameter, inradius, volume };

std::string_view to_string(PsiKind kind);
// "diam" | "inradius" | "volume" (also "diameter").
PsiKind parse_psi_kind(std::string_view name);

// psi({depth >= lambda} ∩ K) over an increasing lambda grid.
struct PsiCurve {
    PsiKind kind = PsiKind::diameter;
    std::vector<double> lambdas;
    std::vector<double> values;
    // Level set empty, or (inradius) complement empty with no exterior.
    std::vector<bool> degenerate;
    // Per-value standard errors; empty when psi is computed exactly.
    std::vector<double> std_errors;
    // Description of the compact region K the curve was computed on.
    std::string region;
};

// n equispaced points on [0, s], both ends included.
std::vector<double> lambda_grid(double s, std::size_t n = 200);

// Curve over the evaluation set of `grid`; `field` must be evaluated on
// grid.points(). Diameters use one pass over points sorted by depth,
// inradii one pass per point over the complement sorted by depth, so each
// curve costs O(N^2) distances regardless of the lambda grid size.
// Volume on a lattice is site count times cell volume; on other grids it
// is the empirical fraction of evaluation points (with standard errors).
// An empty level set yields 0. An inradius with an empty complement and no
// lattice exterior takes the value at the next larger lambda.
PsiCurve psi_curve(const DepthField& field, const EvaluationGrid& grid, PsiKind kind,
                   std::span<const double> lambdas);

// Curve from a closed-form psi(lambda).
PsiCurve psi_curve_from(const std::function<double(double)>& psi, PsiKind kind, std::span<const double> lambdas,
                        std::string region = "closed form");

enum class OrderKind { spread_out, strong, weak, giovagnoli };
std::string_view to_string(OrderKind kind);

struct OrderVerdict {
    OrderKind kind = OrderKind::spread_out;
    bool holds = true;
    // First violating lambda (or distance quantile); set iff !holds.
    std::optional<double> witness;
    // Second lambda of a violating spread-out pair.
    std::optional<double> witness_upper;
    // Smallest slack of the defining inequality (negative when violated);
    // for giovagnoli the largest excess of F_X over F_Y.
    double margin = 0.0;
    std::string region;
};

// For every grid pair p1 < p2:
// psi_X(p1) - psi_X(p2) >= psi_Y(p1) - psi_Y(p2) - tolerance.
OrderVerdict spread_out_ge(const PsiCurve& cx, const PsiCurve& cy, double tolerance = 0.0);
// psi_X(lambda) >= psi_Y(lambda) - tolerance at every grid lambda.
OrderVerdict strong_order(const PsiCurve& cx, const PsiCurve& cy, double tolerance = 0.0);
// Trapezoidal integral of psi_X - psi_Y over the grid >= -tolerance.
OrderVerdict weak_order(const PsiCurve& cx, const PsiCurve& cy, double tolerance = 0.0);

// 2 x combined standard error for comparisons involving `terms` values of
// each curve; 0 when neither curve carries standard errors.
double mc_tolerance(const PsiCurve& cx, const PsiCurve& cy, std::size_t terms = 1);

// Share of [0, s] where psi_X >= psi_Y, with curves interpolated linearly
// between grid nodes. The grid must cover [0, s].
double gamma(const PsiCurve& cx, const PsiCurve& cy, double s);

// Largest depth value over both fields: plug-in for sup_x max(LD_X, LD_Y).
double depth_sup(const DepthField& fx, const DepthField& fy);

// Lambda grid refined near sign changes of psi_X - psi_Y: every bracketing
// interval is subdivided into `subdivisions` equal parts.
std::vector<double> refine_near_crossings(const PsiCurve& cx, const PsiCurve& cy, std::size_t subdivisions = 16);

enum class GammaMethod { quadrature, bisection };

struct GammaValue {
    double gamma = 0.0;      // share of (0, 1/2)
    double two_gamma = 0.0;  // the plotted quantity
};

// Level-set spread on the real line when LD = 2F(1 - F):
// F^{-1}((1 + r) / 2) - F^{-1}((1 - r) / 2), r = sqrt(1 - 2 lambda).
// `lower_quantile(p)` must return F^{-1}(p) accurately for small p and
// `upper_quantile(p)` must return F^{-1}(1 - p).
using TailQuantile = std::function<double(double)>;
double quantile_spread(double lambda, const TailQuantile& lower_quantile, const TailQuantile& upper_quantile);

// gamma for two spread functions on (0, 1/2), by midpoint quadrature with
// `nodes` points or by bracketing sign changes and bisecting them.
GammaValue gamma_from_spreads(const std::function<double(double)>& spread_x,
                              const std::function<double(double)>& spread_y, GammaMethod method,
                              std::size_t nodes = 100000);

// X ~ Student t with v degrees of freedom, Y ~ N(0, sigma^2), psi = volume.
GammaValue gamma_t_vs_normal(double v, double sigma, GammaMethod method = GammaMethod::quadrature,
                             std::size_t nodes = 100000);

// Same quadrature for many sigmas, sharing the quantile evaluations.
std::vector<GammaValue> gamma_t_vs_normal_sweep(double v, std::span<const double> sigmas,
                                                std::size_t nodes = 100000);

// Empirical first-order dominance of the within-sample distance
// distributions: F_X(t) <= F_Y(t) at every pooled distance t.
OrderVerdict giovagnoli_order(const Sample& sx, const Sample& sy);

}  // namespace lensdepth
