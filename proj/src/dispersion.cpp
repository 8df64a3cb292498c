#include "lensdepth/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "lensdepth/error.hpp"
#include "lensdepth/parallel.hpp"

namespace lensdepth {

std::string_view to_string(PsiKind kind) {
    switch (kind) {
        case PsiKind::diameter: return "diam";
        case PsiKind::inradius: return "inradius";
        case PsiKind::volume: return "volume";
    }
    return "unknown";
}

PsiKind parse_psi_kind(std::string_view name) {
    if (name == "diam" || name == "diameter") return PsiKind::diameter;
    if (name == "inradius") return PsiKind::inradius;
    if (name == "volume") return PsiKind::volume;
    throw DomainError("unknown psi '" + std::string(name) + "' (expected diam, inradius or volume)");
}

std::string_view to_string(OrderKind kind) {
    switch (kind) {
        case OrderKind::spread_out: return "spread-out";
        case OrderKind::strong: return "strong";
        case OrderKind::weak: return "weak";
        case OrderKind::giovagnoli: return "giovagnoli";
    }
    return "unknown";
}

std::vector<double> lambda_grid(double s, std::size_t n) {
    if (!(s > 0.0)) throw DomainError("lambda_grid: s must be positive");
    if (n < 2) throw DomainError("lambda_grid: need at least two points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = s * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = s;
    return g;
}

namespace {

void check_grid(std::span<const double> lambdas) {
    if (lambdas.empty()) throw DomainError("psi_curve: empty lambda grid");
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1])) throw DomainError("psi_curve: lambda grid must be increasing");
    if (lambdas.front() < 0.0) throw DomainError("psi_curve: lambdas must be >= 0");
}

std::string region_of(const EvaluationGrid& grid) {
    if (!grid.is_lattice()) return "evaluation set of " + std::to_string(grid.size()) + " points";
    std::string out = "lattice ";
    for (std::size_t k = 0; k < grid.axes().size(); ++k) {
        const Axis& a = grid.axes()[k];
        if (k) out += " x ";
        out += "[" + std::to_string(a.lo) + "," + std::to_string(a.hi) + "]/" + std::to_string(a.step);
    }
    return out;
}

// Indices sorted by decreasing depth, ties by index.
std::vector<std::size_t> by_depth_desc(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    return order;
}

// Number of values >= lambda for each grid lambda, given values sorted desc.
std::vector<std::size_t> member_counts(const std::vector<double>& v, const std::vector<std::size_t>& desc,
                                       std::span<const double> lambdas) {
    std::vector<std::size_t> counts(lambdas.size());
    for (std::size_t g = 0; g < lambdas.size(); ++g) {
        const auto it = std::partition_point(desc.begin(), desc.end(),
                                             [&](std::size_t i) { return v[i] >= lambdas[g]; });
        counts[g] = static_cast<std::size_t>(it - desc.begin());
    }
    return counts;
}

std::vector<double> diameter_curve(const DepthField& field, std::span<const double> lambdas) {
    const auto& v = field.values;
    const auto desc = by_depth_desc(v);
    // reach[k] = max distance from the k-th deepest point to all deeper ones.
    std::vector<double> reach(desc.size(), 0.0);
    parallel_for(desc.size(), [&](std::size_t k) {
        double m = 0.0;
        for (std::size_t j = 0; j < k; ++j) m = std::max(m, distance(field.points[desc[k]], field.points[desc[j]], field.space));
        reach[k] = m;
    });
    std::vector<double> prefix(desc.size() + 1, 0.0);
    for (std::size_t k = 0; k < desc.size(); ++k) prefix[k + 1] = std::max(prefix[k], reach[k]);
    const auto counts = member_counts(v, desc, lambdas);
    std::vector<double> out(lambdas.size());
    for (std::size_t g = 0; g < lambdas.size(); ++g) out[g] = prefix[counts[g]];
    return out;
}

std::vector<double> inradius_curve(const DepthField& field, const EvaluationGrid& grid,
                                   std::span<const double> lambdas) {
    const auto& v = field.values;
    const std::size_t n = v.size(), G = lambdas.size();
    // Complement candidates in increasing depth; the complement at lambda is
    // the prefix of points with depth < lambda.
    std::vector<std::size_t> asc(n);
    std::iota(asc.begin(), asc.end(), 0);
    std::stable_sort(asc.begin(), asc.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<std::size_t> below(G);
    for (std::size_t g = 0; g < G; ++g)
        below[g] = static_cast<std::size_t>(
            std::partition_point(asc.begin(), asc.end(), [&](std::size_t i) { return v[i] < lambdas[g]; }) - asc.begin());

    constexpr std::size_t kChunks = 64;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> partial(kChunks, std::vector<double>(G, -inf));
    parallel_for(kChunks, [&](std::size_t c) {
        std::vector<double>& best = partial[c];
        std::vector<double> running(n + 1);
        for (std::size_t p = c; p < n; p += kChunks) {
            double m = grid.exterior_distance(p);
            running[0] = m;
            for (std::size_t k = 0; k < n; ++k) {
                // Points with no larger lambda than p's depth never matter.
                if (v[asc[k]] > v[p]) {
                    running[k + 1] = m;
                    continue;
                }
                m = std::min(m, distance(field.points[p], field.points[asc[k]], field.space));
                running[k + 1] = m;
            }
            for (std::size_t g = 0; g < G; ++g)
                if (v[p] >= lambdas[g]) best[g] = std::max(best[g], running[below[g]]);
        }
    });
    std::vector<double> out(G, -inf);
    for (const auto& part : partial)
        for (std::size_t g = 0; g < G; ++g) out[g] = std::max(out[g], part[g]);
    return out;
}

}  // namespace

PsiCurve psi_curve(const DepthField& field, const EvaluationGrid& grid, PsiKind kind,
                   std::span<const double> lambdas) {
    check_grid(lambdas);
    if (field.values.size() != grid.size()) throw MismatchError("psi_curve: field is not evaluated on the grid");
    PsiCurve curve;
    curve.kind = kind;
    curve.lambdas.assign(lambdas.begin(), lambdas.end());
    curve.region = region_of(grid);
    const std::size_t G = lambdas.size();
    curve.degenerate.assign(G, false);

    const auto desc = by_depth_desc(field.values);
    const auto counts = member_counts(field.values, desc, lambdas);
    switch (kind) {
        case PsiKind::diameter:
            curve.values = diameter_curve(field, lambdas);
            break;
        case PsiKind::inradius:
            curve.values = inradius_curve(field, grid, lambdas);
            break;
        case PsiKind::volume: {
            curve.values.resize(G);
            const double total = static_cast<double>(grid.size());
            if (grid.is_lattice()) {
                for (std::size_t g = 0; g < G; ++g) curve.values[g] = static_cast<double>(counts[g]) * grid.cell_volume();
            } else {
                curve.std_errors.resize(G);
                for (std::size_t g = 0; g < G; ++g) {
                    const double f = static_cast<double>(counts[g]) / total;
                    curve.values[g] = f;
                    curve.std_errors[g] = std::sqrt(f * (1.0 - f) / total);
                }
            }
            break;
        }
    }
    for (std::size_t g = 0; g < G; ++g) {
        if (counts[g] == 0) {
            curve.values[g] = 0.0;
            curve.degenerate[g] = true;
        }
    }
    if (kind == PsiKind::inradius) {
        double carry = 0.0;
        for (std::size_t g = G; g-- > 0;) {
            if (std::isinf(curve.values[g])) {
                curve.values[g] = carry;
                curve.degenerate[g] = true;
            } else {
                carry = curve.values[g];
            }
        }
    }
    return curve;
}

PsiCurve psi_curve_from(const std::function<double(double)>& psi, PsiKind kind, std::span<const double> lambdas,
                        std::string region) {
    check_grid(lambdas);
    PsiCurve c;
    c.kind = kind;
    c.lambdas.assign(lambdas.begin(), lambdas.end());
    c.values.resize(lambdas.size());
    for (std::size_t g = 0; g < lambdas.size(); ++g) c.values[g] = psi(lambdas[g]);
    c.degenerate.assign(lambdas.size(), false);
    c.region = std::move(region);
    return c;
}

// ---------------------------------------------------------------------------
// Orders

namespace {

void check_comparable(const PsiCurve& cx, const PsiCurve& cy) {
    if (cx.kind != cy.kind) throw MismatchError("psi curves of different kinds");
    if (cx.lambdas != cy.lambdas) throw MismatchError("psi curves on different lambda grids");
    if (cx.values.size() != cx.lambdas.size() || cy.values.size() != cy.lambdas.size())
        throw MismatchError("psi curve value count differs from its grid");
}

std::string joint_region(const PsiCurve& cx, const PsiCurve& cy) {
    return cx.region == cy.region ? cx.region : cx.region + " | " + cy.region;
}

}  // namespace

OrderVerdict spread_out_ge(const PsiCurve& cx, const PsiCurve& cy, double tolerance) {
    check_comparable(cx, cy);
    OrderVerdict out{OrderKind::spread_out, true, std::nullopt, std::nullopt, std::numeric_limits<double>::infinity(),
                     joint_region(cx, cy)};
    const std::size_t G = cx.values.size();
    for (std::size_t i = 0; i < G; ++i) {
        for (std::size_t j = i + 1; j < G; ++j) {
            const double slack = (cx.values[i] - cx.values[j]) - (cy.values[i] - cy.values[j]);
            out.margin = std::min(out.margin, slack);
            if (out.holds && slack < -tolerance) {
                out.holds = false;
                out.witness = cx.lambdas[i];
                out.witness_upper = cx.lambdas[j];
            }
        }
    }
    if (G < 2) out.margin = 0.0;
    return out;
}

OrderVerdict strong_order(const PsiCurve& cx, const PsiCurve& cy, double tolerance) {
    check_comparable(cx, cy);
    OrderVerdict out{OrderKind::strong, true, std::nullopt, std::nullopt, std::numeric_limits<double>::infinity(),
                     joint_region(cx, cy)};
    for (std::size_t g = 0; g < cx.values.size(); ++g) {
        const double slack = cx.values[g] - cy.values[g];
        out.margin = std::min(out.margin, slack);
        if (out.holds && slack < -tolerance) {
            out.holds = false;
            out.witness = cx.lambdas[g];
        }
    }
    return out;
}

OrderVerdict weak_order(const PsiCurve& cx, const PsiCurve& cy, double tolerance) {
    check_comparable(cx, cy);
    double integral = 0.0;
    for (std::size_t g = 0; g + 1 < cx.values.size(); ++g) {
        const double d0 = cx.values[g] - cy.values[g];
        const double d1 = cx.values[g + 1] - cy.values[g + 1];
        integral += 0.5 * (d0 + d1) * (cx.lambdas[g + 1] - cx.lambdas[g]);
    }
    OrderVerdict out{OrderKind::weak, integral >= -tolerance, std::nullopt, std::nullopt, integral,
                     joint_region(cx, cy)};
    if (!out.holds) out.witness = cx.lambdas.back();
    return out;
}

double mc_tolerance(const PsiCurve& cx, const PsiCurve& cy, std::size_t terms) {
    auto max_sq = [](const PsiCurve& c) {
        double m = 0.0;
        for (double s : c.std_errors) m = std::max(m, s * s);
        return m;
    };
    return 2.0 * std::sqrt(static_cast<double>(terms) * (max_sq(cx) + max_sq(cy)));
}

double gamma(const PsiCurve& cx, const PsiCurve& cy, double s) {
    check_comparable(cx, cy);
    if (!(s > 0.0)) throw DomainError("gamma: s must be positive");
    const auto& L = cx.lambdas;
    if (L.size() < 2 || L.front() > 1e-12 || L.back() < s * (1.0 - 1e-12))
        throw DomainError("gamma: lambda grid must cover [0, s]");
    double pos = 0.0, neg = 0.0;
    for (std::size_t k = 0; k + 1 < L.size(); ++k) {
        const double l0 = L[k], l1 = L[k + 1];
        const double a = std::max(l0, 0.0), b = std::min(l1, s);
        if (!(b > a)) continue;
        const double d0 = cx.values[k] - cy.values[k];
        const double d1 = cx.values[k + 1] - cy.values[k + 1];
        const double ga = a == l0 ? d0 : d0 + (a - l0) / (l1 - l0) * (d1 - d0);
        const double gb = b == l1 ? d1 : d0 + (b - l0) / (l1 - l0) * (d1 - d0);
        if (ga >= 0.0 && gb >= 0.0) {
            pos += b - a;
        } else if (ga < 0.0 && gb < 0.0) {
            neg += b - a;
        } else {
            const double root = a + ga / (ga - gb) * (b - a);
            if (ga >= 0.0) {
                pos += root - a;
                neg += b - root;
            } else {
                neg += root - a;
                pos += b - root;
            }
        }
    }
    if (pos + neg <= 0.0) throw DomainError("gamma: empty lambda range");
    return pos / (pos + neg);
}

double depth_sup(const DepthField& fx, const DepthField& fy) {
    double s = 0.0;
    for (double v : fx.values) s = std::max(s, v);
    for (double v : fy.values) s = std::max(s, v);
    return s;
}

std::vector<double> refine_near_crossings(const PsiCurve& cx, const PsiCurve& cy, std::size_t subdivisions) {
    check_comparable(cx, cy);
    std::vector<double> out;
    const auto& L = cx.lambdas;
    for (std::size_t k = 0; k < L.size(); ++k) {
        out.push_back(L[k]);
        if (k + 1 == L.size()) break;
        const bool s0 = cx.values[k] - cy.values[k] >= 0.0;
        const bool s1 = cx.values[k + 1] - cy.values[k + 1] >= 0.0;
        if (s0 == s1) continue;
        for (std::size_t j = 1; j < subdivisions; ++j)
            out.push_back(L[k] + (L[k + 1] - L[k]) * static_cast<double>(j) / static_cast<double>(subdivisions));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form gamma on the real line

double quantile_spread(double lambda, const TailQuantile& lower_quantile, const TailQuantile& upper_quantile) {
    // (1 - sqrt(1 - 2 lambda)) / 2 without cancellation.
    const double tail = lambda / (1.0 + std::sqrt(1.0 - 2.0 * lambda));
    return upper_quantile(tail) - lower_quantile(tail);
}

GammaValue gamma_from_spreads(const std::function<double(double)>& spread_x,
                              const std::function<double(double)>& spread_y, GammaMethod method, std::size_t nodes) {
    constexpr double half = 0.5;
    auto diff = [&](double l) { return spread_x(l) - spread_y(l); };
    double share = 0.0;
    if (method == GammaMethod::quadrature) {
        if (nodes == 0) throw DomainError("gamma_from_spreads: need at least one node");
        std::vector<char> hit(nodes);
        parallel_for(nodes, [&](std::size_t k) {
            const double l = half * (static_cast<double>(k) + 0.5) / static_cast<double>(nodes);
            hit[k] = diff(l) >= 0.0;
        });
        share = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(nodes);
    } else {
        // Bracket sign changes on a grid that is uniform in the bulk and
        // geometric towards both ends of (0, 1/2), then bisect each bracket.
        std::vector<double> grid;
        for (int e = 14; e >= 4; --e) {
            grid.push_back(half * std::pow(10.0, -e));
            grid.push_back(half - half * std::pow(10.0, -e));
        }
        constexpr std::size_t kBulk = 2000;
        for (std::size_t j = 1; j < kBulk; ++j) grid.push_back(half * static_cast<double>(j) / kBulk);
        std::sort(grid.begin(), grid.end());
        std::vector<double> g(grid.size());
        parallel_for(grid.size(), [&](std::size_t k) { g[k] = diff(grid[k]); });

        double pos = g.front() >= 0.0 ? grid.front() : 0.0;
        if (g.back() >= 0.0) pos += half - grid.back();
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            const bool s0 = g[k] >= 0.0, s1 = g[k + 1] >= 0.0;
            if (s0 && s1) {
                pos += grid[k + 1] - grid[k];
            } else if (s0 != s1) {
                double lo = grid[k], hi = grid[k + 1];
                for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if ((diff(mid) >= 0.0) == s0)
                        lo = mid;
                    else
                        hi = mid;
                }
                const double root = 0.5 * (lo + hi);
                pos += s0 ? root - grid[k] : grid[k + 1] - root;
            }
        }
        share = pos / half;
    }
    share = std::clamp(share, 0.0, 1.0);
    return {share, 2.0 * share};
}

namespace {

void check_t_normal(double v, double sigma) {
    if (!(v >= 1.0) || !std::isfinite(v)) throw DomainError("gamma_t_vs_normal: v must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("gamma_t_vs_normal: sigma must be > 0");
}

double t_spread(double lambda, double v) {
    const boost::math::students_t_distribution<double> t(v);
    return quantile_spread(
        lambda, [&](double p) { return boost::math::quantile(t, p); },
        [&](double p) { return boost::math::quantile(boost::math::complement(t, p)); });
}

double normal_spread(double lambda, double sigma) {
    const boost::math::normal_distribution<double> z(0.0, sigma);
    return quantile_spread(
        lambda, [&](double p) { return boost::math::quantile(z, p); },
        [&](double p) { return boost::math::quantile(boost::math::complement(z, p)); });
}

}  // namespace

GammaValue gamma_t_vs_normal(double v, double sigma, GammaMethod method, std::size_t nodes) {
    check_t_normal(v, sigma);
    return gamma_from_spreads([v](double l) { return t_spread(l, v); },
                              [sigma](double l) { return normal_spread(l, sigma); }, method, nodes);
}

std::vector<GammaValue> gamma_t_vs_normal_sweep(double v, std::span<const double> sigmas, std::size_t nodes) {
    check_t_normal(v, 1.0);
    for (double s : sigmas) check_t_normal(v, s);
    if (nodes == 0) throw DomainError("gamma_t_vs_normal_sweep: need at least one node");
    std::vector<double> tx(nodes), unit(nodes);
    parallel_for(nodes, [&](std::size_t k) {
        const double l = 0.5 * (static_cast<double>(k) + 0.5) / static_cast<double>(nodes);
        tx[k] = t_spread(l, v);
        unit[k] = normal_spread(l, 1.0);
    });
    std::vector<GammaValue> out;
    for (double sigma : sigmas) {
        std::size_t hits = 0;
        for (std::size_t k = 0; k < nodes; ++k) hits += tx[k] >= sigma * unit[k];
        const double share = static_cast<double>(hits) / static_cast<double>(nodes);
        out.push_back({share, 2.0 * share});
    }
    return out;
}

// ---------------------------------------------------------------------------

OrderVerdict giovagnoli_order(const Sample& sx, const Sample& sy) {
    if (sx.size() < 2 || sy.size() < 2) throw DomainError("giovagnoli_order: each sample needs n >= 2");
    if (!(sx.space() == sy.space())) throw MismatchError("giovagnoli_order: samples live in different spaces");
    auto distances = [](const Sample& s) {
        Sample cached = s;
        cached.build_cache();
        std::vector<double> d;
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j) d.push_back(cached.pair_distance(i, j));
        std::sort(d.begin(), d.end());
        return d;
    };
    const auto dx = distances(sx), dy = distances(sy);
    std::vector<double> pooled(dx);
    pooled.insert(pooled.end(), dy.begin(), dy.end());
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

    auto ecdf = [](const std::vector<double>& d, double t) {
        return static_cast<double>(std::upper_bound(d.begin(), d.end(), t) - d.begin()) / static_cast<double>(d.size());
    };
    OrderVerdict out{OrderKind::giovagnoli, true, std::nullopt, std::nullopt, -std::numeric_limits<double>::infinity(),
                     "pairwise distances"};
    double worst_t = 0.0;
    for (double t : pooled) {
        const double excess = ecdf(dx, t) - ecdf(dy, t);
        if (excess > out.margin) {
            out.margin = excess;
            worst_t = t;
        }
    }
    if (out.margin > 0.0) {
        out.holds = false;
        out.witness = worst_t;
    }
    return out;
}

}  // namespace lensdepth
