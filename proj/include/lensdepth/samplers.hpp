#pragma once

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "lensdepth/depth.hpp"
#include "lensdepth/metrics.hpp"
#include "lensdepth/random.hpp"

namespace lensdepth {

// A seeded generator of iid points in one metric space.
class Sampler {
public:
    virtual ~Sampler() = default;

    virtual Point draw(Rng& rng) const = 0;
    virtual const MetricSpace& space() const = 0;
    // Canonical JSON spec this sampler was built from.
    virtual nlohmann::json spec() const = 0;
    // Exact lens depth of x when a closed form exists.
    virtual std::optional<double> population_depth(const Point& x) const;
    // Distribution function on the real line, when the space is R^1.
    virtual std::optional<double> cdf(double) const { return std::nullopt; }
    // Quantile on the real line, when the space is R^1.
    virtual std::optional<double> quantile(double) const { return std::nullopt; }

    PointGenerator generator() const;
};

// Builds a sampler from {"dist": ..., parameters}. Supported:
//   normal       {"mu": 0, "sigma": 1}
//   student_t    {"v": 2, "mu": 0, "scale": 1}
//   uniform      {"a": 0, "b": 1}
//   point_mass   {"at": [0, ...]}
//   mvnormal     {"dim": 2, "sigma": 1, "mu": [..]}            isotropic
//   sphere_vmf   {"mu": [0, 0, 1], "kappa": 10}                von Mises-Fisher
//   stiefel_noise {"rows": 3, "cols": 2, "sigma": 0.2, "mode": "chordal"}
//   bhv_noise    {"base_tree": "<newick>", "sigma": 0.1, "swap_prob": 0}
// Throws DomainError on unknown distributions or bad parameters.
std::unique_ptr<Sampler> make_sampler(const nlohmann::json& spec);

}  // namespace lensdepth
