#include "lensdepth/samplers.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "lensdepth/error.hpp"

namespace lensdepth {

std::optional<double> Sampler::population_depth(const Point& x) const {
    if (space().kind != MetricKind::euclidean || space().dim != 1) return std::nullopt;
    const auto f = cdf(std::get<RealVector>(x).coords.at(0));
    if (!f) return std::nullopt;
    return 2.0 * *f * (1.0 - *f);
}

PointGenerator Sampler::generator() const {
    return [this](Rng& rng) { return draw(rng); };
}

namespace {

using nlohmann::json;

double number(const json& spec, const char* key, double fallback) {
    if (!spec.contains(key)) return fallback;
    if (!spec[key].is_number()) throw DomainError(std::string("sampler: '") + key + "' must be a number");
    return spec[key].get<double>();
}

std::vector<double> numbers(const json& spec, const char* key) {
    if (!spec.contains(key) || !spec[key].is_array()) throw DomainError(std::string("sampler: '") + key + "' must be an array");
    std::vector<double> v;
    for (const auto& e : spec[key]) {
        if (!e.is_number()) throw DomainError(std::string("sampler: '") + key + "' must hold numbers");
        v.push_back(e.get<double>());
    }
    if (v.empty()) throw DomainError(std::string("sampler: '") + key + "' is empty");
    return v;
}

std::size_t count(const json& spec, const char* key, std::size_t fallback) {
    if (!spec.contains(key)) return fallback;
    // JSON text yields unsigned numbers, C++ literals signed ones
    if (!spec[key].is_number_integer() || spec[key].get<std::int64_t>() <= 0)
        throw DomainError(std::string("sampler: '") + key + "' must be a positive integer");
    return spec[key].get<std::size_t>();
}

void positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string("sampler: ") + what + " must be positive");
}

Point scalar(double x) { return RealVector{{x}}; }

class NormalSampler final : public Sampler {
public:
    NormalSampler(double mu, double sigma) : mu_(mu), sigma_(sigma), dist_(mu, sigma) { positive(sigma, "sigma"); }
    Point draw(Rng& rng) const override { return scalar(mu_ + sigma_ * std::normal_distribution<double>()(rng)); }
    const MetricSpace& space() const override { return space_; }
    json spec() const override { return {{"dist", "normal"}, {"mu", mu_}, {"sigma", sigma_}}; }
    std::optional<double> cdf(double x) const override { return boost::math::cdf(dist_, x); }
    std::optional<double> quantile(double p) const override { return boost::math::quantile(dist_, p); }

private:
    double mu_, sigma_;
    boost::math::normal_distribution<double> dist_;
    MetricSpace space_ = MetricSpace::euclidean(1);
};

class StudentSampler final : public Sampler {
public:
    StudentSampler(double v, double mu, double scale) : v_(v), mu_(mu), scale_(scale), dist_(v) {
        positive(v, "v");
        positive(scale, "scale");
    }
    Point draw(Rng& rng) const override { return scalar(mu_ + scale_ * std::student_t_distribution<double>(v_)(rng)); }
    const MetricSpace& space() const override { return space_; }
    json spec() const override { return {{"dist", "student_t"}, {"v", v_}, {"mu", mu_}, {"scale", scale_}}; }
    std::optional<double> cdf(double x) const override { return boost::math::cdf(dist_, (x - mu_) / scale_); }
    std::optional<double> quantile(double p) const override { return mu_ + scale_ * boost::math::quantile(dist_, p); }

private:
    double v_, mu_, scale_;
    boost::math::students_t_distribution<double> dist_;
    MetricSpace space_ = MetricSpace::euclidean(1);
};

class UniformSampler final : public Sampler {
public:
    UniformSampler(double a, double b) : a_(a), b_(b) {
        if (!(b > a)) throw DomainError("sampler: uniform needs b > a");
    }
    Point draw(Rng& rng) const override { return scalar(std::uniform_real_distribution<double>(a_, b_)(rng)); }
    const MetricSpace& space() const override { return space_; }
    json spec() const override { return {{"dist", "uniform"}, {"a", a_}, {"b", b_}}; }
    std::optional<double> cdf(double x) const override { return std::clamp((x - a_) / (b_ - a_), 0.0, 1.0); }
    std::optional<double> quantile(double p) const override { return a_ + p * (b_ - a_); }

private:
    double a_, b_;
    MetricSpace space_ = MetricSpace::euclidean(1);
};

class PointMassSampler final : public Sampler {
public:
    explicit PointMassSampler(std::vector<double> at) : at_(std::move(at)), space_(MetricSpace::euclidean(at_.size())) {}
    Point draw(Rng&) const override { return RealVector{at_}; }
    const MetricSpace& space() const override { return space_; }
    json spec() const override { return {{"dist", "point_mass"}, {"at", at_}}; }
    // Both lens centres sit on the atom, so the lens is the atom itself.
    std::optional<double> population_depth(const Point& x) const override {
        return distance(x, RealVector{at_}, space_) < kPointEqualityTolerance ? 1.0 : 0.0;
    }
    std::optional<double> cdf(double x) const override {
        if (at_.size() != 1) return std::nullopt;
        return x >= at_[0] ? 1.0 : 0.0;
    }

private:
    std::vector<double> at_;
    MetricSpace space_;
};

class MvNormalSampler final : public Sampler {
public:
    MvNormalSampler(std::vector<double> mu, double sigma)
        : mu_(std::move(mu)), sigma_(sigma), space_(MetricSpace::euclidean(mu_.size())) {
        positive(sigma, "sigma");
    }
    Point draw(Rng& rng) const override {
        std::normal_distribution<double> z;
        RealVector p{mu_};
        for (double& c : p.coords) c += sigma_ * z(rng);
        return p;
    }
    const MetricSpace& space() const override { return space_; }
    json spec() const override { return {{"dist", "mvnormal"}, {"dim", mu_.size()}, {"sigma", sigma_}, {"mu", mu_}}; }
    std::optional<double> cdf(double x) const override {
        if (mu_.size() != 1) return std::nullopt;
        return boost::math::cdf(boost::math::normal_distribution<double>(mu_[0], sigma_), x);
    }

private:
    std::vector<double> mu_;
    double sigma_;
    MetricSpace space_;
};

// Wood (1994) rejection sampler for the von Mises-Fisher law.
class VmfSampler final : public Sampler {
public:
    VmfSampler(std::vector<double> mu, double kappa) : kappa_(kappa) {
        if (mu.size() < 2) throw DomainError("sampler: sphere_vmf needs an ambient dimension of at least 2");
        if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("sampler: kappa must be >= 0");
        mu_ = normalized(std::move(mu)).coords;
        space_ = MetricSpace::sphere(mu_.size());
        const double m = static_cast<double>(mu_.size() - 1);
        b_ = m / (2.0 * kappa_ + std::sqrt(4.0 * kappa_ * kappa_ + m * m));
        x0_ = (1.0 - b_) / (1.0 + b_);
        c_ = kappa_ * x0_ + m * std::log(1.0 - x0_ * x0_);
    }
    Point draw(Rng& rng) const override {
        const std::size_t p = mu_.size();
        const double m = static_cast<double>(p - 1);
        std::uniform_real_distribution<double> unif;
        std::normal_distribution<double> z;
        double w = 0.0;
        std::gamma_distribution<double> ga(m / 2.0, 1.0);
        for (;;) {
            const double g1 = ga(rng), g2 = ga(rng);
            const double beta = g1 / (g1 + g2);
            w = (1.0 - (1.0 + b_) * beta) / (1.0 - (1.0 - b_) * beta);
            if (kappa_ * w + m * std::log(1.0 - x0_ * w) - c_ >= std::log(unif(rng))) break;
        }
        // Tangent direction uniform on the unit sphere orthogonal to e_p.
        std::vector<double> v(p - 1);
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& c : v) {
                c = z(rng);
                norm += c * c;
            }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        const double r = std::sqrt(std::max(0.0, 1.0 - w * w));
        std::vector<double> x(p);
        for (std::size_t k = 0; k + 1 < p; ++k) x[k] = r * v[k] / norm;
        x[p - 1] = w;
        // Householder reflection taking e_p to mu.
        std::vector<double> h(mu_);
        for (double& c : h) c = -c;
        h[p - 1] += 1.0;
        double hh = 0.0, hx = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
            hh += h[k] * h[k];
            hx += h[k] * x[k];
        }
        if (hh > 1e-24)
            for (std::size_t k = 0; k < p; ++k) x[k] -= 2.0 * hx / hh * h[k];
        return normalized(std::move(x));
    }
    const MetricSpace& space() const override { return space_; }
    json spec() const override { return {{"dist", "sphere_vmf"}, {"mu", mu_}, {"kappa", kappa_}}; }

private:
    std::vector<double> mu_;
    double kappa_, b_ = 0.0, x0_ = 0.0, c_ = 0.0;
    MetricSpace space_;
};

// Base frame (first `cols` coordinate axes) plus isotropic Gaussian noise,
// re-orthonormalized.
class StiefelNoiseSampler final : public Sampler {
public:
    StiefelNoiseSampler(std::size_t rows, std::size_t cols, double sigma, StiefelMode mode)
        : rows_(rows), cols_(cols), sigma_(sigma), mode_(mode), space_(MetricSpace::stiefel(rows, cols, mode)) {
        if (cols > rows) throw DomainError("sampler: stiefel_noise needs cols <= rows");
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("sampler: sigma must be >= 0");
    }
    Point draw(Rng& rng) const override {
        std::normal_distribution<double> z;
        for (;;) {
            std::vector<double> m(rows_ * cols_, 0.0);
            for (std::size_t r = 0; r < rows_; ++r)
                for (std::size_t c = 0; c < cols_; ++c) m[r * cols_ + c] = (r == c ? 1.0 : 0.0) + sigma_ * z(rng);
            try {
                return orthonormalized(rows_, cols_, std::move(m));
            } catch (const DomainError&) {
                // Rank-deficient draw; resample.
            }
        }
    }
    const MetricSpace& space() const override { return space_; }
    json spec() const override {
        return {{"dist", "stiefel_noise"}, {"rows", rows_}, {"cols", cols_}, {"sigma", sigma_},
                {"mode", mode_ == StiefelMode::chordal ? "chordal" : "procrustes"}};
    }

private:
    std::size_t rows_, cols_;
    double sigma_;
    StiefelMode mode_;
    MetricSpace space_;
};

// Base tree with every edge length perturbed by reflected Gaussian noise;
// with probability swap_prob two random leaf labels are exchanged first.
class BhvNoiseSampler final : public Sampler {
public:
    BhvNoiseSampler(std::string newick, double sigma, double swap_prob)
        : newick_(std::move(newick)), base_(parse_newick_shared(newick_)), sigma_(sigma), swap_prob_(swap_prob),
          space_(MetricSpace::bhv(base_->leaf_count())) {
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("sampler: sigma must be >= 0");
        if (!(swap_prob >= 0.0 && swap_prob <= 1.0)) throw DomainError("sampler: swap_prob must be in [0, 1]");
    }
    Point draw(Rng& rng) const override {
        tree::Tree t = *base_;
        std::uniform_real_distribution<double> unif;
        const std::size_t L = t.leaf_count();
        if (swap_prob_ > 0.0 && L >= 2 && unif(rng) < swap_prob_) {
            std::uniform_int_distribution<std::size_t> pick(0, L - 1);
            const std::size_t a = pick(rng);
            std::size_t b = pick(rng);
            while (b == a) b = pick(rng);
            std::vector<std::string> rename = t.leaves();
            std::swap(rename[a], rename[b]);
            t = tree::relabel(t, rename);
        }
        std::normal_distribution<double> z;
        t = tree::map_lengths(t, [&](double len) { return std::abs(len + sigma_ * z(rng)); });
        return make_tree_point(std::move(t));
    }
    const MetricSpace& space() const override { return space_; }
    json spec() const override {
        return {{"dist", "bhv_noise"}, {"base_tree", newick_}, {"sigma", sigma_}, {"swap_prob", swap_prob_}};
    }

private:
    static std::shared_ptr<const tree::Tree> parse_newick_shared(const std::string& text) {
        return std::make_shared<const tree::Tree>(tree::parse_newick(text));
    }

    std::string newick_;
    std::shared_ptr<const tree::Tree> base_;
    double sigma_, swap_prob_;
    MetricSpace space_;
};

}  // namespace

std::unique_ptr<Sampler> make_sampler(const json& spec) {
    if (!spec.is_object() || !spec.contains("dist") || !spec["dist"].is_string())
        throw DomainError("sampler spec must be an object with a string 'dist'");
    const std::string dist = spec["dist"].get<std::string>();
    if (dist == "normal") return std::make_unique<NormalSampler>(number(spec, "mu", 0.0), number(spec, "sigma", 1.0));
    if (dist == "student_t")
        return std::make_unique<StudentSampler>(number(spec, "v", 2.0), number(spec, "mu", 0.0), number(spec, "scale", 1.0));
    if (dist == "uniform") return std::make_unique<UniformSampler>(number(spec, "a", 0.0), number(spec, "b", 1.0));
    if (dist == "point_mass") return std::make_unique<PointMassSampler>(numbers(spec, "at"));
    if (dist == "mvnormal") {
        std::vector<double> mu = spec.contains("mu") ? numbers(spec, "mu") : std::vector<double>(count(spec, "dim", 2), 0.0);
        if (spec.contains("dim") && count(spec, "dim", 2) != mu.size()) throw DomainError("sampler: 'dim' disagrees with 'mu'");
        return std::make_unique<MvNormalSampler>(std::move(mu), number(spec, "sigma", 1.0));
    }
    if (dist == "sphere_vmf") {
        std::vector<double> mu = spec.contains("mu") ? numbers(spec, "mu") : std::vector<double>{0.0, 0.0, 1.0};
        return std::make_unique<VmfSampler>(std::move(mu), number(spec, "kappa", 10.0));
    }
    if (dist == "stiefel_noise") {
        StiefelMode mode = StiefelMode::chordal;
        if (spec.contains("mode")) {
            const std::string m = spec["mode"].is_string() ? spec["mode"].get<std::string>() : "";
            if (m == "procrustes")
                mode = StiefelMode::procrustes;
            else if (m != "chordal")
                throw DomainError("sampler: mode must be 'chordal' or 'procrustes'");
        }
        return std::make_unique<StiefelNoiseSampler>(count(spec, "rows", 3), count(spec, "cols", 2),
                                                     number(spec, "sigma", 0.2), mode);
    }
    if (dist == "bhv_noise") {
        if (!spec.contains("base_tree") || !spec["base_tree"].is_string())
            throw DomainError("sampler: bhv_noise needs a Newick 'base_tree'");
        return std::make_unique<BhvNoiseSampler>(spec["base_tree"].get<std::string>(), number(spec, "sigma", 0.1),
                                                 number(spec, "swap_prob", 0.0));
    }
    throw DomainError("unknown sampler dist '" + dist + "'");
}

}  // namespace lensdepth
