#include "galign/pose_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "galign/util.hpp"

namespace galign {

namespace {

bool is_circular(FactorKind k) { return k == FactorKind::SO2 || k == FactorKind::Cyclic; }

void validate_factor_dist(const Factor& f, const FactorDist& d) {
    switch (d.kind) {
        case FactorDistKind::VonMises:
        case FactorDistKind::WrappedNormal:
            if (!is_circular(f.kind))
                throw ConfigError("circular distribution on a non-circular factor");
            if (!(d.spread >= 0.0)) throw ConfigError("concentration/sigma must be >= 0");
            break;
        case FactorDistKind::Normal:
            if (f.kind != FactorKind::LogScale)
                throw ConfigError("normal distribution only applies to the log-scale factor");
            if (!(d.spread >= 0.0)) throw ConfigError("sigma must be >= 0");
            break;
        case FactorDistKind::Uniform:
        case FactorDistKind::PointMass:
            break;
    }
    if (f.kind == FactorKind::LogScale && d.kind == FactorDistKind::PointMass) {
        if (d.center < f.log_min - 1e-12 || d.center > f.log_max + 1e-12)
            throw ConfigError("point mass outside log-scale bounds");
    }
}

double sample_factor(const Factor& f, const FactorDist& d, RandomStream& rng) {
    double v = 0.0;
    switch (d.kind) {
        case FactorDistKind::VonMises: v = rng.von_mises(d.center, d.spread); break;
        case FactorDistKind::WrappedNormal: v = canonical_angle(d.center + d.spread * rng.normal()); break;
        case FactorDistKind::Normal: v = d.center + d.spread * rng.normal(); break;
        case FactorDistKind::PointMass: v = d.center; break;
        case FactorDistKind::Uniform:
            v = (f.kind == FactorKind::LogScale) ? rng.uniform(f.log_min, f.log_max)
                                                 : rng.uniform(0.0, kTwoPi);
            break;
    }
    switch (f.kind) {
        case FactorKind::SO2: return canonical_angle(v);
        case FactorKind::Cyclic:
            if (d.kind == FactorDistKind::PointMass) return v;
            // Continuous draws land on the lattice by nearest-point rounding.
            return static_cast<double>(std::llround(v * static_cast<double>(f.order) / kTwoPi));
        case FactorKind::LogScale: return std::clamp(v, f.log_min, f.log_max);
    }
    return v;
}

FactorDist parse_factor_dist(const std::string& tok) {
    std::vector<std::string> parts;
    std::stringstream ss(tok);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.empty()) throw ConfigError("empty pose factor spec");
    auto num = [&](std::size_t i) {
        try {
            return std::stod(parts.at(i));
        } catch (...) {
            throw ConfigError("bad number in pose spec '" + tok + "'");
        }
    };
    if (parts[0] == "uniform") return {FactorDistKind::Uniform, 0.0, 0.0};
    if (parts[0] == "delta") return {FactorDistKind::PointMass, num(1), 0.0};
    if (parts[0] == "vonmises") return {FactorDistKind::VonMises, num(1), num(2)};
    if (parts[0] == "wrappednormal") return {FactorDistKind::WrappedNormal, num(1), num(2)};
    if (parts[0] == "normal") return {FactorDistKind::Normal, num(1), num(2)};
    throw ConfigError("unknown pose distribution '" + parts[0] + "'");
}

std::string factor_dist_spec(const FactorDist& d) {
    switch (d.kind) {
        case FactorDistKind::Uniform: return "uniform";
        case FactorDistKind::PointMass: return "delta:" + fmt_double(d.center);
        case FactorDistKind::VonMises: return "vonmises:" + fmt_double(d.center) + ":" + fmt_double(d.spread);
        case FactorDistKind::WrappedNormal:
            return "wrappednormal:" + fmt_double(d.center) + ":" + fmt_double(d.spread);
        case FactorDistKind::Normal: return "normal:" + fmt_double(d.center) + ":" + fmt_double(d.spread);
    }
    return "";
}

}  // namespace

PoseDistribution PoseDistribution::independent(const Manifold& m, std::vector<FactorDist> factors) {
    if (factors.size() != static_cast<std::size_t>(m.factor_count()))
        throw ConfigError("pose spec factor count does not match manifold");
    for (int i = 0; i < m.factor_count(); ++i)
        validate_factor_dist(m.factor(i), factors[static_cast<std::size_t>(i)]);
    PoseDistribution d;
    d.manifold_ = m;
    d.factors_ = std::move(factors);
    return d;
}

PoseDistribution PoseDistribution::mixture(std::vector<std::pair<double, PoseDistribution>> components) {
    if (components.empty()) throw ConfigError("mixture needs at least one component");
    double total = 0.0;
    for (const auto& [w, c] : components) {
        if (!(w >= 0.0)) throw ConfigError("mixture weights must be nonnegative");
        if (!(c.manifold() == components.front().second.manifold()))
            throw ConfigError("mixture components live on different manifolds");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-9) throw ConfigError("mixture weights must sum to 1");
    PoseDistribution d;
    d.manifold_ = components.front().second.manifold();
    d.components_ = std::move(components);
    return d;
}

PoseDistribution PoseDistribution::parse(const Manifold& m, const std::string& spec) {
    if (spec.rfind("mixture:", 0) == 0) {
        std::vector<std::pair<double, PoseDistribution>> comps;
        std::stringstream ss(spec.substr(8));
        std::string item;
        while (std::getline(ss, item, '|')) {
            const auto tilde = item.find('~');
            if (tilde == std::string::npos)
                throw ConfigError("mixture component needs '<weight>~<spec>': '" + item + "'");
            double w = 0;
            try {
                w = std::stod(item.substr(0, tilde));
            } catch (...) {
                throw ConfigError("bad mixture weight in '" + item + "'");
            }
            comps.emplace_back(w, parse(m, item.substr(tilde + 1)));
        }
        return mixture(std::move(comps));
    }
    std::vector<FactorDist> factors;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, '*')) factors.push_back(parse_factor_dist(tok));
    return independent(m, std::move(factors));
}

std::string PoseDistribution::spec_string() const {
    if (!components_.empty()) {
        std::string out = "mixture:";
        for (std::size_t i = 0; i < components_.size(); ++i) {
            if (i) out += '|';
            out += fmt_double(components_[i].first) + "~" + components_[i].second.spec_string();
        }
        return out;
    }
    std::string out;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (i) out += '*';
        out += factor_dist_spec(factors_[i]);
    }
    return out;
}

Element PoseDistribution::sample(RandomStream& rng) const {
    if (!components_.empty()) {
        const double u = rng.uniform();
        double acc = 0.0;
        for (const auto& [w, c] : components_) {
            acc += w;
            if (u < acc) return c.sample(rng);
        }
        return components_.back().second.sample(rng);
    }
    std::array<double, Manifold::kMaxFactors> c{};
    for (int i = 0; i < manifold_.factor_count(); ++i)
        c[static_cast<std::size_t>(i)] =
            sample_factor(manifold_.factor(i), factors_[static_cast<std::size_t>(i)], rng);
    return Element(manifold_, {c.data(), static_cast<std::size_t>(manifold_.factor_count())});
}

double von_mises_variance(double kappa) {
    if (kappa < 1e-12) return kPi * kPi / 3.0;
    // E[theta^2] under density prop. to exp(kappa*(cos(theta)-1)) on [-pi,pi].
    // The integration window shrinks with kappa so the quadrature keeps
    // resolving the concentrated peak.
    const double half = std::min(kPi, 14.0 / std::sqrt(kappa));
    const int n = 4096;  // Simpson intervals (even)
    const double h = 2.0 * half / n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = -half + h * i;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        const double f = w * std::exp(kappa * (std::cos(t) - 1.0));
        num += f * t * t;
        den += f;
    }
    return num / den;
}

double kappa_for_variance(double target) {
    const double uniform_var = kPi * kPi / 3.0;
    if (!(target > 0.0)) throw std::invalid_argument("target variance must be positive");
    if (target >= uniform_var) return 0.0;
    double lo = 1e-9, hi = 1.0;
    while (von_mises_variance(hi) > target && hi < 1e13) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (von_mises_variance(mid) > target)
            lo = mid;
        else
            hi = mid;
        if ((hi - lo) / hi < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace galign
