#include "galign/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "galign/util.hpp"

namespace galign {

double canonical_angle(double theta) {
    double a = std::fmod(theta, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;  // fmod can land exactly on 2*pi after the shift
    return a;
}

namespace {

double factor_diameter_sq(const Factor& f) {
    switch (f.kind) {
        case FactorKind::SO2: return kPi * kPi;
        case FactorKind::Cyclic: {
            const double d = kTwoPi * static_cast<double>(f.order / 2) / static_cast<double>(f.order);
            return d * d;
        }
        case FactorKind::LogScale: {
            const double d = f.log_max - f.log_min;
            return d * d;
        }
    }
    return 0.0;
}

double canonical_factor_coord(const Factor& f, double c) {
    switch (f.kind) {
        case FactorKind::SO2: return canonical_angle(c);
        case FactorKind::Cyclic: {
            long long k = std::llround(c);
            k %= f.order;
            if (k < 0) k += f.order;
            return static_cast<double>(k);
        }
        case FactorKind::LogScale: return c;
    }
    return c;
}

void require_same_manifold(const Element& g, const Element& h, const char* op) {
    if (!(g.manifold() == h.manifold()))
        throw std::invalid_argument(std::string(op) + ": elements live on different manifolds");
}

double factor_distance(const Factor& f, double a, double b) {
    switch (f.kind) {
        case FactorKind::SO2: {
            double d = std::fabs(a - b);
            return std::min(d, kTwoPi - d);
        }
        case FactorKind::Cyclic: {
            double dk = std::fabs(a - b);
            dk = std::min(dk, static_cast<double>(f.order) - dk);
            return kTwoPi * dk / static_cast<double>(f.order);
        }
        case FactorKind::LogScale: return std::fabs(a - b);
    }
    return 0.0;
}

// Signed wrapped difference g - base in (-pi, pi], antipodal resolved to +pi.
double wrap_to_pi(double delta) {
    double v = std::fmod(delta, kTwoPi);
    if (v <= -kPi) v += kTwoPi;
    if (v > kPi) v -= kTwoPi;
    return v;
}

double factor_log(const Factor& f, double base, double g) {
    switch (f.kind) {
        case FactorKind::SO2: return wrap_to_pi(g - base);
        case FactorKind::Cyclic: {
            double dk = g - base;
            const double n = static_cast<double>(f.order);
            dk = std::fmod(dk, n);
            if (dk <= -n / 2.0) dk += n;
            if (dk > n / 2.0) dk -= n;
            return kTwoPi * dk / n;
        }
        case FactorKind::LogScale: return g - base;
    }
    return 0.0;
}

double factor_exp(const Factor& f, double base, double v) {
    switch (f.kind) {
        case FactorKind::SO2: return canonical_angle(base + v);
        case FactorKind::Cyclic: {
            const long long step = std::llround(v * static_cast<double>(f.order) / kTwoPi);
            return canonical_factor_coord(f, base + static_cast<double>(step));
        }
        case FactorKind::LogScale: return std::clamp(base + v, f.log_min, f.log_max);
    }
    return base;
}

Factor parse_factor(const std::string& tok) {
    if (tok == "so2") return Factor{FactorKind::SO2, 1, 0.0, 0.0};
    if (tok.size() > 1 && tok[0] == 'c') {
        int order = 0;
        try {
            order = std::stoi(tok.substr(1));
        } catch (...) {
            throw ConfigError("bad cyclic factor '" + tok + "'");
        }
        if (order < 1) throw ConfigError("cyclic order must be >= 1: '" + tok + "'");
        return Factor{FactorKind::Cyclic, order, 0.0, 0.0};
    }
    if (tok.rfind("logscale:", 0) == 0) {
        const auto rest = tok.substr(9);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) throw ConfigError("logscale needs bounds: '" + tok + "'");
        double s_min = 0, s_max = 0;
        try {
            s_min = std::stod(rest.substr(0, colon));
            s_max = std::stod(rest.substr(colon + 1));
        } catch (...) {
            throw ConfigError("bad logscale bounds '" + tok + "'");
        }
        if (!(s_min > 0.0 && s_min <= 1.0 && s_max >= 1.0))
            throw ConfigError("logscale bounds must satisfy 0 < s_min <= 1 <= s_max: '" + tok + "'");
        return Factor{FactorKind::LogScale, 1, std::log(s_min), std::log(s_max)};
    }
    throw ConfigError("unknown manifold factor '" + tok + "'");
}

std::string factor_spec(const Factor& f) {
    switch (f.kind) {
        case FactorKind::SO2: return "so2";
        case FactorKind::Cyclic: return "c" + std::to_string(f.order);
        case FactorKind::LogScale:
            return "logscale:" + fmt_double(std::exp(f.log_min)) + ":" + fmt_double(std::exp(f.log_max));
    }
    return "";
}

}  // namespace

Manifold Manifold::so2() {
    Manifold m;
    m.factors_[0] = Factor{FactorKind::SO2, 1, 0.0, 0.0};
    return m;
}

Manifold Manifold::cyclic(int order) {
    if (order < 1) throw std::invalid_argument("cyclic order must be >= 1");
    Manifold m;
    m.factors_[0] = Factor{FactorKind::Cyclic, order, 0.0, 0.0};
    return m;
}

Manifold Manifold::log_scale(double s_min, double s_max) {
    if (!(s_min > 0.0 && s_min <= 1.0 && s_max >= 1.0))
        throw std::invalid_argument("log-scale bounds must satisfy 0 < s_min <= 1 <= s_max");
    Manifold m;
    m.factors_[0] = Factor{FactorKind::LogScale, 1, std::log(s_min), std::log(s_max)};
    return m;
}

Manifold Manifold::product(std::span<const Factor> factors, std::span<const double> weights) {
    if (factors.empty() || factors.size() > kMaxFactors)
        throw std::invalid_argument("product manifold needs 1..4 factors");
    if (!weights.empty() && weights.size() != factors.size())
        throw std::invalid_argument("metric weight count must match factor count");
    Manifold m;
    m.count_ = static_cast<int>(factors.size());
    for (std::size_t i = 0; i < factors.size(); ++i) {
        m.factors_[i] = factors[i];
        const double w = weights.empty() ? 1.0 : weights[i];
        if (!(w > 0.0)) throw std::invalid_argument("metric weights must be strictly positive");
        m.weights_[i] = w;
    }
    return m;
}

Manifold Manifold::parse(const std::string& spec) {
    std::string body = spec;
    std::vector<double> weights;
    if (const auto at = spec.find('@'); at != std::string::npos) {
        body = spec.substr(0, at);
        std::stringstream ws(spec.substr(at + 1));
        std::string w;
        while (std::getline(ws, w, ',')) {
            try {
                weights.push_back(std::stod(w));
            } catch (...) {
                throw ConfigError("bad metric weight '" + w + "' in manifold spec");
            }
        }
    }
    std::vector<Factor> factors;
    std::stringstream fs(body);
    std::string tok;
    while (std::getline(fs, tok, '*')) factors.push_back(parse_factor(tok));
    if (factors.empty()) throw ConfigError("empty manifold spec");
    try {
        return product(factors, weights);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("manifold spec '") + spec + "': " + e.what());
    }
}

std::string Manifold::spec_string() const {
    std::string out;
    for (int i = 0; i < count_; ++i) {
        if (i) out += '*';
        out += factor_spec(factors_[static_cast<std::size_t>(i)]);
    }
    bool default_weights = true;
    for (int i = 0; i < count_; ++i)
        if (weights_[static_cast<std::size_t>(i)] != 1.0) default_weights = false;
    if (!default_weights) {
        out += '@';
        for (int i = 0; i < count_; ++i) {
            if (i) out += ',';
            out += fmt_double(weights_[static_cast<std::size_t>(i)]);
        }
    }
    return out;
}

double Manifold::diameter_sq() const {
    double d2 = 0.0;
    for (int i = 0; i < count_; ++i)
        d2 += weights_[static_cast<std::size_t>(i)] * factor_diameter_sq(factors_[static_cast<std::size_t>(i)]);
    return d2;
}

Element::Element(const Manifold& m, std::span<const double> coords) : manifold_(m) {
    if (coords.size() != static_cast<std::size_t>(m.factor_count()))
        throw std::invalid_argument("coordinate count must match manifold factor count");
    for (int i = 0; i < m.factor_count(); ++i)
        coords_[static_cast<std::size_t>(i)] = canonical_factor_coord(m.factor(i), coords[static_cast<std::size_t>(i)]);
}

Element identity(const Manifold& m) {
    Element e;
    e.manifold_ = m;
    return e;  // all-zero coordinates are the identity on every factor
}

Element so2_element(double theta) {
    const double c[1] = {theta};
    return Element(Manifold::so2(), c);
}

Element cyclic_element(int order, long long index) {
    const double c[1] = {static_cast<double>(index)};
    return Element(Manifold::cyclic(order), c);
}

Element log_scale_element(double s_min, double s_max, double u) {
    const double c[1] = {u};
    return Element(Manifold::log_scale(s_min, s_max), c);
}

Element compose(const Element& g, const Element& h) {
    require_same_manifold(g, h, "compose");
    const Manifold& m = g.manifold();
    std::array<double, Manifold::kMaxFactors> c{};
    for (int i = 0; i < m.factor_count(); ++i) c[static_cast<std::size_t>(i)] = g.coord(i) + h.coord(i);
    return Element(m, {c.data(), static_cast<std::size_t>(m.factor_count())});
}

Element inverse(const Element& g) {
    const Manifold& m = g.manifold();
    std::array<double, Manifold::kMaxFactors> c{};
    for (int i = 0; i < m.factor_count(); ++i) c[static_cast<std::size_t>(i)] = -g.coord(i);
    return Element(m, {c.data(), static_cast<std::size_t>(m.factor_count())});
}

double geodesic_distance(const Element& g, const Element& h) {
    require_same_manifold(g, h, "geodesic_distance");
    const Manifold& m = g.manifold();
    if (m.factor_count() == 1) return factor_distance(m.factor(0), g.coord(0), h.coord(0));
    double sum = 0.0;
    for (int i = 0; i < m.factor_count(); ++i) {
        const double d = factor_distance(m.factor(i), g.coord(i), h.coord(i));
        sum += m.weight(i) * d * d;
    }
    return std::sqrt(sum);
}

Tangent log_map(const Element& base, const Element& g) {
    require_same_manifold(base, g, "log_map");
    const Manifold& m = base.manifold();
    Tangent t;
    t.n = m.factor_count();
    for (int i = 0; i < t.n; ++i) t[i] = factor_log(m.factor(i), base.coord(i), g.coord(i));
    return t;
}

Element exp_map(const Element& base, const Tangent& v) {
    const Manifold& m = base.manifold();
    if (v.n != m.factor_count()) throw std::invalid_argument("exp_map: tangent dimension mismatch");
    std::array<double, Manifold::kMaxFactors> c{};
    for (int i = 0; i < m.factor_count(); ++i)
        c[static_cast<std::size_t>(i)] = factor_exp(m.factor(i), base.coord(i), v[i]);
    return Element(m, {c.data(), static_cast<std::size_t>(m.factor_count())});
}

double tangent_norm(const Manifold& m, const Tangent& v) {
    if (m.factor_count() == 1) return std::fabs(v[0]);
    double sum = 0.0;
    for (int i = 0; i < m.factor_count(); ++i) sum += m.weight(i) * v[i] * v[i];
    return std::sqrt(sum);
}

Mat3 representation(const Element& g) {
    const Manifold& m = g.manifold();
    Mat3 r = mat3_identity();
    for (int i = 0; i < m.factor_count(); ++i) {
        const Factor& f = m.factor(i);
        Mat3 fm = mat3_identity();
        switch (f.kind) {
            case FactorKind::SO2: {
                const double th = g.coord(i);
                const double c = std::cos(th), s = std::sin(th);
                fm = {c, -s, 0, s, c, 0, 0, 0, 1};
                break;
            }
            case FactorKind::Cyclic: {
                const double th = kTwoPi * g.coord(i) / static_cast<double>(f.order);
                const double c = std::cos(th), s = std::sin(th);
                fm = {c, -s, 0, s, c, 0, 0, 0, 1};
                break;
            }
            case FactorKind::LogScale: {
                const double s = std::exp(g.coord(i));
                fm = {s, 0, 0, 0, s, 0, 0, 0, 1};
                break;
            }
        }
        r = mat3_mul(r, fm);
    }
    return r;
}

std::string to_string(const Element& g) {
    std::string out = "(";
    for (int i = 0; i < g.manifold().factor_count(); ++i) {
        if (i) out += ", ";
        out += fmt_double(g.coord(i));
    }
    return out + ")";
}

}  // namespace galign
