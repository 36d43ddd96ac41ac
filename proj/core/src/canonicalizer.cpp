#include "galign/canonicalizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "galign/random.hpp"
#include "galign/util.hpp"

namespace galign {

namespace {

bool is_circular(FactorKind k) { return k == FactorKind::SO2 || k == FactorKind::Cyclic; }

Element draw_noise(const Canonicalizer& c, const Specimen& x) {
    RandomStream rng(RandomStream::derive(c.seed, static_cast<std::uint64_t>(x.id), c.epoch));
    std::array<double, Manifold::kMaxFactors> coords{};
    for (int i = 0; i < c.manifold.factor_count(); ++i) {
        const Factor& f = c.manifold.factor(i);
        if (is_circular(f.kind)) {
            coords[static_cast<std::size_t>(i)] = rng.von_mises(0.0, c.noise_kappa);
        } else {
            // Flat factor: match the circular concentration's small-noise
            // scale, sigma = 1/sqrt(kappa).
            coords[static_cast<std::size_t>(i)] = rng.normal() / std::sqrt(c.noise_kappa);
        }
    }
    return Element(c.manifold, {coords.data(), static_cast<std::size_t>(c.manifold.factor_count())});
}

const PointSet& template_for(const Canonicalizer& c, const Specimen& x) {
    if (c.per_class) {
        static const PointSet empty;
        const auto idx = static_cast<std::size_t>(x.class_label);
        return idx < c.class_shape_templates.size() ? c.class_shape_templates[idx] : empty;
    }
    return c.shape_template;
}

double template_score(const Canonicalizer& c, const Element& g, const Specimen& x) {
    const PointSet& tmpl = template_for(c, x);
    if (tmpl.empty()) return 0.0;  // untrained: constant energy
    const PointSet aligned = mat3_apply(representation(inverse(g)), x.observed());
    return chamfer_distance(aligned, tmpl);
}

// 1-D golden-section minimization; assumes a unimodal valley inside [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

std::vector<double> raw_scores(const Canonicalizer& c, const Specimen& x, const GroupGrid& grid) {
    std::vector<double> s(grid.elements.size());
    if (c.kind == CanonicalizerKind::Template) {
        for (std::size_t i = 0; i < grid.elements.size(); ++i) s[i] = template_score(c, grid.elements[i], x);
        return s;
    }
    if (c.kind == CanonicalizerKind::Identity) return s;
    // Analytic variants: one target pose per specimen, then plain distances.
    const Element target = predicted_pose(c, x);
    for (std::size_t i = 0; i < grid.elements.size(); ++i) {
        const double d = geodesic_distance(grid.elements[i], target);
        s[i] = d * d;
    }
    return s;
}

double neg_log_posterior_at(const std::vector<double>& s, double temperature, std::size_t at) {
    double s_min = s.front();
    for (double v : s) s_min = std::min(s_min, v);
    double z = 0.0;
    for (double v : s) z += std::exp(-(v - s_min) / temperature);
    return (s[at] - s_min) / temperature + std::log(z);
}

}  // namespace

Canonicalizer Canonicalizer::oracle(const Manifold& m) {
    Canonicalizer c;
    c.kind = CanonicalizerKind::Oracle;
    c.manifold = m;
    c.bias = identity(m);
    return c;
}

Canonicalizer Canonicalizer::noisy(const Manifold& m, double kappa, const Element& bias, std::uint64_t seed) {
    if (!(kappa > 0.0)) throw std::invalid_argument("noise concentration must be > 0");
    Canonicalizer c;
    c.kind = CanonicalizerKind::Noisy;
    c.manifold = m;
    c.noise_kappa = kappa;
    c.bias = bias;
    c.seed = seed;
    return c;
}

Canonicalizer Canonicalizer::template_scorer(const Manifold& m, double temperature, double ema_rate) {
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
    if (!(ema_rate > 0.0 && ema_rate <= 1.0)) throw std::invalid_argument("ema rate must lie in (0, 1]");
    Canonicalizer c;
    c.kind = CanonicalizerKind::Template;
    c.manifold = m;
    c.bias = identity(m);
    c.temperature = temperature;
    c.ema_rate = ema_rate;
    return c;
}

Canonicalizer Canonicalizer::identity_baseline(const Manifold& m) {
    Canonicalizer c;
    c.kind = CanonicalizerKind::Identity;
    c.manifold = m;
    c.bias = identity(m);
    return c;
}

Canonicalizer Canonicalizer::parse(const Manifold& m, const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.empty()) throw ConfigError("empty canonicalizer spec");
    auto num = [&](std::size_t i, double fallback) {
        if (i >= parts.size()) return fallback;
        try {
            return std::stod(parts[i]);
        } catch (...) {
            throw ConfigError("bad number in canonicalizer spec '" + spec + "'");
        }
    };
    if (parts[0] == "oracle") return oracle(m);
    if (parts[0] == "identity") return identity_baseline(m);
    if (parts[0] == "template") return template_scorer(m, num(1, 0.05), num(2, 0.1));
    if (parts[0] == "noisy") {
        if (parts.size() < 2) throw ConfigError("noisy canonicalizer needs a concentration");
        Element bias = identity(m);
        if (parts.size() >= 3) {
            std::vector<double> coords;
            std::stringstream cs(parts[2]);
            std::string tok;
            while (std::getline(cs, tok, ',')) {
                try {
                    coords.push_back(std::stod(tok));
                } catch (...) {
                    throw ConfigError("bad bias coordinate '" + tok + "'");
                }
            }
            if (coords.size() != static_cast<std::size_t>(m.factor_count()))
                throw ConfigError("bias coordinate count must match the manifold");
            bias = Element(m, coords);
        }
        try {
            return noisy(m, num(1, 0.0), bias, 0);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("canonicalizer spec '") + spec + "': " + e.what());
        }
    }
    throw ConfigError("unknown canonicalizer '" + parts[0] + "'");
}

std::string Canonicalizer::spec_string() const {
    switch (kind) {
        case CanonicalizerKind::Oracle: return "oracle";
        case CanonicalizerKind::Identity: return "identity";
        case CanonicalizerKind::Template:
            return "template:" + fmt_double(temperature) + ":" + fmt_double(ema_rate);
        case CanonicalizerKind::Noisy: {
            std::string out = "noisy:" + fmt_double(noise_kappa);
            bool nontrivial = false;
            for (int i = 0; i < manifold.factor_count(); ++i)
                if (bias.coord(i) != 0.0) nontrivial = true;
            if (nontrivial) {
                out += ':';
                for (int i = 0; i < manifold.factor_count(); ++i) {
                    if (i) out += ',';
                    out += fmt_double(bias.coord(i));
                }
            }
            return out;
        }
    }
    return "";
}

Element predicted_pose(const Canonicalizer& c, const Specimen& x) {
    switch (c.kind) {
        case CanonicalizerKind::Oracle: return x.effective_pose();
        case CanonicalizerKind::Identity: return identity(c.manifold);
        case CanonicalizerKind::Noisy:
            return compose(compose(draw_noise(c, x), c.bias), x.effective_pose());
        case CanonicalizerKind::Template:
            throw std::logic_error("template canonicalizer has no analytic pose; use canonicalize()");
    }
    return identity(c.manifold);
}

double score(const Canonicalizer& c, const Element& g, const Specimen& x) {
    if (c.kind == CanonicalizerKind::Template) return template_score(c, g, x);
    if (c.kind == CanonicalizerKind::Identity) return 0.0;
    const double d = geodesic_distance(g, predicted_pose(c, x));
    return d * d;
}

Element canonicalize(const Canonicalizer& c, const Specimen& x, const GroupGrid& grid, bool refine) {
    if (c.kind != CanonicalizerKind::Template) return predicted_pose(c, x);

    const std::vector<double> s = raw_scores(c, x, grid);
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] < s[best]) best = i;  // grid order makes first-min the tie-break winner

    Element g = grid.elements[best];
    if (!refine) return g;

    // Coordinate descent with golden-section refinement on each continuous
    // factor, bracketing one grid step around the current best.
    const Manifold& m = c.manifold;
    std::array<double, Manifold::kMaxFactors> coords{};
    for (int i = 0; i < m.factor_count(); ++i) coords[static_cast<std::size_t>(i)] = g.coord(i);

    std::array<double, Manifold::kMaxFactors> steps{};
    for (int i = 0; i < m.factor_count(); ++i) {
        const Factor& f = m.factor(i);
        double lo = std::numeric_limits<double>::infinity();
        if (f.kind == FactorKind::SO2) {
            // Infer the factor's grid pitch from distinct coordinate values.
            std::vector<double> vals;
            for (const auto& e : grid.elements) vals.push_back(e.coord(i));
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            lo = vals.size() > 1 ? kTwoPi / static_cast<double>(vals.size()) : kTwoPi;
        } else if (f.kind == FactorKind::LogScale) {
            std::vector<double> vals;
            for (const auto& e : grid.elements) vals.push_back(e.coord(i));
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            lo = 0.0;
            for (std::size_t j = 1; j < vals.size(); ++j) lo = std::max(lo, vals[j] - vals[j - 1]);
            if (lo == 0.0) lo = std::numeric_limits<double>::infinity();
        }
        steps[static_cast<std::size_t>(i)] = lo;
    }

    for (int sweep = 0; sweep < 2; ++sweep) {
        for (int i = 0; i < m.factor_count(); ++i) {
            const Factor& f = m.factor(i);
            if (f.kind == FactorKind::Cyclic) continue;
            const double step = steps[static_cast<std::size_t>(i)];
            if (!std::isfinite(step)) continue;
            auto eval = [&](double v) {
                std::array<double, Manifold::kMaxFactors> cc = coords;
                cc[static_cast<std::size_t>(i)] = v;
                return template_score(c, Element(m, {cc.data(), static_cast<std::size_t>(m.factor_count())}), x);
            };
            double center = coords[static_cast<std::size_t>(i)];
            double a = center - step, b = center + step;
            if (f.kind == FactorKind::LogScale) {
                a = std::max(a, f.log_min);
                b = std::min(b, f.log_max);
            }
            coords[static_cast<std::size_t>(i)] = golden_section(eval, a, b, 1e-6);
        }
    }
    return Element(m, {coords.data(), static_cast<std::size_t>(m.factor_count())});
}

std::vector<double> posterior(const Canonicalizer& c, const Specimen& x, const GroupGrid& grid) {
    if (!(c.temperature > 0.0)) throw std::invalid_argument("posterior needs temperature > 0");
    std::vector<double> s = raw_scores(c, x, grid);
    double s_min = s.front();
    for (double v : s) s_min = std::min(s_min, v);
    double z = 0.0;
    for (double& v : s) {
        v = std::exp(-(v - s_min) / c.temperature);
        z += v;
    }
    for (double& v : s) v /= z;
    return s;
}

double alignment_loss(const Canonicalizer& c, const Specimen& x, const GroupGrid& grid) {
    if (!(c.temperature > 0.0)) throw std::invalid_argument("alignment loss needs temperature > 0");
    const std::vector<double> s = raw_scores(c, x, grid);
    return neg_log_posterior_at(s, c.temperature, static_cast<std::size_t>(grid.identity_index));
}

double prior_loss(const Canonicalizer& c, std::span<const Specimen> batch, const GroupGrid& grid) {
    if (batch.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& x : batch) acc += alignment_loss(c, x, grid);
    return acc / static_cast<double>(batch.size());
}

void template_update(Canonicalizer& c, std::span<const PointSet> aligned_shapes,
                     std::span<const int> labels) {
    if (c.kind != CanonicalizerKind::Template)
        throw std::logic_error("template_update on a non-template canonicalizer");
    if (aligned_shapes.empty()) return;

    auto fold_into = [&](PointSet& tmpl, const PointSet& mean_shape) {
        if (tmpl.empty()) {
            tmpl = mean_shape;
        } else {
            if (tmpl.size() != mean_shape.size())
                throw std::invalid_argument("template and batch shapes have different point counts");
            for (std::size_t i = 0; i < tmpl.size(); ++i) {
                tmpl[i].x += c.ema_rate * (mean_shape[i].x - tmpl[i].x);
                tmpl[i].y += c.ema_rate * (mean_shape[i].y - tmpl[i].y);
            }
        }
        // Averaging rotated copies of a point set contracts it by the
        // rotation resultant; canonical forms are unit-disc normalized, so
        // the template estimate is kept in the same frame. This exactly
        // undoes the contraction and keeps the scorer scale-consistent.
        double max_r = 0.0;
        for (const auto& p : tmpl) max_r = std::max(max_r, std::hypot(p.x, p.y));
        if (max_r > 1e-12)
            for (auto& p : tmpl) {
                p.x /= max_r;
                p.y /= max_r;
            }
    };

    if (!c.per_class) {
        PointSet mean(aligned_shapes.front().size());
        for (const auto& shape : aligned_shapes) {
            if (shape.size() != mean.size())
                throw std::invalid_argument("aligned shapes have inconsistent point counts");
            for (std::size_t i = 0; i < mean.size(); ++i) {
                mean[i].x += shape[i].x;
                mean[i].y += shape[i].y;
            }
        }
        for (auto& p : mean) {
            p.x /= static_cast<double>(aligned_shapes.size());
            p.y /= static_cast<double>(aligned_shapes.size());
        }
        fold_into(c.shape_template, mean);
        return;
    }

    if (labels.size() != aligned_shapes.size())
        throw std::invalid_argument("per-class template update needs one label per shape");
    int max_label = 0;
    for (int l : labels) max_label = std::max(max_label, l);
    if (c.class_shape_templates.size() <= static_cast<std::size_t>(max_label))
        c.class_shape_templates.resize(static_cast<std::size_t>(max_label) + 1);
    for (int cls = 0; cls <= max_label; ++cls) {
        PointSet mean;
        std::size_t count = 0;
        for (std::size_t i = 0; i < aligned_shapes.size(); ++i) {
            if (labels[i] != cls) continue;
            if (mean.empty()) mean.assign(aligned_shapes[i].size(), Point2{});
            for (std::size_t j = 0; j < mean.size(); ++j) {
                mean[j].x += aligned_shapes[i][j].x;
                mean[j].y += aligned_shapes[i][j].y;
            }
            ++count;
        }
        if (count == 0) continue;
        for (auto& p : mean) {
            p.x /= static_cast<double>(count);
            p.y /= static_cast<double>(count);
        }
        fold_into(c.class_shape_templates[static_cast<std::size_t>(cls)], mean);
    }
}

void template_update(Canonicalizer& c, std::span<const Specimen> canonicalized_batch) {
    std::vector<PointSet> shapes;
    std::vector<int> labels;
    shapes.reserve(canonicalized_batch.size());
    for (const auto& x : canonicalized_batch) {
        shapes.push_back(x.observed());
        labels.push_back(x.class_label);
    }
    template_update(c, shapes, labels);
}

void template_pass(Canonicalizer& c, const Dataset& d) {
    if (c.kind != CanonicalizerKind::Template) return;
    template_update(c, d.specimens);
}

}  // namespace galign
