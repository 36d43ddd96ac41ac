#include "galign/frechet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace galign {

namespace {

constexpr double kTieWindow = 1e-12;

double wrap_to_pi(double delta) {
    double v = std::fmod(delta, kTwoPi);
    if (v <= -kPi) v += kTwoPi;
    if (v > kPi) v -= kTwoPi;
    return v;
}

double factor_dist(const Factor& f, double a, double b) {
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

// Weighted mean squared distance along one factor (metric weight omitted:
// it rescales the functional without moving the argmin).
double factor_functional(const Factor& f, double c, std::span<const double> coords,
                         std::span<const double> w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const double d = factor_dist(f, c, coords[i]);
        acc += w[i] * d * d;
    }
    return acc;
}

struct FactorMeanResult {
    double coord = 0.0;
    int iterations = 0;
    bool converged = true;
};

FactorMeanResult karcher_circle(double start, std::span<const double> coords, std::span<const double> w,
                                double tol, int max_iter) {
    FactorMeanResult r;
    double mu = start;
    for (int it = 1; it <= max_iter; ++it) {
        double t = 0.0;
        for (std::size_t i = 0; i < coords.size(); ++i) t += w[i] * wrap_to_pi(coords[i] - mu);
        r.iterations = it;
        if (std::fabs(t) < tol) {
            r.coord = canonical_angle(mu);
            return r;
        }
        mu = canonical_angle(mu + t);
    }
    r.coord = canonical_angle(mu);
    r.converged = false;
    return r;
}

// Exact initializer for the circular factor. The global minimizer of the
// circular Fréchet functional is the plain weighted mean of the sample in
// one of n "charts" (cuts of the circle between consecutive sorted angles):
// in the minimizer's own chart all wrapped representatives lie within pi of
// it, so its chart value equals the true functional, while every other
// chart value can only overestimate. Scanning all charts with prefix sums
// is O(n log n) and finds the global basin exactly -- coarse grids miss
// narrow basins once samples are large and dispersed.
double circle_cut_scan(std::span<const double> coords, std::span<const double> w) {
    const std::size_t n = coords.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return coords[a] < coords[b]; });

    double s1 = 0.0, s2 = 0.0;  // weighted first/second moments in the base chart
    for (std::size_t i = 0; i < n; ++i) {
        s1 += w[i] * coords[i];
        s2 += w[i] * coords[i] * coords[i];
    }

    std::vector<std::pair<double, double>> candidates;  // (functional value, mean)
    candidates.reserve(n);
    double fmin = std::numeric_limits<double>::infinity();
    double wk = 0.0, sxk = 0.0;  // prefix weight / weighted angle of shifted points
    for (std::size_t k = 0; k < n; ++k) {
        // chart k: the k smallest angles are unwrapped by +2*pi
        const double mean = s1 + kTwoPi * wk;
        const double second = s2 + 2.0 * kTwoPi * sxk + kTwoPi * kTwoPi * wk;
        const double f = second - mean * mean;
        double mu = canonical_angle(mean);
        if (kTwoPi - mu < 1e-14) mu = 0.0;  // a hair below the wrap is the basin at 0
        candidates.emplace_back(f, mu);
        fmin = std::min(fmin, f);
        wk += w[order[k]];
        sxk += w[order[k]] * coords[order[k]];
    }
    double best_mu = std::numeric_limits<double>::infinity();
    for (const auto& [f, mu] : candidates)
        if (f <= fmin + kTieWindow) best_mu = std::min(best_mu, mu);
    return best_mu;
}

FactorMeanResult circle_mean(const Factor& f, std::span<const double> coords, std::span<const double> w,
                             const FrechetOptions& opts, std::optional<double> init_coord) {
    if (init_coord) return karcher_circle(*init_coord, coords, w, opts.tol, opts.max_iter);

    const double start = circle_cut_scan(coords, w);
    FactorMeanResult r = karcher_circle(start, coords, w, opts.tol, opts.max_iter);

    // The Karcher polish moves by less than a tolerance; if rounding nudged
    // a tied minimizer past its twin, keep the smaller representative.
    const double f_start = factor_functional(f, start, coords, w);
    const double f_polished = factor_functional(f, r.coord, coords, w);
    if (f_start <= f_polished + kTieWindow && start < r.coord) r.coord = start;
    return r;
}

FactorMeanResult lattice_mean(const Factor& f, std::span<const double> coords, std::span<const double> w) {
    // Finite factor: the minimizer is found exactly by enumeration;
    // ascending order makes the first strict minimum the tie-break winner.
    std::vector<double> fv(static_cast<std::size_t>(f.order));
    double min_f = std::numeric_limits<double>::infinity();
    for (int k = 0; k < f.order; ++k) {
        fv[static_cast<std::size_t>(k)] = factor_functional(f, static_cast<double>(k), coords, w);
        min_f = std::min(min_f, fv[static_cast<std::size_t>(k)]);
    }
    FactorMeanResult r;
    for (int k = 0; k < f.order; ++k) {
        if (fv[static_cast<std::size_t>(k)] <= min_f + kTieWindow) {
            r.coord = static_cast<double>(k);
            break;
        }
    }
    r.iterations = 1;
    return r;
}

FactorMeanResult flat_mean(std::span<const double> coords, std::span<const double> w) {
    FactorMeanResult r;
    double m = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) m += w[i] * coords[i];
    r.coord = m;
    r.iterations = 1;
    return r;
}

}  // namespace

WeightedPoseSample::WeightedPoseSample(std::vector<Element> elements, std::vector<double> weights)
    : elements_(std::move(elements)), weights_(std::move(weights)) {
    if (elements_.empty()) throw std::invalid_argument("pose sample must be non-empty");
    manifold_ = elements_.front().manifold();
    for (const auto& e : elements_)
        if (!(e.manifold() == manifold_))
            throw std::invalid_argument("pose sample elements live on different manifolds");
    if (weights_.empty()) {
        weights_.assign(elements_.size(), 1.0 / static_cast<double>(elements_.size()));
        return;
    }
    if (weights_.size() != elements_.size())
        throw std::invalid_argument("weight count must match element count");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument("weights must sum to 1 (within 1e-9)");
    for (double& w : weights_) w /= total;
}

double frechet_functional(const WeightedPoseSample& sample, const Element& g) {
    double acc = 0.0;
    const auto elems = sample.elements();
    const auto w = sample.weights();
    for (std::size_t i = 0; i < elems.size(); ++i) {
        const double d = geodesic_distance(g, elems[i]);
        acc += w[i] * d * d;
    }
    return acc;
}

double frechet_variance(const WeightedPoseSample& sample, const Element& mean) {
    return frechet_functional(sample, mean);
}

FrechetSummary frechet_mean(const WeightedPoseSample& sample, const FrechetOptions& opts) {
    const Manifold& m = sample.manifold();
    const std::size_t n = sample.size();

    std::array<double, Manifold::kMaxFactors> mean_coords{};
    FrechetSummary out;
    out.converged = true;

    std::vector<double> coords(n);
    for (int fi = 0; fi < m.factor_count(); ++fi) {
        for (std::size_t i = 0; i < n; ++i) coords[i] = sample.elements()[i].coord(fi);
        const Factor& f = m.factor(fi);
        FactorMeanResult r;
        switch (f.kind) {
            case FactorKind::SO2: {
                std::optional<double> init;
                if (opts.init) init = opts.init->coord(fi);
                r = circle_mean(f, coords, sample.weights(), opts, init);
                break;
            }
            case FactorKind::Cyclic: r = lattice_mean(f, coords, sample.weights()); break;
            case FactorKind::LogScale: r = flat_mean(coords, sample.weights()); break;
        }
        mean_coords[static_cast<std::size_t>(fi)] = r.coord;
        out.iterations = std::max(out.iterations, r.iterations);
        out.converged = out.converged && r.converged;
    }

    out.mean = Element(m, {mean_coords.data(), static_cast<std::size_t>(m.factor_count())});
    out.variance = frechet_variance(sample, out.mean);
    return out;
}

FrechetSummary frechet_mean_oracle(const WeightedPoseSample& sample, int grid_points) {
    if (grid_points < 8) throw std::invalid_argument("oracle grid must have at least 8 points");
    const Manifold& m = sample.manifold();

    std::vector<std::vector<double>> grids(static_cast<std::size_t>(m.factor_count()));
    for (int fi = 0; fi < m.factor_count(); ++fi) {
        const Factor& f = m.factor(fi);
        auto& g = grids[static_cast<std::size_t>(fi)];
        switch (f.kind) {
            case FactorKind::SO2:
                for (int j = 0; j < grid_points; ++j) g.push_back(kTwoPi * j / grid_points);
                break;
            case FactorKind::Cyclic:
                for (int k = 0; k < f.order; ++k) g.push_back(static_cast<double>(k));
                break;
            case FactorKind::LogScale:
                if (f.log_max - f.log_min < 1e-300) {
                    g.push_back(f.log_min);
                } else {
                    for (int j = 0; j < grid_points; ++j)
                        g.push_back(f.log_min + (f.log_max - f.log_min) * j / (grid_points - 1));
                }
                break;
        }
    }

    // Odometer over the cartesian grid in ascending lexicographic order, so
    // the first strict minimum is the smallest-coordinate tie-break winner.
    const int nf = m.factor_count();
    std::vector<std::size_t> idx(static_cast<std::size_t>(nf), 0);
    std::array<double, Manifold::kMaxFactors> c{};
    FrechetSummary best;
    double best_f = std::numeric_limits<double>::infinity();
    for (;;) {
        for (int fi = 0; fi < nf; ++fi)
            c[static_cast<std::size_t>(fi)] = grids[static_cast<std::size_t>(fi)][idx[static_cast<std::size_t>(fi)]];
        const Element e(m, {c.data(), static_cast<std::size_t>(nf)});
        double acc = 0.0;
        const auto elems = sample.elements();
        const auto w = sample.weights();
        for (std::size_t i = 0; i < elems.size(); ++i) {
            const double d = geodesic_distance(e, elems[i]);
            acc += w[i] * d * d;
        }
        if (acc < best_f) {
            best_f = acc;
            best.mean = e;
        }
        int fi = nf - 1;
        for (; fi >= 0; --fi) {
            if (++idx[static_cast<std::size_t>(fi)] < grids[static_cast<std::size_t>(fi)].size()) break;
            idx[static_cast<std::size_t>(fi)] = 0;
        }
        if (fi < 0) break;
    }
    best.variance = best_f;
    best.converged = true;
    best.iterations = grid_points;
    return best;
}

MixtureDecomposition mixture_decomposition(const WeightedPoseSample& kept,
                                           const WeightedPoseSample& updated, double alpha) {
    if (!(kept.manifold() == updated.manifold()))
        throw std::invalid_argument("mixture components live on different manifolds");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");

    const FrechetSummary mk = frechet_mean(kept);
    const FrechetSummary mu = frechet_mean(updated);

    std::vector<Element> elems(kept.elements().begin(), kept.elements().end());
    elems.insert(elems.end(), updated.elements().begin(), updated.elements().end());
    std::vector<double> w;
    w.reserve(elems.size());
    for (double wi : kept.weights()) w.push_back((1.0 - alpha) * wi);
    for (double wi : updated.weights()) w.push_back(alpha * wi);
    const WeightedPoseSample mixture(std::move(elems), std::move(w));
    const FrechetSummary mn = frechet_mean(mixture);

    MixtureDecomposition d;
    d.alpha = alpha;
    d.mu_kept = mk.mean;
    d.mu_updated = mu.mean;
    d.mu_next = mn.mean;
    d.sigma2_kept = mk.variance;
    d.sigma2_updated = mu.variance;
    d.sigma2_next = mn.variance;
    d.kept_term = (1.0 - alpha) * mk.variance;
    d.updated_term = alpha * mu.variance;
    const double dk = geodesic_distance(mk.mean, mn.mean);
    const double du = geodesic_distance(mu.mean, mn.mean);
    d.drift_kept = (1.0 - alpha) * dk * dk;
    d.drift_updated = alpha * du * du;
    d.residual = d.sigma2_next - d.kept_term - d.updated_term - d.drift_kept - d.drift_updated;
    return d;
}

}  // namespace galign
