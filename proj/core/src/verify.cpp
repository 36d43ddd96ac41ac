#include "galign/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "galign/bootstrap.hpp"
#include "galign/classifier.hpp"
#include "galign/util.hpp"

namespace galign {

namespace {

VerifyCheck check(std::string name, double value, double threshold, const std::string& cmp,
                  std::string detail = "") {
    VerifyCheck c;
    c.name = std::move(name);
    c.value = value;
    c.threshold = threshold;
    c.comparison = cmp;
    c.detail = std::move(detail);
    if (cmp == "<")
        c.passed = value < threshold;
    else if (cmp == "<=")
        c.passed = value <= threshold;
    else if (cmp == ">=")
        c.passed = value >= threshold;
    else if (cmp == ">")
        c.passed = value > threshold;
    else
        c.passed = value == threshold;
    return c;
}

Manifold rotoscale() { return Manifold::parse("so2*logscale:0.8:1.25"); }

// Poses concentrated at the canonical mode and guaranteed to stay inside a
// geodesic ball of the given radius (rejection against the tail).
std::vector<Element> truncated_von_mises_poses(std::size_t n, double kappa, double center,
                                               double radius, RandomStream& rng) {
    std::vector<Element> out;
    out.reserve(n);
    while (out.size() < n) {
        const double theta = rng.von_mises(center, kappa);
        double d = std::fabs(theta - center);
        d = std::min(d, kTwoPi - d);
        if (d < radius) out.push_back(so2_element(theta));
    }
    return out;
}

Dataset centered_so2_dataset(std::size_t n, double kappa, double center, double radius,
                             std::uint64_t seed) {
    const Manifold m = Manifold::so2();
    DatasetSpec spec(PoseDistribution::parse(m, "delta:0"));
    spec.num_classes = 1;
    spec.per_class = static_cast<int>(n);
    spec.shape_seed = seed;
    Dataset d = generate_dataset(spec);
    RandomStream rng(RandomStream::derive(seed, 0xb0d1e5, 0));
    const auto poses = truncated_von_mises_poses(n, kappa, center, radius, rng);
    for (std::size_t i = 0; i < n; ++i) d.specimens[i].true_pose = poses[i];
    return d;
}

}  // namespace

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

nlohmann::ordered_json VerifyReport::to_json() const {
    nlohmann::ordered_json j;
    j["suite"] = suite;
    j["passed"] = passed();
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json jc;
        jc["name"] = c.name;
        jc["passed"] = c.passed;
        jc["value"] = c.value;
        jc["threshold"] = c.threshold;
        jc["comparison"] = c.comparison;
        if (!c.detail.empty()) jc["detail"] = c.detail;
        j["checks"].push_back(jc);
    }
    return j;
}

std::string VerifyReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.passed ? "[PASS] " : "[FAIL] ") << suite << "/" << c.name << ": " << fmt_double(c.value)
           << " " << c.comparison << " " << fmt_double(c.threshold);
        if (!c.detail.empty()) os << "  (" << c.detail << ")";
        os << "\n";
    }
    return os.str();
}

VerifyReport verify_defs(const VerifyOptions& opts) {
    VerifyReport rep;
    rep.suite = "defs";
    const Manifold m = rotoscale();

    // Exactness of the oracle on random orbits: the prediction for a
    // transformed canonical specimen is the transform itself, bit for bit.
    {
        RandomStream rng(RandomStream::derive(opts.seed, 1, 0));
        const PoseDistribution dist =
            PoseDistribution::parse(m, "uniform*uniform");
        int exact = 0;
        const int trials = 1000;
        for (int i = 0; i < trials; ++i) {
            Specimen base;
            base.id = i;
            base.canonical_shape = make_star_shape(rng, 12);
            base.true_pose = identity(m);
            base.accumulated_correction = identity(m);
            const Element g = dist.sample(rng);
            const Specimen moved = transformed(base, g);
            const Canonicalizer oracle = Canonicalizer::oracle(m);
            if (predicted_pose(oracle, moved) == g) ++exact;
        }
        rep.checks.push_back(check("oracle-exactness-count", exact, trials, "==",
                                   "predicted pose equals the applied transform, exact comparison"));
    }

    // Prediction constancy along orbits: the canonicalized classifier gives
    // the same label on all 51 probe-grid transforms of each specimen.
    {
        DatasetSpec spec(PoseDistribution::parse(m, "vonmises:0.4:3*normal:0:0.08"));
        spec.num_classes = 5;
        spec.per_class = 10;
        spec.shape_seed = RandomStream::derive(opts.seed, 2, 0);
        const Dataset d = generate_dataset(spec);
        const GroupGrid probe = evaluation_grid(m);
        const GroupGrid canon_grid = make_grid(m, 64);
        const Canonicalizer oracle = Canonicalizer::oracle(m);
        int consistent = 0, total = 0;
        for (const auto& x : d.specimens) {
            const int base_pred = toy_classify(x, oracle, d.class_shapes, canon_grid);
            bool all_equal = true;
            for (const auto& g : probe.elements) {
                if (toy_classify(transformed(x, g), oracle, d.class_shapes, canon_grid) != base_pred)
                    all_equal = false;
            }
            consistent += all_equal ? 1 : 0;
            ++total;
        }
        rep.checks.push_back(check("classifier-orbit-constancy", consistent, total, "==",
                                   "orbit cells: " + std::to_string(probe.elements.size())));
    }

    // Prediction constancy with the learned scorer: after a short training
    // run on a fine-grained family, at least 95% of a thousand specimens
    // classify identically on every probe-grid transform.
    {
        const Manifold so2 = Manifold::so2();
        DatasetSpec spec(PoseDistribution::parse(so2, "vonmises:0:3"));
        spec.num_classes = 10;
        spec.per_class = 100;
        spec.shape_seed = RandomStream::derive(opts.seed, 4, 0);
        spec.class_similarity = 0.7;
        Dataset d = generate_dataset(spec);
        Canonicalizer tmpl = Canonicalizer::template_scorer(so2, 0.05, 0.1);
        BootstrapConfig cfg;
        cfg.alpha = 0.05;
        cfg.interval = 5;
        cfg.steps = 10;
        cfg.seed = RandomStream::derive(opts.seed, 5, 0);
        cfg.workers = opts.workers;
        run_bootstrap(d, cfg, tmpl);

        const GroupGrid probe = evaluation_grid(so2);
        const GroupGrid canon_grid = make_grid(so2, 64);
        std::vector<int> constant(d.specimens.size(), 0);
        parallel_for(d.specimens.size(), opts.workers, [&](std::size_t i) {
            const Specimen& x = d.specimens[i];
            const int base = toy_classify(x, tmpl, d.class_shapes, canon_grid);
            bool all_equal = true;
            for (const auto& g : probe.elements)
                if (toy_classify(transformed(x, g), tmpl, d.class_shapes, canon_grid) != base)
                    all_equal = false;
            constant[i] = all_equal ? 1 : 0;
        });
        double frac = 0.0;
        for (int v : constant) frac += v;
        frac /= static_cast<double>(d.specimens.size());
        rep.checks.push_back(check("classifier-orbit-constancy-template", frac, 0.95, ">=",
                                   "trained scorer, 1000 specimens x 17 probe cells"));
    }

    // Scoring equivariance of the template scorer on point sets:
    // s(g, h.x) == s(h^-1 g, x) up to matrix round-off.
    {
        RandomStream rng(RandomStream::derive(opts.seed, 3, 0));
        const PoseDistribution dist = PoseDistribution::parse(m, "uniform*uniform");
        Canonicalizer tmpl = Canonicalizer::template_scorer(m, 0.05);
        const PointSet anchor = make_star_shape(rng, 12);
        tmpl.shape_template = anchor;
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            Specimen x;
            x.id = i;
            x.canonical_shape = make_star_shape(rng, 12);
            x.true_pose = dist.sample(rng);
            x.accumulated_correction = identity(m);
            const Element g = dist.sample(rng);
            const Element h = dist.sample(rng);
            const double lhs = score(tmpl, g, transformed(x, h));
            const double rhs = score(tmpl, compose(inverse(h), g), x);
            worst = std::max(worst, std::fabs(lhs - rhs));
        }
        rep.checks.push_back(check("scoring-equivariance-max-abs", worst, 1e-9, "<",
                                   "500 random (g, h, x) triples"));
    }
    return rep;
}

VerifyReport verify_lemma1(const VerifyOptions& opts) {
    VerifyReport rep;
    rep.suite = "lemma1";

    // Identical components: every term reproduces the input variance and
    // both drift terms vanish.
    {
        RandomStream rng(RandomStream::derive(opts.seed, 10, 0));
        std::vector<Element> elems;
        for (int i = 0; i < 400; ++i) elems.push_back(so2_element(rng.von_mises(1.0, 4.0)));
        const WeightedPoseSample s(elems);
        const auto dec = mixture_decomposition(s, s, 0.5);
        const double sigma2 = frechet_mean(s).variance;
        rep.checks.push_back(check("identical-components-drift", dec.drift_kept + dec.drift_updated,
                                   1e-12, "<"));
        rep.checks.push_back(check("identical-components-residual", std::fabs(dec.residual), 1e-12, "<"));
        rep.checks.push_back(
            check("identical-components-variance-delta", std::fabs(dec.sigma2_next - sigma2), 1e-12, "<"));
    }

    // Two symmetric clouds sharing one mean: drift and residual are
    // Monte-Carlo small.
    {
        RandomStream rng(RandomStream::derive(opts.seed, 11, 0));
        std::vector<Element> kept, updated;
        for (int i = 0; i < 10000; ++i) kept.push_back(so2_element(rng.von_mises(1.0, 6.0)));
        for (int i = 0; i < 10000; ++i) updated.push_back(so2_element(rng.von_mises(1.0, 40.0)));
        const auto dec = mixture_decomposition(WeightedPoseSample(kept), WeightedPoseSample(updated), 0.5);
        rep.checks.push_back(
            check("shared-mean-drift", dec.drift_kept + dec.drift_updated, 1e-3, "<", "n=10^4 per cloud"));
        rep.checks.push_back(check("shared-mean-residual", std::fabs(dec.residual), 1e-3, "<"));
    }

    // Separated components: drift terms are strictly positive and recompute
    // exactly from the component means.
    {
        RandomStream rng(RandomStream::derive(opts.seed, 12, 0));
        std::vector<Element> kept, updated;
        for (int i = 0; i < 4000; ++i) kept.push_back(so2_element(rng.von_mises(0.0, 30.0)));
        for (int i = 0; i < 4000; ++i) updated.push_back(so2_element(rng.von_mises(kPi / 2, 30.0)));
        const auto dec = mixture_decomposition(WeightedPoseSample(kept), WeightedPoseSample(updated), 0.5);
        const double dk = geodesic_distance(dec.mu_kept, dec.mu_next);
        const double du = geodesic_distance(dec.mu_updated, dec.mu_next);
        const double recompute_gap = std::fabs(dec.drift_kept - 0.5 * dk * dk) +
                                     std::fabs(dec.drift_updated - 0.5 * du * du);
        rep.checks.push_back(check("separated-drift-positive",
                                   std::min(dec.drift_kept, dec.drift_updated), 0.0, ">"));
        rep.checks.push_back(check("separated-drift-recompute-gap", recompute_gap, 1e-10, "<"));
    }

    // Flat regime: all pose mass inside a half-circle ball, one unbiased
    // re-alignment step; the correction residual vanishes and the five terms
    // sum to the measured mixture variance identically.
    {
        const std::size_t n = 10000;
        Dataset d = centered_so2_dataset(n, 8.0, 0.0, kPi / 2 * 0.98, RandomStream::derive(opts.seed, 13, 0));
        const Dataset before = d;
        Canonicalizer canon =
            Canonicalizer::noisy(d.manifold, 100.0, identity(d.manifold), RandomStream::derive(opts.seed, 14, 0));
        BootstrapConfig cfg;
        cfg.alpha = 0.1;
        cfg.selection = Selection::Random;
        cfg.seed = RandomStream::derive(opts.seed, 15, 0);
        cfg.workers = opts.workers;
        const GroupGrid grid = make_grid(d.manifold, 64);
        bootstrap_step(d, cfg, canon, grid);
        const StepAudit audit = audit_step(before, d, opts.drift_tol);

        double max_radius = 0.0;
        for (const auto& s : d.specimens)
            max_radius = std::max(max_radius, geodesic_distance(s.effective_pose(), audit.decomposition.mu_next));
        rep.checks.push_back(check("flat-regime-mass-radius", max_radius, kPi / 2, "<",
                                   "all mass inside the half-circle ball"));
        rep.checks.push_back(check("flat-regime-residual", std::fabs(audit.decomposition.residual),
                                   opts.residual_tol, "<", "n=10^4, unbiased step"));
        const auto& dec = audit.decomposition;
        const double closure = std::fabs(dec.sigma2_next - (dec.kept_term + dec.updated_term +
                                                            dec.drift_kept + dec.drift_updated +
                                                            dec.residual));
        rep.checks.push_back(check("five-term-closure", closure, 1e-10, "<"));
    }
    return rep;
}

VerifyReport verify_lemma2(const VerifyOptions& opts) {
    VerifyReport rep;
    rep.suite = "lemma2";
    const Manifold m = Manifold::so2();
    const std::size_t n = 10000;

    // Precondition: prediction error of the unbiased noisy canonicalizer
    // averages to the identity; the biased one averages to its bias.
    {
        Dataset d = centered_so2_dataset(n, 8.0, 1.0, kPi, RandomStream::derive(opts.seed, 20, 0));
        const Canonicalizer unbiased =
            Canonicalizer::noisy(m, 100.0, identity(m), RandomStream::derive(opts.seed, 21, 0));
        Canonicalizer biased =
            Canonicalizer::noisy(m, 100.0, so2_element(0.3), RandomStream::derive(opts.seed, 22, 0));
        std::vector<Element> err_unbiased, err_biased;
        for (const auto& x : d.specimens) {
            err_unbiased.push_back(compose(predicted_pose(unbiased, x), inverse(x.effective_pose())));
            err_biased.push_back(compose(predicted_pose(biased, x), inverse(x.effective_pose())));
        }
        const Element mean_u = frechet_mean(WeightedPoseSample(err_unbiased)).mean;
        const Element mean_b = frechet_mean(WeightedPoseSample(err_biased)).mean;
        rep.checks.push_back(check("unbiased-error-mean-distance",
                                   geodesic_distance(mean_u, identity(m)), 0.03, "<", "n=10^4"));
        rep.checks.push_back(check("biased-error-mean-distance",
                                   geodesic_distance(mean_b, so2_element(0.3)), 0.03, "<", "bias=0.3"));
    }

    // Single-step drift dichotomy at alpha = 0.5.
    double unbiased_drift = 0.0;
    {
        Dataset d = centered_so2_dataset(n, 8.0, 0.0, kPi / 2 * 0.98, RandomStream::derive(opts.seed, 23, 0));
        Dataset before = d;
        Canonicalizer canon =
            Canonicalizer::noisy(m, 100.0, identity(m), RandomStream::derive(opts.seed, 24, 0));
        BootstrapConfig cfg;
        cfg.alpha = 0.5;
        cfg.selection = Selection::Random;
        cfg.seed = RandomStream::derive(opts.seed, 25, 0);
        cfg.workers = opts.workers;
        const GroupGrid grid = make_grid(m, 64);
        bootstrap_step(d, cfg, canon, grid);
        const StepAudit audit = audit_step(before, d, opts.drift_tol);
        unbiased_drift = audit.decomposition.drift_kept + audit.decomposition.drift_updated;
        rep.checks.push_back(check("unbiased-step-drift", unbiased_drift, opts.drift_tol, "<", "n=10^4"));
    }
    {
        Dataset d = centered_so2_dataset(n, 8.0, 0.0, kPi / 2 * 0.98, RandomStream::derive(opts.seed, 26, 0));
        Dataset before = d;
        Canonicalizer canon =
            Canonicalizer::noisy(m, 100.0, so2_element(0.3), RandomStream::derive(opts.seed, 27, 0));
        BootstrapConfig cfg;
        cfg.alpha = 0.5;
        cfg.selection = Selection::Random;
        cfg.seed = RandomStream::derive(opts.seed, 28, 0);
        cfg.workers = opts.workers;
        const GroupGrid grid = make_grid(m, 64);
        bootstrap_step(d, cfg, canon, grid);
        const StepAudit audit = audit_step(before, d, opts.drift_tol);
        rep.checks.push_back(check("biased-step-drift-ratio",
                                   audit.decomposition.drift_updated / std::max(unbiased_drift, 1e-300),
                                   10.0, ">", "drift_updated vs combined unbiased drift"));
        rep.checks.push_back(check("biased-step-flagged", audit.drift_flagged ? 1.0 : 0.0, 1.0, "=="));
    }

    // Trajectory-level negative control: a systematic bias pulls the mean
    // toward the biased attractor (the inverse of the bias) over 50 steps.
    {
        Dataset d = centered_so2_dataset(2000, 8.0, 1.0, kPi, RandomStream::derive(opts.seed, 29, 0));
        Canonicalizer canon =
            Canonicalizer::noisy(m, 100.0, so2_element(0.3), RandomStream::derive(opts.seed, 30, 0));
        BootstrapConfig cfg;
        cfg.alpha = 0.5;
        cfg.steps = 50;
        cfg.selection = Selection::Random;
        cfg.seed = RandomStream::derive(opts.seed, 31, 0);
        cfg.workers = opts.workers;
        Trajectory traj = run_bootstrap(d, cfg, canon);
        const Element attractor = inverse(so2_element(0.3));
        const double d0 = geodesic_distance(traj.steps.front().mu, attractor);
        const double dT = geodesic_distance(traj.steps.back().mu, attractor);
        rep.checks.push_back(check("biased-trajectory-mean-attraction", dT, d0, "<",
                                   "d(mu_T, attractor) vs d(mu_0, attractor), T=50, alpha=0.5"));
    }
    return rep;
}

VerifyReport verify_lemma3(const VerifyOptions& opts) {
    VerifyReport rep;
    rep.suite = "lemma3";
    const Manifold m = Manifold::so2();

    const std::size_t n = 2000;
    Dataset d = centered_so2_dataset(n, 2.0, 0.0, kPi, RandomStream::derive(opts.seed, 40, 0));
    Canonicalizer canon = Canonicalizer::noisy(m, 100.0, identity(m), RandomStream::derive(opts.seed, 41, 0));
    BootstrapConfig cfg;
    cfg.alpha = 0.1;
    cfg.steps = 100;
    cfg.selection = Selection::Random;
    cfg.seed = RandomStream::derive(opts.seed, 42, 0);
    cfg.workers = opts.workers;
    const GroupGrid grid = make_grid(m, cfg.grid_resolution);

    // The loop is driven step by step so the pre-step moments are in hand:
    // after a few updates the pose population is a heavy-tailed cohort
    // mixture, and the sampling band for subset variances must come from the
    // measured fourth moment, not a normal approximation.
    double worst_excess = 0.0;
    int dichotomy_violations = 0;
    int dichotomy_decided = 0;
    double sigma2_initial = 0.0, sigma2_final = 0.0;
    for (int t = 0; t < cfg.steps; ++t) {
        const FrechetSummary cur = frechet_mean(pose_sample(d));
        const double sigma2_t = cur.variance;
        if (t == 0) sigma2_initial = sigma2_t;
        double mu4 = 0.0;
        for (const auto& s : d.specimens) {
            const double dist = geodesic_distance(s.effective_pose(), cur.mean);
            mu4 += dist * dist * dist * dist;
        }
        mu4 /= static_cast<double>(n);

        canon.epoch = d.step_t;
        const StepRecord r = bootstrap_step(d, cfg, canon, grid);
        sigma2_final = r.sigma2;
        const double k = static_cast<double>(r.n_updated);
        const double alpha_eff = k / static_cast<double>(n);

        // Recurrence accounting: the measured-vs-predicted gap is covered by
        // the drift terms, the residual and the kept-subset sampling error,
        // all measured within the same step.
        const double predicted = predict_variance(sigma2_t, r.sigma2_updated, alpha_eff);
        const double bound = r.drift_kept + r.drift_updated + std::fabs(r.residual) +
                             (1.0 - alpha_eff) * std::fabs(r.sigma2_kept - sigma2_t) + 1e-12;
        worst_excess = std::max(worst_excess, std::fabs(r.sigma2 - predicted) - bound);

        // Sign dichotomy, decided only outside the 4-sigma Monte-Carlo band:
        // kept-subset subsampling noise (kurtosis-aware) plus the updated
        // subset's own estimator noise plus the measured drift/residual.
        const double kept_se =
            std::sqrt(std::max(mu4 - sigma2_t * sigma2_t, 0.0) * k / (static_cast<double>(n) * (static_cast<double>(n) - k)));
        const double updated_se = r.sigma2_updated * std::sqrt(2.0 / k);
        const double band = 4.0 * ((1.0 - alpha_eff) * kept_se + alpha_eff * updated_se) +
                            r.drift_kept + r.drift_updated + std::fabs(r.residual);
        if (alpha_eff * std::fabs(r.sigma2_updated - sigma2_t) > band) {
            ++dichotomy_decided;
            const bool contracted = r.sigma2 < sigma2_t;
            const bool predicted_contraction = r.sigma2_updated < sigma2_t;
            if (contracted != predicted_contraction) ++dichotomy_violations;
        }
    }
    rep.checks.push_back(check("recurrence-accounting-worst-excess", worst_excess, 0.0, "<=",
                               "|measured - predicted| minus the per-step bound, 100 steps"));
    rep.checks.push_back(check("contraction-dichotomy-violations", dichotomy_violations, 0, "==",
                               std::to_string(dichotomy_decided) + " steps outside the 4-sigma band"));
    rep.checks.push_back(check("variance-decreased-overall", sigma2_final, sigma2_initial, "<"));
    return rep;
}

VerifyReport verify_theorem1(const VerifyOptions& opts) {
    VerifyReport rep;
    rep.suite = "theorem1";
    const Manifold m = Manifold::so2();
    const double alphas[] = {0.05, 0.1, 0.5};
    const double betas[] = {0.25, 0.5, 0.75};

    for (double alpha : alphas) {
        for (double beta : betas) {
            const std::uint64_t pair_seed =
                RandomStream::derive(opts.seed, static_cast<std::uint64_t>(alpha * 1000),
                                     static_cast<std::uint64_t>(beta * 1000));
            Dataset d = centered_so2_dataset(2000, 2.0, 0.0, kPi, pair_seed);
            Canonicalizer canon =
                Canonicalizer::noisy(m, 100.0, identity(m), RandomStream::derive(pair_seed, 1, 0));
            BootstrapConfig cfg;
            cfg.alpha = alpha;
            cfg.steps = 60;
            cfg.selection = Selection::Random;
            cfg.beta_control = beta;
            cfg.seed = RandomStream::derive(pair_seed, 2, 0);
            cfg.workers = opts.workers;
            Trajectory traj = run_bootstrap(d, cfg, canon);

            const auto sigma2 = traj.sigma2_series();
            // Fit only above the relative noise floor; far below it the
            // concentration tuning saturates.
            int end = static_cast<int>(sigma2.size());
            for (int t = 0; t < static_cast<int>(sigma2.size()); ++t) {
                if (sigma2[static_cast<std::size_t>(t)] < 1e-9 * sigma2[0]) {
                    end = t;
                    break;
                }
            }
            const LambdaFit fit = estimate_lambda(sigma2, std::pair<int, int>{0, end});
            const double lambda = contraction_rate(alpha, beta);
            std::ostringstream tag;
            tag << "alpha=" << alpha << ",beta=" << beta;
            rep.checks.push_back(check("rate-error-" + tag.str(), std::fabs(fit.lambda_hat - lambda),
                                       opts.lambda_tol, "<=",
                                       "lambda_hat=" + fmt_double(fit.lambda_hat) +
                                           " lambda=" + fmt_double(lambda)));
            rep.checks.push_back(
                check("fit-r2-" + tag.str(), fit.r_squared, opts.r2_min, ">=",
                      "window=[" + std::to_string(fit.t_begin) + "," + std::to_string(fit.t_end) + ")"));
        }
    }
    return rep;
}

std::vector<VerifyReport> verify_all(const VerifyOptions& opts) {
    return {verify_defs(opts), verify_lemma1(opts), verify_lemma2(opts), verify_lemma3(opts),
            verify_theorem1(opts)};
}

}  // namespace galign
