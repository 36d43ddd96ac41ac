#include "galign/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "galign/pose_distribution.hpp"
#include "galign/random.hpp"
#include "galign/util.hpp"

namespace galign {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> select_top_loss(std::span<const double> loss,
                                         std::span<const Specimen> specimens, std::size_t k) {
    std::vector<std::size_t> order(loss.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (loss[a] != loss[b]) return loss[a] > loss[b];
        return specimens[a].id < specimens[b].id;
    });
    order.resize(k);
    return order;
}

std::vector<std::size_t> select_random(std::size_t n, std::size_t k, RandomStream& rng) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace

std::vector<double> Trajectory::sigma2_series() const {
    std::vector<double> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.sigma2);
    return out;
}

StepRecord bootstrap_step(Dataset& d, const BootstrapConfig& cfg, Canonicalizer& canon,
                          const GroupGrid& grid) {
    const std::size_t n = d.specimens.size();
    if (n == 0) throw std::invalid_argument("bootstrap step on an empty dataset");
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");

    // Predictions and losses are pure per specimen given the canonicalizer
    // snapshot, so they can run on any number of workers.
    std::vector<Element> pred(n);
    std::vector<double> loss(n);
    const Canonicalizer snapshot = canon;
    parallel_for(n, cfg.workers, [&](std::size_t i) {
        pred[i] = canonicalize(snapshot, d.specimens[i], grid, cfg.refine);
        loss[i] = alignment_loss(snapshot, d.specimens[i], grid);
    });

    const std::size_t k = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(n), std::ceil(cfg.alpha * static_cast<double>(n))));

    std::vector<std::size_t> selected;
    if (cfg.selection == Selection::TopLoss) {
        selected = select_top_loss(loss, d.specimens, k);
    } else {
        RandomStream rng(RandomStream::derive(cfg.seed, 0x5e1ec7, d.step_t));
        selected = select_random(n, k, rng);
    }
    std::sort(selected.begin(), selected.end());

    std::vector<char> is_selected(n, 0);
    for (std::size_t i : selected) is_selected[i] = 1;

    StepRecord rec;
    rec.n_updated = static_cast<int>(k);
    for (std::size_t i : selected) {
        Specimen& s = d.specimens[i];
        s.accumulated_correction = compose(s.accumulated_correction, pred[i]);
        rec.updated_ids.push_back(s.id);
    }
    d.step_t += 1;
    rec.step = d.step_t;
    rec.mean_loss = std::accumulate(loss.begin(), loss.end(), 0.0) / static_cast<double>(n);

    std::vector<Element> kept_poses, updated_poses;
    kept_poses.reserve(n - k);
    updated_poses.reserve(k);
    for (std::size_t i = 0; i < n; ++i) {
        (is_selected[i] ? updated_poses : kept_poses).push_back(d.specimens[i].effective_pose());
    }
    const double alpha_eff = static_cast<double>(k) / static_cast<double>(n);

    if (kept_poses.empty()) {
        // alpha = 1: the whole dataset was re-aligned; there is no kept
        // component to decompose against.
        const FrechetSummary full = frechet_mean(WeightedPoseSample(std::move(updated_poses)));
        rec.mu = full.mean;
        rec.sigma2 = full.variance;
        rec.sigma2_updated = full.variance;
        rec.sigma2_kept = 0.0;
        rec.drift_kept = 0.0;
        rec.drift_updated = 0.0;
        rec.residual = 0.0;
        return rec;
    }

    const MixtureDecomposition dec =
        mixture_decomposition(WeightedPoseSample(std::move(kept_poses)),
                              WeightedPoseSample(std::move(updated_poses)), alpha_eff);
    rec.mu = dec.mu_next;
    rec.sigma2 = dec.sigma2_next;
    rec.sigma2_updated = dec.sigma2_updated;
    rec.sigma2_kept = dec.sigma2_kept;
    rec.drift_kept = dec.drift_kept;
    rec.drift_updated = dec.drift_updated;
    rec.residual = dec.residual;
    return rec;
}

Trajectory run_bootstrap(Dataset& d, const BootstrapConfig& cfg, Canonicalizer& canon) {
    if (cfg.steps < 0) throw std::invalid_argument("step count must be >= 0");
    if (cfg.beta_control && !(*cfg.beta_control > 0.0 && *cfg.beta_control < 1.0))
        throw std::invalid_argument("beta must lie in (0, 1)");
    if (cfg.beta_control && canon.kind != CanonicalizerKind::Noisy)
        throw std::invalid_argument("beta control requires a noisy canonicalizer");

    const GroupGrid grid = make_grid(d.manifold, cfg.grid_resolution);

    Trajectory traj;
    traj.manifold = d.manifold;

    const FrechetSummary initial = frechet_mean(pose_sample(d));
    StepRecord first;
    first.step = d.step_t;
    first.mu = initial.mean;
    first.sigma2 = initial.variance;
    first.sigma2_updated = kNaN;
    first.sigma2_kept = kNaN;
    first.drift_kept = kNaN;
    first.drift_updated = kNaN;
    first.residual = kNaN;
    first.mean_loss = kNaN;
    traj.steps.push_back(std::move(first));

    for (int t = 0; t < cfg.steps; ++t) {
        const double sigma2_t = traj.steps.back().sigma2;
        if (sigma2_t < cfg.variance_floor) {
            traj.stop_reason = "variance_floor";
            break;
        }
        if (cfg.beta_control) {
            // Realize the constant relative improvement: tune the noise so
            // the re-aligned subset's variance tracks beta * sigma_t^2.
            canon.noise_kappa = std::min(kappa_for_variance(*cfg.beta_control * sigma2_t), 1e12);
        }
        canon.epoch = d.step_t;
        for (int pass = 0; pass < cfg.interval; ++pass) template_pass(canon, d);
        traj.steps.push_back(bootstrap_step(d, cfg, canon, grid));
    }
    return traj;
}

double predict_variance(double sigma2, double sigma2_updated, double alpha) {
    if (!(sigma2 >= 0.0 && sigma2_updated >= 0.0)) throw std::invalid_argument("variances must be >= 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    return (1.0 - alpha) * sigma2 + alpha * sigma2_updated;
}

double contraction_rate(double alpha, double beta) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    return 1.0 - alpha * (1.0 - beta);
}

LambdaFit estimate_lambda(std::span<const double> sigma2, std::optional<std::pair<int, int>> window) {
    int begin = 0;
    int end = static_cast<int>(sigma2.size());
    if (window) {
        begin = std::max(0, window->first);
        end = std::min(end, window->second);
    }
    LambdaFit fit;
    fit.t_begin = begin;
    int usable_end = begin;
    for (int t = begin; t < end; ++t) {
        if (!(sigma2[static_cast<std::size_t>(t)] > 0.0)) {
            fit.truncated = true;
            break;
        }
        usable_end = t + 1;
    }
    fit.t_end = usable_end;
    const int n = usable_end - begin;
    if (n < 3) throw std::invalid_argument("lambda fit needs at least 3 positive-variance steps");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int t = begin; t < usable_end; ++t) {
        const double x = static_cast<double>(t);
        const double y = std::log(sigma2[static_cast<std::size_t>(t)]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    fit.lambda_hat = std::exp(slope);

    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (int t = begin; t < usable_end; ++t) {
        const double y = std::log(sigma2[static_cast<std::size_t>(t)]);
        const double f = intercept + slope * t;
        ss_res += (y - f) * (y - f);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    fit.r_squared = ss_tot < 1e-24 ? 1.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

StepAudit audit_step(const Dataset& before, const Dataset& after, double drift_tol) {
    if (before.specimens.size() != after.specimens.size())
        throw std::invalid_argument("audit requires equal-cardinality states");

    std::vector<Element> kept, updated;
    for (std::size_t i = 0; i < before.specimens.size(); ++i) {
        const Specimen& a = before.specimens[i];
        const Specimen& b = after.specimens[i];
        if (a.id != b.id) throw std::invalid_argument("audit requires aligned specimen order");
        if (a.accumulated_correction == b.accumulated_correction)
            kept.push_back(b.effective_pose());
        else
            updated.push_back(b.effective_pose());
    }
    if (updated.empty() || kept.empty())
        throw std::invalid_argument("audit needs both a kept and an updated subset");

    StepAudit audit;
    audit.n_updated = static_cast<int>(updated.size());
    const double alpha =
        static_cast<double>(updated.size()) / static_cast<double>(before.specimens.size());
    audit.decomposition = mixture_decomposition(WeightedPoseSample(std::move(kept)),
                                                WeightedPoseSample(std::move(updated)), alpha);
    audit.drift_tolerance = drift_tol;
    audit.drift_flagged =
        audit.decomposition.drift_kept + audit.decomposition.drift_updated > drift_tol;
    return audit;
}

}  // namespace galign
