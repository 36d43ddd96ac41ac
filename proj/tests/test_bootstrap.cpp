#include <doctest.h>

#include <cmath>
#include <set>

#include "galign/bootstrap.hpp"
#include "galign/io.hpp"

using namespace galign;

namespace {

Dataset make_so2_dataset(const std::string& pose, int classes, int per_class, std::uint64_t seed) {
    DatasetSpec spec(PoseDistribution::parse(Manifold::so2(), pose));
    spec.num_classes = classes;
    spec.per_class = per_class;
    spec.shape_seed = seed;
    return generate_dataset(spec);
}

}  // namespace

TEST_SUITE_BEGIN("bootstrap");

TEST_CASE("variance recurrence arithmetic") {
    CHECK(predict_variance(1.0, 0.25, 0.2) == doctest::Approx(0.85).epsilon(1e-15));
    CHECK(predict_variance(0.7, 0.7, 0.3) == doctest::Approx(0.7));
    CHECK(predict_variance(0.9, 0.0, 1.0) == 0.0);
    CHECK_THROWS_AS(predict_variance(-1.0, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(predict_variance(1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("contraction rate arithmetic and domain") {
    CHECK(contraction_rate(0.5, 0.5) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(contraction_rate(0.1, 0.25) == doctest::Approx(0.925).epsilon(1e-15));
    CHECK(contraction_rate(1e-9, 0.5) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(contraction_rate(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(contraction_rate(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(contraction_rate(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("rate estimation on synthetic series") {
    std::vector<double> geometric;
    for (int t = 0; t < 40; ++t) geometric.push_back(2.0 * std::pow(0.9, t));
    const LambdaFit fit = estimate_lambda(geometric);
    CHECK(std::fabs(fit.lambda_hat - 0.9) < 1e-12);
    CHECK(fit.r_squared == doctest::Approx(1.0));

    std::vector<double> constant(20, 0.4);
    const LambdaFit flat = estimate_lambda(constant);
    CHECK(flat.lambda_hat == doctest::Approx(1.0));
    CHECK(flat.r_squared == 1.0);

    std::vector<double> with_zero = {1.0, 0.9, 0.8, 0.0, 0.7};
    const LambdaFit cut = estimate_lambda(with_zero);
    CHECK(cut.truncated);
    CHECK(cut.t_end == 3);

    std::vector<double> short_series = {1.0, 0.5};
    CHECK_THROWS_AS(estimate_lambda(short_series), std::invalid_argument);
}

TEST_CASE("ceiling rule selects at least one specimen") {
    Dataset d = make_so2_dataset("vonmises:0:2", 5, 10, 3);  // |D| = 50
    Canonicalizer canon = Canonicalizer::oracle(d.manifold);
    BootstrapConfig cfg;
    cfg.alpha = 0.01;
    const GroupGrid grid = make_grid(d.manifold, 64);
    const StepRecord rec = bootstrap_step(d, cfg, canon, grid);
    CHECK(rec.n_updated == 1);
    CHECK(rec.updated_ids.size() == 1);
}

TEST_CASE("oracle with full update collapses the variance in one step") {
    Dataset d = make_so2_dataset("uniform", 2, 100, 5);
    Canonicalizer canon = Canonicalizer::oracle(d.manifold);
    BootstrapConfig cfg;
    cfg.alpha = 1.0;
    cfg.steps = 1;
    const Trajectory traj = run_bootstrap(d, cfg, canon);
    CHECK(traj.steps.front().sigma2 > 2.0);
    CHECK(traj.steps.back().sigma2 < 1e-12);
    CHECK(traj.steps.back().n_updated == 200);
}

TEST_CASE("unselected specimens are bitwise untouched") {
    Dataset d = make_so2_dataset("vonmises:1:1", 4, 25, 7);
    const Dataset before = d;
    Canonicalizer canon = Canonicalizer::oracle(d.manifold);
    BootstrapConfig cfg;
    cfg.alpha = 0.1;
    const GroupGrid grid = make_grid(d.manifold, 64);
    const StepRecord rec = bootstrap_step(d, cfg, canon, grid);

    std::set<std::int64_t> updated(rec.updated_ids.begin(), rec.updated_ids.end());
    CHECK(updated.size() == 10);
    for (std::size_t i = 0; i < d.specimens.size(); ++i) {
        if (updated.count(d.specimens[i].id)) continue;
        CHECK(d.specimens[i].accumulated_correction == before.specimens[i].accumulated_correction);
        CHECK(d.specimens[i].true_pose == before.specimens[i].true_pose);
        CHECK(d.specimens[i].canonical_shape == before.specimens[i].canonical_shape);
    }
    CHECK(d.specimens.size() == before.specimens.size());
    CHECK(d.step_t == before.step_t + 1);
}

TEST_CASE("oracle corrections restore canonical coordinates") {
    Dataset d = make_so2_dataset("vonmises:2:3", 2, 20, 11);
    Canonicalizer canon = Canonicalizer::oracle(d.manifold);
    BootstrapConfig cfg;
    cfg.alpha = 1.0;
    const GroupGrid grid = make_grid(d.manifold, 64);
    bootstrap_step(d, cfg, canon, grid);
    for (const auto& s : d.specimens) {
        const PointSet obs = s.observed();
        for (std::size_t i = 0; i < obs.size(); ++i) {
            CHECK(std::fabs(obs[i].x - s.canonical_shape[i].x) < 1e-12);
            CHECK(std::fabs(obs[i].y - s.canonical_shape[i].y) < 1e-12);
        }
    }
}

TEST_CASE("oracle partial updates follow the variance recurrence") {
    Dataset d = make_so2_dataset("vonmises:0:2", 4, 500, 67);
    Canonicalizer canon = Canonicalizer::oracle(d.manifold);
    BootstrapConfig cfg;
    cfg.alpha = 0.2;
    cfg.steps = 10;
    cfg.selection = Selection::Random;
    cfg.seed = 71;
    const Trajectory traj = run_bootstrap(d, cfg, canon);
    for (std::size_t t = 1; t < traj.steps.size(); ++t) {
        const StepRecord& r = traj.steps[t];
        CHECK(r.sigma2_updated < 1e-25);  // the oracle zeroes the re-aligned subset
        const double alpha_eff = static_cast<double>(r.n_updated) / 2000.0;
        const double predicted = predict_variance(traj.steps[t - 1].sigma2, r.sigma2_updated, alpha_eff);
        CHECK(std::fabs(r.sigma2 - predicted) < 0.15 * traj.steps[t - 1].sigma2 + 1e-9);
    }
}

TEST_CASE("loss ties are broken by ascending id") {
    Dataset d = make_so2_dataset("vonmises:0:2", 2, 25, 73);
    Canonicalizer canon = Canonicalizer::identity_baseline(d.manifold);  // constant losses
    BootstrapConfig cfg;
    cfg.alpha = 0.2;
    const GroupGrid grid = make_grid(d.manifold, 64);
    const StepRecord rec = bootstrap_step(d, cfg, canon, grid);
    REQUIRE(rec.updated_ids.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(rec.updated_ids[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("runs are deterministic and worker-count independent") {
    for (auto selection : {Selection::TopLoss, Selection::Random}) {
        std::vector<std::string> csvs;
        for (int workers : {1, 3}) {
            Dataset d = make_so2_dataset("vonmises:0:2", 3, 40, 13);
            Canonicalizer canon =
                Canonicalizer::noisy(d.manifold, 50.0, identity(d.manifold), 99);
            BootstrapConfig cfg;
            cfg.alpha = 0.05;
            cfg.steps = 12;
            cfg.selection = selection;
            cfg.seed = 21;
            cfg.workers = workers;
            csvs.push_back(trajectory_csv(run_bootstrap(d, cfg, canon)));
        }
        CHECK(csvs[0] == csvs[1]);
    }
}

TEST_CASE("zero steps records only the initial state") {
    Dataset d = make_so2_dataset("vonmises:0:2", 2, 10, 17);
    Canonicalizer canon = Canonicalizer::oracle(d.manifold);
    BootstrapConfig cfg;
    cfg.steps = 0;
    const Trajectory traj = run_bootstrap(d, cfg, canon);
    CHECK(traj.steps.size() == 1);
    CHECK(traj.steps[0].step == 0);
    CHECK(std::isnan(traj.steps[0].mean_loss));
}

TEST_CASE("random-selection unbiased noise contracts the variance") {
    Dataset d = make_so2_dataset("vonmises:0:2", 4, 125, 19);
    Canonicalizer canon = Canonicalizer::noisy(d.manifold, 100.0, identity(d.manifold), 23);
    BootstrapConfig cfg;
    cfg.alpha = 0.1;
    cfg.steps = 50;
    cfg.selection = Selection::Random;
    cfg.seed = 29;
    const Trajectory traj = run_bootstrap(d, cfg, canon);
    CHECK(traj.steps.back().sigma2 < 0.25 * traj.steps.front().sigma2);
    int contractions = 0;
    for (std::size_t t = 1; t < traj.steps.size(); ++t)
        if (traj.steps[t].sigma2 < traj.steps[t - 1].sigma2) ++contractions;
    CHECK(contractions >= 40);  // monotone up to Monte-Carlo jitter
}

TEST_CASE("variance floor stops the loop early") {
    Dataset d = make_so2_dataset("vonmises:0:2", 2, 50, 31);
    Canonicalizer canon = Canonicalizer::oracle(d.manifold);
    BootstrapConfig cfg;
    cfg.alpha = 1.0;
    cfg.steps = 10;
    const Trajectory traj = run_bootstrap(d, cfg, canon);
    CHECK(traj.stop_reason == "variance_floor");
    CHECK(traj.steps.size() == 2);  // initial + the collapsing step
}

TEST_CASE("beta control realizes the requested per-step improvement") {
    Dataset d = make_so2_dataset("vonmises:0:2", 2, 250, 37);
    Canonicalizer canon = Canonicalizer::noisy(d.manifold, 1.0, identity(d.manifold), 41);
    BootstrapConfig cfg;
    cfg.alpha = 0.2;
    cfg.steps = 30;
    cfg.selection = Selection::Random;
    cfg.beta_control = 0.5;
    cfg.seed = 43;
    const Trajectory traj = run_bootstrap(d, cfg, canon);
    const LambdaFit fit = estimate_lambda(traj.sigma2_series());
    CHECK(std::fabs(fit.lambda_hat - contraction_rate(0.2, 0.5)) < 0.05);
}

TEST_CASE("step audit reproduces the engine's accounting") {
    Dataset d = make_so2_dataset("vonmises:0:3", 3, 100, 47);
    const Dataset before = d;
    Canonicalizer canon = Canonicalizer::noisy(d.manifold, 80.0, identity(d.manifold), 53);
    BootstrapConfig cfg;
    cfg.alpha = 0.25;
    cfg.selection = Selection::Random;
    cfg.seed = 59;
    const GroupGrid grid = make_grid(d.manifold, 64);
    const StepRecord rec = bootstrap_step(d, cfg, canon, grid);
    const StepAudit audit = audit_step(before, d);
    CHECK(audit.n_updated == rec.n_updated);
    CHECK(audit.decomposition.sigma2_next == doctest::Approx(rec.sigma2).epsilon(1e-12));
    CHECK(audit.decomposition.sigma2_updated == doctest::Approx(rec.sigma2_updated).epsilon(1e-12));
    CHECK(audit.decomposition.residual == doctest::Approx(rec.residual).epsilon(1e-9));
}

TEST_CASE("empty dataset is a hard error") {
    Dataset d = make_so2_dataset("vonmises:0:2", 1, 1, 61);
    d.specimens.clear();
    Canonicalizer canon = Canonicalizer::oracle(d.manifold);
    BootstrapConfig cfg;
    const GroupGrid grid = make_grid(d.manifold, 64);
    CHECK_THROWS_AS(bootstrap_step(d, cfg, canon, grid), std::invalid_argument);
}

TEST_SUITE_END();
