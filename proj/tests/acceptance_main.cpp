// Acceptance suite: every release gate runs here, one line per criterion.
// Exit status is the number of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "galign/bootstrap.hpp"
#include "galign/classifier.hpp"
#include "galign/io.hpp"
#include "galign/util.hpp"
#include "galign/verify.hpp"

#ifndef GALIGN_CLI_PATH
#define GALIGN_CLI_PATH "galign"
#endif

using namespace galign;
namespace fs = std::filesystem;

namespace {

// Regression floors pinned from the first green run of criterion 8
// (seed 20250810): variance ratio 0.09137, accuracy gain 0.79725. The floors
// leave headroom for floating-point drift only, not for regressions.
constexpr double kBenchVarianceRatioMax = 0.2;
constexpr double kBenchAccuracyGainMin = 0.6;

struct Outcome {
    int id;
    std::string name;
    bool passed;
    std::string detail;
    double seconds;
};

std::vector<Outcome> g_outcomes;

template <typename Fn>
void criterion(int id, const std::string& name, Fn fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out{id, name, false, "", 0.0};
    try {
        out.passed = fn(out.detail);
    } catch (const std::exception& e) {
        out.passed = false;
        out.detail = std::string("exception: ") + e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    g_outcomes.push_back(out);
    std::cout << (out.passed ? "[PASS]" : "[FAIL]") << " criterion " << id << " (" << name << "): "
              << out.detail << "  [" << fmt_double(out.seconds) << " s]" << std::endl;
}

const VerifyCheck* find_check(const VerifyReport& rep, const std::string& name) {
    for (const auto& c : rep.checks)
        if (c.name.rfind(name, 0) == 0) return &c;
    return nullptr;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GALIGN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("acceptance_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool same_file(const fs::path& a, const fs::path& b) {
    return read_text_file(a.string()) == read_text_file(b.string());
}

}  // namespace

int main() {
    const VerifyOptions opts;  // pinned seed and tolerances

    // Reports shared by several criteria.
    const VerifyReport defs = verify_defs(opts);
    const VerifyReport lemma1 = verify_lemma1(opts);
    const VerifyReport lemma2 = verify_lemma2(opts);

    criterion(1, "frechet-oracle-equivalence", [&](std::string& detail) {
        RandomStream rng(RandomStream::derive(opts.seed, 101, 0));
        const int grid = 3600;
        double worst_angle = 0.0, worst_gap = -1.0;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 3 + rng.uniform_index(498);
            std::vector<Element> elems;
            elems.reserve(n);
            if (trial % 2 == 0) {
                const double mu = rng.uniform(0.0, kTwoPi);
                const double kappa = rng.uniform(0.5, 50.0);
                for (std::size_t i = 0; i < n; ++i) elems.push_back(so2_element(rng.von_mises(mu, kappa)));
            } else {
                for (std::size_t i = 0; i < n; ++i) elems.push_back(so2_element(rng.uniform(0.0, kTwoPi)));
            }
            const WeightedPoseSample s(std::move(elems));
            const FrechetSummary k = frechet_mean(s);
            const FrechetSummary o = frechet_mean_oracle(s, grid);
            worst_angle = std::max(worst_angle, geodesic_distance(k.mean, o.mean));
            worst_gap = std::max(worst_gap, frechet_functional(s, k.mean) - o.variance);
            if (!k.converged) {
                detail = "karcher failed to converge on trial " + std::to_string(trial);
                return false;
            }
        }
        detail = "max|dAngle|=" + fmt_double(worst_angle) + " (tol " +
                 fmt_double(kTwoPi / grid + 1e-6) + "), max functional gap=" + fmt_double(worst_gap) +
                 " (tol 1e-8), 100 datasets";
        return worst_angle <= kTwoPi / grid + 1e-6 && worst_gap <= 1e-8;
    });

    criterion(2, "theorem1-rate-reproduction", [&](std::string& detail) {
        const auto t0 = std::chrono::steady_clock::now();
        const VerifyReport rep = verify_theorem1(opts);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        double worst = 0.0, worst_r2 = 1.0;
        for (const auto& c : rep.checks) {
            if (c.name.rfind("rate-error", 0) == 0) worst = std::max(worst, c.value);
            if (c.name.rfind("fit-r2", 0) == 0) worst_r2 = std::min(worst_r2, c.value);
        }
        detail = "9 (alpha,beta) pairs, |D|=2000, 60 steps: max|lambda_hat-lambda|=" +
                 fmt_double(worst) + " (tol 0.02), min r2=" + fmt_double(worst_r2) +
                 " (floor 0.99), runtime " + fmt_double(secs) + " s (budget 120)";
        return rep.passed() && secs < 120.0;
    });

    criterion(3, "lemma2-drift-dichotomy", [&](std::string& detail) {
        const auto* unbiased = find_check(lemma2, "unbiased-step-drift");
        const auto* ratio = find_check(lemma2, "biased-step-drift-ratio");
        const auto* attraction = find_check(lemma2, "biased-trajectory-mean-attraction");
        if (!unbiased || !ratio || !attraction) {
            detail = "missing checks in the lemma2 suite";
            return false;
        }
        detail = "unbiased drift " + fmt_double(unbiased->value) + " < 5e-3; biased ratio " +
                 fmt_double(ratio->value) + "x > 10x; mean attraction " +
                 fmt_double(attraction->value) + " < " + fmt_double(attraction->threshold);
        return lemma2.passed();
    });

    criterion(4, "lemma1-flat-accounting", [&](std::string& detail) {
        const auto* residual = find_check(lemma1, "flat-regime-residual");
        const auto* closure = find_check(lemma1, "five-term-closure");
        const auto* radius = find_check(lemma1, "flat-regime-mass-radius");
        if (!residual || !closure || !radius) {
            detail = "missing checks in the lemma1 suite";
            return false;
        }
        detail = "n=10^4 inside the half-circle: |residual|=" + fmt_double(residual->value) +
                 " < 5e-3; five-term closure " + fmt_double(closure->value) + " < 1e-10";
        return lemma1.passed();
    });

    criterion(5, "canonicalizer-definition-exactness", [&](std::string& detail) {
        const auto* exact = find_check(defs, "oracle-exactness-count");
        const auto* orbit = find_check(defs, "classifier-orbit-constancy");
        if (!exact || !orbit) {
            detail = "missing checks in the defs suite";
            return false;
        }
        detail = "oracle exact on " + fmt_double(exact->value) + "/1000 orbits; classifier constant on " +
                 fmt_double(orbit->value) + "/" + fmt_double(orbit->threshold) +
                 " specimens across 51 grid cells";
        return exact->passed && orbit->passed;
    });

    criterion(6, "one-step-collapse", [&](std::string& detail) {
        DatasetSpec spec(PoseDistribution::parse(Manifold::so2(), "uniform"));
        spec.num_classes = 4;
        spec.per_class = 250;
        spec.shape_seed = RandomStream::derive(opts.seed, 106, 0);
        Dataset d = generate_dataset(spec);
        Canonicalizer canon = Canonicalizer::oracle(d.manifold);
        BootstrapConfig cfg;
        cfg.alpha = 1.0;
        cfg.steps = 1;
        const Trajectory traj = run_bootstrap(d, cfg, canon);
        const double s0 = traj.steps.front().sigma2;
        const double s1 = traj.steps.back().sigma2;
        detail = "uniform poses sigma0^2=" + fmt_double(s0) + " (pi^2/3=" +
                 fmt_double(kPi * kPi / 3.0) + "), after one full oracle step sigma^2=" +
                 fmt_double(s1) + " (< 1e-12)";
        return std::fabs(s0 - kPi * kPi / 3.0) < 0.3 && s1 < 1e-12 && traj.steps.size() == 2;
    });

    criterion(7, "equivariant-scoring-contract", [&](std::string& detail) {
        const auto* equi = find_check(defs, "scoring-equivariance-max-abs");
        if (!equi) {
            detail = "missing check in the defs suite";
            return false;
        }
        detail = "max |s(g,hx) - s(h^-1 g, x)| = " + fmt_double(equi->value) +
                 " over 500 triples (tol 1e-9)";
        return equi->passed;
    });

    criterion(8, "end-to-end-improvement", [&](std::string& detail) {
        const Manifold m = Manifold::so2();
        DatasetSpec spec(PoseDistribution::parse(m, "vonmises:0:1"));
        spec.num_classes = 10;
        spec.per_class = 50;
        spec.shape_seed = RandomStream::derive(opts.seed, 108, 0);
        // fine-grained family: shared coarse structure, class-specific detail
        spec.class_similarity = 0.7;

        const GroupGrid probe = evaluation_grid(m, 17, {1.0});
        const GroupGrid canon_grid = make_grid(m, 64);

        auto off_identity_accuracy = [&](const Dataset& data, const Canonicalizer& c) {
            double acc = 0.0;
            int cells = 0;
            for (std::size_t i = 0; i < probe.elements.size(); ++i) {
                if (static_cast<int>(i) == probe.identity_index) continue;
                acc += accuracy_under_transform(data, probe.elements[i], c, canon_grid, 1);
                ++cells;
            }
            return acc / cells;
        };

        // baseline: the do-nothing canonicalizer leaves the dataset as-is
        Dataset baseline_data = generate_dataset(spec);
        const Canonicalizer baseline = Canonicalizer::identity_baseline(m);
        const double sigma2_initial = frechet_mean(pose_sample(baseline_data)).variance;
        const double baseline_acc = off_identity_accuracy(baseline_data, baseline);

        // template-scorer run at the pinned operating point
        Dataset data = generate_dataset(spec);
        Canonicalizer tmpl = Canonicalizer::template_scorer(m, 0.05, 0.1);
        tmpl.seed = RandomStream::derive(opts.seed, 109, 0);
        BootstrapConfig cfg;
        cfg.alpha = 0.01;
        cfg.interval = 5;
        cfg.steps = 80;
        cfg.selection = Selection::TopLoss;
        cfg.seed = RandomStream::derive(opts.seed, 110, 0);
        const Trajectory traj = run_bootstrap(data, cfg, tmpl);
        const double sigma2_final = traj.steps.back().sigma2;
        const double template_acc = off_identity_accuracy(data, tmpl);

        const double ratio = sigma2_final / sigma2_initial;
        const double gain = template_acc - baseline_acc;
        detail = "sigma^2 " + fmt_double(sigma2_initial) + " -> " + fmt_double(sigma2_final) +
                 " (ratio " + fmt_double(ratio) + ", floor " + fmt_double(kBenchVarianceRatioMax) +
                 "); off-identity accuracy " + fmt_double(baseline_acc) + " -> " +
                 fmt_double(template_acc) + " (gain " + fmt_double(gain) + ", floor " +
                 fmt_double(kBenchAccuracyGainMin) + ")";
        return sigma2_final < sigma2_initial && template_acc > baseline_acc &&
               ratio <= kBenchVarianceRatioMax && gain >= kBenchAccuracyGainMin;
    });

    criterion(9, "cli-determinism", [&](std::string& detail) {
        // Re-runs land in the same directory: every output byte must
        // reproduce; a different worker count may only change the config
        // echo, never a result file.
        const auto gen = fresh_dir("gen");
        const std::string gen_args =
            "generate --classes 4 --per-class 25 --pose vonmises:0:2 --seed 17 --out " + gen.string();
        if (run_cli(gen_args) != 0) {
            detail = "generate failed";
            return false;
        }
        const std::string dataset_bytes = read_text_file((gen / "dataset.txt").string());
        if (run_cli(gen_args) != 0 ||
            read_text_file((gen / "dataset.txt").string()) != dataset_bytes) {
            detail = "generate outputs differ between identical runs";
            return false;
        }

        const std::string dataset = (gen / "dataset.txt").string();
        const auto sim = fresh_dir("sim");
        const std::string sim_args = "simulate --dataset " + dataset +
                                     " --canonicalizer noisy:100 --selection random --alpha 0.1"
                                     " --steps 10 --seed 23 --out " + sim.string();
        if (run_cli(sim_args) != 0) {
            detail = "simulate failed";
            return false;
        }
        const std::string csv = read_text_file((sim / "trajectory.csv").string());
        const std::string json = read_text_file((sim / "run.json").string());
        const std::string svg = read_text_file((sim / "sigma2.svg").string());
        if (run_cli(sim_args) != 0) {
            detail = "simulate rerun failed";
            return false;
        }
        const bool csv_ok = read_text_file((sim / "trajectory.csv").string()) == csv;
        const bool json_ok = read_text_file((sim / "run.json").string()) == json;
        const bool svg_ok = read_text_file((sim / "sigma2.svg").string()) == svg;
        bool workers_ok = run_cli(sim_args + " --workers 4") == 0 &&
                          read_text_file((sim / "trajectory.csv").string()) == csv;

        const auto rob = fresh_dir("rob");
        const std::string rob_args = "robustness --dataset " + dataset +
                                     " --canonicalizer oracle --grid 24 --seed 29 --out " +
                                     rob.string();
        if (run_cli(rob_args) != 0) {
            detail = "robustness failed";
            return false;
        }
        const std::string rob_csv = read_text_file((rob / "robustness.csv").string());
        const bool rob_ok = run_cli(rob_args + " --workers 3") == 0 &&
                            read_text_file((rob / "robustness.csv").string()) == rob_csv;

        detail = std::string("csv ") + (csv_ok ? "identical" : "DIFFER") + ", json " +
                 (json_ok ? "identical" : "DIFFER") + ", svg " + (svg_ok ? "identical" : "DIFFER") +
                 ", robustness " + (rob_ok ? "identical" : "DIFFER") +
                 " across reruns and worker counts";
        return csv_ok && json_ok && svg_ok && workers_ok && rob_ok;
    });

    int failed = 0;
    for (const auto& o : g_outcomes)
        if (!o.passed) ++failed;
    std::cout << (failed == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << " ("
              << (g_outcomes.size() - failed) << "/" << g_outcomes.size() << " criteria)"
              << std::endl;
    return failed;
}
