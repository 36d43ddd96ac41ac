// galign -- command-line front end for the group re-alignment library:
// synthetic dataset generation, bootstrapped alignment runs, statistical
// verification suites, rotation/scale robustness grids and SVG plots.
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error,
//             3 verification failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "galign/bootstrap.hpp"
#include "galign/classifier.hpp"
#include "galign/config.hpp"
#include "galign/io.hpp"
#include "galign/svg.hpp"
#include "galign/util.hpp"
#include "galign/verify.hpp"

namespace {

using namespace galign;

struct CliState {
    RunConfig cfg;
    std::string config_path;
    bool no_plot = false;
};

// Registers the override flags shared by the run-style subcommands. Values
// land in `cfg` only for flags that were actually passed, on top of any
// --config file.
void add_common_options(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "config file (flat key = value lines)");
    cmd->add_option("--seed", st.cfg.seed, "master seed; all randomness derives from it");
    cmd->add_option("--workers", st.cfg.workers, "worker threads (never affects results)");
    cmd->add_option("--out", st.cfg.out_dir, "output directory (default: $GALIGN_OUT or '.')");
    cmd->add_flag("--no-plot", st.no_plot, "skip SVG emission");
    cmd->add_option("--dataset", st.cfg.dataset, "dataset file path");
    cmd->add_option("--manifold", st.cfg.manifold, "manifold spec, e.g. so2 or so2*logscale:0.8:1.25");
    cmd->add_option("--classes", st.cfg.classes, "number of classes");
    cmd->add_option("--per-class", st.cfg.per_class, "specimens per class");
    cmd->add_option("--pose", st.cfg.pose, "pose distribution spec, e.g. vonmises:0:2");
    cmd->add_option("--shape-points", st.cfg.shape_points, "points per shape");
    cmd->add_option("--shape-jitter", st.cfg.shape_jitter, "per-specimen canonical shape jitter");
    cmd->add_option("--class-similarity", st.cfg.class_similarity,
                    "shared structure across class shapes, in [0, 1)");
    cmd->add_option("--alpha", st.cfg.alpha, "update fraction per step");
    cmd->add_option("--interval", st.cfg.interval, "template training passes between steps");
    cmd->add_option("--steps", st.cfg.steps, "re-alignment steps");
    cmd->add_option("--selection", st.cfg.selection, "toploss | random");
    cmd->add_option("--canonicalizer", st.cfg.canonicalizer,
                    "oracle | identity | noisy:<kappa>[:<bias>] | template[:<temp>[:<rate>]]");
    cmd->add_option("--beta", st.cfg.beta, "constant relative improvement (tunes the noisy scorer)");
    cmd->add_option("--grid", st.cfg.grid, "canonicalization grid resolution");
    cmd->add_option("--rotation-order", st.cfg.rotation_order, "probe grid rotation count");
    cmd->add_option("--scales", st.cfg.scales, "probe grid scale factors, comma separated");
    cmd->add_option("--template-in", st.cfg.template_in, "saved template state for the template scorer");
}

// --config is parsed first, then explicit flags win. CLI11 already filled
// st.cfg with flag values, so re-apply them after loading the file.
RunConfig resolve_config(const CLI::App* cmd, CliState& st) {
    if (st.config_path.empty()) {
        RunConfig check = RunConfig::parse_text(st.cfg.serialize());  // field validation
        if (st.no_plot) check.plot = false;
        return check;
    }
    RunConfig base = RunConfig::parse_file(st.config_path);
    const RunConfig& flags = st.cfg;
    auto passed = [&](const std::string& name) { return cmd->count(name) > 0; };
    if (passed("--seed")) base.seed = flags.seed;
    if (passed("--workers")) base.workers = flags.workers;
    if (passed("--out")) base.out_dir = flags.out_dir;
    if (passed("--dataset")) base.dataset = flags.dataset;
    if (passed("--manifold")) base.manifold = flags.manifold;
    if (passed("--classes")) base.classes = flags.classes;
    if (passed("--per-class")) base.per_class = flags.per_class;
    if (passed("--pose")) base.pose = flags.pose;
    if (passed("--shape-points")) base.shape_points = flags.shape_points;
    if (passed("--shape-jitter")) base.shape_jitter = flags.shape_jitter;
    if (passed("--class-similarity")) base.class_similarity = flags.class_similarity;
    if (passed("--alpha")) base.alpha = flags.alpha;
    if (passed("--interval")) base.interval = flags.interval;
    if (passed("--steps")) base.steps = flags.steps;
    if (passed("--selection")) base.selection = flags.selection;
    if (passed("--canonicalizer")) base.canonicalizer = flags.canonicalizer;
    if (passed("--beta")) base.beta = flags.beta;
    if (passed("--grid")) base.grid = flags.grid;
    if (passed("--rotation-order")) base.rotation_order = flags.rotation_order;
    if (passed("--scales")) base.scales = flags.scales;
    if (passed("--template-in")) base.template_in = flags.template_in;
    RunConfig check = RunConfig::parse_text(base.serialize());
    if (st.no_plot) check.plot = false;
    return check;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return cfg.resolved_out_dir() + "/" + name;
}

Canonicalizer build_canonicalizer(const RunConfig& cfg, const Manifold& m) {
    Canonicalizer canon = Canonicalizer::parse(m, cfg.canonicalizer);
    canon.seed = RandomStream::derive(cfg.seed, 0xca9011, 0);
    if (canon.kind == CanonicalizerKind::Template && !cfg.template_in.empty())
        canon.shape_template = read_template_state(cfg.template_in);
    return canon;
}

int cmd_generate(const RunConfig& cfg) {
    DatasetSpec spec(PoseDistribution::parse(Manifold::parse(cfg.manifold), cfg.pose));
    spec.num_classes = cfg.classes;
    spec.per_class = cfg.per_class;
    spec.shape_seed = cfg.seed;
    spec.shape_points = cfg.shape_points;
    spec.shape_jitter = cfg.shape_jitter;
    spec.class_similarity = cfg.class_similarity;
    const Dataset d = generate_dataset(spec);

    const std::string path = cfg.dataset.empty() ? out_path(cfg, "dataset.txt") : cfg.dataset;
    write_dataset(d, path);
    write_text_file(out_path(cfg, "generate.config.txt"), cfg.serialize());

    nlohmann::ordered_json manifest;
    manifest["format"] = "galign-dataset-manifest v1";
    manifest["seed"] = cfg.seed;
    manifest["manifold"] = d.manifold.spec_string();
    manifest["pose"] = cfg.pose;
    manifest["classes"] = d.num_classes;
    manifest["specimens"] = d.specimens.size();
    write_text_file(path + ".manifest.json", manifest.dump(2) + "\n");

    std::cout << "wrote " << d.specimens.size() << " specimens to " << path << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw ConfigError("simulate needs a dataset (--dataset or config)");
    Dataset d = read_dataset(cfg.dataset);
    Canonicalizer canon = build_canonicalizer(cfg, d.manifold);
    if (cfg.beta && canon.kind != CanonicalizerKind::Noisy)
        throw ConfigError("beta control requires a noisy canonicalizer");

    BootstrapConfig bcfg = cfg.bootstrap();
    const Trajectory traj = run_bootstrap(d, bcfg, canon);

    write_trajectory_csv(traj, out_path(cfg, "trajectory.csv"));
    write_text_file(out_path(cfg, "simulate.config.txt"), cfg.serialize());

    nlohmann::ordered_json manifest = run_manifest(cfg, traj);
    std::optional<LambdaFit> fit;
    const auto sigma2 = traj.sigma2_series();
    int positive = 0;
    for (double v : sigma2)
        if (v > 0.0) ++positive;
    if (positive >= 3) {
        fit = estimate_lambda(sigma2);
        manifest["lambda_hat"] = fit->lambda_hat;
        manifest["lambda_fit_r2"] = fit->r_squared;
    }
    if (cfg.beta) manifest["lambda_theory"] = contraction_rate(cfg.alpha, *cfg.beta);
    write_text_file(out_path(cfg, "run.json"), manifest.dump(2) + "\n");

    if (canon.kind == CanonicalizerKind::Template)
        write_template_state(canon.shape_template, out_path(cfg, "template.txt"));

    if (cfg.plot) {
        std::vector<svg::Series> series;
        svg::Series measured;
        measured.label = "measured sigma^2";
        for (const auto& r : traj.steps) {
            measured.x.push_back(static_cast<double>(r.step));
            measured.y.push_back(r.sigma2);
        }
        series.push_back(measured);
        std::vector<std::string> annotations;
        if (fit) annotations.push_back("lambda_hat=" + fmt_double(fit->lambda_hat));
        if (cfg.beta) {
            const double lambda = contraction_rate(cfg.alpha, *cfg.beta);
            svg::Series theory;
            theory.label = "theory lambda^t";
            theory.color = "#c9475e";
            theory.dashed = true;
            const double s0 = traj.steps.front().sigma2;
            for (const auto& r : traj.steps) {
                theory.x.push_back(static_cast<double>(r.step));
                theory.y.push_back(s0 * std::pow(lambda, static_cast<double>(r.step)));
            }
            series.push_back(theory);
            annotations.push_back("lambda_theory=" + fmt_double(lambda));
        }
        write_text_file(out_path(cfg, "sigma2.svg"),
                        svg::line_chart("pose variance per step", "step", "sigma^2", series, true,
                                        annotations));
    }

    std::cout << "steps recorded: " << traj.steps.size() << " (" << traj.stop_reason
              << "), sigma2: " << fmt_double(traj.steps.front().sigma2) << " -> "
              << fmt_double(traj.steps.back().sigma2) << "\n";
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::vector<std::string>& suites, double drift_tol,
               double lambda_tol, double r2_min) {
    VerifyOptions opts;
    opts.seed = cfg.seed ? cfg.seed : opts.seed;
    opts.workers = cfg.workers;
    opts.drift_tol = drift_tol;
    opts.lambda_tol = lambda_tol;
    opts.r2_min = r2_min;

    const std::set<std::string> known = {"defs", "lemma1", "lemma2", "lemma3", "theorem1", "all"};
    for (const auto& s : suites)
        if (!known.count(s)) throw ConfigError("unknown verify suite '" + s + "'");

    std::vector<VerifyReport> reports;
    auto want = [&](const std::string& s) {
        return std::find(suites.begin(), suites.end(), s) != suites.end() ||
               std::find(suites.begin(), suites.end(), "all") != suites.end();
    };
    if (want("defs")) reports.push_back(verify_defs(opts));
    if (want("lemma1")) reports.push_back(verify_lemma1(opts));
    if (want("lemma2")) reports.push_back(verify_lemma2(opts));
    if (want("lemma3")) reports.push_back(verify_lemma3(opts));
    if (want("theorem1")) reports.push_back(verify_theorem1(opts));

    bool all_ok = true;
    for (const auto& rep : reports) {
        std::cout << rep.summary();
        write_text_file(out_path(cfg, "verify_" + rep.suite + ".json"), rep.to_json().dump(2) + "\n");
        all_ok = all_ok && rep.passed();
    }
    std::cout << (all_ok ? "verification passed" : "verification FAILED") << "\n";
    return all_ok ? 0 : 3;
}

int cmd_robustness(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw ConfigError("robustness needs a dataset (--dataset or config)");
    const Dataset d = read_dataset(cfg.dataset);
    const Canonicalizer canon = build_canonicalizer(cfg, d.manifold);
    if (canon.kind == CanonicalizerKind::Template && canon.shape_template.empty())
        throw ConfigError("template canonicalizer needs --template-in (a trained state)");

    const GroupGrid probe = evaluation_grid(d.manifold, cfg.rotation_order, cfg.scale_list());
    const GroupGrid canon_grid = make_grid(d.manifold, cfg.grid);

    std::vector<double> acc(probe.elements.size());
    for (std::size_t i = 0; i < probe.elements.size(); ++i)
        acc[i] = accuracy_under_transform(d, probe.elements[i], canon, canon_grid, cfg.workers,
                                          cfg.refine);

    std::ostringstream csv;
    csv << "# galign-robustness v1\n";
    csv << "cell,angle,scale,accuracy\n";
    for (std::size_t i = 0; i < probe.elements.size(); ++i) {
        const Element& g = probe.elements[i];
        const double angle = g.coord(0);
        const double scale = d.manifold.factor_count() > 1 ? std::exp(g.coord(1)) : 1.0;
        csv << i << "," << fmt_double(angle) << "," << fmt_double(scale) << "," << fmt_double(acc[i])
            << "\n";
    }
    write_text_file(out_path(cfg, "robustness.csv"), csv.str());
    write_text_file(out_path(cfg, "robustness.config.txt"), cfg.serialize());

    if (cfg.plot) {
        // One polar plot per scale: accuracy as radius over the rotation ring.
        std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_scale;
        for (std::size_t i = 0; i < probe.elements.size(); ++i) {
            const Element& g = probe.elements[i];
            const double scale = d.manifold.factor_count() > 1 ? std::exp(g.coord(1)) : 1.0;
            by_scale[scale].first.push_back(g.coord(0));
            by_scale[scale].second.push_back(acc[i]);
        }
        for (const auto& [scale, data] : by_scale) {
            const std::string name = "robustness_scale_" + fmt_double(scale) + ".svg";
            write_text_file(out_path(cfg, name),
                            svg::polar_chart("accuracy at scale " + fmt_double(scale), data.first,
                                             data.second));
        }
    }

    double mean_acc = 0.0;
    for (double a : acc) mean_acc += a;
    mean_acc /= static_cast<double>(acc.size());
    std::cout << "cells: " << acc.size() << ", mean accuracy: " << fmt_double(mean_acc) << "\n";
    return 0;
}

int cmd_frechet(const std::string& manifold_spec, const std::string& input, int oracle_grid) {
    const Manifold m = Manifold::parse(manifold_spec);
    std::vector<Element> elems;
    auto consume = [&](std::istream& in) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::vector<double> coords;
            std::stringstream ss(line);
            for (std::string tok; ss >> tok;) {
                std::stringstream cs(tok);
                std::string c;
                while (std::getline(cs, c, ',')) {
                    try {
                        coords.push_back(std::stod(c));
                    } catch (...) {
                        throw IoError("bad pose coordinate '" + c + "'");
                    }
                }
            }
            if (coords.empty()) continue;
            elems.emplace_back(m, coords);
        }
    };
    if (input == "-") {
        consume(std::cin);
    } else {
        std::istringstream is(read_text_file(input));
        consume(is);
    }
    if (elems.empty()) throw ConfigError("no poses given (file or stdin, one per line)");

    const WeightedPoseSample sample(elems);
    const FrechetSummary mean = frechet_mean(sample);
    std::cout << "n = " << sample.size() << "\n";
    std::cout << "mean = " << to_string(mean.mean) << "\n";
    std::cout << "variance = " << fmt_double(mean.variance) << "\n";
    std::cout << "converged = " << (mean.converged ? "true" : "false") << "\n";
    std::cout << "iterations = " << mean.iterations << "\n";
    if (oracle_grid > 0) {
        const FrechetSummary oracle = frechet_mean_oracle(sample, oracle_grid);
        std::cout << "oracle_mean = " << to_string(oracle.mean) << "\n";
        std::cout << "oracle_variance = " << fmt_double(oracle.variance) << "\n";
        std::cout << "mean_gap = " << fmt_double(geodesic_distance(mean.mean, oracle.mean)) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic re-alignment simulations on compact groups"};
    app.require_subcommand(1);

    CliState gen_st, sim_st, ver_st, rob_st;

    auto* generate = app.add_subcommand("generate", "generate a synthetic dataset");
    add_common_options(generate, gen_st);

    auto* simulate = app.add_subcommand("simulate", "run the re-alignment loop on a dataset");
    add_common_options(simulate, sim_st);

    auto* verify = app.add_subcommand("verify", "run statistical verification suites");
    std::vector<std::string> suites;
    double drift_tol = 5e-3, lambda_tol = 0.02, r2_min = 0.99;
    verify->add_option("suites", suites, "defs lemma1 lemma2 lemma3 theorem1 | all")->required();
    verify->add_option("--drift-tol", drift_tol, "drift tolerance override");
    verify->add_option("--lambda-tol", lambda_tol, "contraction rate tolerance override");
    verify->add_option("--r2-min", r2_min, "fit quality floor override");
    add_common_options(verify, ver_st);

    auto* robustness = app.add_subcommand("robustness", "accuracy over the rotation x scale grid");
    add_common_options(robustness, rob_st);

    auto* frechet = app.add_subcommand("frechet", "mean/variance of a pose list");
    std::string fr_manifold = "so2", fr_input = "-";
    int fr_oracle = 0;
    frechet->add_option("--manifold", fr_manifold, "manifold spec");
    frechet->add_option("--input", fr_input, "pose file, or '-' for stdin");
    frechet->add_option("--oracle-grid", fr_oracle, "also report the grid oracle at this resolution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    try {
        if (generate->parsed()) return cmd_generate(resolve_config(generate, gen_st));
        if (simulate->parsed()) return cmd_simulate(resolve_config(simulate, sim_st));
        if (verify->parsed())
            return cmd_verify(resolve_config(verify, ver_st), suites, drift_tol, lambda_tol, r2_min);
        if (robustness->parsed()) return cmd_robustness(resolve_config(robustness, rob_st));
        if (frechet->parsed()) return cmd_frechet(fr_manifold, fr_input, fr_oracle);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
