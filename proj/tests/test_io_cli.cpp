#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "galign/config.hpp"
#include "galign/util.hpp"
#include "galign/io.hpp"

using namespace galign;
namespace fs = std::filesystem;

#ifndef GALIGN_CLI_PATH
#define GALIGN_CLI_PATH "galign"
#endif

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GALIGN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("run config round-trips through its text form") {
    const std::string text =
        "seed = 42\nalpha = 0.25\nsteps = 9\ncanonicalizer = noisy:80:0.3\nbeta = 0.5\n"
        "pose = mixture:0.5~delta:0|0.5~delta:3.1\nselection = random\n";
    const RunConfig a = RunConfig::parse_text(text);
    const RunConfig b = RunConfig::parse_text(a.serialize());
    CHECK(a == b);
    CHECK(a.serialize() == b.serialize());
    CHECK(a.beta == 0.5);
    CHECK(b.selection_mode() == Selection::Random);
}

TEST_CASE("config errors carry the offending field") {
    CHECK_THROWS_WITH_AS(RunConfig::parse_text("bogus_key = 3\n"),
                         doctest::Contains("bogus_key"), ConfigError);
    CHECK_THROWS_WITH_AS(RunConfig::parse_text("alpha = very\n"), doctest::Contains("alpha"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(RunConfig::parse_text("alpha = 0\n"), doctest::Contains("alpha"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(RunConfig::parse_text("selection = best\n"),
                         doctest::Contains("selection"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_text("no separator\n"), ConfigError);
}

TEST_CASE("dataset files round-trip byte for byte") {
    DatasetSpec spec(PoseDistribution::parse(Manifold::parse("so2*logscale:0.8:1.25"),
                                             "vonmises:0.3:2*normal:0:0.1"));
    spec.num_classes = 3;
    spec.per_class = 7;
    spec.shape_seed = 99;
    const Dataset d = generate_dataset(spec);
    const auto dir = fresh_dir("dataset_roundtrip");
    write_dataset(d, (dir / "a.txt").string());
    const Dataset back = read_dataset((dir / "a.txt").string());
    write_dataset(back, (dir / "b.txt").string());
    CHECK(read_text_file((dir / "a.txt").string()) == read_text_file((dir / "b.txt").string()));
    CHECK(back.manifold == d.manifold);
    CHECK(back.specimens.size() == d.specimens.size());
    CHECK(back.specimens[5].true_pose == d.specimens[5].true_pose);
}

TEST_CASE("unknown file versions are rejected loudly") {
    const auto dir = fresh_dir("versions");
    write_text_file((dir / "t.csv").string(), "# galign-trajectory v9\nstep\n");
    CHECK_THROWS_AS(read_trajectory_csv((dir / "t.csv").string()), IoError);
    write_text_file((dir / "d.txt").string(), "galign-dataset v9\n");
    CHECK_THROWS_AS(read_dataset((dir / "d.txt").string()), IoError);
    CHECK_THROWS_AS(read_dataset((dir / "missing.txt").string()), IoError);
}

TEST_CASE("template state round-trips") {
    RandomStream rng(7);
    const PointSet shape = make_star_shape(rng, 12);
    const auto dir = fresh_dir("template_state");
    write_template_state(shape, (dir / "t.txt").string());
    CHECK(read_template_state((dir / "t.txt").string()) == shape);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("cli");

TEST_CASE("exit codes follow the contract") {
    const auto dir = fresh_dir("exit_codes");
    // 0: success
    CHECK(run_cli("generate --classes 2 --per-class 5 --seed 1 --out " + dir.string()) == 0);
    // 1: config error (bad field value)
    CHECK(run_cli("generate --selection best --out " + dir.string()) == 1);
    CHECK(run_cli("simulate --out " + dir.string()) == 1);  // no dataset given
    // 2: i/o error (missing output directory, missing dataset file)
    CHECK(run_cli("generate --classes 2 --per-class 5 --out " + dir.string() + "/absent") == 2);
    CHECK(run_cli("simulate --dataset " + dir.string() + "/nope.txt --out " + dir.string()) == 2);
    // 3: a verification suite pushed below an impossible tolerance
    CHECK(run_cli("verify lemma2 --drift-tol 1e-15 --out " + dir.string()) == 3);
    CHECK(run_cli("verify nonsense --out " + dir.string()) == 1);
}

TEST_CASE("generate twice gives identical bytes") {
    const auto d1 = fresh_dir("gen_a");
    const auto d2 = fresh_dir("gen_b");
    const std::string args = "generate --classes 4 --per-class 6 --pose vonmises:0:2 --seed 7 --out ";
    REQUIRE(run_cli(args + d1.string()) == 0);
    REQUIRE(run_cli(args + d2.string()) == 0);
    CHECK(read_text_file((d1 / "dataset.txt").string()) ==
          read_text_file((d2 / "dataset.txt").string()));
    CHECK(read_text_file((d1 / "dataset.txt.manifest.json").string()) ==
          read_text_file((d2 / "dataset.txt.manifest.json").string()));
}

TEST_CASE("simulate outputs are byte-identical across reruns and worker counts") {
    const auto gen = fresh_dir("sim_data");
    REQUIRE(run_cli("generate --classes 3 --per-class 20 --pose vonmises:0:2 --seed 5 --out " +
                    gen.string()) == 0);
    const std::string dataset = (gen / "dataset.txt").string();

    // Re-running into the same directory must reproduce every byte; a
    // different worker count may only change the config echo, never the
    // trajectory.
    const auto out = fresh_dir("sim_run");
    const std::string args = "simulate --dataset " + dataset +
                             " --canonicalizer noisy:100 --selection random --alpha 0.1 --steps 8"
                             " --seed 55 --out " + out.string();
    REQUIRE(run_cli(args + " --workers 1") == 0);
    const std::string csv = read_text_file((out / "trajectory.csv").string());
    const std::string json = read_text_file((out / "run.json").string());
    const std::string svg = read_text_file((out / "sigma2.svg").string());
    CHECK(fs::exists(out / "simulate.config.txt"));

    fs::remove_all(out);
    fs::create_directories(out);
    REQUIRE(run_cli(args + " --workers 1") == 0);
    CHECK(read_text_file((out / "trajectory.csv").string()) == csv);
    CHECK(read_text_file((out / "run.json").string()) == json);
    CHECK(read_text_file((out / "sigma2.svg").string()) == svg);

    REQUIRE(run_cli(args + " --workers 4") == 0);
    CHECK(read_text_file((out / "trajectory.csv").string()) == csv);

    const auto quiet = fresh_dir("sim_no_plot");
    REQUIRE(run_cli("simulate --dataset " + dataset +
                    " --canonicalizer noisy:100 --selection random --alpha 0.1 --steps 8"
                    " --seed 55 --no-plot --out " + quiet.string()) == 0);
    CHECK_FALSE(fs::exists(quiet / "sigma2.svg"));
    CHECK(read_text_file((quiet / "trajectory.csv").string()) == csv);
}

TEST_CASE("beta-controlled simulate annotates the fitted rate") {
    const auto gen = fresh_dir("beta_data");
    REQUIRE(run_cli("generate --classes 2 --per-class 1000 --pose vonmises:0:2 --seed 9 --out " +
                    gen.string()) == 0);
    const auto out = fresh_dir("beta_run");
    REQUIRE(run_cli("simulate --dataset " + (gen / "dataset.txt").string() +
                    " --canonicalizer noisy:1 --selection random --alpha 0.1 --beta 0.25"
                    " --steps 40 --seed 77 --out " + out.string()) == 0);
    const std::string svg = read_text_file((out / "sigma2.svg").string());
    CHECK(svg.find("lambda_hat=") != std::string::npos);
    CHECK(svg.find("lambda_theory=0.925") != std::string::npos);

    const auto manifest = nlohmann::json::parse(read_text_file((out / "run.json").string()));
    CHECK(std::fabs(manifest["lambda_hat"].get<double>() - 0.925) < 0.02);
}

TEST_CASE("robustness grid emits one polar plot per scale") {
    const auto gen = fresh_dir("rob_data");
    REQUIRE(run_cli("generate --manifold so2*logscale:0.8:1.25 --pose delta:0*delta:0"
                    " --classes 3 --per-class 4 --seed 13 --out " + gen.string()) == 0);
    const auto out = fresh_dir("rob_run");
    REQUIRE(run_cli("robustness --dataset " + (gen / "dataset.txt").string() +
                    " --canonicalizer oracle --grid 24 --seed 13 --out " + out.string()) == 0);
    const std::string csv = read_text_file((out / "robustness.csv").string());
    CHECK(csv.rfind("# galign-robustness v1", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 51);  // header lines + cells
    CHECK(fs::exists(out / "robustness_scale_1.svg"));
    CHECK(fs::exists(out / "robustness_scale_1.125.svg"));
    CHECK(fs::exists(out / "robustness_scale_1.25.svg"));
}

TEST_CASE("frechet subcommand reads pose lists from a file") {
    const auto dir = fresh_dir("frechet_cmd");
    write_text_file((dir / "poses.txt").string(), "0\n1.5707963267948966\n");
    const std::string cmd = std::string(GALIGN_CLI_PATH) + " frechet --manifold so2 --input " +
                            (dir / "poses.txt").string() + " > " + (dir / "out.txt").string() +
                            " 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const std::string out = read_text_file((dir / "out.txt").string());
    CHECK(out.find("mean = (0.7853981633974483)") != std::string::npos);
    CHECK(out.find("variance = 0.6168502750680849") != std::string::npos);
}

TEST_SUITE_END();
