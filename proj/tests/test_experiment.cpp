// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/errors.hpp"
#include "hyperscar/experiment.hpp"
#include "hyperscar/lattice.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace hyperscar;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hyperscar_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunOptions options(const fs::path& dir, const std::string& command) {
    RunOptions o;
    o.out_dir = dir;
    o.command = command;
    return o;
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

}  // namespace

TEST_CASE("config parsing") {
    const ExperimentConfig c = ExperimentConfig::parse(
        "version = 1\n"
        "# comment\n"
        "model = comb\n"
        "N = 7\n"
        "J0 = 1.5   # trailing\n"
        "J1 = 0.8\n"
        "boundary = obc\n"
        "initial = C\n"
        "sweep.parameter = J1\n"
        "sweep.values = 0.8, 0.9, 1.0, 1.1\n"
        "hda.eta = 0.1\n");
    CHECK(c.model == "comb");
    CHECK(c.n == 7);
    CHECK(c.j0 == 1.5);
    CHECK(c.j1 == 0.8);
    CHECK(c.initial == "C");
    CHECK(c.sweep_values.size() == 4);
    CHECK(c.hda_eta == 0.1);
    const auto pts = c.sweep_points();
    REQUIRE(pts.size() == 4);
    CHECK(pts[3].j1 == 1.1);

    const ExperimentConfig r = ExperimentConfig::parse(c.to_text());
    CHECK(r.to_text() == c.to_text());

    CHECK_THROWS_AS((void)ExperimentConfig::parse("model = ssh\n"), ConfigError);
    CHECK_THROWS_AS((void)ExperimentConfig::parse("version = 2\n"), ConfigError);
    CHECK_THROWS_AS((void)ExperimentConfig::parse("version = 1\nmodle = ssh\n"), ConfigError);
    CHECK_THROWS_AS((void)ExperimentConfig::parse("version = 1\nN = 3\nN = 4\n"), ConfigError);
    CHECK_THROWS_AS((void)ExperimentConfig::parse("version = 1\nJ0 = abc\n"), ConfigError);
    CHECK_THROWS_AS((void)ExperimentConfig::parse("version = 1\nJ0 = inf\n"), ConfigError);
    CHECK_THROWS_AS((void)ExperimentConfig::parse("version = 1\nboundary = open\n"), ConfigError);
    CHECK_THROWS_AS((void)ExperimentConfig::parse("version = 1\nN 4\n"), ConfigError);
    CHECK_THROWS_AS((void)ExperimentConfig::parse("version = 1\ninitial = C\ninitial_bits = 1010\n"), ConfigError);
    CHECK_THROWS_AS((void)ExperimentConfig::parse("version = 1\nsweep.parameter = J7\nsweep.values = 1\n"),
                    ConfigError);
}

TEST_CASE("lattice and initial state from a config") {
    ExperimentConfig c = ExperimentConfig::parse("version = 1\nmodel = tetramer-2d\nNx = 2\nNy = 1\ninitial = C_x\n");
    const LatticeSpec spec = c.build_lattice();
    CHECK(spec.sites == 8);
    CHECK(c.initial_state(spec) == collective_state(spec, "C_x"));
    CHECK(c.initial_label() == "C_x");

    c = ExperimentConfig::parse("version = 1\nmodel = ssh\nN = 2\ninitial_bits = 1001\n");
    CHECK(c.initial_state(c.build_lattice()) == FockState::from_occupations(std::vector<int>{1, 0, 0, 1}));
    c = ExperimentConfig::parse("version = 1\nmodel = ssh\nN = 2\ninitial_bits = 1100\n");
    CHECK_NOTHROW((void)c.initial_state(c.build_lattice()));
    c = ExperimentConfig::parse("version = 1\nmodel = ssh\nN = 2\ninitial_bits = 10\n");
    CHECK_THROWS_AS((void)c.initial_state(c.build_lattice()), ConfigError);
}

TEST_CASE("ratio run writes exact matches and the manifest") {
    const fs::path dir = scratch("ratio");
    const ExperimentConfig c =
        ExperimentConfig::parse("version = 1\nmodel = ssh\nJ0 = 1\nJ1 = 1\nsweep.parameter = N\nsweep.values = 2,3,4,5,6\n");
    REQUIRE(run_command("ratio", c, options(dir, "ratio")) == 0);
    const std::string csv = slurp(dir / "ratio.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line.find("theta") != std::string::npos);
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(line.find(",1,enumerated") != std::string::npos);
    }
    CHECK(rows == 5);
    CHECK(slurp(dir / "md_limit.csv").find("6,32,63,") != std::string::npos);
    const auto m = manifest(dir);
    CHECK(m["command"] == "ratio");
    CHECK(m["outputs"].size() == 2);
    CHECK(m["outputs"][0]["sha256"].get<std::string>().size() == 64);
    CHECK(m["outputs"][0]["sha256"] == sha256_file(dir / "ratio.csv"));
    CHECK(ExperimentConfig::parse(m["config"].get<std::string>()).to_text() == c.to_text());
}

TEST_CASE("spectrum, dynamics and hda runs") {
    const ExperimentConfig c = ExperimentConfig::parse(
        "version = 1\nmodel = ssh\nN = 4\nJ0 = 1.6\nJ1 = 1\nJ3 = -0.18\nt_max = 5\nt_points = 51\nrandom_states = 2\n");
    const fs::path dir = scratch("runs");
    CHECK(run_command("spectrum", c, options(dir, "spectrum")) == 0);
    CHECK(fs::exists(dir / "spectrum.csv"));
    CHECK(fs::exists(dir / "spectrum.json"));
    CHECK(run_command("dynamics", c, options(dir, "dynamics")) == 0);
    CHECK(fs::exists(dir / "dynamics.json"));
    const auto dj = nlohmann::json::parse(slurp(dir / "dynamics.json"));
    CHECK(!dj.empty());
    CHECK(run_command("hda", c, options(dir, "hda")) == 0);
    CHECK(fs::exists(dir / "hda.csv"));
    const auto m = manifest(dir);
    CHECK(m["command"] == "hda");
    for (const auto& o : m["outputs"]) CHECK(fs::exists(dir / o["file"].get<std::string>()));
}

TEST_CASE("determinism: identical config and seed give identical bodies") {
    const ExperimentConfig c = ExperimentConfig::parse(
        "version = 1\nmodel = random-cluster\nN = 4\nJ0 = 1.6\nJ1 = 1\nseed = 9\nt_max = 4\nt_points = 41\n"
        "random_states = 3\n");
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    REQUIRE(run_command("dynamics", c, options(a, "dynamics")) == 0);
    REQUIRE(run_command("dynamics", c, options(b, "dynamics")) == 0);
    const auto ma = manifest(a);
    const auto mb = manifest(b);
    CHECK(ma["outputs"] == mb["outputs"]);
    REQUIRE(run_command("cluster-gen", c, options(a, "cluster-gen")) == 0);
    RunOptions o = options(b, "cluster-gen");
    o.seed = 10;
    REQUIRE(run_command("cluster-gen", c, o) == 0);
    const LatticeSpec la = lattice_from_json(slurp(a / "lattice.json"));
    CHECK(la == build_random_cluster(4, 1.6, 1.0, 9));
    CHECK(lattice_from_json(slurp(b / "lattice.json")) == build_random_cluster(4, 1.6, 1.0, 10));
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch("codes");
    ExperimentConfig c = ExperimentConfig::parse("version = 1\nmodel = ssh\nN = 5\neigen_cap = 10\n");
    CHECK(run_command("spectrum", c, options(dir, "spectrum")) == 3);
    CHECK(run_command("nonsense", c, options(dir, "nonsense")) == 2);
    c = ExperimentConfig::parse("version = 1\nmodel = ssh\nN = 2\ninitial = C_star\n");
    CHECK(run_command("dynamics", c, options(dir, "dynamics")) == 2);
}

#ifdef HYPERSCAR_CLI_PATH
TEST_CASE("command line") {
    const fs::path dir = scratch("cli");
    {
        std::ofstream cfg(dir / "ratio.cfg");
        cfg << "version = 1\nmodel = tetramer-2d\nNx = 2\nNy = 2\n";
    }
    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "version = 1\nmodel = ssh\nbogus = 1\n";
    }
    const std::string cli = HYPERSCAR_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    CHECK(run("ratio --config " + (dir / "ratio.cfg").string() + " --out " + (dir / "o").string() + " --threads 2") == 0);
    CHECK(slurp(dir / "o" / "ratio.csv").find("2x2") != std::string::npos);
    CHECK(fs::exists(dir / "o" / "manifest.json"));
    CHECK(run("ratio --config " + (dir / "bad.cfg").string()) == 2);
    CHECK(run("ratio --config " + (dir / "missing.cfg").string()) == 2);
    CHECK(run("ratio") == 2);
    CHECK(run("frobnicate --config " + (dir / "ratio.cfg").string()) == 2);
    CHECK(run("cluster-gen --config " + (dir / "ratio.cfg").string() + " --out " + (dir / "c").string() +
              " --seed 5 --threads 0") == 2);
}
#endif
