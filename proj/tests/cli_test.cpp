#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fracdrift/fracdrift.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fracdrift;

namespace {

std::string cli_path() {
    const char* p = std::getenv("FRACDRIFT_CLI");
    REQUIRE(p != nullptr);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " > /dev/null 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("fracdrift_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os(p);
    os << content;
}

const char* kBaseConfig = R"({
  "model": {"H": 0.5, "sigma": 1.0, "T": 1.0, "N": 128},
  "basis": {"kind": "polynomial", "degree": 1},
  "truth": {"theta": [0.25, 1.5]},
  "seed": 42
})";

}  // namespace

TEST_CASE("simulate writes a well-formed path and is reproducible") {
    TempDir dir;
    write_file(dir.path / "cfg.json", kBaseConfig);
    const std::string cfg = (dir.path / "cfg.json").string();

    REQUIRE(run_cli("simulate --config " + cfg + " --out " + (dir.path / "a").string()) == 0);
    REQUIRE(run_cli("simulate --config " + cfg + " --out " + (dir.path / "b").string()) == 0);

    const std::string pa = slurp(dir.path / "a" / "path.csv");
    CHECK(pa.substr(0, 8) == "t,value\n");
    CHECK(pa == slurp(dir.path / "b" / "path.csv"));

    SECTION("--seed override changes the output; same override reproduces it") {
        REQUIRE(run_cli("simulate --config " + cfg + " --seed 7 --out " + (dir.path / "c").string()) ==
                0);
        REQUIRE(run_cli("simulate --config " + cfg + " --seed 7 --out " + (dir.path / "d").string()) ==
                0);
        const std::string pc = slurp(dir.path / "c" / "path.csv");
        CHECK(pc != pa);
        CHECK(pc == slurp(dir.path / "d" / "path.csv"));
    }
}

TEST_CASE("config validation failures exit with code 2 and name the field") {
    TempDir dir;

    SECTION("unknown key") {
        write_file(dir.path / "bad.json", R"({"model": {"H": 0.5, "HH": 1.0, "N": 8}})");
        CHECK(run_cli("simulate --config " + (dir.path / "bad.json").string()) == 2);
    }
    SECTION("domain violation") {
        write_file(dir.path / "bad.json", R"({"model": {"H": 1.5, "N": 8}})");
        CHECK(run_cli("simulate --config " + (dir.path / "bad.json").string()) == 2);
    }
    SECTION("malformed JSON") {
        write_file(dir.path / "bad.json", "{");
        CHECK(run_cli("simulate --config " + (dir.path / "bad.json").string()) == 2);
    }
    SECTION("missing required flag") {
        CHECK(run_cli("simulate") == 2);
    }
    SECTION("unknown subcommand") {
        CHECK(run_cli("frobnicate") == 2);
    }
}

TEST_CASE("pipeline round trip matches the in-process computation") {
    TempDir dir;
    write_file(dir.path / "cfg.json", kBaseConfig);
    const std::string cfg = (dir.path / "cfg.json").string();
    const fs::path outdir = dir.path / "run";

    REQUIRE(run_cli("simulate --config " + cfg + " --out " + outdir.string()) == 0);

    // chain transform and estimate-ml over the simulated path
    json chain = json::parse(kBaseConfig);
    chain["input"] = (outdir / "path.csv").string();
    write_file(dir.path / "chain.json", chain.dump());
    const std::string chain_cfg = (dir.path / "chain.json").string();

    REQUIRE(run_cli("transform --config " + chain_cfg + " --out " + outdir.string()) == 0);
    REQUIRE(run_cli("estimate-ml --config " + chain_cfg + " --out " + outdir.string()) == 0);

    const json summary = json::parse(slurp(outdir / "summary.json"));
    REQUIRE(summary["command"] == "estimate-ml");

    // in-process pipeline with the CLI's derived seed
    const HurstModel model = make_hurst_model(0.5);
    const TimeGrid grid = TimeGrid::uniform(1.0, 128);
    const DriftBasis basis = polynomial_basis(1, 1.0);
    const std::uint64_t seed = 42ULL ^ fnv1a64("simulate");
    const SamplePath xi = simulate_observation({0.25, 1.5}, basis, model, grid, RngSeed{seed, 0});
    const MartingalePath mp = martingale_transform(xi, 1.0, model);
    const PsiEvaluations psi = psi_closed_poly(model, basis, grid);
    const EstimationResult est = mle_estimate(psi, model, mp, 1.0);

    // byte-identical once round-tripped through the 17-digit CSV
    CHECK(summary["theta_hat"][0].get<double>() == est.theta_hat[0]);
    CHECK(summary["theta_hat"][1].get<double>() == est.theta_hat[1]);

    // the martingale CSV agrees with the in-process transform
    const std::string mcsv = slurp(outdir / "martingale.csv");
    CHECK(mcsv.substr(0, 8) == "t,M,w,m\n");
    CHECK(mcsv == martingale_csv(mp));
}

TEST_CASE("planted parameters recovered through the CLI round trip") {
    TempDir dir;
    json cfg = json::parse(kBaseConfig);
    cfg["model"]["H"] = 0.2;
    cfg["model"]["sigma"] = 1e-8;
    cfg["model"]["N"] = 512;
    cfg["basis"]["degree"] = 2;
    cfg["truth"]["theta"] = {0.4, -1.2, 2.3};
    write_file(dir.path / "cfg.json", cfg.dump());
    const fs::path outdir = dir.path / "run";

    REQUIRE(run_cli("simulate --config " + (dir.path / "cfg.json").string() + " --out " +
                    outdir.string()) == 0);
    cfg["input"] = (outdir / "path.csv").string();
    write_file(dir.path / "est.json", cfg.dump());
    REQUIRE(run_cli("estimate-ml --config " + (dir.path / "est.json").string() + " --out " +
                    outdir.string()) == 0);

    const json summary = json::parse(slurp(outdir / "summary.json"));
    CHECK(std::abs(summary["theta_hat"][0].get<double>() - 0.4) < 1e-4);
    CHECK(std::abs(summary["theta_hat"][1].get<double>() + 1.2) < 1e-4);
    CHECK(std::abs(summary["theta_hat"][2].get<double>() - 2.3) < 1e-4);
}

TEST_CASE("cost-curve command emits the curve and its minimizer") {
    TempDir dir;
    json cfg;
    cfg["model"] = {{"H", 0.2}, {"sigma", 1.0}, {"T", 8.0}, {"N", 256}};
    cfg["basis"] = {{"kind", "polynomial"}, {"degree", 2}};
    cfg["prior"] = {{"normal",
                     {{"mean", {0.0, 0.0, 0.0}},
                      {"cov", {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}}}}};
    cfg["cost"] = 0.02;
    write_file(dir.path / "cfg.json", cfg.dump());
    const fs::path outdir = dir.path / "run";

    REQUIRE(run_cli("cost-curve --config " + (dir.path / "cfg.json").string() + " --out " +
                    outdir.string()) == 0);
    CHECK(slurp(outdir / "F_curve.csv").substr(0, 4) == "t,F\n");
    const json summary = json::parse(slurp(outdir / "summary.json"));
    CHECK(summary["unimodal"].get<bool>());
    const double tau = summary["tau"].get<double>();
    CHECK(tau > 0.0);
    CHECK(tau < 8.0);
}

TEST_CASE("stop-uniform writes a policy lattice") {
    TempDir dir;
    json cfg;
    cfg["model"] = {{"H", 0.3}, {"sigma", 1.0}, {"T", 1.0}, {"N", 32}};
    cfg["prior"] = {{"uniform", {{"a", 0.0}, {"b", 2.0}}}};
    cfg["cost"] = 0.05;
    cfg["lattice"] = {{"bins", 61}, {"gh", 7}, {"gl", 15}};
    write_file(dir.path / "cfg.json", cfg.dump());
    const fs::path outdir = dir.path / "run";

    REQUIRE(run_cli("stop-uniform --config " + (dir.path / "cfg.json").string() + " --out " +
                    outdir.string()) == 0);
    const std::string policy = slurp(outdir / "policy.csv");
    CHECK(policy.substr(0, 11) == "t,M,action\n");
    CHECK(policy.find("stop") != std::string::npos);
    const json summary = json::parse(slurp(outdir / "summary.json"));
    CHECK(summary["expected_cost"].get<double>() > 0.0);
    CHECK(summary["expected_cost"].get<double>() < 4.0 / 12.0);
}

TEST_CASE("mc reports are invariant to the worker count") {
    TempDir dir;
    json cfg = json::parse(kBaseConfig);
    cfg["model"]["N"] = 64;
    cfg["replications"] = 40;
    write_file(dir.path / "w1.json", cfg.dump());
    cfg["workers"] = 3;
    write_file(dir.path / "w3.json", cfg.dump());

    REQUIRE(run_cli("mc --config " + (dir.path / "w1.json").string() + " --out " +
                    (dir.path / "a").string()) == 0);
    REQUIRE(run_cli("mc --config " + (dir.path / "w3.json").string() + " --out " +
                    (dir.path / "b").string()) == 0);
    CHECK(slurp(dir.path / "a" / "report.csv") == slurp(dir.path / "b" / "report.csv"));
    CHECK(slurp(dir.path / "a" / "report.csv").substr(0, 31) == "scenario,statistic,value,se,n_r");
}

TEST_CASE("oracle-check passes on a seeded configuration") {
    TempDir dir;
    json cfg;
    cfg["model"] = {{"H", 0.2}, {"sigma", 1.0}, {"T", 1.0}, {"N", 256}};
    cfg["basis"] = {{"kind", "polynomial"}, {"degree", 2}};
    cfg["seed"] = 5;
    write_file(dir.path / "cfg.json", cfg.dump());
    CHECK(run_cli("oracle-check --config " + (dir.path / "cfg.json").string() + " --out " +
                  (dir.path / "run").string()) == 0);
    const json summary = json::parse(slurp(dir.path / "run" / "summary.json"));
    CHECK(summary["all_pass"].get<bool>());
}

TEST_CASE("csv summary format") {
    TempDir dir;
    write_file(dir.path / "cfg.json", kBaseConfig);
    REQUIRE(run_cli("simulate --config " + (dir.path / "cfg.json").string() + " --out " +
                    (dir.path / "run").string() + " --format csv") == 0);
    const std::string s = slurp(dir.path / "run" / "summary.csv");
    CHECK(s.substr(0, 10) == "key,value\n");
    CHECK(s.find("command") != std::string::npos);
}
