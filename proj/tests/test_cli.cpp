#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

RunResult run_cli(const std::string& args, const std::string& tag) {
    const std::string out = "/tmp/hypokit_cli_" + tag + ".out";
    const std::string cmd = std::string(HYPOKIT_CLI_PATH) + " " + args + " > " + out + " 2>&1";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(rc);
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    r.stdout_text = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("/tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("help exits 0, bad flags exit 2") {
    CHECK(run_cli("--help", "help").exit_code == 0);
    CHECK(run_cli("certificate --help", "help_cert").exit_code == 0);
    CHECK(run_cli("certificate --big-m 1", "missing_k").exit_code == 2); // missing --k
    CHECK(run_cli("frobnicate", "unknown").exit_code == 2);
    CHECK(run_cli("certificate --k nope --big-m 1", "bad_value").exit_code == 2);
}

TEST_CASE("runtime failures exit 1 with a JSON error object") {
    const auto r = run_cli("certificate --k 25 --big-m 1e300 --kappa 1 --out-dir /tmp",
                           "overflow");
    CHECK(r.exit_code == 1);
    CHECK(r.stdout_text.find("\"error\"") != std::string::npos);
}

TEST_CASE("certificate subcommand writes both certificates and a manifest") {
    TempDir dir("hk_cli_cert");
    const auto r = run_cli("certificate --k 2 --big-m 1 --kappa 1 --out-dir " +
                               dir.path.string(),
                           "cert_k2");
    REQUIRE(r.exit_code == 0);
    const auto hypo =
        nlohmann::json::parse(slurp(dir.path / "certificate_hypocoercivity.json"));
    CHECK(hypo["levels"].size() == 2);
    CHECK(hypo["levels"][1]["lambda_l0"].get<double>() > 0.0);
    const auto herau = nlohmann::json::parse(slurp(dir.path / "certificate_herau.json"));
    CHECK(herau["levels"].size() == 2);

    const auto manifest =
        nlohmann::json::parse(slurp(dir.path / "manifest_certificate.json"));
    CHECK(manifest["subcommand"] == "certificate");
    CHECK(manifest["artifacts"].size() >= 3);
    CHECK(manifest.contains("wall_time_seconds"));
    for (const auto& a : manifest["artifacts"]) CHECK(fs::exists(a.get<std::string>()));
}

TEST_CASE("certificate: k = 0 base case carries Lambda0 = 2") {
    TempDir dir("hk_cli_cert0");
    const auto r =
        run_cli("certificate --k 0 --big-m 1 --out-dir " + dir.path.string(), "cert_k0");
    REQUIRE(r.exit_code == 0);
    const auto herau = nlohmann::json::parse(slurp(dir.path / "certificate_herau.json"));
    CHECK(herau["Lambda0"] == 2.0);
    CHECK(herau["levels"].empty());
}

TEST_CASE("exact subcommand: slope fit and the excluded frequency") {
    TempDir dir("hk_cli_exact");
    const auto r = run_cli("exact --omega0 1 --t-max 2 --t-steps 8 --slope-k 1 --slope-l 0 "
                           "--out-dir " + dir.path.string() + " --plot",
                           "exact_ok");
    REQUIRE(r.exit_code == 0);
    const auto summary = nlohmann::json::parse(slurp(dir.path / "exact_summary.json"));
    CHECK(std::abs(summary["slope"].get<double>() + 0.5) < 0.1);
    CHECK(fs::exists(dir.path / "covariance_table.csv"));
    CHECK(fs::exists(dir.path / "slope_loglog.svg"));

    const auto bad = run_cli("exact --omega0 0.5 --out-dir " + dir.path.string(), "exact_bad");
    CHECK(bad.exit_code == 2);
    CHECK(bad.stdout_text.find("degenerate eigenvalue") != std::string::npos);
}

TEST_CASE("langevin subcommand is deterministic byte for byte") {
    TempDir dir1("hk_cli_lv1");
    TempDir dir2("hk_cli_lv2");
    const std::string flags =
        "langevin --beta 0.3 --coupling 1 --particles 16 --replicas 4 --seed 7 "
        "--t-final 40 --burn-in 5 --out-dir ";
    REQUIRE(run_cli(flags + dir1.path.string(), "lv1").exit_code == 0);
    REQUIRE(run_cli(flags + dir2.path.string(), "lv2").exit_code == 0);
    CHECK(slurp(dir1.path / "magnetization.csv") == slurp(dir2.path / "magnetization.csv"));
    const auto summary = nlohmann::json::parse(slurp(dir1.path / "langevin_summary.json"));
    CHECK(summary["M"].get<double>() > 0.0);
    CHECK(summary["poincare"]["regime"] == "ferro");
}

TEST_CASE("verify-ops subcommand reports passing identity checks") {
    TempDir dir("hk_cli_ops");
    const auto r = run_cli("verify-ops --k 2 --potential quadratic --omega0 1 --grid-n 256 "
                           "--out-dir " + dir.path.string(),
                           "ops");
    REQUIRE(r.exit_code == 0);
    const auto summary =
        nlohmann::json::parse(slurp(dir.path / "verify_ops_summary.json"));
    CHECK(summary["pass"].get<bool>());
    CHECK(summary["worst_identity_relative_error"].get<double>() < 1e-5);
    CHECK(summary["worst_bound_slack"].get<double>() > -1e-5);
}

TEST_CASE("pde subcommand emits a norm report consistent with the certificate") {
    TempDir dir("hk_cli_pde");
    const auto r = run_cli("pde --potential quadratic --omega0 1 --k 1 --t-final 0.5 "
                           "--nx 128 --nv 128 --record-every 50 --out-dir " +
                               dir.path.string(),
                           "pde");
    REQUIRE(r.exit_code == 0);
    const auto summary = nlohmann::json::parse(slurp(dir.path / "pde_summary.json"));
    CHECK(summary["kappa"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(summary["certified_rate"].get<double>() > 0.0);
    CHECK(fs::exists(dir.path / "norm_report.csv"));
    // header + at least three rows
    std::istringstream csv(slurp(dir.path / "norm_report.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows >= 4);
}
