#include "critsys/cli.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

using critsys::cli_result;
using critsys::run_cli_capture;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("critsys_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

int csv_body_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  int rows = -1;  // skip header
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  return rows;
}

}  // namespace

TEST_CASE("help and argument errors") {
  const cli_result help = run_cli_capture({"--help"});
  CHECK(help.exit_code == 0);
  CHECK(help.report.find("critical elliptic system toolkit") != std::string::npos);

  CHECK(run_cli_capture({}).exit_code == 2);
  CHECK(run_cli_capture({"constants", "--bogus", "1"}).exit_code == 2);
}

TEST_CASE("constants command") {
  const cli_result res = run_cli_capture({"constants"});
  REQUIRE(res.exit_code == 0);
  const json rep = json::parse(res.report);
  REQUIRE(rep.at("rows").size() == 6);  // default range 3..8
  const json& r4 = rep.at("rows").at(1);
  CHECK(r4.at("n").get<int>() == 4);
  CHECK(r4.at("critical_exp").get<double>() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(r4.at("K_n_sq_inv").get<double>() ==
        doctest::Approx(10.260398641294913).epsilon(1e-12));
  CHECK(r4.at("omega_n").get<double>() ==
        doctest::Approx(8.0 * M_PI * M_PI / 3.0).epsilon(1e-13));

  CHECK(run_cli_capture({"constants", "--n", "2"}).exit_code == 2);
  CHECK(run_cli_capture({"constants", "--n", "5..3"}).exit_code == 2);
}

TEST_CASE("verify command over the registry") {
  const cli_result r13 = run_cli_capture({"verify"});
  REQUIRE(r13.exit_code == 0);
  const json rep = json::parse(r13.report);
  CHECK(rep.at("pass").get<bool>());
  CHECK(rep.at("checks").size() == 4);
  CHECK(rep.at("config").at("family").get<std::string>() == "remark13");

  for (const std::string fam : {"remark11", "scalar_pair", "prop91_pair", "remark91",
                                "remark92", "corollary91", "remark12"}) {
    const cli_result r = run_cli_capture({"verify", "--family", fam, "--N", "2048"});
    CHECK_MESSAGE(r.exit_code == 0, fam, ": ", r.error);
    CHECK(json::parse(r.report).at("pass").get<bool>());
  }

  const cli_result bad = run_cli_capture({"verify", "--family", "nope"});
  CHECK(bad.exit_code == 2);
  CHECK(bad.error.find("config error") != std::string::npos);
}

TEST_CASE("config file handling") {
  const fs::path dir = scratch_dir("cfg");

  const fs::path good = dir / "good.cfg";
  write_file(good, "# comment\nN = 2048\nlambda = 2.5\n");
  const cli_result ok =
      run_cli_capture({"verify", "--config", good.string(), "--lambda", "3.0"});
  REQUIRE(ok.exit_code == 0);
  const json rep = json::parse(ok.report);
  CHECK(rep.at("config").at("N").get<std::string>() == "2048");
  // command-line flag wins over the file value
  CHECK(rep.at("config").at("lambda").get<std::string>() == "3.0");

  const fs::path bad = dir / "bad.cfg";
  write_file(bad, "N = 1024\nwhatever = 3\n");
  const cli_result rej = run_cli_capture({"verify", "--config", bad.string()});
  CHECK(rej.exit_code == 2);
  CHECK(rej.error.find(":2:") != std::string::npos);
  CHECK(rej.error.find("whatever") != std::string::npos);

  const fs::path ill = dir / "ill.cfg";
  write_file(ill, "no equals sign here\n");
  CHECK(run_cli_capture({"verify", "--config", ill.string()}).exit_code == 2);

  CHECK(run_cli_capture({"verify", "--config", (dir / "missing.cfg").string()})
            .exit_code == 2);
  fs::remove_all(dir);
}

TEST_CASE("minimize command") {
  const cli_result p1 = run_cli_capture({"minimize"});
  REQUIRE(p1.exit_code == 0);
  const json rep1 = json::parse(p1.report);
  CHECK(rep1.at("pass").get<bool>());
  CHECK(rep1.at("converged").get<bool>());
  CHECK(rep1.at("mu").get<double>() ==
        doctest::Approx(10.260398641294913).epsilon(1e-10));
  CHECK(rep1.at("phi").get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(csv_body_rows(p1.csv) == 1024);

  const cli_result p2 =
      run_cli_capture({"minimize", "--coupling", "yamabe-diag:p=2", "--N", "1024"});
  REQUIRE(p2.exit_code == 0);
  const json rep2 = json::parse(p2.report);
  CHECK(rep2.at("pass").get<bool>());
  CHECK(std::abs(rep2.at("mu").get<double>() - 10.260398641294913) <=
        1e-3 * 10.260398641294913);
  CHECK(rep2.at("residual_sup").get<double>() <=
        rep2.at("residual_budget").get<double>());

  // starving the flow is a numeric failure, not a config failure
  const fs::path dir = scratch_dir("minfail");
  const fs::path cfg = dir / "starve.cfg";
  write_file(cfg,
             "coupling = offdiag:p=2,alpha=0.5\nseed = pair:1,-0.2\n"
             "N = 256\nmax_iter = 1\ntol = 1e-14\n");
  const cli_result starve = run_cli_capture({"minimize", "--config", cfg.string()});
  CHECK(starve.exit_code == 1);
  CHECK_FALSE(json::parse(starve.report).at("pass").get<bool>());
  fs::remove_all(dir);
}

TEST_CASE("solve command") {
  const cli_result res = run_cli_capture({"solve"});
  REQUIRE(res.exit_code == 0);
  const json rep = json::parse(res.report);
  CHECK(rep.at("converged").get<bool>());
  // constant solution: free energy is the volume integral 32 pi^2 / 12
  CHECK(rep.at("free_energy").get<double>() ==
        doctest::Approx(8.0 * M_PI * M_PI / 3.0).epsilon(1e-8));
  CHECK(rep.at("residual_sup").get<double>() <= 1e-10);

  // the source -1 coupling demands an n=6 model
  CHECK(run_cli_capture({"solve", "--coupling", "remark13", "--model", "sphere:n=4"})
            .exit_code == 2);
}

TEST_CASE("blowup command") {
  const cli_result res = run_cli_capture(
      {"blowup", "--N", "1024", "--lambda-grid", "1.5,1.1,1.01"});
  REQUIRE(res.exit_code == 0);
  const json rep = json::parse(res.report);
  REQUIRE(rep.at("rows").size() == 3);
  double prev = 2.0;
  for (const json& row : rep.at("rows")) {
    const double rd = row.at("R_delta").get<double>();
    CHECK(rd >= 0.0);
    CHECK(rd < prev);
    prev = rd;
  }
  CHECK(csv_body_rows(res.csv) == 3);

  CHECK(run_cli_capture({"blowup", "--family", "nope"}).exit_code == 2);
  CHECK(run_cli_capture({"blowup", "--lambda-grid", "1.5,oops"}).exit_code == 2);
}

TEST_CASE("multiplicity command") {
  const cli_result res = run_cli_capture(
      {"multiplicity", "--k", "1", "--N", "512", "--tol", "1e-9"});
  REQUIRE(res.exit_code == 0);
  const json rep = json::parse(res.report);
  REQUIRE(rep.at("rows").size() == 1);
  const json& row = rep.at("rows").at(0);
  CHECK(row.at("alpha").get<int>() == 1);
  CHECK(row.at("identity_gap").get<double>() <= 1e-10);
  CHECK(row.at("mu").get<double>() > 0.0);

  CHECK(run_cli_capture({"multiplicity", "--k", "0"}).exit_code == 2);
}

TEST_CASE("deterministic reruns") {
  const std::vector<std::string> args = {"blowup", "--N", "512", "--lambda-grid",
                                         "1.5,1.01"};
  const cli_result a = run_cli_capture(args);
  const cli_result b = run_cli_capture(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.report == b.report);
  CHECK(a.csv == b.csv);
}

TEST_CASE("defaults listing and --out artifacts") {
  const cli_result defs = run_cli_capture({"minimize", "--print-defaults"});
  REQUIRE(defs.exit_code == 0);
  CHECK(defs.report.find("tol = 1e-9\n") != std::string::npos);
  CHECK(defs.report.find("coupling = yamabe-diag:p=1\n") != std::string::npos);
  // listing is key-sorted
  CHECK(defs.report.find("N = ") < defs.report.find("abs_projection"));

  const fs::path dir = scratch_dir("out");
  const cli_result res = run_cli_capture(
      {"minimize", "--N", "256", "--out", (dir / "run").string()});
  REQUIRE(res.exit_code == 0);
  std::ifstream rj(dir / "run" / "report.json");
  REQUIRE(rj.good());
  std::stringstream rbuf;
  rbuf << rj.rdbuf();
  CHECK(rbuf.str() == res.report);
  std::ifstream sc(dir / "run" / "solution_0.csv");
  REQUIRE(sc.good());
  std::stringstream sbuf;
  sbuf << sc.rdbuf();
  CHECK(sbuf.str() == res.csv);
  fs::remove_all(dir);
}
