// End-to-end checks of the command-line tool: exit codes, file outputs, and
// agreement between the simulate and fit pipelines.

#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("spasel_cli_test_" + std::to_string(static_cast<unsigned>(::getpid())));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Run the installed binary with the given arguments, capturing both streams.
RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch_dir() / ("out_" + std::to_string(counter) + ".txt");
  const fs::path err = scratch_dir() / ("err_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string("\"") + SPASEL_CLI_PATH + "\" " + args + " > \"" +
                          out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_file(const std::string& name, const std::string& content) {
  fs::path p = scratch_dir() / name;
  std::ofstream os(p, std::ios::binary);
  os << content;
  return p;
}

// Fit command on a dump-named dataset (coordinates sx, sy).
std::string fit_cmd(const fs::path& csv, const std::string& extra) {
  return "fit \"" + csv.string() + "\" --coords sx,sy " + extra;
}

// A small dataset the fitter accepts: simulate once, reuse the dump.
fs::path small_csv() {
  static fs::path csv = [] {
    const fs::path dir = scratch_dir() / "seed_data";
    const RunResult r = run_cli("simulate --side 3 --reps 1 --seed 7 --grid-size 5 --dump-data "
                                "--out \"" + dir.string() + "\"");
    REQUIRE(r.exit_code == 0);
    const fs::path p = dir / "replicate_0.csv";
    REQUIRE(fs::exists(p));
    return p;
  }();
  return csv;
}

}  // namespace

TEST_CASE("usage errors exit with the configuration code") {
  CHECK(run_cli("").exit_code == 4);
  CHECK(run_cli("frobnicate").exit_code == 4);
  CHECK(run_cli("report").exit_code == 4);  // inputs are required
  const RunResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("fit") != std::string::npos);
  CHECK(help.out.find("simulate") != std::string::npos);
  CHECK(help.out.find("report") != std::string::npos);
  CHECK(run_cli("fit --help").exit_code == 0);
  CHECK(run_cli("fit /definitely/not/a/file.csv").exit_code == 4);
}

TEST_CASE("data errors exit with the data code and name the problem") {
  SUBCASE("malformed cell") {
    const fs::path p = write_file("bad_cell.csv", "sx,sy,y,x1\n0,0,1,2\n1,0,oops,3\n");
    const RunResult r = run_cli(fit_cmd(p, ""));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(r.err.find("line 3") != std::string::npos);
  }
  SUBCASE("missing response column") {
    const fs::path p = write_file("no_resp.csv", "sx,sy,z,x1\n0,0,1,2\n1,0,2,3\n");
    const RunResult r = run_cli(fit_cmd(p, ""));
    CHECK(r.exit_code == 2);
  }
  SUBCASE("duplicate sites") {
    std::string text = "sx,sy,y,x1,x2\n";
    // two identical rows plus filler so the design has rank
    text += "1,1,0.5,1,0.2\n1,1,0.25,-1,0.4\n";
    for (int i = 0; i < 10; ++i)
      text += std::to_string(i) + ",0," + std::to_string(0.1 * i) + "," +
              std::to_string(i % 3) + "," + std::to_string(0.3 * i) + "\n";
    const fs::path p = write_file("dup_sites.csv", text);
    const RunResult r = run_cli(fit_cmd(p, "--lambda 0.1"));
    CHECK(r.exit_code == 2);
  }
  SUBCASE("rank-deficient design") {
    std::string text = "sx,sy,y,x1,x2\n";
    for (int i = 0; i < 12; ++i) {
      const double v = 0.5 * i - 2.0;
      text += std::to_string(i) + "," + std::to_string((i * 7) % 5) + "," +
              std::to_string(0.3 * i) + "," + std::to_string(v) + "," + std::to_string(2.0 * v) +
              "\n";
    }
    const fs::path p = write_file("collinear.csv", text);
    const RunResult r = run_cli(fit_cmd(p, "--lambda 0.1"));
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("bad option values exit with the configuration code") {
  const fs::path csv = small_csv();
  CHECK(run_cli(fit_cmd(csv, "--omega -1")).exit_code == 4);
  CHECK(run_cli(fit_cmd(csv, "--lambda banana")).exit_code == 4);
  CHECK(run_cli(fit_cmd(csv, "--a 1.5 --lambda 0.1")).exit_code == 4);
  CHECK(run_cli("fit \"" + csv.string() + "\" --coords sx --lambda 0.1").exit_code == 4);
  CHECK(run_cli(fit_cmd(csv, "--variant warp --lambda 0.1")).exit_code == 4);
  CHECK(run_cli(fit_cmd(csv, "--taper linear --lambda 0.1")).exit_code == 4);
  CHECK(run_cli("simulate --side 0").exit_code == 4);
  CHECK(run_cli("simulate --reps 0").exit_code == 4);
}

TEST_CASE("fit writes a table to stdout and a result file") {
  const fs::path csv = small_csv();
  const fs::path out = scratch_dir() / "fit_smoke.json";
  const RunResult r = run_cli(fit_cmd(csv, "--lambda 0.5 --out \"" + out.string() + "\""));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("term") != std::string::npos);
  CHECK(r.out.find("x1") != std::string::npos);
  CHECK(r.out.find("sigma2") != std::string::npos);
  CHECK(r.out.find("loglik") != std::string::npos);
  REQUIRE(fs::exists(out));

  const json j = json::parse(slurp(out));
  CHECK(j["kind"] == "fit");
  CHECK(j["config"]["variant"] == "full");
  CHECK(j["config"]["taper"]["family"] == "none");
  CHECK(j["config"]["lambda_mode"] == "fixed");
  CHECK(j["beta"].size() == 7);
}

TEST_CASE("an omega flag implies the tapered variant") {
  const fs::path csv = small_csv();
  const fs::path out = scratch_dir() / "fit_taper.json";
  const RunResult r =
      run_cli(fit_cmd(csv, "--omega 1.5 --lambda 0.5 --out \"" + out.string() + "\""));
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(slurp(out));
  CHECK(j["config"]["variant"] == "tapered");
  CHECK(j["config"]["taper"]["family"] == "linear");
  CHECK(j["config"]["taper"]["omega"] == 1.5);

  // the alternative tapered variant stays selectable
  const fs::path out2 = scratch_dir() / "fit_taper_alt.json";
  const RunResult r2 = run_cli(fit_cmd(
      csv, "--variant tapered-alt --omega 1.5 --lambda 0.5 --out \"" + out2.string() + "\""));
  REQUIRE(r2.exit_code == 0);
  CHECK(json::parse(slurp(out2))["config"]["variant"] == "tapered_alt");
}

TEST_CASE("report renders stored results and rejects damaged ones") {
  const fs::path csv = small_csv();
  const fs::path fit_a = scratch_dir() / "alpha.json";
  const fs::path fit_b = scratch_dir() / "bravo.json";
  REQUIRE(run_cli(fit_cmd(csv, "--lambda 0.5 --out \"" + fit_a.string() + "\"")).exit_code == 0);
  REQUIRE(run_cli(fit_cmd(csv, "--omega 1.5 --lambda 0.5 --out \"" + fit_b.string() + "\""))
              .exit_code == 0);

  const RunResult solo = run_cli("report \"" + fit_a.string() + "\"");
  REQUIRE(solo.exit_code == 0);
  CHECK(solo.out.find("term") != std::string::npos);
  CHECK(solo.out.find("alpha") != std::string::npos);

  const RunResult both = run_cli("report \"" + fit_a.string() + "\" \"" + fit_b.string() + "\"");
  REQUIRE(both.exit_code == 0);
  CHECK(both.out.find("alpha") != std::string::npos);
  CHECK(both.out.find("bravo") != std::string::npos);
  CHECK(both.out.find("tapered") != std::string::npos);

  const fs::path report_file = scratch_dir() / "report.txt";
  const RunResult saved = run_cli("report \"" + fit_a.string() + "\" --out \"" +
                                  report_file.string() + "\"");
  REQUIRE(saved.exit_code == 0);
  CHECK(slurp(report_file).find("alpha") != std::string::npos);

  const fs::path broken = write_file("broken.json", slurp(fit_a).substr(0, 40));
  CHECK(run_cli("report \"" + broken.string() + "\"").exit_code == 2);
  const fs::path future = write_file("future.json",
                                     "{\"schema_version\": 99, \"kind\": \"fit\"}");
  CHECK(run_cli("report \"" + future.string() + "\"").exit_code == 2);
}

TEST_CASE("simulate writes a summary table, csv, json, and optional dumps") {
  const fs::path dir = scratch_dir() / "sim_out";
  const RunResult r = run_cli("simulate --side 3 --reps 2 --seed 11 --grid-size 5 --out \"" +
                              dir.string() + "\"");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("statistic") != std::string::npos);
  CHECK(r.out.find("mle_oracle") != std::string::npos);
  CHECK(r.out.find("elapsed") != std::string::npos);
  REQUIRE(fs::exists(dir / "scenario.csv"));
  REQUIRE(fs::exists(dir / "scenario.json"));
  CHECK(!fs::exists(dir / "replicate_0.csv"));  // dumps are opt-in

  const std::string csv_text = slurp(dir / "scenario.csv");
  CHECK(csv_text.rfind("statistic,truth,ose,", 0) == 0);
  const json j = json::parse(slurp(dir / "scenario.json"));
  CHECK(j["kind"] == "scenario");
  CHECK(j["config"]["replicates"] == 2);
  CHECK(j["replicates"].size() == 2);

  const RunResult rep = run_cli("report \"" + (dir / "scenario.json").string() + "\"");
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.out.find("scenario") != std::string::npos);
  CHECK(rep.out.find("c0") != std::string::npos);
}

TEST_CASE("a dumped replicate refit through the cli reproduces the stored fit") {
  const fs::path dir = scratch_dir() / "round_trip";
  const RunResult sim = run_cli("simulate --side 4 --reps 1 --seed 3 --dump-data --out \"" +
                                dir.string() + "\"");
  REQUIRE(sim.exit_code == 0);
  const fs::path csv = dir / "replicate_0.csv";
  REQUIRE(fs::exists(csv));

  const json scen = json::parse(slurp(dir / "scenario.json"));
  const json& stored = scen["replicates"][0]["methods"]["ose"];
  REQUIRE(stored["ok"].get<bool>());

  const fs::path out = scratch_dir() / "refit.json";
  const RunResult fit = run_cli(fit_cmd(csv, "--out \"" + out.string() + "\""));
  REQUIRE(fit.exit_code == 0);
  const json j = json::parse(slurp(out));

  REQUIRE(j["beta"].size() == stored["beta"].size());
  for (std::size_t k = 0; k < j["beta"].size(); ++k) {
    const double refit = j["beta"][k]["estimate"].get<double>();
    const double orig = stored["beta"][k].is_null() ? std::nan("") :
                                                      stored["beta"][k].get<double>();
    REQUIRE(std::isfinite(orig));
    CHECK(std::abs(refit - orig) <= 1e-8 * std::max(1.0, std::abs(orig)));
    // exact zeros stay exact zeros across the dump/reload boundary
    if (orig == 0.0) CHECK(refit == 0.0);
  }
  CHECK(std::abs(j["diagnostics"]["lambda"].get<double>() -
                 stored["lambda"].get<double>()) <= 1e-10);
}
