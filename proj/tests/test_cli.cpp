// End-to-end tests of the kgseries driver binary. The binary path arrives
// as the first program argument; each case runs in its own scratch
// directory and inspects exit code, stdout, and written artifacts.

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string g_binary;
fs::path g_root;

fs::path scratch(const std::string& name) {
  const fs::path dir = g_root / name;
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE_MESSAGE(is.good(), "missing file: " << path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string shell_quote(const std::string& s) { return "'" + s + "'"; }

RunResult run_cli(const std::vector<std::string>& args, const fs::path& workdir,
                  const std::map<std::string, std::string>& env = {}) {
  std::ostringstream cmd;
  cmd << "cd " << shell_quote(workdir.string()) << " && env";
  for (const auto& [k, v] : env) cmd << " " << k << "=" << shell_quote(v);
  cmd << " " << shell_quote(g_binary);
  for (const auto& a : args) cmd << " " << shell_quote(a);
  cmd << " > cli_out.txt 2> cli_err.txt";
  const int status = std::system(cmd.str().c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(workdir / "cli_out.txt");
  r.err = slurp(workdir / "cli_err.txt");
  return r;
}

json error_body(const RunResult& r) {
  const json j = json::parse(r.out);
  REQUIRE(j.contains("error"));
  return j.at("error");
}

}  // namespace

TEST_CASE("trees: golden default output, stdout mirrors the artifact") {
  const auto dir = scratch("trees_default");
  const auto r = run_cli({"trees", "--outdir", dir.string()}, dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "order,count,bound\n"
        "0,1,1\n"
        "1,1,4\n"
        "2,2,16\n"
        "3,5,64\n"
        "4,14,256\n");
  CHECK(slurp(dir / "trees.csv") == r.out);
}

TEST_CASE("trees: cubic counts and keys listing") {
  const auto dir = scratch("trees_cubic");
  const auto r = run_cli(
      {"trees", "--p", "3", "--max-order", "2", "--keys", "--outdir", dir.string()}, dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "order,count,bound\n"
        "0,1,1\n"
        "1,1,6.75\n"
        "2,3,45.5625\n");
  CHECK(slurp(dir / "trees_keys.csv") ==
        "order,key\n"
        "0,o\n"
        "1,(ooo)\n"
        "2,((ooo)oo)\n"
        "2,(o(ooo)o)\n"
        "2,(oo(ooo))\n");
}

TEST_CASE("trees: KGSERIES_OUTDIR supplies the artifact directory") {
  const auto dir = scratch("trees_env");
  const auto sub = dir / "artifacts";
  const auto r = run_cli({"trees", "--max-order", "1"}, dir,
                         {{"KGSERIES_OUTDIR", sub.string()}});
  CHECK(r.exit_code == 0);
  CHECK(slurp(sub / "trees.csv") == r.out);
}

TEST_CASE("trees: config file sets options, flags override it") {
  const auto dir = scratch("trees_config");
  {
    std::ofstream os(dir / "run.ini");
    os << "p=3\nmax-order=2\n";
  }
  const auto base =
      run_cli({"trees", "--config", (dir / "run.ini").string(), "--outdir", dir.string()},
              dir);
  CHECK(base.exit_code == 0);
  CHECK(base.out ==
        "order,count,bound\n"
        "0,1,1\n"
        "1,1,6.75\n"
        "2,3,45.5625\n");
  const auto overridden = run_cli({"trees", "--config", (dir / "run.ini").string(),
                                   "--max-order", "1", "--outdir", dir.string()},
                                  dir);
  CHECK(overridden.exit_code == 0);
  CHECK(overridden.out ==
        "order,count,bound\n"
        "0,1,1\n"
        "1,1,6.75\n");
}

TEST_CASE("trees: invalid arity exits 2 with a config-category report") {
  const auto dir = scratch("trees_bad_p");
  const auto r = run_cli({"trees", "--p", "1"}, dir);
  CHECK(r.exit_code == 2);
  const json err = error_body(r);
  CHECK(err.at("category") == "config");
  CHECK(err.at("message").get<std::string>().find("p:") != std::string::npos);
}

TEST_CASE("trees: 64-bit count overflow exits 2 with a range category") {
  const auto dir = scratch("trees_overflow");
  const auto r = run_cli({"trees", "--max-order", "37"}, dir);
  CHECK(r.exit_code == 2);
  CHECK(error_body(r).at("category") == "range");
}

TEST_CASE("unknown flags and missing subcommands exit 2") {
  const auto dir = scratch("cli_parse_errors");
  const auto bad_flag = run_cli({"trees", "--no-such-flag"}, dir);
  CHECK(bad_flag.exit_code == 2);
  CHECK(error_body(bad_flag).at("category") == "config");
  const auto no_sub = run_cli({}, dir);
  CHECK(no_sub.exit_code == 2);
}

TEST_CASE("classical: validation lists every violated key") {
  const auto dir = scratch("classical_bad_keys");
  const auto r = run_cli({"classical", "--p", "1", "--grid-n", "7", "--q", "0.2"}, dir);
  CHECK(r.exit_code == 2);
  const json err = error_body(r);
  CHECK(err.at("category") == "config");
  const auto msg = err.at("message").get<std::string>();
  CHECK(msg.find("p:") != std::string::npos);
  CHECK(msg.find("grid-n:") != std::string::npos);
  CHECK(msg.find("q:") != std::string::npos);
}

TEST_CASE("classical: report structure, artifacts, and rerun determinism") {
  const auto dir1 = scratch("classical_run1");
  const std::vector<std::string> args = {
      "classical", "--grid-n", "16",      "--order",        "2",  "--T",
      "0.25",      "--dt",     "0.03125", "--ref-substeps", "2",  "--lambda",
      "0.0625"};
  auto with_outdir = [&](const fs::path& d) {
    auto a = args;
    a.push_back("--outdir");
    a.push_back(d.string());
    return a;
  };
  const auto r1 = run_cli(with_outdir(dir1), dir1);
  CHECK(r1.exit_code == 0);
  const json j = json::parse(r1.out);
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("mode") == "classical");
  CHECK(j.at("orders").size() == 3);
  CHECK(j.at("threshold").get<double>() > 0.0);
  CHECK(j.at("lambda_below_threshold") == true);
  for (const auto& row : j.at("orders")) {
    CHECK(row.at("error_vs_reference").get<double>() >= 0.0);
    CHECK(row.at("residual").get<double>() >= 0.0);
  }
  // Truncation error shrinks when the order rises from 0 to the maximum.
  const double e0 = j.at("orders")[0].at("error_vs_reference").get<double>();
  const double e2 = j.at("orders")[2].at("error_vs_reference").get<double>();
  CHECK(e2 < e0);
  CHECK(slurp(dir1 / "classical.json") == r1.out);
  const std::string series = slurp(dir1 / "classical_series.csv");
  CHECK(series.rfind("t,series_hq,reference_hq,diff_hq,energy\n", 0) == 0);

  const auto dir2 = scratch("classical_run2");
  const auto r2 = run_cli(with_outdir(dir2), dir2);
  CHECK(r2.exit_code == 0);
  // Byte-identical modulo the echoed artifact directory.
  CHECK(json::parse(r2.out).at("orders") == j.at("orders"));
  CHECK(slurp(dir2 / "classical_series.csv") == series);
}

TEST_CASE("classical: free coupling reports three near-zero pairwise errors") {
  const auto dir = scratch("classical_free");
  const auto r = run_cli({"classical", "--lambda", "0", "--grid-n", "16", "--order", "1",
                          "--T", "0.25", "--dt", "0.03125", "--ref-substeps", "2",
                          "--outdir", dir.string()},
                         dir);
  CHECK(r.exit_code == 0);
  const json cmp = json::parse(r.out).at("free_comparison");
  CHECK(cmp.at("series_vs_free").get<double>() == 0.0);
  CHECK(cmp.at("series_vs_reference").get<double>() < 1e-9);
  CHECK(cmp.at("reference_vs_free").get<double>() < 1e-9);
}

TEST_CASE("classical: reference-only skips the series block") {
  const auto dir = scratch("classical_refonly");
  const auto r = run_cli({"classical", "--reference-only", "--grid-n", "16", "--T", "0.25",
                          "--dt", "0.03125", "--outdir", dir.string()},
                         dir);
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("mode") == "classical-reference");
  CHECK(!j.contains("orders"));
  CHECK(j.at("reference").at("energy_max_rel_drift").get<double>() < 1e-4);
  CHECK(slurp(dir / "classical_series.csv").rfind("t,reference_hq,energy\n", 0) == 0);
}

TEST_CASE("classical: runaway focusing coupling exits 3 with a divergence report") {
  const auto dir = scratch("classical_blowup");
  const auto r = run_cli(
      {"classical", "--phi0", "gaussian:center=0.5,sigma=0.08,amp=5", "--phi1", "zero",
       "--normalize", "0", "--lambda", "-60", "--grid-n", "32", "--T", "1", "--dt",
       "0.0078125", "--order", "0", "--ref-substeps", "2"},
      dir);
  CHECK(r.exit_code == 3);
  const json err = error_body(r);
  CHECK(err.at("category") == "divergence");
  CHECK(err.at("message").get<std::string>().find("strang") != std::string::npos);
}

TEST_CASE("quantum: order-0 checks are exact and the report round-trips") {
  const auto dir = scratch("quantum_order0");
  const auto r = run_cli({"quantum", "--order", "0", "--levels", "1", "--dtau", "0.25",
                          "--t", "0.5", "--outdir", dir.string()},
                         dir);
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("mode") == "quantum");
  CHECK(j.at("unitarity").size() == 1);
  CHECK(j.at("unitarity")[0].at("exact") == true);
  CHECK(j.at("unitarity")[0].at("deviations")[0].get<double>() == 0.0);
  CHECK(j.at("series_identity")[0].at("deviations")[0].get<double>() == 0.0);
  CHECK(j.at("grade1_shortcut").at("deviation").get<double>() < 1e-10);
  CHECK(j.at("grade1_shortcut").at("flipped_sign_deviation").get<double>() > 1e-2);
  CHECK(slurp(dir / "quantum.json") == r.out);
}

TEST_CASE("quantum: cutoff too small for the requested grade exits 4") {
  const auto dir = scratch("quantum_truncated");
  const auto r = run_cli({"quantum", "--nmax", "1", "--order", "2"}, dir);
  CHECK(r.exit_code == 4);
  CHECK(error_body(r).at("category") == "truncation");
}

TEST_CASE("convergence: sweep validation failures exit 2") {
  const auto dir = scratch("convergence_bad");
  const auto unknown = run_cli({"convergence", "--param", "mass", "--values", "1,2"}, dir);
  CHECK(unknown.exit_code == 2);
  CHECK(error_body(unknown).at("message").get<std::string>().find("param:") !=
        std::string::npos);

  const auto missing = run_cli({"convergence", "--param", "lambda"}, dir);
  CHECK(missing.exit_code == 2);

  const auto order_fit = run_cli(
      {"convergence", "--param", "order", "--values", "0,1,2", "--fit"}, dir);
  CHECK(order_fit.exit_code == 2);
  CHECK(error_body(order_fit).at("message").get<std::string>().find("fit:") !=
        std::string::npos);

  const auto odd_grid =
      run_cli({"convergence", "--param", "grid_n", "--values", "16,17"}, dir);
  CHECK(odd_grid.exit_code == 2);
  CHECK(error_body(odd_grid).at("message").get<std::string>().find("values[1]") !=
        std::string::npos);
}

TEST_CASE("convergence: coupling sweep fits the expected truncation rate") {
  const auto dir = scratch("convergence_lambda");
  // The step sizes keep the quadrature and reference floors (both linear in
  // lambda) well below the lambda^2 truncation signal across the sweep.
  const auto r = run_cli({"convergence", "--param", "lambda", "--values",
                          "0.25,0.125,0.0625,0.03125", "--order", "1", "--grid-n", "16",
                          "--T", "0.5", "--dt", "0.00390625", "--ref-substeps", "8",
                          "--fit", "--outdir", dir.string()},
                         dir);
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(dir / "convergence.csv");
  CHECK(csv.rfind("param,value,error,residual\n", 0) == 0);
  CHECK(r.out.rfind(csv, 0) == 0);
  const json fit = json::parse(slurp(dir / "convergence_fit.json"));
  CHECK(fit.at("param") == "lambda");
  CHECK(fit.at("column") == "error");
  // Order-1 truncation: error scales like lambda^2.
  CHECK(fit.at("slope").get<double>() == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("convergence: quadrature sweep reports both quantum deviation columns") {
  const auto dir = scratch("convergence_dtau");
  const auto r = run_cli({"convergence", "--param", "dtau", "--values", "0.25,0.125,0.0625",
                          "--order", "2", "--modes", "1", "--nmax", "6", "--t", "0.5",
                          "--fit", "--outdir", dir.string()},
                         dir);
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(dir / "convergence.csv");
  CHECK(csv.rfind("param,value,unitarity_deviation,identity_deviation\n", 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::vector<double> identity;
  while (std::getline(lines, line)) {
    const auto last = line.rfind(',');
    identity.push_back(std::stod(line.substr(last + 1)));
  }
  REQUIRE(identity.size() == 3);
  CHECK(identity[2] < identity[0]);
  const json fit = json::parse(slurp(dir / "convergence_fit.json"));
  CHECK(fit.at("column") == "identity_deviation");
  CHECK(fit.at("slope").get<double>() > 0.5);
}

int run_all(int argc, char** argv) {
  doctest::Context context;
  context.applyCommandLine(argc, argv);
  return context.run();
}

int main(int argc, char** argv) {
  if (argc < 2 || argv[1][0] == '-') {
    std::fprintf(stderr, "usage: test_cli <kgseries-binary> [doctest options]\n");
    return 1;
  }
  g_binary = fs::absolute(argv[1]).string();
  g_root = fs::temp_directory_path() /
           ("kgseries_cli_" + std::to_string(static_cast<long>(::getpid())));
  fs::create_directories(g_root);
  const int rc = run_all(argc - 1, argv + 1);
  std::error_code ec;
  fs::remove_all(g_root, ec);
  return rc;
}
