#include <doctest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hslab/cli.hpp"

using namespace hslab;
using namespace hslab::cli;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

std::string config_error(const std::string& text) {
  try {
    (void)parse_config(text, "cfg.yaml");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Config);
    return e.what();
  }
  FAIL("expected a configuration error");
  return {};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("parses a full configuration") {
    const ExperimentConfig cfg = parse_config(R"(
params: {N: [3, 4], s: 1.0}
grid: {lo: [0, 0, 0], hi: [1, 2, 1], nodes: [8, 16, 8]}
lambda: 0.5
singularities:
  - {location: [0.3, 0.5, 0.5], s: 0.5}
  - {location: [0.7, 0.5, 0.5]}
eps_grid: {first: 1.0e-3, ratio: 0.5, count: 4}
solver: {init: constant, value: 2.0, max_iters: 10}
seed: 42
)");
    CHECK(cfg.N_list == std::vector<int>{3, 4});
    CHECK(cfg.s_list == std::vector<double>{1.0});
    REQUIRE(cfg.grid);
    CHECK(cfg.grid->nodes == std::vector<int>{8, 16, 8});
    CHECK(*cfg.lambda == 0.5);
    REQUIRE(cfg.singularities.size() == 2);
    CHECK(cfg.singularities[0].s == 0.5);
    CHECK(cfg.singularities[1].s == 1.0);
    REQUIRE(cfg.eps_list.size() == 4);
    CHECK(cfg.eps_list[3] == doctest::Approx(1.25e-4));
    CHECK(cfg.solver.init == SolverSpec::Init::Constant);
    CHECK(cfg.solver.options.max_iters == 10);
    CHECK(cfg.seed == 42);
  }

  TEST_CASE("schema errors carry line and column") {
    const std::string bad_s = config_error("params:\n  N: 3\n  s: 2.5\n");
    CHECK(bad_s.find("cfg.yaml:3:") != std::string::npos);
    CHECK(bad_s.find("(0, 2)") != std::string::npos);
    const std::string unknown = config_error("params: {N: 3, s: 1}\nlamda: 1\n");
    CHECK(unknown.find("cfg.yaml:2:") != std::string::npos);
    CHECK(unknown.find("lamda") != std::string::npos);
    CHECK(config_error("grid: {lo: [0, 0], hi: [1, 1], nodes: 4.5}\n").find("cfg.yaml:1:") != std::string::npos);
    CHECK(config_error("grid: {lo: [0, 0, 0], hi: [1, 1, 1], nodes: 8}\nsingularities:\n  - {location: [2, 0, 0]}\n")
              .find("cfg.yaml:3:") != std::string::npos);
    CHECK(config_error("params: {N: 3, s: 1}\nsolver: {init: sideways}\n").find("cfg.yaml:2:") != std::string::npos);
    CHECK_FALSE(config_error("params: [unclosed\n").empty());
  }

  TEST_CASE("commands report missing keys as configuration errors") {
    const ExperimentConfig cfg = parse_config("params: {N: 3, s: 1}\n");
    for (const char* cmd : {"boundary", "solve", "sweep-lambda"}) {
      try {
        (void)run_command(cmd, cfg);
        FAIL("expected Config");
      } catch (const Error& e) {
        CHECK(e.code() == Errc::Config);
      }
    }
    CHECK_THROWS_AS((void)run_command("frobnicate", cfg), Error);
  }

  TEST_CASE("number formatting round-trips with 17 significant digits") {
    CHECK(format_real(1.0) == "1");
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(-2.5e-300) == "-2.5e-300");
    CHECK(format_real(1.0 / 3.0) == "0.33333333333333331");
    for (double v : {std::acos(-1.0), 1.0 / 3.0, 6.02214076e23, 5e-324}) {
      const std::string text = format_real(v);
      double back = 0.0;
      std::from_chars(text.data(), text.data() + text.size(), back);
      CHECK(back == v);
    }
  }

  TEST_CASE("constants output is deterministic") {
    const ExperimentConfig cfg = parse_config("params: {N: [3, 4], s: [0.5, 1.0]}\n");
    const CommandOutput a = run_command("constants", cfg);
    const CommandOutput b = run_command("constants", cfg);
    CHECK(a.csv == b.csv);
    CHECK(a.failures.empty());
    std::istringstream lines(a.csv);
    std::string header, row;
    std::getline(lines, header);
    CHECK(header == "N,s,K0,K1,Ss,interior_threshold,boundary_threshold,ga_quotient");
    int rows = 0;
    while (std::getline(lines, row)) ++rows;
    CHECK(rows == 4);
    CHECK(a.csv.find("\n3,1,4.1887902047863") != std::string::npos);
  }

  TEST_CASE("identities output") {
    const CommandOutput out = run_command("identities", parse_config("params: {N: 4, s: 1}\nbeta_list: [2, 3, 4]\n"));
    CHECK(out.failures.empty());
    CHECK(std::count(out.csv.begin(), out.csv.end(), '\n') == 4);
  }

  TEST_CASE("sweep leaves the solver columns blank for non-positive lambda") {
    const CommandOutput out = run_command("sweep-lambda", parse_config(R"(
grid: {lo: [0, 0, 0], hi: [1, 1, 1], nodes: 8}
lambda_list: [-1.0, 0.05]
singularities:
  - {location: [0.5, 0.5, 0.5]}
)"));
    CHECK(out.failures.empty());
    std::istringstream lines(out.csv);
    std::string header, negative, positive;
    std::getline(lines, header);
    std::getline(lines, negative);
    std::getline(lines, positive);
    CHECK(header == "lambda,constant_path_max,threshold,Lambda_bound,solver_energy,below_threshold,converged");
    CHECK(negative.substr(0, 3) == "-1,");
    CHECK(negative.substr(negative.size() - 3) == ",,,");
    CHECK(positive.find(",true") != std::string::npos);
  }

  TEST_CASE("invocation exit codes") {
    const auto good = write_temp("hslab_cli_good.yaml", "params: {N: 3, s: 1}\n");
    const auto bad = write_temp("hslab_cli_bad.yaml", "params: {N: 3, s: 0}\n");
    const auto csv = std::filesystem::temp_directory_path() / "hslab_cli_out.csv";
    std::ostringstream out, err;
    CHECK(run_invocation({"constants", good.string(), csv.string(), {}, {}}, out, err) == 0);
    CHECK(std::filesystem::file_size(csv) > 0);
    CHECK(out.str().empty());
    CHECK(run_invocation({"constants", good.string(), {}, {}, 1e-9}, out, err) == 0);
    CHECK(out.str().find("N,s,K0") == 0);
    CHECK(run_invocation({"constants", good.string(), {}, {}, -1.0}, out, err) == 2);
    CHECK(run_invocation({"constants", bad.string(), {}, {}, {}}, out, err) == 2);
    CHECK(err.str().find("hslab_cli_bad.yaml:1:") != std::string::npos);
    CHECK(run_invocation({"constants", "/nonexistent/hslab.yaml", {}, {}, {}}, out, err) == 2);
    for (const auto& p : {good, bad, csv}) std::filesystem::remove(p);
  }

  TEST_CASE("shipped example configurations parse") {
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(HSLAB_CONFIG_DIR)) {
      if (entry.path().extension() != ".yaml") continue;
      CAPTURE(entry.path().string());
      CHECK_NOTHROW((void)load_config(entry.path().string()));
      ++count;
    }
    CHECK(count == 5);
  }

  TEST_CASE("every command is registered") {
    CHECK(std::size(kCommands) == 5);
    const ExperimentConfig cfg = parse_config("params: {N: 3, s: 1}\n");
    CHECK_NOTHROW((void)run_command("constants", cfg));
    CHECK_NOTHROW((void)run_command("identities", cfg));
  }
}
