#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hslab/boundary_energy.hpp"
#include "hslab/extremals.hpp"
#include "hslab/variational.hpp"

namespace hslab::cli {

struct GridSpec {
  std::vector<double> lo, hi;
  std::vector<int> nodes;
};

struct GeometrySpec {
  std::vector<double> curvatures;
  double delta = 0.5;
};

struct SolverSpec {
  enum class Init { Default, Bubble, Constant, Random };
  Init init = Init::Default;
  std::size_t site = 0;
  double eps = 0.0;  ///< bubble parameter; 0 picks the default length scale
  double value = 1.0;
  SolverOptions options;
};

/// Parsed experiment description; every command reads the subset it needs.
struct ExperimentConfig {
  std::vector<int> N_list;
  std::vector<double> s_list;
  std::optional<GeometrySpec> geometry;
  std::vector<FarSite> far_sites;
  std::optional<GridSpec> grid;
  std::optional<double> lambda;
  std::vector<double> lambda_list;
  std::vector<Singularity> singularities;
  std::vector<double> eps_list;
  std::vector<double> beta_list;
  GaBase ga_base = GaBase::Linear;
  SolverSpec solver;
  QuadratureSettings quadrature;
  std::uint64_t seed = 0;
  std::optional<std::string> output;
  std::optional<std::string> snapshot;
};

/// Parses and schema-checks a YAML (or JSON) document. Errors are thrown as
/// Errc::Config with "source:line:column:" prefixes.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

inline constexpr std::string_view kCommands[] = {"constants", "identities", "boundary", "solve", "sweep-lambda"};

struct CommandOutput {
  std::string csv;
  /// One line per failed row or step; empty when everything succeeded.
  std::vector<std::string> failures;
};

/// Runs one command. Missing command-specific keys raise Errc::Config before
/// any computation starts.
CommandOutput run_command(std::string_view command, const ExperimentConfig& cfg);

struct Invocation {
  std::string command;
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

/// Full pipeline behind the executable: load, override, run, write. Returns
/// 0 on success, 1 when some computation failed, 2 on configuration or I/O
/// errors. Failures are listed on `err`; CSV goes to the output file, or to
/// `out` when none is configured.
int run_invocation(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Round-trip-safe decimal with 17 significant digits, locale independent.
std::string format_real(double v);

}  // namespace hslab::cli
