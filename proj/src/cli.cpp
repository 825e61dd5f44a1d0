#include "hslab/cli.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "hslab/extremals.hpp"
#include "hslab/field_io.hpp"
#include "hslab/identities.hpp"
#include "hslab/parallel.hpp"

namespace hslab::cli {

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

namespace {

// ---------------------------------------------------------------- config

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    fail_at(node.Mark(), message);
  }

  [[noreturn]] void fail_at(const YAML::Mark& mark, const std::string& message) const {
    std::string where = source_;
    if (!mark.is_null()) where += ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
    throw Error(Errc::Config, where + ": " + message);
  }

  void only_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed, const std::string& what) const {
    if (!map.IsMap()) fail(map, what + " must be a mapping");
    for (const auto& kv : map) {
      const std::string key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(kv.first, "unknown key '" + key + "' in " + what);
      }
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, what + " has the wrong type ('" + node.Scalar() + "')");
    }
  }

  double real(const YAML::Node& node, const std::string& what) const {
    const double v = scalar<double>(node, what);
    if (!std::isfinite(v)) fail(node, what + " must be finite");
    return v;
  }

  double positive(const YAML::Node& node, const std::string& what) const {
    const double v = real(node, what);
    if (!(v > 0.0)) fail(node, what + " must be positive");
    return v;
  }

  double exponent(const YAML::Node& node, const std::string& what) const {
    const double v = real(node, what);
    if (!(v > 0.0 && v < 2.0)) fail(node, what + " = " + node.Scalar() + " must lie in (0, 2)");
    return v;
  }

  int integer(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be an integer");
    long long v = 0;
    const std::string& text = node.Scalar();
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || v > 1'000'000'000 || v < -1'000'000'000) {
      fail(node, what + " must be an integer ('" + text + "')");
    }
    return static_cast<int>(v);
  }

  /// A scalar or a sequence of scalars.
  template <class F>
  auto list(const YAML::Node& node, const std::string& what, F&& item) const {
    using T = decltype(item(node, what));
    std::vector<T> out;
    if (node.IsSequence()) {
      if (node.size() == 0) fail(node, what + " must not be empty");
      for (std::size_t i = 0; i < node.size(); ++i) out.push_back(item(node[i], what + "[" + std::to_string(i) + "]"));
    } else {
      out.push_back(item(node, what));
    }
    return out;
  }

  std::vector<double> reals(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, what + " must be a sequence");
    return list(node, what, [this](const YAML::Node& n, const std::string& w) { return real(n, w); });
  }

 private:
  std::string source_;
};

GridSpec parse_grid(const Reader& rd, const YAML::Node& node) {
  rd.only_keys(node, {"lo", "hi", "nodes"}, "grid");
  for (const char* key : {"lo", "hi", "nodes"}) {
    if (!node[key]) rd.fail(node, std::string("grid needs '") + key + "'");
  }
  GridSpec g{rd.reals(node["lo"], "grid.lo"), rd.reals(node["hi"], "grid.hi"), {}};
  const YAML::Node nodes = node["nodes"];
  if (nodes.IsSequence()) {
    g.nodes = rd.list(nodes, "grid.nodes", [&](const YAML::Node& n, const std::string& w) { return rd.integer(n, w); });
  } else {
    g.nodes.assign(g.lo.size(), rd.integer(nodes, "grid.nodes"));
  }
  if (g.lo.size() != g.hi.size() || g.lo.size() != g.nodes.size()) {
    rd.fail(node, "grid.lo, grid.hi and grid.nodes must have equal lengths");
  }
  if (g.lo.size() < 3) rd.fail(node, "grid must have dimension at least 3");
  for (std::size_t d = 0; d < g.lo.size(); ++d) {
    if (!(g.lo[d] < g.hi[d])) rd.fail(node, "grid.lo must be below grid.hi on every axis");
    if (g.nodes[d] < 8) rd.fail(nodes, "grid.nodes must be at least 8 per axis");
  }
  return g;
}

void apply_solver(const Reader& rd, const YAML::Node& node, SolverSpec& spec) {
  rd.only_keys(node, {"init", "site", "eps", "value", "max_iters", "grad_tol", "min_step", "max_step", "armijo"},
               "solver");
  if (const auto n = node["init"]) {
    const std::string kind = rd.scalar<std::string>(n, "solver.init");
    static const std::map<std::string, SolverSpec::Init> kinds = {{"default", SolverSpec::Init::Default},
                                                                  {"bubble", SolverSpec::Init::Bubble},
                                                                  {"constant", SolverSpec::Init::Constant},
                                                                  {"random", SolverSpec::Init::Random}};
    const auto it = kinds.find(kind);
    if (it == kinds.end()) rd.fail(n, "solver.init must be one of default, bubble, constant, random");
    spec.init = it->second;
  }
  if (const auto n = node["site"]) {
    const int site = rd.integer(n, "solver.site");
    if (site < 0) rd.fail(n, "solver.site must be non-negative");
    spec.site = static_cast<std::size_t>(site);
  }
  if (const auto n = node["eps"]) spec.eps = rd.positive(n, "solver.eps");
  if (const auto n = node["value"]) spec.value = rd.positive(n, "solver.value");
  if (const auto n = node["max_iters"]) {
    spec.options.max_iters = rd.integer(n, "solver.max_iters");
    if (spec.options.max_iters < 1) rd.fail(n, "solver.max_iters must be positive");
  }
  if (const auto n = node["grad_tol"]) spec.options.grad_tol = rd.positive(n, "solver.grad_tol");
  if (const auto n = node["min_step"]) spec.options.min_step = rd.positive(n, "solver.min_step");
  if (const auto n = node["max_step"]) spec.options.max_step = rd.positive(n, "solver.max_step");
  if (const auto n = node["armijo"]) {
    spec.options.armijo = rd.positive(n, "solver.armijo");
    if (spec.options.armijo >= 1.0) rd.fail(n, "solver.armijo must be below 1");
  }
}

void apply_quadrature(const Reader& rd, const YAML::Node& node, QuadratureSettings& q) {
  rd.only_keys(node, {"rel_tol", "abs_tol", "max_subdivisions", "split_radius"}, "quadrature");
  if (const auto n = node["rel_tol"]) q.rel_tol = rd.positive(n, "quadrature.rel_tol");
  if (const auto n = node["abs_tol"]) q.abs_tol = rd.positive(n, "quadrature.abs_tol");
  if (const auto n = node["split_radius"]) q.split_radius = rd.positive(n, "quadrature.split_radius");
  if (const auto n = node["max_subdivisions"]) {
    q.max_subdivisions = rd.integer(n, "quadrature.max_subdivisions");
    if (q.max_subdivisions < 1) rd.fail(n, "quadrature.max_subdivisions must be positive");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    rd.fail_at(e.mark, e.msg);
  }
  if (!root.IsMap()) rd.fail(root, "top level must be a mapping");
  rd.only_keys(root,
               {"params", "geometry", "far_sites", "grid", "lambda", "lambda_list", "singularities", "eps_list",
                "eps_grid", "beta_list", "ga_base", "solver", "quadrature", "seed", "output", "snapshot"},
               "top level");

  ExperimentConfig cfg;
  if (const auto params = root["params"]) {
    rd.only_keys(params, {"N", "s"}, "params");
    if (const auto n = params["N"]) {
      cfg.N_list = rd.list(n, "params.N", [&](const YAML::Node& x, const std::string& w) {
        const int N = rd.integer(x, w);
        if (N < 3) rd.fail(x, w + " must be at least 3");
        return N;
      });
    }
    if (const auto n = params["s"]) {
      cfg.s_list = rd.list(n, "params.s", [&](const YAML::Node& x, const std::string& w) { return rd.exponent(x, w); });
    }
  }
  if (const auto geom = root["geometry"]) {
    rd.only_keys(geom, {"curvatures", "delta"}, "geometry");
    GeometrySpec g;
    if (const auto n = geom["curvatures"]) g.curvatures = rd.reals(n, "geometry.curvatures");
    if (const auto n = geom["delta"]) g.delta = rd.positive(n, "geometry.delta");
    if (cfg.N_list.size() == 1 && geom["curvatures"] &&
        g.curvatures.size() != static_cast<std::size_t>(cfg.N_list.front() - 1)) {
      rd.fail(geom["curvatures"], "geometry.curvatures needs N - 1 = " + std::to_string(cfg.N_list.front() - 1) +
                                      " entries");
    }
    cfg.geometry = g;
  }
  if (const auto far = root["far_sites"]) {
    if (!far.IsSequence()) rd.fail(far, "far_sites must be a sequence");
    for (std::size_t i = 0; i < far.size(); ++i) {
      const std::string w = "far_sites[" + std::to_string(i) + "]";
      rd.only_keys(far[i], {"distance", "s"}, w);
      if (!far[i]["distance"] || !far[i]["s"]) rd.fail(far[i], w + " needs 'distance' and 's'");
      cfg.far_sites.push_back({rd.positive(far[i]["distance"], w + ".distance"), rd.exponent(far[i]["s"], w + ".s")});
    }
  }
  if (const auto grid = root["grid"]) cfg.grid = parse_grid(rd, grid);
  if (const auto n = root["lambda"]) cfg.lambda = rd.real(n, "lambda");
  if (const auto n = root["lambda_list"]) cfg.lambda_list = rd.reals(n, "lambda_list");
  if (const auto sings = root["singularities"]) {
    if (!sings.IsSequence() || sings.size() == 0) rd.fail(sings, "singularities must be a non-empty sequence");
    for (std::size_t i = 0; i < sings.size(); ++i) {
      const std::string w = "singularities[" + std::to_string(i) + "]";
      rd.only_keys(sings[i], {"location", "s"}, w);
      if (!sings[i]["location"]) rd.fail(sings[i], w + " needs 'location'");
      const std::vector<double> loc = rd.reals(sings[i]["location"], w + ".location");
      if (cfg.grid && loc.size() != cfg.grid->lo.size()) rd.fail(sings[i]["location"], w + ".location has wrong dimension");
      if (cfg.grid) {
        for (std::size_t d = 0; d < loc.size(); ++d) {
          if (loc[d] < cfg.grid->lo[d] || loc[d] > cfg.grid->hi[d]) {
            rd.fail(sings[i]["location"], w + ".location lies outside the grid box");
          }
        }
      }
      const double s = sings[i]["s"] ? rd.exponent(sings[i]["s"], w + ".s") : 1.0;
      cfg.singularities.push_back({Eigen::Map<const Eigen::VectorXd>(loc.data(), static_cast<Eigen::Index>(loc.size())), s});
      for (std::size_t j = 0; j < i; ++j) {
        if ((cfg.singularities[j].location - cfg.singularities[i].location).norm() == 0.0) {
          rd.fail(sings[i], w + " repeats the location of singularities[" + std::to_string(j) + "]");
        }
      }
    }
  }
  if (const auto n = root["eps_list"]) {
    cfg.eps_list = rd.list(n, "eps_list", [&](const YAML::Node& x, const std::string& w) { return rd.positive(x, w); });
  }
  if (const auto n = root["eps_grid"]) {
    if (root["eps_list"]) rd.fail(n, "give either eps_list or eps_grid, not both");
    rd.only_keys(n, {"first", "ratio", "count"}, "eps_grid");
    if (!n["first"] || !n["ratio"] || !n["count"]) rd.fail(n, "eps_grid needs 'first', 'ratio' and 'count'");
    const int count = rd.integer(n["count"], "eps_grid.count");
    if (count < 1) rd.fail(n["count"], "eps_grid.count must be positive");
    cfg.eps_list = geometric_grid(rd.positive(n["first"], "eps_grid.first"), rd.positive(n["ratio"], "eps_grid.ratio"),
                                  count);
  }
  if (const auto n = root["beta_list"]) cfg.beta_list = rd.reals(n, "beta_list");
  if (const auto n = root["ga_base"]) {
    const std::string base = rd.scalar<std::string>(n, "ga_base");
    if (base == "linear") cfg.ga_base = GaBase::Linear;
    else if (base == "power") cfg.ga_base = GaBase::Power;
    else rd.fail(n, "ga_base must be 'linear' or 'power'");
  }
  if (const auto n = root["solver"]) apply_solver(rd, n, cfg.solver);
  if (const auto n = root["quadrature"]) apply_quadrature(rd, n, cfg.quadrature);
  if (const auto n = root["seed"]) {
    const int seed = rd.integer(n, "seed");
    if (seed < 0) rd.fail(n, "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (const auto n = root["output"]) cfg.output = rd.scalar<std::string>(n, "output");
  if (const auto n = root["snapshot"]) cfg.snapshot = rd.scalar<std::string>(n, "snapshot");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

namespace {

// ---------------------------------------------------------------- CSV

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : columns_(header.size()) { line(header); }

  Csv& add(double v) { return push(format_real(v)); }
  Csv& add(int v) { return push(std::to_string(v)); }
  Csv& add(bool v) { return push(v ? "true" : "false"); }
  Csv& add(const std::string& v) { return push(v); }
  Csv& add(const char* v) { return push(v); }
  Csv& blank() { return push(""); }

  void end_row() {
    if (cells_.size() != columns_) throw std::logic_error("CSV row width does not match header");
    line(cells_);
    cells_.clear();
  }

  const std::string& text() const { return text_; }

 private:
  Csv& push(std::string cell) {
    cells_.push_back(std::move(cell));
    return *this;
  }

  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::size_t columns_;
  std::vector<std::string> cells_;
  std::string text_;
};

[[noreturn]] void missing(std::string_view command, const std::string& key) {
  throw Error(Errc::Config, std::string(command) + " needs '" + key + "' in the config");
}

std::string label(int N, double s) { return "N=" + std::to_string(N) + " s=" + format_real(s); }

std::vector<std::pair<int, double>> param_pairs(std::string_view command, const ExperimentConfig& cfg) {
  if (cfg.N_list.empty()) missing(command, "params.N");
  if (cfg.s_list.empty()) missing(command, "params.s");
  std::vector<std::pair<int, double>> out;
  for (int N : cfg.N_list) {
    for (double s : cfg.s_list) out.emplace_back(N, s);
  }
  return out;
}

std::vector<double> default_betas(const HSParams& p) {
  const double hi = 2.0 * (p.dim() - p.s()) - 1.0;
  std::vector<double> out;
  for (int k = 0; k <= 4; ++k) out.push_back(2.0 + k * (hi - 2.0) / 4.0);
  return out;
}

CommandOutput cmd_constants(const ExperimentConfig& cfg) {
  const auto pairs = param_pairs("constants", cfg);
  struct Row {
    WholeSpaceConstants k{};
    double interior = 0.0, boundary = 0.0, quotient = 0.0;
    std::string error;
  };
  std::vector<Row> rows(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    try {
      const HSParams p(pairs[i].first, pairs[i].second);
      rows[i].k = whole_space_constants(p, cfg.quadrature);
      rows[i].interior = site_threshold(p.dim(), {Placement::Interior, p.s()}, cfg.quadrature);
      rows[i].boundary = site_threshold(p.dim(), {Placement::Boundary, p.s()}, cfg.quadrature);
      rows[i].quotient = rayleigh_quotient_check(1.0, p, cfg.quadrature, cfg.ga_base);
    } catch (const Error& e) {
      rows[i].error = e.what();
    }
  });
  CommandOutput out;
  Csv csv({"N", "s", "K0", "K1", "Ss", "interior_threshold", "boundary_threshold", "ga_quotient"});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!rows[i].error.empty()) {
      out.failures.push_back(label(pairs[i].first, pairs[i].second) + ": " + rows[i].error);
      continue;
    }
    csv.add(pairs[i].first).add(pairs[i].second).add(rows[i].k.K0).add(rows[i].k.K1).add(rows[i].k.Ss);
    csv.add(rows[i].interior).add(rows[i].boundary).add(rows[i].quotient).end_row();
  }
  out.csv = csv.text();
  return out;
}

CommandOutput cmd_identities(const ExperimentConfig& cfg) {
  const auto pairs = param_pairs("identities", cfg);
  CommandOutput out;
  Csv csv({"N", "s", "beta", "lhs", "rhs", "rel_diff", "ratio_limit", "ks_ratio", "ks_ratio_quadrature", "strict_gap"});
  for (const auto& [N, s] : pairs) {
    try {
      const HSParams p(N, s);
      const KsRatio ks = ks_ratio(p, cfg.quadrature);
      for (double beta : cfg.beta_list.empty() ? default_betas(p) : cfg.beta_list) {
        try {
          const RecurrenceCheck r = beta_recurrence_check(beta, p, cfg.quadrature);
          csv.add(N).add(s).add(beta).add(r.lhs).add(r.rhs).add(r.rel_diff);
          csv.add(ratio_limit(p)).add(ks.closed).add(ks.quadrature).add(strict_gap(p)).end_row();
        } catch (const Error& e) {
          out.failures.push_back(label(N, s) + " beta=" + format_real(beta) + ": " + e.what());
        }
      }
    } catch (const Error& e) {
      out.failures.push_back(label(N, s) + ": " + e.what());
    }
  }
  out.csv = csv.text();
  return out;
}

CommandOutput cmd_boundary(const ExperimentConfig& cfg) {
  if (cfg.N_list.size() != 1 || cfg.s_list.size() != 1) {
    throw Error(Errc::Config, "boundary needs a single params.N and params.s");
  }
  if (!cfg.geometry) missing("boundary", "geometry");
  if (cfg.eps_list.empty()) missing("boundary", "eps_list");
  if (!cfg.lambda) missing("boundary", "lambda");
  const HSParams p(cfg.N_list.front(), cfg.s_list.front());
  std::vector<double> curv = cfg.geometry->curvatures;
  if (curv.empty()) curv.assign(p.dim() - 1, 0.0);
  const BoundaryGeometry geom(curv, cfg.geometry->delta);
  const CutoffSpec cut{cfg.geometry->delta};
  const double threshold = site_threshold(p.dim(), {Placement::Boundary, p.s()}, cfg.quadrature);

  struct Row {
    EnergyBreakdown b;
    SupT sup{};
    std::string error;
  };
  std::vector<Row> rows(cfg.eps_list.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    try {
      rows[i].b = bubble_energies(cfg.eps_list[i], geom, cut, cfg.far_sites, p, cfg.quadrature);
      rows[i].sup = sup_t_energy(rows[i].b, *cfg.lambda, p);
    } catch (const Error& e) {
      rows[i].error = e.what();
    }
  });

  std::vector<std::string> header = {"kind", "eps", "K0e", "K1e", "K3e", "K2e_total"};
  for (std::size_t j = 0; j < cfg.far_sites.size(); ++j) header.push_back("K2e_" + std::to_string(j));
  for (const char* h : {"I_eps", "II_eps", "II_over_I", "sup_energy", "t_star", "threshold", "margin",
                        "normalized_margin"}) {
    header.emplace_back(h);
  }
  Csv csv(header);
  CommandOutput out;
  std::vector<double> eps_ok;
  std::map<std::string, std::vector<double>> series;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double eps = cfg.eps_list[i];
    if (!rows[i].error.empty()) {
      out.failures.push_back("eps=" + format_real(eps) + ": " + rows[i].error);
      continue;
    }
    const EnergyBreakdown& b = rows[i].b;
    const double margin = threshold - rows[i].sup.value;
    csv.add("point").add(eps).add(b.K0e).add(b.K1e).add(b.K3e).add(b.far_total());
    for (double k : b.K2e) csv.add(k);
    csv.add(b.I_eps).add(b.II_eps);
    if (b.I_eps > 0.0) csv.add(b.II_eps / b.I_eps);
    else csv.blank();
    csv.add(rows[i].sup.value).add(rows[i].sup.t_star).add(threshold).add(margin).add(margin / p.bubble_radius(eps));
    csv.end_row();
    eps_ok.push_back(eps);
    series["K3e"].push_back(b.K3e);
    series["K2e_total"].push_back(b.far_total());
    for (std::size_t j = 0; j < b.K2e.size(); ++j) series["K2e_" + std::to_string(j)].push_back(b.K2e[j]);
    series["I_eps"].push_back(b.I_eps);
    series["II_eps"].push_back(b.II_eps);
  }
  // Summary row: log-log slopes against eps where the series is positive.
  auto slope = [&](const std::string& key) {
    const auto it = series.find(key);
    if (it == series.end() || eps_ok.size() < 2) return std::string();
    if (std::any_of(it->second.begin(), it->second.end(), [](double v) { return !(v > 0.0); })) return std::string();
    return format_real(fit_loglog_slope(eps_ok, it->second));
  };
  csv.add("slope").blank().blank().blank().add(slope("K3e")).add(slope("K2e_total"));
  for (std::size_t j = 0; j < cfg.far_sites.size(); ++j) csv.add(slope("K2e_" + std::to_string(j)));
  csv.add(slope("I_eps")).add(slope("II_eps"));
  for (int k = 0; k < 6; ++k) csv.blank();
  csv.end_row();
  out.csv = csv.text();
  return out;
}

ProblemConfig problem_config(std::string_view command, const ExperimentConfig& cfg, double lambda) {
  if (!cfg.grid) missing(command, "grid");
  if (cfg.singularities.empty()) missing(command, "singularities");
  const GridSpec& g = *cfg.grid;
  const auto n = static_cast<Eigen::Index>(g.lo.size());
  DomainGrid grid(Eigen::Map<const Eigen::VectorXd>(g.lo.data(), n), Eigen::Map<const Eigen::VectorXd>(g.hi.data(), n),
                  g.nodes);
  return {std::move(grid), lambda, cfg.singularities};
}

SolverInit solver_init(const DiscreteProblem& problem, const ExperimentConfig& cfg) {
  const SolverSpec& spec = cfg.solver;
  switch (spec.init) {
    case SolverSpec::Init::Default:
      return default_init(problem, cfg.quadrature);
    case SolverSpec::Init::Bubble: {
      if (spec.site >= problem.singularities().size()) throw Error(Errc::Config, "solver.site is out of range");
      double eps = spec.eps;
      if (eps == 0.0) {
        eps = std::pow(4.0 * problem.grid().spacing().minCoeff(), 2.0 - problem.singularities()[spec.site].s);
      }
      return InitBubble{spec.site, eps};
    }
    case SolverSpec::Init::Constant:
      return InitConstant{spec.value};
    case SolverSpec::Init::Random: {
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> dist(0.5, 1.5);
      DiscreteField u(problem.grid().size());
      for (auto& v : u) v = spec.value * dist(rng);
      return InitCustom{std::move(u)};
    }
  }
  throw Error(Errc::Config, "unknown solver.init");
}

std::string placement_list(const DiscreteProblem& problem) {
  std::string out;
  for (Placement pl : problem.placements()) {
    if (!out.empty()) out += ';';
    out += placement_name(pl);
  }
  return out;
}

std::string snapshot_path(const ExperimentConfig& cfg) {
  if (cfg.snapshot) return *cfg.snapshot;
  if (cfg.output) {
    std::filesystem::path p(*cfg.output);
    p.replace_extension(".field.bin");
    return p.string();
  }
  return "solution.field.bin";
}

CommandOutput cmd_solve(const ExperimentConfig& cfg) {
  if (!cfg.lambda) missing("solve", "lambda");
  const DiscreteProblem problem(problem_config("solve", cfg, *cfg.lambda));
  const SolveReport report = mountain_pass_solve(problem, solver_init(problem, cfg), cfg.solver.options, cfg.quadrature);
  CommandOutput out;
  Csv csv({"N", "lambda", "energy", "residual_sup", "min_value", "iterations", "threshold", "below_threshold",
           "converged", "positive", "placements"});
  csv.add(problem.grid().dim()).add(problem.lambda()).add(report.energy).add(report.residual_sup);
  csv.add(report.min_value).add(report.iterations).add(report.threshold).add(report.below_threshold);
  csv.add(report.converged).add(report.min_value > 0.0).add(placement_list(problem)).end_row();
  out.csv = csv.text();
  if (!report.converged) {
    out.failures.push_back("solver stopped after " + std::to_string(report.iterations) +
                           " iterations with residual_sup " + format_real(report.residual_sup));
  }
  write_field_snapshot(snapshot_path(cfg), problem.grid(), report.solution);
  return out;
}

double existence_bound(const DiscreteProblem& problem, double threshold, const QuadratureSettings& q) {
  const ConstantPath path = problem.constant_path();
  if (path.terms.size() == 1) {
    const auto sites = problem.sites();
    return lambda_existence_bound(path.volume, path.terms.front().coefficient, sites,
                                  HSParams(problem.grid().dim(), sites.front().s), q);
  }
  return lambda_bound_by_scan(path.volume, path.terms, threshold);
}

CommandOutput cmd_sweep_lambda(const ExperimentConfig& cfg) {
  if (cfg.lambda_list.empty()) missing("sweep-lambda", "lambda_list");
  const DiscreteProblem base(problem_config("sweep-lambda", cfg, cfg.lambda_list.front()));
  const double threshold = ps_threshold(base.grid().dim(), base.sites(), cfg.quadrature).overall;
  const double bound = existence_bound(base, threshold, cfg.quadrature);
  CommandOutput out;
  Csv csv({"lambda", "constant_path_max", "threshold", "Lambda_bound", "solver_energy", "below_threshold",
           "converged"});
  for (double lambda : cfg.lambda_list) {
    try {
      const DiscreteProblem problem = base.with_lambda(lambda);
      const ScanMaximum cmax = maximize_constant_path(problem.constant_path());
      csv.add(lambda).add(cmax.value).add(threshold).add(bound);
      if (lambda > 0.0) {
        const SolveReport r =
            mountain_pass_solve(problem, solver_init(problem, cfg), cfg.solver.options, cfg.quadrature);
        csv.add(r.energy).add(r.below_threshold).add(r.converged);
        if (!r.converged) {
          out.failures.push_back("lambda=" + format_real(lambda) + ": solver did not converge (residual_sup " +
                                 format_real(r.residual_sup) + ")");
        }
      } else {
        csv.blank().blank().blank();
      }
      csv.end_row();
    } catch (const Error& e) {
      out.failures.push_back("lambda=" + format_real(lambda) + ": " + e.what());
    }
  }
  out.csv = csv.text();
  return out;
}

}  // namespace

CommandOutput run_command(std::string_view command, const ExperimentConfig& cfg) {
  if (command == "constants") return cmd_constants(cfg);
  if (command == "identities") return cmd_identities(cfg);
  if (command == "boundary") return cmd_boundary(cfg);
  if (command == "solve") return cmd_solve(cfg);
  if (command == "sweep-lambda") return cmd_sweep_lambda(cfg);
  throw Error(Errc::Config, "unknown command '" + std::string(command) + "'");
}

int run_invocation(const Invocation& inv, std::ostream& out, std::ostream& err) {
  CommandOutput result;
  ExperimentConfig cfg;
  try {
    cfg = load_config(inv.config_path);
    if (inv.out) cfg.output = inv.out;
    if (inv.seed) cfg.seed = *inv.seed;
    if (inv.tol) {
      if (!(*inv.tol > 0.0) || !std::isfinite(*inv.tol)) throw Error(Errc::Config, "--tol must be positive");
      cfg.quadrature.rel_tol = *inv.tol;
    }
    result = run_command(inv.command, cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::Config || e.code() == Errc::Io ? 2 : 1;
  }
  if (cfg.output) {
    std::ofstream file(*cfg.output, std::ios::trunc);
    if (!(file << result.csv)) {
      err << "error: cannot write " << *cfg.output << '\n';
      return 2;
    }
  } else {
    out << result.csv;
  }
  for (const auto& f : result.failures) err << "failed: " << f << '\n';
  return result.failures.empty() ? 0 : 1;
}

}  // namespace hslab::cli
