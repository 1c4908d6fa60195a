#pragma once

// JSON run configuration shared by the solve, converge and gexp commands.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gheat/bench.hpp"
#include "gheat/core.hpp"
#include "gheat/gexp.hpp"

namespace gheat::cli {

/// A configuration problem anchored at a field path such as "grid.M".
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

/// Problem data given as expressions (see expression.hpp).
struct InlineProblem {
  std::string initial;
  std::string boundary;
  std::string forcing;  // empty: zero forcing
  std::string exact;    // empty: compare against a reference solution
  friend bool operator==(const InlineProblem&, const InlineProblem&) = default;
};

struct GExpSection {
  std::string payoff = "x*y";
  double x0 = 0.0;
  double y0 = 0.0;
  std::optional<double> half_width;
  std::string boundary;        // empty: frozen payoff
  std::string lower_boundary;  // boundary for the negated payoff
  double diagnostic_threshold = 1e-3;
  friend bool operator==(const GExpSection&, const GExpSection&) = default;
};

struct RunConfig {
  std::string problem = "example1";  // "example1", "example2" or "inline"
  std::optional<InlineProblem> inline_problem;
  UncertaintyBox box = bench::example_box();

  double half_width = 1.0;
  int cells = 10;
  double horizon = 1.0;
  int steps = 50;

  double tol_picard = 1e-9;
  double tol_lin = 1e-12;
  int k_max = 50;
  bool record_coefficients = true;
  bool override_diag_dom = false;

  std::string out_dir = "out";
  std::vector<double> slice_times;  // empty: final time only

  std::vector<bench::ConvergenceLevel> levels = bench::table_levels();
  int reference_cells = 320;
  int reference_steps = 6400;
  std::string cache_dir;  // empty: <out_dir>/cache

  GExpSection gexp;

  int jobs = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  /// Semantic checks beyond the JSON shape; throws ConfigError.
  void validate() const;

  Grid grid() const;
  SolverConfig solver() const;
  /// The problem with compiled-in data for built-ins, parsed expressions
  /// otherwise. Throws ConfigError for bad expressions.
  ProblemSpec problem_spec() const;
  /// Exact solution if one is known (example1 or inline "exact").
  std::optional<SpaceTimeFunction> exact_solution() const;
  gexp::GExpQuery gexp_query() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Missing fields keep their defaults; unknown fields are rejected.
RunConfig from_json(const nlohmann::json& doc);

/// Parses JSON text; syntax errors report the byte offset.
nlohmann::json parse_json_text(const std::string& text, const std::string& source_name);
RunConfig load_config(const std::string& path);

/// Applies "a.b.c=value" overrides; the value is read as JSON when it parses,
/// as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace gheat::cli
