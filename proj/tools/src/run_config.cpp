#include "gheat/cli/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "gheat/cli/expression.hpp"

namespace gheat::cli {

using nlohmann::json;

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; }))
      throw ConfigError(join_path(path, item.key()), "unknown field");
  }
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

int read_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(path, "integer out of range");
  return static_cast<int>(v);
}

bool read_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::pair<double, double> read_interval(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected [lo, hi]");
  return {read_number(j[0], path + "[0]"), read_number(j[1], path + "[1]")};
}

template <typename F>
void field(const json& obj, const char* key, const std::string& path, F&& apply) {
  if (auto it = obj.find(key); it != obj.end()) apply(*it, join_path(path, key));
}

UncertaintyBox read_box(const json& j, const std::string& path, UncertaintyBox box) {
  require_object(j, path);
  check_keys(j, path, {"sigma1_sq", "sigma2_sq", "sigma1", "sigma2", "b12"});
  if (j.contains("sigma1_sq") && j.contains("sigma1"))
    throw ConfigError(join_path(path, "sigma1"), "give either sigma1 or sigma1_sq");
  if (j.contains("sigma2_sq") && j.contains("sigma2"))
    throw ConfigError(join_path(path, "sigma2"), "give either sigma2 or sigma2_sq");
  field(j, "sigma1_sq", path, [&](const json& v, const std::string& p) {
    std::tie(box.sigma1_sq_lo, box.sigma1_sq_hi) = read_interval(v, p);
  });
  field(j, "sigma2_sq", path, [&](const json& v, const std::string& p) {
    std::tie(box.sigma2_sq_lo, box.sigma2_sq_hi) = read_interval(v, p);
  });
  field(j, "sigma1", path, [&](const json& v, const std::string& p) {
    const auto [lo, hi] = read_interval(v, p);
    box.sigma1_sq_lo = lo * lo;
    box.sigma1_sq_hi = hi * hi;
  });
  field(j, "sigma2", path, [&](const json& v, const std::string& p) {
    const auto [lo, hi] = read_interval(v, p);
    box.sigma2_sq_lo = lo * lo;
    box.sigma2_sq_hi = hi * hi;
  });
  field(j, "b12", path, [&](const json& v, const std::string& p) {
    std::tie(box.b12_lo, box.b12_hi) = read_interval(v, p);
  });
  return box;
}

Expression parse_field(const std::string& text, const std::string& path) {
  try {
    return parse_expression(text);
  } catch (const ParseError& e) {
    throw ConfigError(path, e.what());
  }
}

void check_level(int cells, int steps, const std::string& path_m, const std::string& path_n) {
  if (cells < 2 || cells % 2 != 0)
    throw ConfigError(path_m, "cells per axis must be even and at least 2 (the origin must be a node)");
  if (steps < 1) throw ConfigError(path_n, "number of time steps must be at least 1");
}

}  // namespace

json to_json(const RunConfig& c) {
  json doc;
  if (c.problem == "inline" && c.inline_problem) {
    json p = {{"initial", c.inline_problem->initial}, {"boundary", c.inline_problem->boundary}};
    if (!c.inline_problem->forcing.empty()) p["forcing"] = c.inline_problem->forcing;
    if (!c.inline_problem->exact.empty()) p["exact"] = c.inline_problem->exact;
    doc["problem"] = p;
  } else {
    doc["problem"] = c.problem;
  }
  doc["box"] = {{"sigma1_sq", {c.box.sigma1_sq_lo, c.box.sigma1_sq_hi}},
                {"sigma2_sq", {c.box.sigma2_sq_lo, c.box.sigma2_sq_hi}},
                {"b12", {c.box.b12_lo, c.box.b12_hi}}};
  doc["grid"] = {{"L", c.half_width}, {"M", c.cells}, {"T", c.horizon}, {"N", c.steps}};
  doc["solver"] = {{"tol_picard", c.tol_picard}, {"tol_lin", c.tol_lin}, {"k_max", c.k_max}};
  doc["flags"] = {{"record_coefficients", c.record_coefficients},
                  {"override_diag_dom", c.override_diag_dom}};
  doc["output"] = {{"dir", c.out_dir}, {"slice_times", c.slice_times}};
  json levels = json::array();
  for (const auto& l : c.levels) levels.push_back({l.cells, l.steps});
  doc["levels"] = levels;
  doc["reference"] = {{"M", c.reference_cells}, {"N", c.reference_steps}, {"cache_dir", c.cache_dir}};
  json g = {{"payoff", c.gexp.payoff},
            {"x0", c.gexp.x0},
            {"y0", c.gexp.y0},
            {"L", c.gexp.half_width ? json(*c.gexp.half_width) : json(nullptr)},
            {"boundary", c.gexp.boundary},
            {"lower_boundary", c.gexp.lower_boundary},
            {"threshold", c.gexp.diagnostic_threshold}};
  doc["gexp"] = g;
  doc["jobs"] = c.jobs;
  doc["seed"] = c.seed;
  return doc;
}

RunConfig from_json(const json& doc) {
  RunConfig c;
  require_object(doc, "");
  check_keys(doc, "", {"problem", "box", "grid", "solver", "flags", "output", "levels", "reference",
                       "gexp", "jobs", "seed"});

  field(doc, "problem", "", [&](const json& v, const std::string& p) {
    if (v.is_string()) {
      c.problem = v.get<std::string>();
      c.inline_problem.reset();
      return;
    }
    require_object(v, p);
    check_keys(v, p, {"initial", "boundary", "forcing", "exact"});
    InlineProblem ip;
    if (!v.contains("initial")) throw ConfigError(join_path(p, "initial"), "missing");
    if (!v.contains("boundary")) throw ConfigError(join_path(p, "boundary"), "missing");
    ip.initial = read_string(v["initial"], join_path(p, "initial"));
    ip.boundary = read_string(v["boundary"], join_path(p, "boundary"));
    field(v, "forcing", p, [&](const json& f, const std::string& fp) { ip.forcing = read_string(f, fp); });
    field(v, "exact", p, [&](const json& f, const std::string& fp) { ip.exact = read_string(f, fp); });
    c.problem = "inline";
    c.inline_problem = ip;
  });
  field(doc, "box", "", [&](const json& v, const std::string& p) { c.box = read_box(v, p, c.box); });
  field(doc, "grid", "", [&](const json& v, const std::string& p) {
    require_object(v, p);
    check_keys(v, p, {"L", "M", "T", "N"});
    field(v, "L", p, [&](const json& x, const std::string& q) { c.half_width = read_number(x, q); });
    field(v, "M", p, [&](const json& x, const std::string& q) { c.cells = read_int(x, q); });
    field(v, "T", p, [&](const json& x, const std::string& q) { c.horizon = read_number(x, q); });
    field(v, "N", p, [&](const json& x, const std::string& q) { c.steps = read_int(x, q); });
  });
  field(doc, "solver", "", [&](const json& v, const std::string& p) {
    require_object(v, p);
    check_keys(v, p, {"tol_picard", "tol_lin", "k_max"});
    field(v, "tol_picard", p, [&](const json& x, const std::string& q) { c.tol_picard = read_number(x, q); });
    field(v, "tol_lin", p, [&](const json& x, const std::string& q) { c.tol_lin = read_number(x, q); });
    field(v, "k_max", p, [&](const json& x, const std::string& q) { c.k_max = read_int(x, q); });
  });
  field(doc, "flags", "", [&](const json& v, const std::string& p) {
    require_object(v, p);
    check_keys(v, p, {"record_coefficients", "override_diag_dom"});
    field(v, "record_coefficients", p,
          [&](const json& x, const std::string& q) { c.record_coefficients = read_bool(x, q); });
    field(v, "override_diag_dom", p,
          [&](const json& x, const std::string& q) { c.override_diag_dom = read_bool(x, q); });
  });
  field(doc, "output", "", [&](const json& v, const std::string& p) {
    require_object(v, p);
    check_keys(v, p, {"dir", "slice_times"});
    field(v, "dir", p, [&](const json& x, const std::string& q) { c.out_dir = read_string(x, q); });
    field(v, "slice_times", p, [&](const json& x, const std::string& q) {
      if (!x.is_array()) throw ConfigError(q, "expected an array of times");
      c.slice_times.clear();
      for (std::size_t k = 0; k < x.size(); ++k)
        c.slice_times.push_back(read_number(x[k], q + "[" + std::to_string(k) + "]"));
    });
  });
  field(doc, "levels", "", [&](const json& v, const std::string& p) {
    if (!v.is_array()) throw ConfigError(p, "expected an array of [M, N] pairs");
    c.levels.clear();
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::string q = p + "[" + std::to_string(k) + "]";
      if (!v[k].is_array() || v[k].size() != 2) throw ConfigError(q, "expected [M, N]");
      c.levels.push_back({read_int(v[k][0], q + ".M"), read_int(v[k][1], q + ".N")});
    }
  });
  field(doc, "reference", "", [&](const json& v, const std::string& p) {
    require_object(v, p);
    check_keys(v, p, {"M", "N", "cache_dir"});
    field(v, "M", p, [&](const json& x, const std::string& q) { c.reference_cells = read_int(x, q); });
    field(v, "N", p, [&](const json& x, const std::string& q) { c.reference_steps = read_int(x, q); });
    field(v, "cache_dir", p, [&](const json& x, const std::string& q) { c.cache_dir = read_string(x, q); });
  });
  field(doc, "gexp", "", [&](const json& v, const std::string& p) {
    require_object(v, p);
    check_keys(v, p, {"payoff", "x0", "y0", "L", "boundary", "lower_boundary", "threshold"});
    auto& g = c.gexp;
    field(v, "payoff", p, [&](const json& x, const std::string& q) { g.payoff = read_string(x, q); });
    field(v, "x0", p, [&](const json& x, const std::string& q) { g.x0 = read_number(x, q); });
    field(v, "y0", p, [&](const json& x, const std::string& q) { g.y0 = read_number(x, q); });
    field(v, "L", p, [&](const json& x, const std::string& q) {
      if (x.is_null()) g.half_width.reset();
      else g.half_width = read_number(x, q);
    });
    field(v, "boundary", p, [&](const json& x, const std::string& q) { g.boundary = read_string(x, q); });
    field(v, "lower_boundary", p,
          [&](const json& x, const std::string& q) { g.lower_boundary = read_string(x, q); });
    field(v, "threshold", p,
          [&](const json& x, const std::string& q) { g.diagnostic_threshold = read_number(x, q); });
  });
  field(doc, "jobs", "", [&](const json& v, const std::string& p) { c.jobs = read_int(v, p); });
  field(doc, "seed", "", [&](const json& v, const std::string& p) {
    if (!v.is_number_unsigned()) throw ConfigError(p, "expected a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  });
  return c;
}

void RunConfig::validate() const {
  if (problem != "example1" && problem != "example2" && problem != "inline")
    throw ConfigError("problem", "unknown problem '" + problem + "' (example1, example2 or an object)");
  if (problem == "inline" && !inline_problem) throw ConfigError("problem", "inline problem has no data");
  try {
    box.check_ordering();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("box", e.what());
  }
  if (!override_diag_dom && !validate_box(box).diag_dom_ok) {
    throw ConfigError("box",
                      "box is not diagonally dominant (sigma1^2 and sigma2^2 lower "
                      "bounds must be >= max |b12|); set flags.override_diag_dom to run anyway");
  }
  if (!(half_width > 0.0)) throw ConfigError("grid.L", "half-width must be positive");
  if (!(horizon > 0.0)) throw ConfigError("grid.T", "horizon must be positive");
  check_level(cells, steps, "grid.M", "grid.N");
  if (!(tol_picard > 0.0)) throw ConfigError("solver.tol_picard", "must be positive");
  if (!(tol_lin > 0.0)) throw ConfigError("solver.tol_lin", "must be positive");
  if (tol_lin > tol_picard / 100.0)
    throw ConfigError("solver.tol_lin", "must be at most tol_picard / 100");
  if (k_max < 1) throw ConfigError("solver.k_max", "must be at least 1");
  for (std::size_t k = 0; k < slice_times.size(); ++k) {
    if (slice_times[k] < 0.0 || slice_times[k] > horizon)
      throw ConfigError("output.slice_times[" + std::to_string(k) + "]", "time outside [0, T]");
  }
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const std::string p = "levels[" + std::to_string(k) + "]";
    check_level(levels[k].cells, levels[k].steps, p + ".M", p + ".N");
  }
  check_level(reference_cells, reference_steps, "reference.M", "reference.N");
  if (jobs < 1) throw ConfigError("jobs", "must be at least 1");
  if (gexp.half_width && !(*gexp.half_width > 0.0))
    throw ConfigError("gexp.L", "half-width must be positive");
  if (!(gexp.diagnostic_threshold >= 0.0)) throw ConfigError("gexp.threshold", "must be non-negative");
}

Grid RunConfig::grid() const {
  validate();
  return make_grid(half_width, cells, horizon, steps);
}

SolverConfig RunConfig::solver() const {
  SolverConfig s;
  s.tol_picard = tol_picard;
  s.tol_lin = tol_lin;
  s.k_max = k_max;
  s.record_coefficients = record_coefficients;
  s.allow_non_diag_dominant = override_diag_dom;
  return s;
}

ProblemSpec RunConfig::problem_spec() const {
  if (problem == "example1") {
    ProblemSpec p = bench::example1_problem().problem;
    p.box = box;
    p.forcing = [b = box](double t, double x, double y) { return bench::example1_forcing(b, t, x, y); };
    return p;
  }
  if (problem == "example2") {
    ProblemSpec p = bench::example2_problem();
    p.box = box;
    return p;
  }
  if (!inline_problem) throw ConfigError("problem", "inline problem has no data");
  ProblemSpec p;
  p.box = box;
  const auto initial = parse_field(inline_problem->initial, "problem.initial");
  if (initial.uses_time()) throw ConfigError("problem.initial", "initial data may not depend on t");
  p.initial = initial.spatial();
  p.boundary = parse_field(inline_problem->boundary, "problem.boundary").space_time();
  if (!inline_problem->forcing.empty())
    p.forcing = parse_field(inline_problem->forcing, "problem.forcing").space_time();
  return p;
}

std::optional<SpaceTimeFunction> RunConfig::exact_solution() const {
  if (problem == "example1") return bench::example1_problem().exact;
  if (problem == "inline" && inline_problem && !inline_problem->exact.empty())
    return parse_field(inline_problem->exact, "problem.exact").space_time();
  return std::nullopt;
}

gexp::GExpQuery RunConfig::gexp_query() const {
  gexp::GExpQuery q;
  const auto payoff = parse_field(gexp.payoff, "gexp.payoff");
  if (payoff.uses_time()) throw ConfigError("gexp.payoff", "payoff may not depend on t");
  q.payoff = payoff.spatial();
  q.box = box;
  q.eval_time = horizon;
  q.x0 = gexp.x0;
  q.y0 = gexp.y0;
  q.half_width = gexp.half_width;
  q.cells = cells;
  q.steps = steps;
  if (!gexp.boundary.empty()) q.boundary = parse_field(gexp.boundary, "gexp.boundary").space_time();
  if (!gexp.lower_boundary.empty())
    q.lower_boundary = parse_field(gexp.lower_boundary, "gexp.lower_boundary").space_time();
  q.diagnostic_threshold = gexp.diagnostic_threshold;
  return q;
}

json parse_json_text(const std::string& text, const std::string& source_name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source_name, "invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(parse_json_text(buffer.str(), path));
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set", "expected path=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  std::string pointer;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("--set", "empty segment in path '" + path + "'");
    pointer += "/" + key;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }

  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  if (!doc.is_object()) doc = json::object();
  try {
    doc[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    throw ConfigError(path, std::string("cannot apply override: ") + e.what());
  }
}

}  // namespace gheat::cli
