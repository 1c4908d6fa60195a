#include "gheat/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>

#include "gheat/bench.hpp"
#include "gheat/cli/expression.hpp"
#include "gheat/gexp.hpp"
#include "gheat/stepper.hpp"

namespace gheat::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void emit(std::ostream& os, const json& j) { os << j.dump() << '\n'; }

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  return f;
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output.dir", "cannot create " + dir.string() + ": " + ec.message());
}

void write_iterations_csv(std::ostream& os, const Grid& grid,
                          const std::vector<IterationReport>& reports) {
  os << "step,time,iterations\r\n";
  for (const auto& r : reports)
    os << r.step << ',' << bench::format_real(grid.t(r.step)) << ',' << r.iterations << "\r\n";
}

json iteration_summary(const std::vector<IterationReport>& reports) {
  int lo = 0, hi = 0;
  if (!reports.empty()) {
    const auto [a, b] = std::minmax_element(reports.begin(), reports.end(), [](const auto& p, const auto& q) {
      return p.iterations < q.iterations;
    });
    lo = a->iterations;
    hi = b->iterations;
  }
  return {{"min_iterations", lo}, {"max_iterations", hi}};
}

}  // namespace

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    emit(err, {{"error", "config"}, {"field", e.field()}, {"message", e.what()}});
    return exit_config;
  } catch (const AssumptionError& e) {
    emit(err, {{"error", "config"}, {"field", "box"}, {"message", e.what()}});
    return exit_config;
  } catch (const stepper::MarchError& e) {
    if (e.iteration_cap()) {
      emit(err, {{"error", "iteration_cap"}, {"step", e.step()}, {"message", e.what()}});
      return exit_iteration_cap;
    }
    emit(err, {{"error", "march"}, {"step", e.step()}, {"message", e.what()}});
    return exit_failure;
  } catch (const ParseError& e) {
    emit(err, {{"error", "config"}, {"offset", e.offset()}, {"message", e.what()}});
    return exit_config;
  } catch (const std::invalid_argument& e) {
    emit(err, {{"error", "config"}, {"message", e.what()}});
    return exit_config;
  } catch (const std::exception& e) {
    emit(err, {{"error", "failure"}, {"message", e.what()}});
    return exit_failure;
  }
}

int run_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Grid grid = config.grid();
        const ProblemSpec problem = config.problem_spec();
        const SolverConfig cfg = config.solver();

        std::map<int, std::string> slices;
        if (config.slice_times.empty()) slices[grid.steps()] = "";
        for (std::size_t k = 0; k < config.slice_times.size(); ++k) {
          try {
            slices[bench::nested_index(config.slice_times[k], 0.0, grid.dt())] = "";
          } catch (const std::domain_error&) {
            throw ConfigError("output.slice_times[" + std::to_string(k) + "]",
                              "not a time level of the grid");
          }
        }

        const fs::path dir = config.out_dir;
        prepare_dir(dir);
        json files = json::array();
        auto summary = stepper::march_streaming(
            problem, grid, cfg, [&](int n, const LatticeLevel& level, const IterationReport*) {
              auto it = slices.find(n);
              if (it == slices.end()) return;
              const fs::path path = dir / ("slice_n" + std::to_string(n) + ".csv");
              auto f = open_output(path);
              bench::write_slice_csv(f, grid, n, level);
              files.push_back(path.string());
            });

        const fs::path series = dir / "series.csv";
        {
          auto f = open_output(series);
          if (cfg.record_coefficients)
            bench::write_series_csv(f, bench::iteration_series(grid, summary.reports));
          else
            write_iterations_csv(f, grid, summary.reports);
        }
        files.push_back(series.string());
        const fs::path manifest = dir / "run.json";
        {
          auto f = open_output(manifest);
          f << to_json(config).dump(2) << '\n';
        }
        files.push_back(manifest.string());

        json result = {{"command", "solve"},
                       {"steps", grid.steps()},
                       {"compatibility", summary.compatibility},
                       {"solution_max", summary.solution_max},
                       {"files", files}};
        result.update(iteration_summary(summary.reports));
        emit(out, result);
        return static_cast<int>(exit_ok);
      },
      err);
}

namespace {

int lcm_of(const std::vector<bench::ConvergenceLevel>& levels, int bench::ConvergenceLevel::*member) {
  int v = 1;
  for (const auto& l : levels) v = std::lcm(v, l.*member);
  return v;
}

std::string problem_name(const RunConfig& config) {
  if (config.problem != "inline" || !config.inline_problem) return config.problem;
  const auto& p = *config.inline_problem;
  const auto h = bench::content_hash(p.initial + "\n" + p.boundary + "\n" + p.forcing);
  char buf[24];
  std::snprintf(buf, sizeof buf, "inline-%08llx", static_cast<unsigned long long>(h & 0xffffffffu));
  return buf;
}

}  // namespace

int run_converge(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        config.validate();
        if (config.levels.empty()) throw ConfigError("levels", "no levels to run");
        const ProblemSpec problem = config.problem_spec();
        const SolverConfig cfg = config.solver();
        const fs::path dir = config.out_dir;
        prepare_dir(dir);

        std::optional<bench::ReferenceSolution> reference;
        SpaceTimeFunction exact;
        if (auto known = config.exact_solution()) {
          exact = *known;
        } else {
          const Grid fine = make_grid(config.half_width, config.reference_cells, config.horizon,
                                      config.reference_steps);
          const int stored_cells = lcm_of(config.levels, &bench::ConvergenceLevel::cells);
          const int stored_steps = lcm_of(config.levels, &bench::ConvergenceLevel::steps);
          if (fine.cells() % stored_cells != 0 || fine.steps() % stored_steps != 0)
            throw ConfigError("reference", "levels do not nest in the reference grid (M=" +
                                               std::to_string(fine.cells()) + ", N=" +
                                               std::to_string(fine.steps()) + ")");
          const Grid stored = make_grid(config.half_width, stored_cells, config.horizon, stored_steps);
          const fs::path cache = config.cache_dir.empty() ? dir / "cache" : fs::path(config.cache_dir);
          reference.emplace(bench::cached_reference(problem_name(config), problem, fine, stored, cfg, cache));
          exact = reference->evaluator();
        }

        const auto runs = bench::convergence_study(problem, exact, config.levels, cfg,
                                                   config.half_width, config.horizon, config.jobs);
        std::vector<bench::ConvergenceRow> rows;
        for (const auto& r : runs) rows.push_back(r.row);
        const fs::path csv = dir / "convergence.csv";
        {
          auto f = open_output(csv);
          bench::write_convergence_csv(f, rows);
        }

        json table = json::array();
        for (const auto& r : runs) {
          json row = {{"M", r.level.cells},
                      {"N", r.level.steps},
                      {"linf_error", r.row.linf_error},
                      {"linf_order", r.row.linf_order ? json(*r.row.linf_order) : json(nullptr)},
                      {"l2_error", r.row.l2_error},
                      {"l2_order", r.row.l2_order ? json(*r.row.l2_order) : json(nullptr)}};
          row.update(iteration_summary(r.reports));
          table.push_back(row);
        }
        emit(out, {{"command", "converge"},
                   {"against", reference ? "reference" : "exact"},
                   {"rows", table},
                   {"files", json::array({csv.string()})}});
        return static_cast<int>(exit_ok);
      },
      err);
}

int run_gexp(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        config.validate();
        const auto query = config.gexp_query();
        const auto bounds = gexp::upper_and_lower(query, config.solver());
        for (const auto* run : {&bounds.upper_run, &bounds.lower_run})
          if (run->warning) emit(err, {{"warning", *run->warning}});
        emit(out, {{"upper", bounds.upper},
                   {"lower", bounds.lower},
                   {"boundary_diagnostic", bounds.boundary_diagnostic}});
        return static_cast<int>(exit_ok);
      },
      err);
}

}  // namespace gheat::cli
