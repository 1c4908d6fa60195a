#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gheat/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace gheat::cli;

  CLI::App app{"Implicit monotone solver for the two-dimensional G-heat equation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> jobs;
  std::optional<double> tol_picard;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "levels run concurrently by converge")->check(CLI::PositiveNumber);
  app.add_option("--tol-picard", tol_picard, "inner iteration tolerance");
  app.add_option("--seed", seed, "seed recorded for randomized utilities");
  app.add_option("--set", overrides, "override a field, e.g. grid.M=20")->take_all();

  auto* solve = app.add_subcommand("solve", "march a problem and write slices and iteration series");
  auto* converge = app.add_subcommand("converge", "run a convergence study and write the error table");
  auto* gexp = app.add_subcommand("gexp", "upper and lower G-expectation of a payoff");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json{{"error", "config"}, {"field", "arguments"}, {"message", e.what()}}.dump()
              << '\n';
    return exit_config;
  }

  RunConfig config;
  const int loaded = guarded(
      [&] {
        nlohmann::json doc = nlohmann::json::object();
        if (!config_path.empty()) doc = to_json(load_config(config_path));
        if (out_dir) apply_override(doc, "output.dir=" + nlohmann::json(*out_dir).dump());
        if (jobs) apply_override(doc, "jobs=" + std::to_string(*jobs));
        if (tol_picard) apply_override(doc, "solver.tol_picard=" + nlohmann::json(*tol_picard).dump());
        if (seed) apply_override(doc, "seed=" + std::to_string(*seed));
        for (const auto& o : overrides) apply_override(doc, o);
        config = from_json(doc);
        return 0;
      },
      std::cerr);
  if (loaded != 0) return loaded;

  if (solve->parsed()) return run_solve(config, std::cout, std::cerr);
  if (converge->parsed()) return run_converge(config, std::cout, std::cerr);
  if (gexp->parsed()) return run_gexp(config, std::cout, std::cerr);
  return exit_failure;
}
