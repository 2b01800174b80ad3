#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "experiments.hpp"
#include "report.hpp"

#ifndef MCF_VERSION
#define MCF_VERSION "0.0.0"
#endif

namespace mcf::cli {

namespace {

nlohmann::json bound_json(const Bound& b) {
  nlohmann::json j = {{"name", b.name}, {"value", b.value}, {"limit", b.limit}, {"relation", b.relation}, {"pass", b.pass}};
  if (!b.note.empty()) j["note"] = b.note;
  return j;
}

int execute(const std::string& experiment, const std::string& config_path, const std::optional<std::string>& out_dir,
            const std::optional<std::uint64_t>& seed, std::ostream& out,
            std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(config_path, experiment);
  } catch (const ConfigError& e) {
    err << config_path << ": " << e.what() << "\n";
    return 2;
  }
  if (seed) config.seed = *seed;
  if (out_dir)
    config.output_dir = *out_dir;
  else if (const char* env = std::getenv("MCF_OUTPUT_DIR"); env && *env)
    config.output_dir = env;

  ExperimentResult result;
  try {
    result = run_experiment(config);
  } catch (const ConfigError& e) {
    err << config_path << ": " << e.what() << "\n";
    return 2;
  }

  const std::filesystem::path dir(config.output_dir);
  nlohmann::json artifacts = nlohmann::json::array();
  for (const auto& [name, content] : result.files) {
    write_atomic(dir / name, content);
    artifacts.push_back(name);
  }
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& b : result.bounds) bounds.push_back(bound_json(b));
  const nlohmann::json summary = {{"experiment", result.experiment},
                                  {"pass", result.pass()},
                                  {"failures", result.failures()},
                                  {"bounds", bounds},
                                  {"fitted_constants", result.fitted_constants},
                                  {"max_errors", result.max_errors},
                                  {"results", result.results},
                                  {"config", to_json(config)},
                                  {"version", MCF_VERSION},
                                  {"artifacts", artifacts}};
  const std::string json_name = experiment + ".json";
  write_atomic(dir / json_name, summary.dump(2) + "\n");

  for (const auto& b : result.bounds)
    if (!b.pass) {
      err << "FAIL " << b.name << ": value " << format_number(b.value) << " " << b.relation << " limit "
          << format_number(b.limit);
      if (!b.note.empty()) err << " (" << b.note << ")";
      err << "\n";
    }
  out << experiment << ": " << (result.pass() ? "PASS" : "FAIL") << " (" << result.bounds.size() << " bounds, "
      << result.failures().size() << " failed); summary in " << (dir / json_name).string() << "\n";
  return result.pass() ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean curvature flow graph experiments", "mcf"};
  app.set_version_flag("--version", MCF_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config,-c", config_path, "YAML configuration file")->required();
    sub->add_option("--out,-o", out_dir, "output directory (overrides MCF_OUTPUT_DIR and the config)");
    sub->add_option("--seed", seed, "override the configured seed");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << MCF_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    return execute(experiment, config_path, out_dir, seed, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace mcf::cli
