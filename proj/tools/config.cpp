#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "mcf/geometry.hpp"
#include "mcf/heat_kernels.hpp"
#include "mcf/oracle.hpp"

namespace mcf::cli {

namespace {

std::string with_line(int line, const std::string& message) {
  if (line <= 0) return message;
  return "line " + std::to_string(line) + ": " + message;
}

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

// Reads one mapping; every key must be claimed by a get() or child() call
// before finish(), otherwise it is reported as unknown.
class Reader {
 public:
  Reader(YAML::Node node, std::string path, int line) : node_(std::move(node)), path_(std::move(path)), line_(line) {
    if (node_ && !node_.IsNull() && !node_.IsMap())
      throw ConfigError(line_of(node_), "'" + display() + "' must be a mapping");
  }

  template <class T>
  void get(const char* key, T& out, std::function<bool(const T&)> valid = {}, const char* requirement = "") {
    const auto found = lookup(key);
    if (!found) return;
    const YAML::Node& v = *found;
    T value;
    try {
      value = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(line_of(v), "'" + qualified(key) + "' has the wrong type");
    }
    if (valid && !valid(value)) throw ConfigError(line_of(v), "'" + qualified(key) + "' " + requirement);
    out = std::move(value);
  }

  Reader child(const char* key) {
    const auto v = lookup(key);
    return Reader(v ? *v : YAML::Node(), qualified(key), v ? line_of(*v) : line_);
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(line_of(it->first), "unknown key '" + qualified(key.c_str()) + "'");
    }
  }

 private:
  // yaml-cpp's default node is a defined null, so absence is tracked separately.
  std::optional<YAML::Node> lookup(const char* key) {
    seen_.insert(key);
    if (!node_ || !node_.IsMap()) return std::nullopt;
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (it->first.as<std::string>() == key) return it->second;
    return std::nullopt;
  }
  std::string display() const { return path_.empty() ? "<root>" : path_; }
  std::string qualified(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
  int line_;
  std::set<std::string> seen_;
};

template <class T>
std::function<bool(const T&)> positive() {
  return [](const T& v) { return v > T(0); };
}
template <class T>
std::function<bool(const T&)> nonnegative() {
  return [](const T& v) { return v >= T(0); };
}
std::function<bool(const std::vector<double>&)> positive_list() {
  return [](const std::vector<double>& v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
  };
}
std::function<bool(const std::string&)> one_of(std::vector<std::string> options) {
  return [options](const std::string& s) { return std::find(options.begin(), options.end(), s) != options.end(); };
}

}  // namespace

ConfigError::ConfigError(int line, const std::string& message) : std::runtime_error(with_line(line, message)), line_(line) {}

int GeometryConfig::dimension() const { return kind == "Sphere" || kind == "PeriodicPlane" ? 2 : 1; }

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"existence",  "perturbation",   "kernel-bounds", "contraction",
                                              "norms",      "oracle-compare", "plot"};
  return names;
}

ExperimentConfig parse_config(const std::string& text, const std::string& experiment) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.mark.line + 1, "malformed config: " + e.msg);
  }
  const YAML::Node& croot = root;
  ExperimentConfig c;
  c.experiment = experiment;
  Reader r(root, "", 1);

  std::string declared = experiment;
  r.get<std::string>("experiment", declared, one_of(experiment_names()), "must name a subcommand");
  if (declared != experiment) {
    // Re-read for the line number.
    throw ConfigError(line_of(croot["experiment"]),
                      "config is for experiment '" + declared + "' but the subcommand is '" + experiment + "'");
  }

  {
    Reader g = r.child("geometry");
    g.get<std::string>("kind", c.geometry.kind, one_of({"Circle", "Sphere", "PeriodicLine", "PeriodicPlane"}),
                       "must be Circle, Sphere, PeriodicLine or PeriodicPlane");
    g.get<double>("scale", c.geometry.scale, positive<double>(), "must be positive");
    g.get<int>("N", c.geometry.N, [](const int& n) { return n >= 8 && n % 2 == 0; }, "must be an even integer >= 8");
    g.finish();
  }
  r.get<int>("J", c.J, [](const int& j) { return j >= 4; }, "must be at least 4");
  r.get<double>("horizon", c.horizon, positive<double>(), "must be positive");
  r.get<std::uint64_t>("seed", c.seed);
  r.get<int>("workers", c.workers, positive<int>(), "must be positive");
  r.get<std::string>("output_dir", c.output_dir, [](const std::string& s) { return !s.empty(); }, "must not be empty");

  {
    Reader p = r.child("picard");
    p.get<double>("tolerance", c.picard.tolerance, positive<double>(), "must be positive");
    p.get<int>("max_iterations", c.picard.max_iterations, positive<int>(), "must be positive");
    p.get<double>("delta", c.picard.delta, positive<double>(), "must be positive");
    p.finish();
  }
  {
    Reader f = r.child("fit");
    f.get<int>("operator_probes", c.fit.operator_probes, positive<int>(), "must be positive");
    f.get<int>("pair_probes", c.fit.pair_probes, positive<int>(), "must be positive");
    f.get<int>("initial_probes", c.fit.initial_probes, positive<int>(), "must be positive");
    f.get<int>("bandlimit", c.fit.bandlimit, nonnegative<int>(), "must be nonnegative");
    f.get<double>("ball_fraction", c.fit.ball_fraction, [](const double& v) { return v > 0.0 && v <= 1.0; },
                  "must lie in (0, 1]");
    f.get<int>("max_rounds", c.fit.max_rounds, positive<int>(), "must be positive");
    f.finish();
  }
  {
    Reader e = r.child("existence");
    e.get<double>("error_bound", c.existence.error_bound, positive<double>(), "must be positive");
    e.get<bool>("oracle", c.existence.oracle);
    e.get<int>("oracle_substeps", c.existence.oracle_substeps, positive<int>(), "must be positive");
    e.get<int>("contraction_pairs", c.existence.contraction_pairs, nonnegative<int>(), "must be nonnegative");
    e.finish();
  }
  {
    Reader p = r.child("perturbation");
    p.get<std::vector<double>>("epsilons", c.perturbation.epsilons, positive_list(), "must be a list of positive numbers");
    p.get<int>("mode", c.perturbation.mode, positive<int>(), "must be positive");
    p.get<double>("uniformity", c.perturbation.uniformity, positive<double>(), "must be positive");
    p.get<double>("refinement_tolerance", c.perturbation.refinement_tolerance, positive<double>(), "must be positive");
    p.get<int>("max_alpha", c.perturbation.max_alpha, [](const int& a) { return a >= 0 && a <= 2; }, "must be 0, 1 or 2");
    p.get<int>("max_k", c.perturbation.max_k, [](const int& k) { return k == 0 || k == 1; }, "must be 0 or 1");
    p.get<double>("curvature_factor", c.perturbation.curvature_factor, positive<double>(), "must be positive");
    p.finish();
  }
  {
    Reader k = r.child("kernel_bounds");
    k.get<double>("D", c.kernel_bounds.D, positive<double>(), "must be positive");
    k.get<std::vector<std::string>>(
        "kernels", c.kernel_bounds.kernels,
        [](const std::vector<std::string>& v) {
          for (const auto& s : v) try {
              kernel_kind_from_string(s);
            } catch (const std::exception&) {
              return false;
            }
          return !v.empty();
        },
        "must list kernels among G, K, G_evolving, K_evolving");
    k.get<double>("t_min", c.kernel_bounds.t_min, positive<double>(), "must be positive");
    k.get<double>("t_max", c.kernel_bounds.t_max, positive<double>(), "must be positive");
    k.get<int>("time_samples", c.kernel_bounds.time_samples, [](const int& n) { return n >= 2; }, "must be at least 2");
    k.get<int>("distance_samples", c.kernel_bounds.distance_samples, [](const int& n) { return n >= 2; },
               "must be at least 2");
    k.get<double>("extension", c.kernel_bounds.extension, [](const double& v) { return v > 1.0; }, "must exceed 1");
    k.get<double>("evolving_horizon", c.kernel_bounds.evolving_horizon, positive<double>(), "must be positive");
    k.get<double>("mass_tolerance_G", c.kernel_bounds.mass_tolerance_G, positive<double>(), "must be positive");
    k.get<double>("mass_tolerance_K", c.kernel_bounds.mass_tolerance_K, positive<double>(), "must be positive");
    k.finish();
    if (!(c.kernel_bounds.t_min < c.kernel_bounds.t_max))
      throw ConfigError(line_of(croot["kernel_bounds"]), "'kernel_bounds.t_min' must be below 'kernel_bounds.t_max'");
  }
  {
    Reader k = r.child("contraction");
    k.get<std::string>("map", c.contraction.map, one_of({"existence", "perturbation"}),
                       "must be existence or perturbation");
    k.get<int>("pairs", c.contraction.pairs, positive<int>(), "must be positive");
    k.get<std::vector<double>>("delta_factors", c.contraction.delta_factors, positive_list(),
                               "must be a list of positive numbers");
    k.get<double>("bound", c.contraction.bound, positive<double>(), "must be positive");
    k.get<int>("mode", c.contraction.mode, positive<int>(), "must be positive");
    k.finish();
  }
  {
    Reader o = r.child("oracle_compare");
    o.get<std::vector<std::string>>(
        "cases", c.oracle_compare.cases,
        [](const std::vector<std::string>& v) {
          for (const auto& s : v) try {
              exact_kind_from_string(s);
            } catch (const std::exception&) {
              return false;
            }
          return true;
        },
        "must list catalog solutions");
    o.get<int>("random_graphs", c.oracle_compare.random_graphs, nonnegative<int>(), "must be nonnegative");
    o.get<double>("amplitude", c.oracle_compare.amplitude, positive<double>(), "must be positive");
    o.get<int>("oracle_substeps", c.oracle_compare.oracle_substeps, positive<int>(), "must be positive");
    o.get<double>("error_bound", c.oracle_compare.error_bound, positive<double>(), "must be positive");
    o.get<int>("sphere_N", c.oracle_compare.sphere_N, [](const int& n) { return n >= 8 && n % 2 == 0; },
               "must be an even integer >= 8");
    o.get<double>("sphere_horizon", c.oracle_compare.sphere_horizon, positive<double>(), "must be positive");
    o.get<double>("R0_prime", c.oracle_compare.R0_prime, positive<double>(), "must be positive");
    o.finish();
  }
  {
    Reader n = r.child("norms");
    n.get<double>("tolerance", c.norms.tolerance, positive<double>(), "must be positive");
    n.get<int>("random_pairs", c.norms.random_pairs, positive<int>(), "must be positive");
    n.finish();
  }
  {
    Reader p = r.child("plot");
    p.get<std::string>("input", c.plot.input);
    p.get<std::string>("style", c.plot.style, one_of({"auto", "heatmap", "line"}), "must be auto, heatmap or line");
    p.get<std::string>("output", c.plot.output);
    p.get<std::string>("title", c.plot.title);
    p.get<std::string>("x_column", c.plot.x_column);
    p.get<std::vector<std::string>>("y_columns", c.plot.y_columns);
    p.finish();
  }
  r.finish();

  if (c.geometry.kind == "PeriodicLine" || c.geometry.kind == "PeriodicPlane") {
    // Flat tori default to period 2 pi when no scale is given.
    if (!croot["geometry"] || !croot["geometry"]["scale"]) c.geometry.scale = 2.0 * 3.14159265358979323846;
  }
  if (experiment == "plot" && c.plot.input.empty())
    throw ConfigError(0, "'plot.input' is required for the plot subcommand");
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::string& experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), experiment);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  j["experiment"] = c.experiment;
  j["geometry"] = {{"kind", c.geometry.kind}, {"scale", c.geometry.scale}, {"N", c.geometry.N}};
  j["J"] = c.J;
  j["horizon"] = c.horizon;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  j["picard"] = {{"tolerance", c.picard.tolerance}, {"max_iterations", c.picard.max_iterations}, {"delta", c.picard.delta}};
  j["fit"] = {{"operator_probes", c.fit.operator_probes}, {"pair_probes", c.fit.pair_probes},
              {"initial_probes", c.fit.initial_probes},   {"bandlimit", c.fit.bandlimit},
              {"ball_fraction", c.fit.ball_fraction},     {"max_rounds", c.fit.max_rounds}};
  j["existence"] = {{"error_bound", c.existence.error_bound},
                    {"oracle", c.existence.oracle},
                    {"oracle_substeps", c.existence.oracle_substeps},
                    {"contraction_pairs", c.existence.contraction_pairs}};
  j["perturbation"] = {{"epsilons", c.perturbation.epsilons},
                       {"mode", c.perturbation.mode},
                       {"uniformity", c.perturbation.uniformity},
                       {"refinement_tolerance", c.perturbation.refinement_tolerance},
                       {"max_alpha", c.perturbation.max_alpha},
                       {"max_k", c.perturbation.max_k},
                       {"curvature_factor", c.perturbation.curvature_factor}};
  j["kernel_bounds"] = {{"D", c.kernel_bounds.D},
                        {"kernels", c.kernel_bounds.kernels},
                        {"t_min", c.kernel_bounds.t_min},
                        {"t_max", c.kernel_bounds.t_max},
                        {"time_samples", c.kernel_bounds.time_samples},
                        {"distance_samples", c.kernel_bounds.distance_samples},
                        {"extension", c.kernel_bounds.extension},
                        {"evolving_horizon", c.kernel_bounds.evolving_horizon},
                        {"mass_tolerance_G", c.kernel_bounds.mass_tolerance_G},
                        {"mass_tolerance_K", c.kernel_bounds.mass_tolerance_K}};
  j["contraction"] = {{"map", c.contraction.map},
                      {"pairs", c.contraction.pairs},
                      {"delta_factors", c.contraction.delta_factors},
                      {"bound", c.contraction.bound},
                      {"mode", c.contraction.mode}};
  j["oracle_compare"] = {{"cases", c.oracle_compare.cases},
                         {"random_graphs", c.oracle_compare.random_graphs},
                         {"amplitude", c.oracle_compare.amplitude},
                         {"oracle_substeps", c.oracle_compare.oracle_substeps},
                         {"error_bound", c.oracle_compare.error_bound},
                         {"sphere_N", c.oracle_compare.sphere_N},
                         {"sphere_horizon", c.oracle_compare.sphere_horizon},
                         {"R0_prime", c.oracle_compare.R0_prime}};
  j["norms"] = {{"tolerance", c.norms.tolerance}, {"random_pairs", c.norms.random_pairs}};
  j["plot"] = {{"input", c.plot.input},   {"style", c.plot.style},       {"output", c.plot.output},
               {"title", c.plot.title},   {"x_column", c.plot.x_column}, {"y_columns", c.plot.y_columns}};
  return j;
}

}  // namespace mcf::cli
