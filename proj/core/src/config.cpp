#include "anovagp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "anovagp/errors.hpp"

namespace anovagp {
namespace {

using nlohmann::json;

json scalar_to_json(const std::string& s) {
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s == "null" || s == "~") return nullptr;
  if (!s.empty()) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (s[0] != '-') {
      std::uint64_t u = 0;
      if (auto [p, ec] = std::from_chars(first, last, u); ec == std::errc() && p == last) return u;
    } else {
      std::int64_t i = 0;
      if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc() && p == last) return i;
    }
    double d = 0.0;
    if (auto [p, ec] = std::from_chars(first, last, d); ec == std::errc() && p == last) return d;
  }
  return s;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      // Quoted scalars stay strings.
      return node.Tag() == "!" ? json(node.Scalar()) : scalar_to_json(node.Scalar());
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

void emit_yaml(YAML::Emitter& out, const json& j) {
  if (j.is_object()) {
    out << YAML::BeginMap;
    for (const auto& [k, v] : j.items()) {
      out << YAML::Key << k << YAML::Value;
      emit_yaml(out, v);
    }
    out << YAML::EndMap;
  } else if (j.is_array()) {
    out << YAML::Flow << YAML::BeginSeq;
    for (const auto& v : j) emit_yaml(out, v);
    out << YAML::EndSeq;
  } else if (j.is_string()) {
    out << YAML::DoubleQuoted << j.get<std::string>();
  } else if (j.is_null()) {
    out << YAML::Null;
  } else {
    out << j.dump();  // nlohmann prints doubles with round-trip precision
  }
}

/// Reads typed fields out of a JSON object, collecting every problem.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) errors_.push_back(where() + "must be a mapping");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!obj_.is_object() || !obj_.contains(key)) return;
    const json& v = obj_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
        out = v.get<double>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
        out = v.get<std::string>();
      } else {
        if (!v.is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
        out = v.get<T>();
      }
    } catch (const std::exception& e) {
      errors_.push_back(where() + key + ": " + e.what());
    }
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    const json& sub = obj_.is_object() && obj_.contains(key) ? obj_.at(key) : empty;
    return Reader(sub, path_ + key + ".", errors_);
  }

  void finish() {
    if (!obj_.is_object()) return;
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) errors_.push_back(where() + "unknown key '" + k + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? std::string("config: ") : "config." + path_; }

  const json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void read_gp(Reader r, GpConfig& gp) {
  r.read("restarts", gp.restarts);
  r.read("max_iters", gp.max_iters);
  r.read("jitter_floor", gp.jitter_floor);
  r.finish();
}

json gp_json(const GpConfig& gp) {
  return json{{"restarts", gp.restarts}, {"max_iters", gp.max_iters}, {"jitter_floor", gp.jitter_floor}};
}

json config_json(const ExperimentConfig& c) {
  const auto& p = c.problem;
  return json{
      {"problem",
       {{"simulator", p.simulator},
        {"nodes_per_side", p.nodes_per_side},
        {"subdomains_per_side", p.subdomains_per_side},
        {"solver", p.solver == LinearSolver::Direct ? "direct" : "cg"},
        {"input_dim", p.input_dim},
        {"output_dim", p.output_dim}}},
      {"decomposition",
       {{"tol_index", c.tol_index},
        {"nodes_per_dim", c.nodes_per_dim},
        {"max_order", c.max_order},
        {"denominator", c.denominator == WeightDenominator::Running ? "running" : "previous-orders"}}},
      {"pca", {{"tol", c.tol_pca}}},
      {"training", {{"n_train", c.n_train}, {"pool_size", c.pool_size}, {"gp", gp_json(c.local_gp)}}},
      {"sgp",
       {{"budget", c.sgp_budget == SgpBudgetRule::Matched ? "matched" : "fixed"},
        {"n", c.sgp_n},
        {"gp", gp_json(c.sgp_gp)}}},
      {"evaluation", {{"n_test", c.n_test}}},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"threads", c.threads},
  };
}

ExperimentConfig config_from_json(const json& doc) {
  std::vector<std::string> errors;
  ExperimentConfig c;
  Reader root(doc, "", errors);

  {
    Reader p = root.child("problem");
    p.read("simulator", c.problem.simulator);
    std::size_t nodes = c.problem.nodes_per_side;
    p.read("nodes_per_side", nodes);
    c.problem.nodes_per_side = nodes;
    p.read("subdomains_per_side", c.problem.subdomains_per_side);
    std::string solver = "direct";
    p.read("solver", solver);
    if (solver == "direct") {
      c.problem.solver = LinearSolver::Direct;
    } else if (solver == "cg") {
      c.problem.solver = LinearSolver::ConjugateGradient;
    } else {
      errors.push_back("config.problem.solver: expected 'direct' or 'cg', got '" + solver + "'");
    }
    p.read("input_dim", c.problem.input_dim);
    p.read("output_dim", c.problem.output_dim);
    p.finish();
  }
  {
    Reader d = root.child("decomposition");
    d.read("tol_index", c.tol_index);
    d.read("nodes_per_dim", c.nodes_per_dim);
    d.read("max_order", c.max_order);
    std::string denom = "running";
    d.read("denominator", denom);
    if (denom == "running") {
      c.denominator = WeightDenominator::Running;
    } else if (denom == "previous-orders") {
      c.denominator = WeightDenominator::PreviousOrders;
    } else {
      errors.push_back("config.decomposition.denominator: expected 'running' or 'previous-orders'");
    }
    d.finish();
  }
  {
    Reader p = root.child("pca");
    p.read("tol", c.tol_pca);
    p.finish();
  }
  {
    Reader t = root.child("training");
    t.read("n_train", c.n_train);
    t.read("pool_size", c.pool_size);
    read_gp(t.child("gp"), c.local_gp);
    t.finish();
  }
  {
    Reader s = root.child("sgp");
    std::string budget = "matched";
    s.read("budget", budget);
    if (budget == "matched") {
      c.sgp_budget = SgpBudgetRule::Matched;
    } else if (budget == "fixed") {
      c.sgp_budget = SgpBudgetRule::Fixed;
    } else {
      errors.push_back("config.sgp.budget: expected 'matched' or 'fixed'");
    }
    s.read("n", c.sgp_n);
    read_gp(s.child("gp"), c.sgp_gp);
    s.finish();
  }
  {
    Reader e = root.child("evaluation");
    e.read("n_test", c.n_test);
    e.finish();
  }
  root.read("seed", c.seed);
  root.read("output_dir", c.output_dir);
  root.read("threads", c.threads);
  root.finish();

  if (errors.empty()) errors = validate(c);
  if (!errors.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const auto& e : errors) msg << "\n  " << e;
    throw ConfigError(msg.str());
  }
  return c;
}

void validate_gp(const GpConfig& gp, const std::string& where, std::vector<std::string>& errors) {
  if (gp.restarts < 1) errors.push_back(where + ".restarts must be >= 1");
  if (gp.max_iters < 1) errors.push_back(where + ".max_iters must be >= 1");
  if (!(gp.jitter_floor >= 0.0)) errors.push_back(where + ".jitter_floor must be >= 0");
}

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  const auto& p = c.problem;
  if (p.simulator == "diffusion") {
    if (p.nodes_per_side < 2) errors.push_back("config.problem.nodes_per_side must be >= 2");
    if (p.subdomains_per_side < 1) errors.push_back("config.problem.subdomains_per_side must be >= 1");
    if (p.nodes_per_side >= 2 && p.subdomains_per_side >= 1) {
      try {
        DiffusionSimulator probe(DiffusionProblem{p.nodes_per_side - 1, p.subdomains_per_side, p.solver});
      } catch (const std::exception& e) {
        errors.push_back(std::string("config.problem: ") + e.what());
      }
    }
  } else {
    const auto& names = analytic_bank_names();
    if (std::find(names.begin(), names.end(), p.simulator) == names.end()) {
      errors.push_back("config.problem.simulator: unknown simulator '" + p.simulator + "'");
    }
    if (p.input_dim < 1) errors.push_back("config.problem.input_dim must be >= 1");
    if (p.output_dim < 1) errors.push_back("config.problem.output_dim must be >= 1");
  }
  if (!(c.tol_index > 0.0)) errors.push_back("config.decomposition.tol_index must be > 0");
  if (!(c.tol_pca > 0.0 && c.tol_pca < 1.0)) errors.push_back("config.pca.tol must lie in (0, 1)");
  if (c.nodes_per_dim < 1) errors.push_back("config.decomposition.nodes_per_dim must be >= 1");
  if (c.max_order < 1) errors.push_back("config.decomposition.max_order must be >= 1");
  if (c.n_train < 1) errors.push_back("config.training.n_train must be >= 1");
  if (c.pool_size <= c.n_train) errors.push_back("config.training.pool_size must exceed n_train");
  if (c.sgp_budget == SgpBudgetRule::Fixed && c.sgp_n < 1) {
    errors.push_back("config.sgp.n must be >= 1 with a fixed budget");
  }
  if (c.n_test < 1) errors.push_back("config.evaluation.n_test must be >= 1");
  if (c.threads < 1) errors.push_back("config.threads must be >= 1");
  validate_gp(c.local_gp, "config.training.gp", errors);
  validate_gp(c.sgp_gp, "config.sgp.gp", errors);
  return errors;
}

ExperimentConfig parse_config(const std::string& text) {
  const auto first = std::find_if(text.begin(), text.end(), [](unsigned char ch) { return !std::isspace(ch); });
  json doc;
  if (first != text.end() && *first == '{') {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("invalid configuration: JSON parse error: ") + e.what());
    }
  } else {
    try {
      doc = yaml_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
      throw ConfigError(std::string("invalid configuration: YAML parse error: ") + e.what());
    }
    if (doc.is_null()) doc = json::object();
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("invalid configuration: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

std::string to_yaml(const ExperimentConfig& config) {
  YAML::Emitter out;
  emit_yaml(out, config_json(config));
  return std::string(out.c_str()) + "\n";
}

SimulatorPtr make_simulator(const ProblemConfig& problem) {
  if (problem.simulator == "diffusion") {
    return std::make_shared<DiffusionSimulator>(
        DiffusionProblem{problem.nodes_per_side - 1, problem.subdomains_per_side, problem.solver});
  }
  return analytic_bank(problem.simulator, problem.input_dim, problem.output_dim);
}

DecomposeOptions decompose_options(const ExperimentConfig& config) {
  DecomposeOptions o;
  o.tol_index = config.tol_index;
  o.nodes_per_dim = config.nodes_per_dim;
  o.max_order = config.max_order;
  o.denominator = config.denominator;
  o.threads = config.threads;
  return o;
}

GpTrainOptions gp_options(const GpConfig& gp, std::uint64_t seed) {
  GpTrainOptions o;
  o.restarts = gp.restarts;
  o.max_iters = gp.max_iters;
  o.jitter_floor = gp.jitter_floor;
  o.seed = seed;
  return o;
}

}  // namespace anovagp
