#include "svgd/harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "svgd/errors.hpp"

namespace svgd::harness {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config: " + path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& keys) {
  for (const auto& [k, v] : obj.items()) {
    if (!keys.count(k)) fail(path.empty() ? k : path + "." + k, "unknown key");
  }
}

const json& require_object(const json& doc, const std::string& key, const std::string& path) {
  if (!doc.contains(key)) fail(path, "missing");
  if (!doc.at(key).is_object()) fail(path, "expected an object");
  return doc.at(key);
}

double get_number(const json& obj, const std::string& key, const std::string& path, double fallback,
                  bool required = false) {
  if (!obj.contains(key)) {
    if (required) fail(path, "missing");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

long get_integer(const json& obj, const std::string& key, const std::string& path, long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "expected an integer");
  return v.get<long>();
}

std::uint64_t get_seed(const json& obj, const std::string& key, const std::string& path,
                       std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(path, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) fail(path, "expected true or false");
  return obj.at(key).get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& path,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) fail(path, "expected a string");
  return obj.at(key).get<std::string>();
}

// A number broadcasts to `dim` entries (dim 1 when unknown); an array is taken as is.
Eigen::VectorXd get_vector(const json& v, const std::string& path, int dim) {
  if (v.is_number()) return Eigen::VectorXd::Constant(std::max(dim, 1), v.get<double>());
  if (!v.is_array() || v.empty()) fail(path, "expected a number or a nonempty array");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
    out[i] = v[i].get<double>();
  }
  if (dim > 0 && out.size() != dim) fail(path, "expected " + std::to_string(dim) + " entries");
  return out;
}

GaussianParams parse_gaussian(const json& obj, const std::string& path, int dim_hint) {
  int dim = static_cast<int>(get_integer(obj, "dim", path + ".dim", dim_hint));
  if (obj.contains("dim") && dim < 1) fail(path + ".dim", "must be at least 1");
  if (!obj.contains("mean")) fail(path + ".mean", "missing");
  GaussianParams g;
  g.mean = get_vector(obj.at("mean"), path + ".mean", dim);
  dim = static_cast<int>(g.mean.size());
  const bool has_var = obj.contains("variance");
  const bool has_cov = obj.contains("covariance");
  if (has_var == has_cov) fail(path, "give exactly one of variance or covariance");
  if (has_var) {
    const double v = get_number(obj, "variance", path + ".variance", 1.0);
    if (!(v > 0.0)) fail(path + ".variance", "must be positive");
    g.covariance = v * Eigen::MatrixXd::Identity(dim, dim);
  } else {
    const json& c = obj.at("covariance");
    if (!c.is_array() || static_cast<int>(c.size()) != dim) {
      fail(path + ".covariance", "expected a " + std::to_string(dim) + "x" + std::to_string(dim) +
                                     " array");
    }
    g.covariance.resize(dim, dim);
    for (int i = 0; i < dim; ++i) {
      g.covariance.row(i) = get_vector(c[i], path + ".covariance[" + std::to_string(i) + "]", dim);
    }
  }
  return g;
}

TargetSpec parse_target(const json& obj, int dim_hint) {
  const std::string family = get_string(obj, "family", "target.family", "gaussian");
  if (family == "gaussian") {
    reject_unknown(obj, "target", {"family", "dim", "mean", "variance", "covariance"});
    GaussianParams g = parse_gaussian(obj, "target", dim_hint);
    return TargetSpec::gaussian(std::move(g.mean), std::move(g.covariance));
  }
  if (family != "mixture") fail("target.family", "expected gaussian or mixture");
  reject_unknown(obj, "target", {"family", "dim", "weights", "means", "sigma2", "lambda"});
  if (!obj.contains("weights") || !obj.at("weights").is_array()) {
    fail("target.weights", "expected an array");
  }
  if (!obj.contains("means") || !obj.at("means").is_array()) fail("target.means", "expected an array");
  const json& w = obj.at("weights");
  const json& m = obj.at("means");
  if (w.size() != m.size() || w.empty()) fail("target.means", "needs one mean per weight");
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  const int dim = static_cast<int>(get_integer(obj, "dim", "target.dim", dim_hint));
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!w[k].is_number()) fail("target.weights[" + std::to_string(k) + "]", "expected a number");
    weights.push_back(w[k].get<double>());
    means.push_back(get_vector(m[k], "target.means[" + std::to_string(k) + "]", dim));
  }
  const double sigma2 = get_number(obj, "sigma2", "target.sigma2", 1.0);
  if (!(sigma2 > 0.0)) fail("target.sigma2", "must be positive");
  std::optional<double> lambda;
  if (obj.contains("lambda")) {
    lambda = get_number(obj, "lambda", "target.lambda", 0.0);
    if (!(*lambda > 0.0)) fail("target.lambda", "must be positive");
  }
  return TargetSpec::mixture(std::move(weights), std::move(means), sigma2, lambda);
}

int target_dim(const TargetSpec& spec) {
  if (const auto* g = std::get_if<GaussianParams>(&spec.family)) {
    return static_cast<int>(g->mean.size());
  }
  return static_cast<int>(std::get<MixtureParams>(spec.family).means.front().size());
}

}  // namespace

std::string ExperimentConfig::output_dir() const {
  if (!output.dir.empty()) return output.dir;
  if (const char* env = std::getenv("SVGD_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) fail("<root>", "expected an object");
  reject_unknown(doc, "", {"target", "kernel", "init", "alpha", "steps", "reference", "sweep",
                           "verify", "output"});
  ExperimentConfig cfg;
  cfg.source = doc;

  const json& t = require_object(doc, "target", "target");
  cfg.target = parse_target(t, 0);
  const int dim = target_dim(cfg.target);
  try {
    Target check(cfg.target);
  } catch (const Error& e) {
    fail("target", e.what());
  }

  const json& k = require_object(doc, "kernel", "kernel");
  reject_unknown(k, "kernel", {"family", "bandwidth", "imq_exponent"});
  try {
    cfg.kernel.family = kernel_family_from_string(get_string(k, "family", "kernel.family", "gaussian_rbf"));
  } catch (const Error& e) {
    fail("kernel.family", e.what());
  }
  cfg.kernel.bandwidth = get_number(k, "bandwidth", "kernel.bandwidth", 1.0);
  cfg.kernel.imq_exponent = get_number(k, "imq_exponent", "kernel.imq_exponent", 0.5);
  try {
    cfg.kernel.validate();
  } catch (const Error& e) {
    fail("kernel", e.what());
  }

  const json& in = require_object(doc, "init", "init");
  reject_unknown(in, "init", {"dim", "mean", "variance", "covariance", "n", "seed"});
  cfg.init.law = parse_gaussian(in, "init", dim);
  cfg.init.n = static_cast<int>(get_integer(in, "n", "init.n", 64));
  if (cfg.init.n < 1) fail("init.n", "must be at least 1");
  cfg.init.seed = get_seed(in, "seed", "init.seed", 1);
  try {
    Target check(TargetSpec::gaussian(cfg.init.law.mean, cfg.init.law.covariance));
  } catch (const Error& e) {
    fail("init", e.what());
  }

  cfg.alpha = get_number(doc, "alpha", "alpha", 2.0);
  if (!(cfg.alpha > 1.0)) fail("alpha", "must exceed 1");

  if (doc.contains("steps")) {
    const json& s = require_object(doc, "steps", "steps");
    reject_unknown(s, "steps", {"policy", "eps", "rounds", "list", "delta"});
    const std::string policy = get_string(s, "policy", "steps.policy", "constant");
    if (policy == "constant") {
      cfg.steps.policy = StepPolicy::Constant;
    } else if (policy == "list") {
      cfg.steps.policy = StepPolicy::List;
    } else if (policy == "budget") {
      cfg.steps.policy = StepPolicy::Budget;
    } else {
      fail("steps.policy", "expected constant, list or budget");
    }
    cfg.steps.eps = get_number(s, "eps", "steps.eps", cfg.steps.eps);
    cfg.steps.rounds = static_cast<int>(get_integer(s, "rounds", "steps.rounds", cfg.steps.rounds));
    cfg.steps.delta = get_number(s, "delta", "steps.delta", cfg.steps.delta);
    if (s.contains("list")) {
      const json& l = s.at("list");
      if (!l.is_array()) fail("steps.list", "expected an array");
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (!l[i].is_number()) fail("steps.list[" + std::to_string(i) + "]", "expected a number");
        cfg.steps.list.push_back(l[i].get<double>());
      }
    }
    if (cfg.steps.policy == StepPolicy::List && !s.contains("list")) fail("steps.list", "missing");
    if (!(cfg.steps.eps >= 0.0)) fail("steps.eps", "must be nonnegative");
    if (cfg.steps.rounds < 0) fail("steps.rounds", "must be nonnegative");
    for (std::size_t i = 0; i < cfg.steps.list.size(); ++i) {
      if (!(cfg.steps.list[i] >= 0.0)) fail("steps.list[" + std::to_string(i) + "]", "must be nonnegative");
    }
    if (!(cfg.steps.delta > 0.0 && cfg.steps.delta <= 1.0)) fail("steps.delta", "must lie in (0, 1]");
  }

  if (doc.contains("reference")) {
    const json& r = require_object(doc, "reference", "reference");
    reject_unknown(r, "reference", {"mode", "n_ref", "seed", "nodes"});
    const std::string mode = get_string(r, "mode", "reference.mode", "ensemble");
    if (mode == "ensemble") {
      cfg.reference.mode = ReferenceMode::Ensemble;
    } else if (mode == "quadrature") {
      cfg.reference.mode = ReferenceMode::Quadrature;
    } else {
      fail("reference.mode", "expected ensemble or quadrature");
    }
    cfg.reference.n_ref = static_cast<int>(get_integer(r, "n_ref", "reference.n_ref", 0));
    if (cfg.reference.n_ref < 0) fail("reference.n_ref", "must be nonnegative");
    cfg.reference.seed = get_seed(r, "seed", "reference.seed", 0);
    cfg.reference.nodes = static_cast<int>(get_integer(r, "nodes", "reference.nodes", 2001));
    if (cfg.reference.nodes < 2) fail("reference.nodes", "must be at least 2");
  }
  if (cfg.reference.mode == ReferenceMode::Quadrature && dim != 1) {
    fail("reference.mode", "quadrature reference requires a 1-D target");
  }

  if (doc.contains("sweep")) {
    const json& s = require_object(doc, "sweep", "sweep");
    reject_unknown(s, "sweep", {"n", "repeats", "delta"});
    if (s.contains("n")) {
      const json& n = s.at("n");
      if (!n.is_array() || n.empty()) fail("sweep.n", "expected a nonempty array");
      cfg.sweep.n.clear();
      for (std::size_t i = 0; i < n.size(); ++i) {
        if (!n[i].is_number_integer() || n[i].get<long>() < 1) {
          fail("sweep.n[" + std::to_string(i) + "]", "expected a positive integer");
        }
        cfg.sweep.n.push_back(n[i].get<int>());
        if (i > 0 && cfg.sweep.n[i] <= cfg.sweep.n[i - 1]) {
          fail("sweep.n", "must be strictly increasing");
        }
      }
    }
    cfg.sweep.repeats = static_cast<int>(get_integer(s, "repeats", "sweep.repeats", 1));
    if (cfg.sweep.repeats < 1) fail("sweep.repeats", "must be at least 1");
    cfg.sweep.delta = get_number(s, "delta", "sweep.delta", 0.1);
    if (!(cfg.sweep.delta > 0.0 && cfg.sweep.delta <= 1.0)) fail("sweep.delta", "must lie in (0, 1]");
  }

  if (doc.contains("verify")) {
    const json& v = require_object(doc, "verify", "verify");
    reject_unknown(v, "verify", {"wasserstein_check_b_max", "descent", "descent_nodes", "kernel_grid_points",
                                 "random_pairs", "property_seed"});
    cfg.verify.wasserstein_check_b_max = get_number(v, "wasserstein_check_b_max", "verify.wasserstein_check_b_max", 0.25);
    cfg.verify.descent = get_bool(v, "descent", "verify.descent", true);
    cfg.verify.descent_nodes =
        static_cast<int>(get_integer(v, "descent_nodes", "verify.descent_nodes", 2001));
    cfg.verify.kernel_grid_points =
        static_cast<int>(get_integer(v, "kernel_grid_points", "verify.kernel_grid_points", 10000));
    cfg.verify.random_pairs = static_cast<int>(get_integer(v, "random_pairs", "verify.random_pairs", 200));
    cfg.verify.property_seed = get_seed(v, "property_seed", "verify.property_seed", 20240611);
    if (cfg.verify.descent_nodes < 2) fail("verify.descent_nodes", "must be at least 2");
    if (cfg.verify.kernel_grid_points < 2) fail("verify.kernel_grid_points", "must be at least 2");
    if (cfg.verify.random_pairs < 0) fail("verify.random_pairs", "must be nonnegative");
  }

  if (doc.contains("output")) {
    const json& o = require_object(doc, "output", "output");
    reject_unknown(o, "output", {"dir", "prefix", "checkpoints", "densities"});
    cfg.output.dir = get_string(o, "dir", "output.dir", "");
    cfg.output.prefix = get_string(o, "prefix", "output.prefix", "run");
    cfg.output.checkpoints = get_bool(o, "checkpoints", "output.checkpoints", false);
    cfg.output.densities = get_bool(o, "densities", "output.densities", false);
    if (cfg.output.prefix.empty()) fail("output.prefix", "must not be empty");
  }
  return cfg;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("config: override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("config: override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("config: override key '" + key + "' walks into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json doc = json::parse(in, nullptr, false, true);
  if (doc.is_discarded()) throw ConfigError("config: " + path + " is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

std::vector<double> fixed_steps(const ExperimentConfig& cfg) {
  switch (cfg.steps.policy) {
    case StepPolicy::Constant:
      return std::vector<double>(cfg.steps.rounds, cfg.steps.eps);
    case StepPolicy::List:
      return cfg.steps.list;
    case StepPolicy::Budget:
      break;
  }
  throw ConfigError("config: steps.policy budget has no fixed schedule");
}

}  // namespace svgd::harness
