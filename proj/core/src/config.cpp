#include "gwre/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace gwre {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.contains(it.key())) fail(path + "." + it.key(), "unknown key");
}

double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::int64_t get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<std::pair<double, double>> get_pair_list(const json& j,
                                                     const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of [value, prob] pairs");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    std::string p = path + "[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 2) fail(p, "expected a [value, prob] pair");
    out.emplace_back(get_double(e[0], p + "[0]"), get_double(e[1], p + "[1]"));
  }
  return out;
}

KernelSpec parse_kernel(const json& j, const std::string& path) {
  check_keys(j, path,
             {"type", "law", "weights", "aux", "matrix", "start_index",
              "alpha", "grid_points", "grid_lo", "grid_hi", "C",
              "start_weight"});
  KernelSpec k;
  if (j.contains("type")) k.type = get_string(j["type"], path + ".type");
  const std::set<std::string> types = {"iid",         "finite",
                                       "dyadic",      "dyadic-grid",
                                       "exp-mixture", "exp-mixture-grid"};
  if (!types.contains(k.type)) fail(path + ".type", "unknown kernel type");
  if (j.contains("law")) k.law = get_pair_list(j["law"], path + ".law");
  if (j.contains("weights")) {
    k.weights.clear();
    for (std::size_t i = 0; i < j["weights"].size(); ++i)
      k.weights.push_back(get_double(
          j["weights"][i], path + ".weights[" + std::to_string(i) + "]"));
  }
  if (j.contains("aux")) {
    for (std::size_t i = 0; i < j["aux"].size(); ++i)
      k.aux.push_back(
          get_double(j["aux"][i], path + ".aux[" + std::to_string(i) + "]"));
  }
  if (j.contains("matrix")) {
    if (!j["matrix"].is_array()) fail(path + ".matrix", "expected an array");
    for (std::size_t i = 0; i < j["matrix"].size(); ++i) {
      std::string p = path + ".matrix[" + std::to_string(i) + "]";
      if (!j["matrix"][i].is_array()) fail(p, "expected a row array");
      std::vector<double> row;
      for (std::size_t c = 0; c < j["matrix"][i].size(); ++c)
        row.push_back(
            get_double(j["matrix"][i][c], p + "[" + std::to_string(c) + "]"));
      k.matrix.push_back(std::move(row));
    }
  }
  if (j.contains("start_index"))
    k.start_index =
        static_cast<int>(get_int(j["start_index"], path + ".start_index"));
  if (j.contains("alpha")) k.alpha = get_double(j["alpha"], path + ".alpha");
  if (j.contains("grid_points"))
    k.grid_points =
        static_cast<int>(get_int(j["grid_points"], path + ".grid_points"));
  if (j.contains("grid_lo"))
    k.grid_lo = get_double(j["grid_lo"], path + ".grid_lo");
  if (j.contains("grid_hi"))
    k.grid_hi = get_double(j["grid_hi"], path + ".grid_hi");
  if (j.contains("C")) k.C = get_double(j["C"], path + ".C");
  if (j.contains("start_weight"))
    k.start_weight = get_double(j["start_weight"], path + ".start_weight");

  if (k.type == "finite") {
    if (k.weights.empty()) fail(path + ".weights", "finite kernel needs weights");
    if (k.matrix.size() != k.weights.size())
      fail(path + ".matrix", "matrix rows must match weights");
    if (!k.aux.empty() && k.aux.size() != k.weights.size())
      fail(path + ".aux", "aux must match weights");
    if (k.start_index < 0 ||
        static_cast<std::size_t>(k.start_index) >= k.weights.size())
      fail(path + ".start_index", "out of range");
  }
  return k;
}

ReinforcedParams parse_reinforcement(const json& j, const std::string& path) {
  check_keys(j, path, {"L", "p", "threshold"});
  ReinforcedParams r;
  if (j.contains("L")) r.L = get_double(j["L"], path + ".L");
  if (j.contains("p")) r.p = get_double(j["p"], path + ".p");
  if (j.contains("threshold")) {
    const auto& t = j["threshold"];
    check_keys(t, path + ".threshold", {"kind", "value", "law"});
    std::string kind = t.contains("kind")
                           ? get_string(t["kind"], path + ".threshold.kind")
                           : "constant";
    if (kind == "constant") {
      r.threshold = ThresholdRule::constant(
          t.contains("value")
              ? get_double(t["value"], path + ".threshold.value")
              : 1.0);
    } else if (kind == "iid") {
      if (!t.contains("law")) fail(path + ".threshold.law", "missing");
      r.threshold.kind = ThresholdRule::Kind::IidLaw;
      r.threshold.law = get_pair_list(t["law"], path + ".threshold.law");
    } else {
      fail(path + ".threshold.kind", "expected constant or iid");
    }
  }
  return r;
}

double parse_window_bound(const json& j, const std::string& path) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    fail(path, "expected a number, \"-inf\" or \"inf\"");
  }
  return get_double(j, path);
}

SweepSpec parse_sweep(const json& j, const std::string& path) {
  check_keys(j, path, {"param", "lo", "hi", "steps"});
  SweepSpec s;
  if (!j.contains("param")) fail(path + ".param", "missing");
  s.param = get_string(j["param"], path + ".param");
  const std::set<std::string> params = {"a", "b", "L", "alpha"};
  if (!params.contains(s.param)) fail(path + ".param", "unknown sweep parameter");
  if (!j.contains("lo") || !j.contains("hi")) fail(path, "needs lo and hi");
  s.lo = get_double(j["lo"], path + ".lo");
  s.hi = get_double(j["hi"], path + ".hi");
  if (j.contains("steps"))
    s.steps = static_cast<int>(get_int(j["steps"], path + ".steps"));
  if (s.steps < 2) fail(path + ".steps", "need at least 2 steps");
  return s;
}

}  // namespace

EnvKernel KernelSpec::build() const {
  if (type == "iid") return EnvKernel::iid(law);
  if (type == "finite") {
    std::vector<EnvState> states;
    for (std::size_t i = 0; i < weights.size(); ++i)
      states.push_back(
          {weights[i], aux.empty() ? 0.0 : aux[i], static_cast<int>(i)});
    EnvKernel k = EnvKernel::finite(states, matrix);
    return k.with_start(k.states()[start_index]);
  }
  if (type == "dyadic") return dyadic_kernel(C, start_weight);
  if (type == "dyadic-grid") return dyadic_grid_kernel(grid_points);
  if (type == "exp-mixture") return exp_mixture_kernel(alpha);
  if (type == "exp-mixture-grid")
    return exp_mixture_grid_kernel(alpha, grid_points, grid_lo, grid_hi);
  throw ConfigError("kernel.type: unknown kernel type " + type);
}

std::vector<double> SweepSpec::values() const {
  std::vector<double> out;
  out.reserve(steps);
  for (int i = 0; i < steps; ++i)
    out.push_back(lo + (hi - lo) * i / (steps - 1));
  return out;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  check_keys(j, "config",
             {"offspring", "kernel", "reinforcement", "walk", "ray", "ldp",
              "green", "windows", "eta_grid", "sweep", "sweep2", "seed",
              "threads", "out_dir", "tolerance"});
  ExperimentConfig c;
  if (j.contains("offspring")) {
    c.offspring.clear();
    auto pairs = get_pair_list(j["offspring"], "config.offspring");
    for (auto& [k, p] : pairs) {
      if (k < 0 || k != std::floor(k))
        fail("config.offspring", "offspring counts must be nonnegative integers");
      c.offspring.emplace_back(static_cast<int>(k), p);
    }
  }
  if (j.contains("kernel")) c.kernel = parse_kernel(j["kernel"], "config.kernel");
  if (j.contains("reinforcement"))
    c.reinforcement = parse_reinforcement(j["reinforcement"],
                                          "config.reinforcement");
  if (j.contains("walk")) {
    check_keys(j["walk"], "config.walk", {"horizon", "replicas"});
    if (j["walk"].contains("horizon"))
      c.walk.horizon = get_int(j["walk"]["horizon"], "config.walk.horizon");
    if (j["walk"].contains("replicas"))
      c.walk.replicas = static_cast<int>(
          get_int(j["walk"]["replicas"], "config.walk.replicas"));
  }
  if (j.contains("ray")) {
    check_keys(j["ray"], "config.ray", {"n", "replicas"});
    if (j["ray"].contains("n"))
      c.ray.n = static_cast<int>(get_int(j["ray"]["n"], "config.ray.n"));
    if (j["ray"].contains("replicas"))
      c.ray.replicas = static_cast<int>(
          get_int(j["ray"]["replicas"], "config.ray.replicas"));
  }
  if (j.contains("ldp")) {
    check_keys(j["ldp"], "config.ldp", {"lambda_grid", "k_pieces", "restarts"});
    if (j["ldp"].contains("lambda_grid")) {
      c.ldp.lambda_grid.clear();
      for (std::size_t i = 0; i < j["ldp"]["lambda_grid"].size(); ++i)
        c.ldp.lambda_grid.push_back(
            get_double(j["ldp"]["lambda_grid"][i],
                       "config.ldp.lambda_grid[" + std::to_string(i) + "]"));
    }
    if (j["ldp"].contains("k_pieces"))
      c.ldp.k_pieces = static_cast<int>(
          get_int(j["ldp"]["k_pieces"], "config.ldp.k_pieces"));
    if (j["ldp"].contains("restarts"))
      c.ldp.restarts = static_cast<int>(
          get_int(j["ldp"]["restarts"], "config.ldp.restarts"));
  }
  if (j.contains("green")) {
    check_keys(j["green"], "config.green", {"n_max", "replicas"});
    c.green.enabled = true;
    if (j["green"].contains("n_max"))
      c.green.n_max = static_cast<int>(
          get_int(j["green"]["n_max"], "config.green.n_max"));
    if (j["green"].contains("replicas"))
      c.green.replicas = static_cast<int>(
          get_int(j["green"]["replicas"], "config.green.replicas"));
  }
  if (j.contains("windows")) {
    if (!j["windows"].is_array()) fail("config.windows", "expected an array");
    for (std::size_t i = 0; i < j["windows"].size(); ++i) {
      std::string p = "config.windows[" + std::to_string(i) + "]";
      check_keys(j["windows"][i], p, {"lower", "upper"});
      TruncationWindow w;
      if (j["windows"][i].contains("lower"))
        w.lower = parse_window_bound(j["windows"][i]["lower"], p + ".lower");
      if (!j["windows"][i].contains("upper")) fail(p + ".upper", "missing");
      w.upper = parse_window_bound(j["windows"][i]["upper"], p + ".upper");
      if (!(w.lower < w.upper)) fail(p, "lower must be below upper");
      c.windows.push_back(w);
    }
  }
  if (j.contains("eta_grid"))
    c.eta_grid = get_pair_list(j["eta_grid"], "config.eta_grid");
  if (j.contains("sweep")) c.sweep = parse_sweep(j["sweep"], "config.sweep");
  if (j.contains("sweep2"))
    c.sweep2 = parse_sweep(j["sweep2"], "config.sweep2");
  if (j.contains("seed"))
    c.seed = static_cast<std::uint64_t>(get_int(j["seed"], "config.seed"));
  if (j.contains("threads"))
    c.threads = static_cast<int>(get_int(j["threads"], "config.threads"));
  if (j.contains("out_dir"))
    c.out_dir = get_string(j["out_dir"], "config.out_dir");
  if (j.contains("tolerance"))
    c.tolerance = get_double(j["tolerance"], "config.tolerance");

  if (c.walk.horizon < 1) fail("config.walk.horizon", "must be positive");
  if (c.walk.replicas < 1) fail("config.walk.replicas", "must be positive");
  if (c.ray.n < 1) fail("config.ray.n", "must be positive");
  if (c.threads < 1) fail("config.threads", "must be positive");
  c.offspring_law();  // validates probabilities
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(j);
}

std::string ExperimentConfig::canonical() const {
  ojson j;
  ojson off = ojson::array();
  for (auto& [k, p] : offspring) off.push_back({k, p});
  j["offspring"] = off;
  ojson kj;
  kj["type"] = kernel.type;
  if (kernel.type == "iid") {
    ojson law = ojson::array();
    for (auto& [w, p] : kernel.law) law.push_back({w, p});
    kj["law"] = law;
  } else if (kernel.type == "finite") {
    kj["weights"] = kernel.weights;
    if (!kernel.aux.empty()) kj["aux"] = kernel.aux;
    kj["matrix"] = kernel.matrix;
    kj["start_index"] = kernel.start_index;
  } else {
    kj["alpha"] = kernel.alpha;
    kj["grid_points"] = kernel.grid_points;
    kj["grid_lo"] = kernel.grid_lo;
    kj["grid_hi"] = kernel.grid_hi;
    kj["C"] = kernel.C;
    kj["start_weight"] = kernel.start_weight;
  }
  j["kernel"] = kj;
  if (reinforcement) {
    ojson r;
    r["L"] = reinforcement->L;
    r["p"] = reinforcement->p;
    if (reinforcement->threshold.kind == ThresholdRule::Kind::Constant) {
      r["threshold"] = {{"kind", "constant"},
                        {"value", reinforcement->threshold.value}};
    } else {
      ojson law = ojson::array();
      for (auto& [v, p] : reinforcement->threshold.law) law.push_back({v, p});
      r["threshold"] = {{"kind", "iid"}, {"law", law}};
    }
    j["reinforcement"] = r;
  }
  j["walk"] = {{"horizon", walk.horizon}, {"replicas", walk.replicas}};
  j["ray"] = {{"n", ray.n}, {"replicas", ray.replicas}};
  j["ldp"] = {{"lambda_grid", ldp.lambda_grid},
              {"k_pieces", ldp.k_pieces},
              {"restarts", ldp.restarts}};
  if (green.enabled)
    j["green"] = {{"n_max", green.n_max}, {"replicas", green.replicas}};
  ojson wins = ojson::array();
  for (auto& w : windows) {
    ojson wj;
    wj["lower"] = std::isinf(w.lower) ? ojson("-inf") : ojson(w.lower);
    wj["upper"] = w.upper;
    wins.push_back(wj);
  }
  j["windows"] = wins;
  ojson eg = ojson::array();
  for (auto& [e, r] : eta_grid) eg.push_back({e, r});
  j["eta_grid"] = eg;
  auto sweep_json = [](const SweepSpec& s) {
    return ojson{{"param", s.param}, {"lo", s.lo}, {"hi", s.hi},
                 {"steps", s.steps}};
  };
  if (sweep) j["sweep"] = sweep_json(*sweep);
  if (sweep2) j["sweep2"] = sweep_json(*sweep2);
  j["seed"] = seed;
  j["tolerance"] = tolerance;
  // threads and out_dir deliberately excluded: they must not change results.
  return j.dump();
}

std::uint64_t ExperimentConfig::hash() const {
  std::string s = canonical();
  return fnv1a(s.data(), s.size());
}

}  // namespace gwre
