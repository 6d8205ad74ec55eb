#include "gwre/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "gwre/ldp.hpp"
#include "gwre/ray.hpp"

namespace gwre {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads < 1) throw Error("parallel_for: threads must be positive");
  std::size_t t = std::min<std::size_t>(threads, n);
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(t);
  for (std::size_t w = 0; w < t; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += t) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : workers) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string RunManifest::to_json() const {
  ojson j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["subcommand"] = subcommand;
  j["files"] = files;
  j["wall_ms"] = wall_ms;
  j["version"] = version;
  return j.dump(2);
}

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const ExperimentConfig& config,
            const std::string& subcommand, const std::string& columns)
      : out_(path) {
    if (!out_) throw Error("cannot open output file: " + path);
    out_ << "# gwre " << kVersion << "\n";
    out_ << "# subcommand: " << subcommand << "\n";
    out_ << "# config-hash: " << hash_hex(config.hash()) << "\n";
    out_ << "# config: " << config.canonical() << "\n";
    out_ << "# columns: " << columns << "\n";
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::string outcome_name(EscapeOutcome::Kind k) {
  return k == EscapeOutcome::Kind::ReturnedToRoot ? "returned_to_root"
                                                  : "alive_at_horizon";
}

void run_simulate(const ExperimentConfig& config, const std::string& path) {
  const int replicas = config.walk.replicas;
  std::vector<EscapeOutcome> results(replicas);
  OffspringLaw law = config.offspring_law();
  EnvKernel kernel = config.kernel.build();
  parallel_for(replicas, config.threads, [&](std::size_t r) {
    std::uint64_t rseed = CounterRng::derive(config.seed, r);
    auto tree = std::make_shared<LazyTree>(law, rseed);
    WalkEnvironment env(tree, kernel, config.reinforcement);
    CounterRng rng(CounterRng::derive(rseed, 0x77616c6bull));
    results[r] = run_escape_trial(env, config.walk.horizon, rng);
  });
  CsvWriter csv(path, config, "simulate", "replica,outcome,depth,steps");
  for (int r = 0; r < replicas; ++r)
    csv.row({std::to_string(r), outcome_name(results[r].kind),
             std::to_string(results[r].depth),
             std::to_string(results[r].steps)});
}

void run_ray(const ExperimentConfig& config, const std::string& path) {
  EnvKernel kernel = config.kernel.build();
  struct Row {
    double estimate, stderr_, rate;
  };
  std::vector<Row> rows(config.ray.n);
  parallel_for(config.ray.n, config.threads, [&](std::size_t i) {
    int n = static_cast<int>(i) + 1;
    CounterRng rng(CounterRng::derive(config.seed, 0x726179ull + i));
    auto [mean, se] =
        annealed_hit_prob(kernel, kernel.start(), n, config.ray.replicas, rng);
    rows[i] = {mean, se, mean > 0.0
                             ? std::log(mean) / n
                             : -std::numeric_limits<double>::infinity()};
  });
  CsvWriter csv(path, config, "ray", "n,estimate,stderr,rate");
  for (int i = 0; i < config.ray.n; ++i)
    csv.row({std::to_string(i + 1), fmt_double(rows[i].estimate),
             fmt_double(rows[i].stderr_), fmt_double(rows[i].rate)});
}

void run_ldp(const ExperimentConfig& config, const std::string& cgf_path,
             const std::string& var_path) {
  EnvKernel kernel = config.kernel.build();
  EmpiricalCgfOptions opts;
  opts.seed = CounterRng::derive(config.seed, 0x6c6470ull);
  Cgf phi = make_cgf(log_transform(kernel), opts);
  std::vector<double> vals(config.ldp.lambda_grid.size());
  parallel_for(vals.size(), config.threads,
               [&](std::size_t i) { vals[i] = phi(config.ldp.lambda_grid[i]); });
  CsvWriter csv(cgf_path, config, "ldp", "lambda,cgf");
  for (std::size_t i = 0; i < vals.size(); ++i)
    csv.row({fmt_double(config.ldp.lambda_grid[i]), fmt_double(vals[i])});

  VariationalResult vr = variational_solve(
      phi.eval, config.ldp.k_pieces, config.ldp.restarts,
      CounterRng::derive(config.seed, 0x766172ull));
  CsvWriter vcsv(var_path, config, "ldp",
                 "inf_phi,lambda_argmin,achieved,gap");
  vcsv.row({fmt_double(vr.inf_phi), fmt_double(vr.lambda_argmin),
            fmt_double(vr.achieved), fmt_double(vr.gap())});
}

std::vector<std::string> report_row(const RegimeReport& r,
                                    std::vector<std::string> prefix = {}) {
  auto& out = prefix;
  out.push_back(to_string(r.theorem));
  out.push_back(to_string(r.verdict));
  out.push_back(fmt_double(r.margin));
  out.push_back(fmt_double(r.b));
  out.push_back(fmt_double(r.eta_value));
  out.push_back(fmt_double(r.inf_cgf_transient));
  out.push_back(fmt_double(r.inf_cgf_recurrent));
  out.push_back(fmt_double(r.window.lower));
  out.push_back(fmt_double(r.window.upper));
  return out;
}

constexpr const char* kReportColumns =
    "theorem,verdict,margin,b,eta,inf_cgf_window,inf_cgf_full,window_lower,"
    "window_upper";

void run_classify(const ExperimentConfig& config, const std::string& csv_path,
                  const std::string& txt_path,
                  const std::string& green_path,
                  std::vector<std::string>& files) {
  RegimeReport report = classify_config(config);
  CsvWriter csv(csv_path, config, "classify", kReportColumns);
  csv.row(report_row(report));
  files.push_back(csv_path);

  std::ofstream txt(txt_path);
  if (!txt) throw Error("cannot open output file: " + txt_path);
  txt << "verdict:  " << to_string(report.verdict) << "\n"
      << "theorem:  " << to_string(report.theorem) << "\n"
      << "margin:   " << fmt_double(report.margin) << "\n"
      << "b:        " << fmt_double(report.b) << "\n"
      << "eta:      " << fmt_double(report.eta_value) << "\n"
      << "detail:   " << report.detail << "\n";
  files.push_back(txt_path);

  if (config.green.enabled) {
    double survival =
        1.0 - extinction_probability(config.offspring_law(), 1e-12);
    CounterRng rng(CounterRng::derive(config.seed, 0x677265656eull));
    GreenTestResult g =
        green_branching_test(config.kernel.build(), config.b(), survival,
                             config.green.n_max, config.green.replicas, rng);
    CsvWriter gcsv(green_path, config, "classify", "n_star,product,stderr");
    gcsv.row({g.n_star ? std::to_string(*g.n_star) : "none",
              fmt_double(g.product), fmt_double(g.stderr_)});
    files.push_back(green_path);
  }
}

// Applies one sweep value; "b" is returned as an override instead of being
// written back (classification takes b as a scalar).
void apply_sweep(ExperimentConfig& config, const std::string& param, double v,
                 double& b_override) {
  if (param == "a") {
    config.kernel = KernelSpec{};
    config.kernel.type = "iid";
    config.kernel.law = {{v, 1.0}};
  } else if (param == "b") {
    b_override = v;
  } else if (param == "L") {
    if (!config.reinforcement)
      throw ConfigError("sweep.param: L sweep needs a reinforcement section");
    config.reinforcement->L = v;
  } else if (param == "alpha") {
    if (config.kernel.type != "exp-mixture" &&
        config.kernel.type != "exp-mixture-grid")
      throw ConfigError("sweep.param: alpha sweep needs an exp-mixture kernel");
    config.kernel.alpha = v;
  } else {
    throw ConfigError("sweep.param: unknown sweep parameter " + param);
  }
}

void run_phase_diagram(const ExperimentConfig& config,
                       const std::string& path) {
  if (!config.sweep)
    throw ConfigError("config.sweep: phase-diagram needs a sweep section");
  std::vector<double> v1 = config.sweep->values();
  std::vector<double> v2 =
      config.sweep2 ? config.sweep2->values() : std::vector<double>{0.0};
  std::string columns = config.sweep2
                            ? config.sweep->param + "," + config.sweep2->param
                            : config.sweep->param;
  CsvWriter csv(path, config, "phase-diagram",
                columns + "," + kReportColumns);
  for (double a : v1) {
    for (double b2 : v2) {
      ExperimentConfig c = config;
      double b_override = c.b();
      apply_sweep(c, config.sweep->param, a, b_override);
      if (config.sweep2) apply_sweep(c, config.sweep2->param, b2, b_override);
      std::vector<std::string> prefix{fmt_double(a)};
      if (config.sweep2) prefix.push_back(fmt_double(b2));
      RegimeReport r;
      try {
        r = classify_config(c, b_override);
      } catch (const Error&) {
        std::vector<std::string> row = std::move(prefix);
        row.insert(row.end(),
                   {"error", "Indeterminate", "nan", fmt_double(b_override),
                    "nan", "nan", "nan", "nan", "nan"});
        csv.row(row);
        continue;
      }
      csv.row(report_row(r, std::move(prefix)));
    }
  }
}

}  // namespace

RegimeReport classify_config(const ExperimentConfig& config) {
  return classify_config(config, config.b());
}

RegimeReport classify_config(const ExperimentConfig& config, double b) {
  if (config.reinforcement) {
    const ReinforcedParams& params = *config.reinforcement;
    if (params.threshold.kind != ThresholdRule::Kind::Constant)
      throw ConfigError(
          "config.reinforcement.threshold: classification needs a constant "
          "threshold rule");
    EnvKernel mk = config.kernel.build().as_matrix();
    double thr = std::max(params.threshold.value, params.p);
    std::vector<EnvState> states = mk.states();
    for (auto& s : states) s.aux = thr;
    EnvKernel star = EnvKernel::finite(states, mk.matrix());
    return classify_reinforced(star, b, params, config.eta_grid,
                               config.windows, config.tolerance);
  }
  if (config.kernel.type == "iid")
    return classify_iid(config.kernel.law, b, config.tolerance);
  return classify_markov(config.kernel.build(), b, config.windows,
                         config.eta_grid, config.tolerance);
}

CsvDocument read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open csv: " + path);
  CsvDocument doc;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t from = line.size() > 1 && line[1] == ' ' ? 2 : 1;
      doc.header.push_back(line.substr(from));
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    doc.rows.push_back(std::move(fields));
  }
  return doc;
}

RunManifest run(const std::string& subcommand,
                const ExperimentConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(config.out_dir);
  auto out = [&](const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
  };
  RunManifest manifest;
  manifest.config_hash = hash_hex(config.hash());
  manifest.seed = config.seed;
  manifest.subcommand = subcommand;

  if (subcommand == "simulate") {
    std::string p = out("simulate.csv");
    run_simulate(config, p);
    manifest.files.push_back(p);
  } else if (subcommand == "ray") {
    std::string p = out("ray.csv");
    run_ray(config, p);
    manifest.files.push_back(p);
  } else if (subcommand == "ldp") {
    std::string p1 = out("ldp.csv");
    std::string p2 = out("variational.csv");
    run_ldp(config, p1, p2);
    manifest.files.push_back(p1);
    manifest.files.push_back(p2);
  } else if (subcommand == "classify") {
    run_classify(config, out("classify.csv"), out("classify.txt"),
                 out("green.csv"), manifest.files);
  } else if (subcommand == "phase-diagram") {
    std::string p = out("phase_diagram.csv");
    run_phase_diagram(config, p);
    manifest.files.push_back(p);
  } else {
    throw ConfigError("unknown subcommand: " + subcommand);
  }

  auto t1 = std::chrono::steady_clock::now();
  manifest.wall_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  std::ofstream mf(out("manifest.json"));
  if (!mf) throw Error("cannot open manifest.json for writing");
  mf << manifest.to_json() << "\n";
  return manifest;
}

}  // namespace gwre
