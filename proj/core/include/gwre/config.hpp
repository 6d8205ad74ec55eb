#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gwre/env.hpp"
#include "gwre/offspring.hpp"
#include "gwre/walk.hpp"

namespace gwre {

/// Kernel section of a config: a built-in example by name or an explicit
/// iid / finite specification.
struct KernelSpec {
  std::string type = "iid";  // iid | finite | dyadic | dyadic-grid |
                             // exp-mixture | exp-mixture-grid
  std::vector<std::pair<double, double>> law = {{1.0, 1.0}};  // iid
  std::vector<double> weights;                                // finite
  std::vector<double> aux;                                    // finite
  std::vector<std::vector<double>> matrix;                    // finite
  int start_index = 0;                                        // finite
  double alpha = 0.5;       // exp-mixture variants
  int grid_points = 256;    // grid variants
  double grid_lo = 1e-3;
  double grid_hi = 5e4;
  double C = 2.0;           // dyadic sampler
  double start_weight = 0.5;

  EnvKernel build() const;
};

struct SweepSpec {
  std::string param;  // a | b | L | alpha
  double lo = 0.0;
  double hi = 1.0;
  int steps = 2;

  std::vector<double> values() const;
};

/// Full experiment description, parsed from a JSON document. Unknown keys
/// are rejected so that typos fail loudly.
struct ExperimentConfig {
  std::vector<std::pair<int, double>> offspring = {{2, 1.0}};
  KernelSpec kernel;
  std::optional<ReinforcedParams> reinforcement;

  struct {
    std::int64_t horizon = 10000;
    int replicas = 1000;
  } walk;
  struct {
    int n = 40;
    int replicas = 10000;
  } ray;
  struct {
    std::vector<double> lambda_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    int k_pieces = 64;
    int restarts = 8;
  } ldp;
  struct {
    int n_max = 30;
    int replicas = 2000;
    bool enabled = false;
  } green;

  std::vector<TruncationWindow> windows;
  std::vector<std::pair<double, double>> eta_grid;
  std::optional<SweepSpec> sweep;
  std::optional<SweepSpec> sweep2;

  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
  double tolerance = 1e-6;

  OffspringLaw offspring_law() const { return OffspringLaw(offspring); }
  double b() const { return offspring_law().mean(); }

  /// Canonical single-line JSON echo of the parsed config.
  std::string canonical() const;
  std::uint64_t hash() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

}  // namespace gwre
