#pragma once

#include <optional>
#include <vector>

#include "gwre/env.hpp"
#include "gwre/rng.hpp"

namespace gwre {

/// Weights along a fixed line of descent sigma_1..sigma_n. `d` carries the
/// post-modification weights of the reinforced walk (L where the weight sits
/// below its threshold), `thresholds` the per-vertex thresholds b_i.
struct RayWeights {
  std::vector<double> a;
  std::optional<std::vector<double>> d;
  std::optional<std::vector<double>> thresholds;

  std::size_t n() const { return a.size(); }

  /// Derives d from (a, thresholds, L): d_i = L if a_i < b_i else a_i.
  static RayWeights reinforced(std::vector<double> a,
                               std::vector<double> thresholds, double L);
};

/// (1/n) ln of an estimated hitting probability, with its standard error.
struct RateEstimate {
  int n = 0;
  /// (1/n) ln of the environment-averaged hitting probability (the annealed
  /// rate entering the transience criterion).
  double value = 0.0;
  double stderr_ = 0.0;
  /// (1/n) of the averaged ln hitting probability over beta-drawn starts;
  /// Jensen gives beta_log_value <= value up to noise.
  double beta_log_value = 0.0;
  double beta_log_stderr = 0.0;
};

/// Quenched probability that the ray walk from sigma_0 hits sigma_n before
/// the adjoined parent: 1 / sum_{r=0}^n prod_{j<=r} a_j^{-1}, evaluated in
/// log space. n = 0 returns 1.
double hit_prob_exact(const RayWeights& weights);

/// Monte Carlo over environment realizations of hit_prob_exact.
/// Returns (mean, standard error).
std::pair<double, double> annealed_hit_prob(const EnvKernel& kernel,
                                            const EnvState& start, int n,
                                            int replicas, CounterRng& rng);

/// Rate of decay of the hitting probability at depth n. Environment starts
/// are drawn from beta_eps (exact table for finite kernels; the kernel start
/// itself when `beta` is empty).
RateEstimate rate_estimate(const EnvKernel& kernel,
                           const std::vector<std::pair<EnvState, double>>& beta,
                           int n, int replicas, CounterRng& rng);

/// The reinforced-ray comparison quantities.
struct ReinforcedRayQuantities {
  std::vector<double> Qd;   // Q_i^D, i = 1..n
  std::vector<double> qd;   // q_i^D
  std::vector<double> qa;   // q_i^A
  std::vector<double> phi;  // Phi_i
};

/// Recursions: q_i^D = d_i / (1 + d_i - q_{i-1}^D), q_i^A with a_i in place
/// of d_i, Q_i^D = prod q_j^D, Phi_i = prod (q_j^A / q_j^D); q_0^D = 0.
ReinforcedRayQuantities reinforced_ray_quantities(const RayWeights& weights);

}  // namespace gwre
