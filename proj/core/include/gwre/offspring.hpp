#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gwre/rng.hpp"

namespace gwre {

/// Finite-support offspring distribution of a Galton--Watson tree.
class OffspringLaw {
 public:
  /// `entries` maps offspring count -> probability. Probabilities must sum
  /// to 1 within 1e-12; throws Error otherwise.
  explicit OffspringLaw(std::vector<std::pair<int, double>> entries);

  double mean() const { return mean_; }
  bool supercritical() const { return mean_ > 1.0; }
  const std::vector<std::pair<int, double>>& entries() const {
    return entries_;
  }

  /// Probability generating function sum_k p_k s^k.
  double pgf(double s) const;

  /// One draw of an offspring count.
  int sample(CounterRng& rng) const;

  static OffspringLaw deterministic(int k) { return OffspringLaw({{k, 1.0}}); }

 private:
  std::vector<std::pair<int, double>> entries_;
  std::vector<double> cumulative_;
  double mean_ = 0.0;
};

/// Smallest fixed point q of the PGF, by iteration from 0.
double extinction_probability(const OffspringLaw& law, double tol);

}  // namespace gwre
