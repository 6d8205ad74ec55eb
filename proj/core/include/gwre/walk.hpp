#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "gwre/env.hpp"
#include "gwre/ray.hpp"
#include "gwre/tree.hpp"

namespace gwre {

/// Rule producing the per-vertex thresholds b_nu (always clamped to >= p).
struct ThresholdRule {
  enum class Kind { Constant, IidLaw };
  Kind kind = Kind::Constant;
  double value = 1.0;
  std::vector<std::pair<double, double>> law;  // (threshold, probability)

  double sample(double p_floor, CounterRng& rng) const;

  static ThresholdRule constant(double v) { return {Kind::Constant, v, {}}; }
};

/// Parameters of the environment-modifying walk: on the first visit to a
/// vertex with A_nu <= b_nu, its effective weight becomes L and stays L.
struct ReinforcedParams {
  double L = 1.0;
  double p = 1.0;
  ThresholdRule threshold = ThresholdRule::constant(1.0);
};

/// Quenched environment over a lazily realized tree.
///
/// A child's chain state is drawn by stepping the kernel from the parent's
/// state; siblings are conditionally independent given the parent. Weights
/// are keyed on vertex addresses, so the realization does not depend on
/// visit order. Concurrent reads, exclusive insertion.
class WalkEnvironment {
 public:
  WalkEnvironment(std::shared_ptr<LazyTree> tree, EnvKernel kernel,
                  std::optional<ReinforcedParams> reinforced = std::nullopt);

  /// Children of v, realizing offspring counts, chain states and thresholds
  /// together.
  std::vector<NodeId> children(NodeId v);

  double weight(NodeId v) const;     // A_nu
  double threshold(NodeId v) const;  // b_nu
  EnvState env_state(NodeId v) const;

  const LazyTree& tree() const { return *tree_; }
  LazyTree& tree() { return *tree_; }
  const EnvKernel& kernel() const { return kernel_; }
  const std::optional<ReinforcedParams>& reinforced() const {
    return reinforced_;
  }

 private:
  void realize_children(NodeId v, const std::vector<NodeId>& kids);

  std::shared_ptr<LazyTree> tree_;
  EnvKernel kernel_;
  std::optional<ReinforcedParams> reinforced_;
  std::vector<EnvState> states_;
  std::vector<double> thresholds_;
  mutable std::shared_mutex mutex_;
};

/// Walker state: position (kSentinel when sitting on the adjoined parent),
/// clock, and first-visit times S_nu driving the effective weights G(nu, n).
struct WalkState {
  NodeId position = kRoot;
  std::int64_t time = 0;
  std::unordered_map<NodeId, std::int64_t> first_visit = {{kRoot, 0}};

  bool visited(NodeId v) const { return first_visit.contains(v); }
};

/// Effective weight G(nu, n): A_nu, or L once a below-threshold vertex has
/// been visited. Equals A_nu whenever reinforcement is disabled.
double effective_weight(const WalkEnvironment& env, const WalkState& state,
                        NodeId v);

/// Transition distribution out of the current position: children first,
/// parent edge last. Probabilities sum to 1.
std::vector<std::pair<NodeId, double>> transition_distribution(
    WalkEnvironment& env, const WalkState& state);

/// One step of the quenched walk; realizes children on demand.
void walk_step(WalkEnvironment& env, WalkState& state, CounterRng& rng);

struct EscapeOutcome {
  enum class Kind { ReturnedToRoot, AliveAtHorizon };
  Kind kind = Kind::AliveAtHorizon;
  int depth = 0;
  std::int64_t steps = 0;
};

/// Runs the walk from the root until it is absorbed at the adjoined parent
/// or the horizon elapses.
EscapeOutcome run_escape_trial(WalkEnvironment& env, std::int64_t horizon,
                               CounterRng& rng);

struct HittingRecord {
  enum class Outcome { HitLevel, HitParentSentinel, HorizonExceeded };
  Outcome outcome = Outcome::HorizonExceeded;
  std::int64_t steps = 0;
};

/// Birth-death chain on sigma_{-1}..sigma_n run until absorption at either
/// end (horizon guards against unbounded runs; 0 means none).
HittingRecord ray_walk(const RayWeights& weights, int start, CounterRng& rng,
                       std::int64_t horizon = 0);

}  // namespace gwre
