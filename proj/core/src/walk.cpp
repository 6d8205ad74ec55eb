#include "gwre/walk.hpp"

#include <cmath>
#include <mutex>

#include "gwre/errors.hpp"

namespace gwre {

double ThresholdRule::sample(double p_floor, CounterRng& rng) const {
  double b;
  switch (kind) {
    case Kind::Constant:
      b = value;
      break;
    case Kind::IidLaw: {
      if (law.empty()) throw Error("threshold rule: empty law");
      double u = rng.uniform();
      double acc = 0.0;
      b = law.back().first;
      for (auto& [v, p] : law) {
        acc += p;
        if (u < acc) {
          b = v;
          break;
        }
      }
      break;
    }
    default:
      throw Error("threshold rule: unknown kind");
  }
  return std::max(b, p_floor);
}

WalkEnvironment::WalkEnvironment(std::shared_ptr<LazyTree> tree,
                                 EnvKernel kernel,
                                 std::optional<ReinforcedParams> reinforced)
    : tree_(std::move(tree)),
      kernel_(std::move(kernel)),
      reinforced_(std::move(reinforced)) {
  states_.push_back(kernel_.start());
  double root_threshold = 0.0;
  if (reinforced_) {
    CounterRng trng(CounterRng::derive(tree_->vertex_key(kRoot), 0x74687265ull));
    root_threshold = reinforced_->threshold.sample(reinforced_->p, trng);
  }
  thresholds_.push_back(root_threshold);
}

std::vector<NodeId> WalkEnvironment::children(NodeId v) {
  auto kids = tree_->expand(v);
  {
    std::shared_lock lock(mutex_);
    if (kids.empty() ||
        static_cast<std::size_t>(kids.back()) < states_.size())
      return kids;
  }
  realize_children(v, kids);
  return kids;
}

void WalkEnvironment::realize_children(NodeId v,
                                       const std::vector<NodeId>& kids) {
  std::unique_lock lock(mutex_);
  std::size_t need = static_cast<std::size_t>(kids.back()) + 1;
  if (states_.size() < need) states_.resize(need);
  if (thresholds_.size() < need) thresholds_.resize(need);
  const EnvState parent_state = states_[v];
  for (NodeId c : kids) {
    // Keyed on the child's address: realization order never matters.
    CounterRng rng(CounterRng::derive(tree_->vertex_key(c), 0x656e76ull));
    states_[c] = kernel_.step(parent_state, rng);
    if (reinforced_) {
      CounterRng trng(CounterRng::derive(tree_->vertex_key(c), 0x74687265ull));
      thresholds_[c] = reinforced_->threshold.sample(reinforced_->p, trng);
    }
  }
}

double WalkEnvironment::weight(NodeId v) const {
  std::shared_lock lock(mutex_);
  if (v < 0 || static_cast<std::size_t>(v) >= states_.size())
    throw UnrealizedAncestorError("weight: vertex not realized");
  return states_[v].weight;
}

double WalkEnvironment::threshold(NodeId v) const {
  if (!reinforced_) throw Error("threshold: reinforcement disabled");
  std::shared_lock lock(mutex_);
  if (v < 0 || static_cast<std::size_t>(v) >= thresholds_.size())
    throw UnrealizedAncestorError("threshold: vertex not realized");
  return thresholds_[v];
}

EnvState WalkEnvironment::env_state(NodeId v) const {
  std::shared_lock lock(mutex_);
  if (v < 0 || static_cast<std::size_t>(v) >= states_.size())
    throw UnrealizedAncestorError("env_state: vertex not realized");
  return states_[v];
}

double effective_weight(const WalkEnvironment& env, const WalkState& state,
                        NodeId v) {
  double a = env.weight(v);
  const auto& reinforced = env.reinforced();
  if (!reinforced) return a;
  if (a <= env.threshold(v) && state.visited(v)) return reinforced->L;
  return a;
}

std::vector<std::pair<NodeId, double>> transition_distribution(
    WalkEnvironment& env, const WalkState& state) {
  if (state.position == kSentinel)
    throw Error("transition_distribution: walker sits on the sentinel");
  auto kids = env.children(state.position);
  std::vector<std::pair<NodeId, double>> out;
  double denom = 1.0;
  for (NodeId c : kids) {
    double g = effective_weight(env, state, c);
    out.emplace_back(c, g);
    denom += g;
  }
  NodeId parent = state.position == kRoot ? kSentinel
                                          : env.tree().parent(state.position);
  out.emplace_back(parent, 1.0);
  for (auto& [target, w] : out) w /= denom;
  return out;
}

void walk_step(WalkEnvironment& env, WalkState& state, CounterRng& rng) {
  auto kids = env.children(state.position);
  double denom = 1.0;
  double sum = 0.0;
  // Two passes: total mass, then inverse-CDF draw; avoids allocating.
  for (NodeId c : kids) denom += effective_weight(env, state, c);
  double u = rng.uniform() * denom;
  NodeId target = state.position == kRoot ? kSentinel
                                          : env.tree().parent(state.position);
  for (NodeId c : kids) {
    sum += effective_weight(env, state, c);
    if (u < sum) {
      target = c;
      break;
    }
  }
  state.position = target;
  ++state.time;
  if (target != kSentinel) state.first_visit.try_emplace(target, state.time);
}

EscapeOutcome run_escape_trial(WalkEnvironment& env, std::int64_t horizon,
                               CounterRng& rng) {
  if (horizon <= 0) throw Error("run_escape_trial: horizon must be positive");
  WalkState state;
  EscapeOutcome out;
  while (state.time < horizon) {
    walk_step(env, state, rng);
    if (state.position == kSentinel) {
      out.kind = EscapeOutcome::Kind::ReturnedToRoot;
      out.depth = 0;
      out.steps = state.time;
      return out;
    }
  }
  out.kind = EscapeOutcome::Kind::AliveAtHorizon;
  out.depth = env.tree().depth(state.position);
  out.steps = state.time;
  return out;
}

HittingRecord ray_walk(const RayWeights& weights, int start, CounterRng& rng,
                       std::int64_t horizon) {
  int n = static_cast<int>(weights.n());
  if (n < 1) throw Error("ray_walk: empty ray");
  if (start < 0 || start >= n) throw Error("ray_walk: start out of range");
  int pos = start;
  HittingRecord rec;
  while (horizon == 0 || rec.steps < horizon) {
    double a_up = weights.a[pos];  // weight of sigma_{pos+1}
    ++rec.steps;
    if (rng.uniform() < a_up / (1.0 + a_up)) {
      ++pos;
      if (pos == n) {
        rec.outcome = HittingRecord::Outcome::HitLevel;
        return rec;
      }
    } else {
      --pos;
      if (pos < 0) {
        rec.outcome = HittingRecord::Outcome::HitParentSentinel;
        return rec;
      }
    }
  }
  rec.outcome = HittingRecord::Outcome::HorizonExceeded;
  return rec;
}

}  // namespace gwre
