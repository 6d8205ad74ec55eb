#include <cmath>
#include <memory>

#include "doctest.h"
#include "gwre/walk.hpp"
#include "oracles.hpp"

using namespace gwre;

namespace {

std::shared_ptr<LazyTree> tree_of(int arity, std::uint64_t seed = 1) {
  return std::make_shared<LazyTree>(OffspringLaw::deterministic(arity), seed);
}

double total_prob(const std::vector<std::pair<NodeId, double>>& dist) {
  double s = 0.0;
  for (auto& [v, p] : dist) s += p;
  return s;
}

}  // namespace

TEST_CASE("transition distribution matches the weight formula") {
  // One child with A = 1: child and parent each get probability 1/2.
  WalkEnvironment env1(tree_of(1), EnvKernel::iid({{1.0, 1.0}}));
  WalkState s1;
  auto d1 = transition_distribution(env1, s1);
  REQUIRE(d1.size() == 2);
  CHECK(d1[0].second == doctest::Approx(0.5));
  CHECK(d1[1].second == doctest::Approx(0.5));
  CHECK(d1[1].first == kSentinel);

  // Two children with A = 2 each: 2/5, 2/5, parent 1/5.
  WalkEnvironment env2(tree_of(2), EnvKernel::iid({{2.0, 1.0}}));
  WalkState s2;
  auto d2 = transition_distribution(env2, s2);
  REQUIRE(d2.size() == 3);
  CHECK(d2[0].second == doctest::Approx(0.4));
  CHECK(d2[1].second == doctest::Approx(0.4));
  CHECK(d2[2].second == doctest::Approx(0.2));
}

TEST_CASE("transition probabilities sum to one on a random tree") {
  auto tree = std::make_shared<LazyTree>(OffspringLaw({{0, 0.2}, {3, 0.8}}), 7);
  WalkEnvironment env(tree, EnvKernel::iid({{0.5, 0.5}, {2.0, 0.5}}));
  WalkState state;
  CounterRng rng(3);
  for (int step = 0; step < 200 && state.position != kSentinel; ++step) {
    CHECK(total_prob(transition_distribution(env, state)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    walk_step(env, state, rng);
  }
}

TEST_CASE("reinforcement replaces visited below-threshold weights by L") {
  ReinforcedParams params{1.0, 1.0, ThresholdRule::constant(1.0)};
  WalkEnvironment env(tree_of(1, 4), EnvKernel::iid({{0.5, 1.0}}), params);
  WalkState state;
  auto before = transition_distribution(env, state);
  // Unvisited child keeps A = 0.5: probabilities (1/3, 2/3).
  CHECK(before[0].second == doctest::Approx(0.5 / 1.5));

  NodeId child = before[0].first;
  state.position = child;
  state.time = 1;
  state.first_visit.emplace(child, 1);
  state.position = kRoot;  // walked down and back
  auto after = transition_distribution(env, state);
  // Visited below-threshold child now weighs L = 1: probabilities (1/2, 1/2).
  CHECK(after[0].second == doctest::Approx(0.5));
  CHECK(effective_weight(env, state, child) == doctest::Approx(1.0));
  // One-shot: stays L on later queries.
  CHECK(effective_weight(env, state, child) == doctest::Approx(1.0));
}

TEST_CASE("no reinforcement means effective weight equals A") {
  WalkEnvironment env(tree_of(2, 5), EnvKernel::iid({{0.3, 1.0}}));
  WalkState state;
  for (NodeId c : env.children(kRoot)) {
    state.first_visit.emplace(c, 1);
    CHECK(effective_weight(env, state, c) == doctest::Approx(0.3));
  }
}

TEST_CASE("once-reinforced walk equivalence, transition by transition") {
  // L = 1, A = 1/(1+Delta) with Delta = 1: visited vertices weigh 1,
  // unvisited ones 1/2.
  const double delta = 1.0;
  ReinforcedParams params{1.0, 1.0, ThresholdRule::constant(1.0)};
  WalkEnvironment env(tree_of(3, 6), EnvKernel::iid({{1.0 / (1.0 + delta), 1.0}}),
                      params);
  WalkState state;
  CounterRng rng(17);
  for (int step = 0; step < 300 && state.position != kSentinel; ++step) {
    auto dist = transition_distribution(env, state);
    double denom = 1.0;
    for (NodeId c : env.children(state.position))
      denom += state.visited(c) ? 1.0 : 1.0 / (1.0 + delta);
    std::size_t i = 0;
    for (NodeId c : env.children(state.position)) {
      double expect = (state.visited(c) ? 1.0 : 1.0 / (1.0 + delta)) / denom;
      CHECK(dist[i].second == doctest::Approx(expect).epsilon(1e-12));
      ++i;
    }
    CHECK(dist.back().second == doctest::Approx(1.0 / denom).epsilon(1e-12));
    walk_step(env, state, rng);
  }
}

TEST_CASE("ray walk frequencies match the absorption oracle") {
  CounterRng rng(123);
  auto freq = [&](const std::vector<double>& a, int runs) {
    RayWeights w{a, std::nullopt, std::nullopt};
    int hits = 0;
    for (int i = 0; i < runs; ++i)
      if (ray_walk(w, 0, rng).outcome == HittingRecord::Outcome::HitLevel)
        ++hits;
    return static_cast<double>(hits) / runs;
  };

  CHECK(std::abs(freq({1.0}, 20000) - 0.5) < 0.02);

  double f4 = freq({1.0, 1.0, 1.0, 1.0}, 100000);
  CHECK(std::abs(f4 - 0.2) < 3.0 * std::sqrt(0.2 * 0.8 / 100000));

  double f22 = freq({2.0, 2.0}, 100000);
  double exact = oracles::hit_prob_linear_system({2.0, 2.0});
  CHECK(exact == doctest::Approx(4.0 / 7.0));
  CHECK(std::abs(f22 - exact) < 3.0 * std::sqrt(exact * (1 - exact) / 100000));
}

TEST_CASE("escape trials separate transient from recurrent regimes") {
  // A = 1, b = 3: majority alive at horizon.
  int alive = 0;
  for (int rep = 0; rep < 60; ++rep) {
    auto tree = tree_of(3, 1000 + rep);
    WalkEnvironment env(tree, EnvKernel::iid({{1.0, 1.0}}));
    CounterRng rng(CounterRng::derive(2000, rep));
    auto out = run_escape_trial(env, 3000, rng);
    if (out.kind == EscapeOutcome::Kind::AliveAtHorizon) {
      ++alive;
      CHECK(out.depth > 0);
    }
  }
  CHECK(alive > 30);

  // A = 0.2, b = 2: returns dominate.
  int returned = 0;
  for (int rep = 0; rep < 60; ++rep) {
    auto tree = tree_of(2, 5000 + rep);
    WalkEnvironment env(tree, EnvKernel::iid({{0.2, 1.0}}));
    CounterRng rng(CounterRng::derive(6000, rep));
    if (run_escape_trial(env, 3000, rng).kind ==
        EscapeOutcome::Kind::ReturnedToRoot)
      ++returned;
  }
  CHECK(returned >= 59);
}
