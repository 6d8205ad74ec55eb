#include <algorithm>
#include <cmath>
#include <memory>

#include "doctest.h"
#include "gwre/offspring.hpp"
#include "gwre/tree.hpp"

using namespace gwre;

TEST_CASE("deterministic binary law expands to two children everywhere") {
  LazyTree tree(OffspringLaw::deterministic(2), 42);
  auto kids = tree.expand(kRoot);
  REQUIRE(kids.size() == 2);
  for (NodeId k : kids) CHECK(tree.expand(k).size() == 2);
  CHECK(tree.expand(kRoot) == kids);  // idempotent
}

TEST_CASE("all-deaths law gives an empty root expansion") {
  LazyTree tree(OffspringLaw({{0, 1.0}}), 1);
  CHECK(tree.expand(kRoot).empty());
}

TEST_CASE("same seed reproduces the same tree") {
  OffspringLaw law({{0, 0.25}, {2, 0.75}});
  LazyTree t1(law, 777), t2(law, 777);
  // Breadth-first over 4 levels, comparing child counts.
  std::vector<NodeId> f1{kRoot}, f2{kRoot};
  for (int level = 0; level < 4; ++level) {
    std::vector<NodeId> n1, n2;
    for (NodeId v : f1)
      for (NodeId c : t1.expand(v)) n1.push_back(c);
    for (NodeId v : f2)
      for (NodeId c : t2.expand(v)) n2.push_back(c);
    REQUIRE(n1.size() == n2.size());
    for (std::size_t i = 0; i < n1.size(); ++i)
      CHECK(t1.address(n1[i]) == t2.address(n2[i]));
    f1 = n1;
    f2 = n2;
  }
}

TEST_CASE("expanding the parent of a realized vertex lists it") {
  LazyTree tree(OffspringLaw({{0, 0.25}, {2, 0.75}}), 5);
  std::vector<NodeId> frontier{kRoot};
  for (int level = 0; level < 5 && !frontier.empty(); ++level) {
    std::vector<NodeId> next;
    for (NodeId v : frontier)
      for (NodeId c : tree.expand(v)) next.push_back(c);
    for (NodeId c : next) {
      auto sibs = tree.expand(tree.parent(c));
      CHECK(std::find(sibs.begin(), sibs.end(), c) != sibs.end());
      CHECK(tree.is_ancestor(kRoot, c));
    }
    frontier = next;
  }
}

TEST_CASE("querying an unrealized address throws") {
  LazyTree tree(OffspringLaw::deterministic(2), 9);
  CHECK_THROWS_AS(tree.at({0, 1, 0}), UnrealizedAncestorError);
}

TEST_CASE("extinction probability fixed points") {
  CHECK(extinction_probability(OffspringLaw::deterministic(2), 1e-12) ==
        doctest::Approx(0.0).epsilon(1e-10));
  OffspringLaw sup({{0, 0.25}, {2, 0.75}});
  double q = extinction_probability(sup, 1e-13);
  CHECK(q == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(std::abs(q - sup.pgf(q)) < 1e-10);  // fixed-point residual
  CHECK(extinction_probability(OffspringLaw({{0, 0.5}, {2, 0.5}}), 1e-9) ==
        doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("empirical offspring mean matches the law") {
  OffspringLaw law({{0, 0.25}, {1, 0.25}, {3, 0.5}});
  CounterRng rng(1234);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    int k = law.sample(rng);
    sum += k;
    sq += static_cast<double>(k) * k;
  }
  double mean = sum / n;
  double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - law.mean()) < 3.0 * se + 1e-12);
}
