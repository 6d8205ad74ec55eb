#include <cmath>
#include <limits>

#include "doctest.h"
#include "gwre/env.hpp"

using namespace gwre;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

EnvKernel uniform_two_state(double w0, double w1) {
  return EnvKernel::finite({{w0, 0.0, 0}, {w1, 0.0, 1}},
                           {{0.5, 0.5}, {0.5, 0.5}});
}
}  // namespace

TEST_CASE("kernel step basics") {
  CounterRng rng(11);
  EnvKernel pm = EnvKernel::iid({{0.5, 1.0}});
  CHECK(pm.step({3.0, 0.0, -1}, rng).weight == 0.5);

  EnvKernel id = EnvKernel::finite({{2.0, 0.0, 0}, {3.0, 0.0, 1}},
                                   {{1.0, 0.0}, {0.0, 1.0}});
  EnvState s = id.states()[1];
  CHECK(id.step(s, rng).index == 1);
  CHECK(id.step(s, rng).weight == 3.0);

  EnvKernel dy = dyadic_kernel();
  EnvState half{0.5, 1.0, -1};  // dyadic state
  CHECK(dy.step(half, rng).weight == doctest::Approx(0.25));
}

TEST_CASE("eta exact and estimated") {
  // Finite law with 1% of mass below eps.
  EnvKernel k = EnvKernel::iid({{0.005, 0.01}, {1.0, 0.99}});
  CHECK(eta(k, 0.01, 2.0) == doctest::Approx(0.01).epsilon(1e-12));

  // Uniform(0,1) sampler: P(0.01 < A <= 2) = 0.99; the sampler path reports
  // a lower-confidence value.
  EnvKernel u = EnvKernel::sampler(
      [](const EnvState&, CounterRng& rng) {
        return EnvState{rng.uniform_pos(), 0.0, -1};
      },
      {0.5, 0.0, -1}, "uniform01");
  double e = eta(u, 0.01, 2.0, 2000);
  CHECK(e >= 0.0);
  CHECK(e <= 0.04);

  // Dyadic grid chain: the absorbing bottom state never leaves (0, eps].
  EnvKernel dg = dyadic_grid_kernel(64);
  CHECK(eta(dg, 1e-6, 10.0) == doctest::Approx(1.0));
}

TEST_CASE("eta is monotone in the window") {
  EnvKernel k = EnvKernel::iid({{0.01, 0.2}, {0.5, 0.3}, {3.0, 0.5}});
  double prev = 1.0;
  for (double r : {0.6, 1.0, 4.0}) {
    double e = eta(k, 0.005, r);
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
}

TEST_CASE("log transform") {
  EnvKernel pm = log_transform(EnvKernel::iid({{1.0, 1.0}}));
  CHECK(pm.weight_law()[0].first == doctest::Approx(0.0));

  EnvKernel fm = log_transform(uniform_two_state(2.0, 0.5));
  CHECK(fm.states()[0].weight == doctest::Approx(std::log(2.0)));
  CHECK(fm.states()[1].weight == doctest::Approx(-std::log(2.0)));
  CHECK(fm.matrix() == uniform_two_state(2.0, 0.5).matrix());

  // Round trip on sampled paths.
  EnvKernel mix = exp_mixture_kernel(0.3);
  EnvKernel mix_ln = log_transform(mix);
  CounterRng r1(99), r2(99);
  EnvState a = mix.start();
  EnvState b = mix_ln.start();
  for (int i = 0; i < 200; ++i) {
    a = mix.step(a, r1);
    b = mix_ln.step(b, r2);
    CHECK(std::abs(std::exp(b.weight) - a.weight) <=
          1e-14 * std::max(1.0, a.weight));
  }
}

TEST_CASE("truncation") {
  // Already supported inside the window: unchanged.
  EnvKernel in = log_transform(uniform_two_state(1.5, 2.0));
  EnvKernel t = truncate(in, {0.0, 1.0});
  CHECK(t.matrix() == in.matrix());

  // Window keeps one state: point mass.
  EnvKernel two = log_transform(uniform_two_state(1.0, std::exp(-10.0)));
  EnvKernel q = truncate(two, {-1.0, 1.0});
  REQUIRE(q.states().size() == 1);
  CHECK(q.states()[0].weight == doctest::Approx(0.0));
  CHECK(q.matrix()[0][0] == doctest::Approx(1.0));

  // 3-state uniform chain, one state excluded: rows renormalized.
  EnvKernel three = log_transform(EnvKernel::finite(
      {{0.5, 0.0, 0}, {1.0, 0.0, 1}, {20.0, 0.0, 2}},
      {{1.0 / 3, 1.0 / 3, 1.0 / 3},
       {1.0 / 3, 1.0 / 3, 1.0 / 3},
       {1.0 / 3, 1.0 / 3, 1.0 / 3}}));
  EnvKernel qt = truncate(three, {-2.0, 1.0});
  REQUIRE(qt.states().size() == 2);
  for (const auto& row : qt.matrix()) {
    double s = 0.0;
    for (double v : row) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Zero-mass row: identity chain where one state's whole row leaves the
  // window.
  EnvKernel id = log_transform(EnvKernel::finite(
      {{1.0, 0.0, 0}, {std::exp(5.0), 0.0, 1}},
      {{0.0, 1.0}, {1.0, 0.0}}));
  CHECK_THROWS_AS(truncate(id, {-1.0, 1.0}), KernelError);
}

TEST_CASE("assumption-1 certificates") {
  MinorizationReport iid = check_assumption1(EnvKernel::iid({{2.0, 1.0}}), 4, 4);
  CHECK(iid.satisfied);
  CHECK(iid.ell == 1);
  CHECK(iid.n_mix == 1);
  CHECK(iid.kappa == doctest::Approx(1.0));

  EnvKernel chain = EnvKernel::finite({{0.5, 0.0, 0}, {2.0, 0.0, 1}},
                                      {{0.7, 0.3}, {0.4, 0.6}});
  MinorizationReport rep = check_assumption1(chain, 4, 4);
  CHECK(rep.satisfied);
  CHECK(minorization_violation(chain, rep) <= 1e-12);
}

TEST_CASE("mixture kernel: eta near alpha and ell = 2 certificate") {
  double alpha = 0.5;
  EnvKernel grid = exp_mixture_grid_kernel(alpha);
  double e = eta(grid, 1e-2, 4e4);
  CHECK(std::abs(e - alpha) < 0.05);

  MinorizationReport rep = check_assumption1(grid, 3, 3);
  CHECK(rep.satisfied);
  CHECK(rep.ell == 2);
  CHECK(minorization_violation(grid, rep) <= 1e-12);
}

TEST_CASE("mixture two-step density bound on a moderate grid range") {
  // (1 - alpha/e) e^{-w} <= k^(2)(x, w) <= 3 e^{-w}, up to discretization.
  double alpha = 0.5;
  EnvKernel grid = exp_mixture_grid_kernel(alpha);
  const auto& st = grid.states();
  const auto& m = grid.matrix();
  const std::size_t n = st.size();
  // Two-step rows for a few representative starts.
  for (std::size_t x : {std::size_t(10), n / 2, n - 10}) {
    std::vector<double> row2(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) row2[j] += m[x][k] * m[k][j];
    for (std::size_t j = 1; j + 1 < n; ++j) {
      double w = st[j].weight;
      if (w < 0.1 || w > 10.0) continue;
      // Cell edges are geometric midpoints of neighboring grid points.
      double lo = std::sqrt(st[j - 1].weight * w);
      double hi = std::sqrt(st[j + 1].weight * w);
      double density = row2[j] / (hi - lo);
      double rel_tol = (hi - lo) / w;  // discretization error scale
      CHECK(density >= (1.0 - alpha * std::exp(-1.0)) * std::exp(-w) *
                           (1.0 - 2.0 * rel_tol));
      CHECK(density <= 3.0 * std::exp(-w) * (1.0 + 2.0 * rel_tol));
    }
  }
}

TEST_CASE("truncated-kernel minorization chain inequality") {
  // Q^{(ell)}(x, {s}) <= kappa / ((1-eta)^ell N) sum_j Q^{(j)}(y, {s}).
  EnvKernel chain = EnvKernel::finite(
      {{0.5, 0.0, 0}, {1.0, 0.0, 1}, {4.0, 0.0, 2}},
      {{0.5, 0.3, 0.2}, {0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}});
  MinorizationReport rep = check_assumption1(chain, 3, 3);
  REQUIRE(rep.satisfied);
  double eps = 0.4, r = 2.0;  // window keeps the weights 0.5 and 1.0
  double et = eta(chain, eps, r);
  TruncationWindow w{std::log(eps), std::log(r)};
  EnvKernel q = truncate(log_transform(chain), w);
  const std::size_t n = q.states().size();
  // Matrix powers of q up to max(ell, N).
  int top = std::max(rep.ell, rep.n_mix);
  std::vector<std::vector<std::vector<double>>> pow(top + 1);
  pow[1] = q.matrix();
  for (int k = 2; k <= top; ++k) {
    pow[k].assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m2 = 0; m2 < n; ++m2)
        for (std::size_t j = 0; j < n; ++j)
          pow[k][i][j] += pow[k - 1][i][m2] * q.matrix()[m2][j];
  }
  double c = rep.kappa / (std::pow(1.0 - et, rep.ell) * rep.n_mix);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t s = 0; s < n; ++s) {
        double rhs = 0.0;
        for (int j = 1; j <= rep.n_mix; ++j) rhs += pow[j][y][s];
        CHECK(pow[rep.ell][x][s] <= c * rhs + 1e-12);
      }
}

TEST_CASE("beta measure") {
  // IID: eps-conditioned law after one step.
  EnvKernel k = EnvKernel::iid({{0.005, 0.2}, {1.0, 0.8}});
  auto beta = beta_measure(k, 0.01, {2.0, 0.0, -1}, 1);
  REQUIRE(beta.size() == 1);
  CHECK(beta[0].first.weight == doctest::Approx(1.0));
  CHECK(beta[0].second == doctest::Approx(1.0));

  // Identity kernel: point mass at the start.
  EnvKernel id = EnvKernel::finite({{2.0, 0.0, 0}, {3.0, 0.0, 1}},
                                   {{1.0, 0.0}, {0.0, 1.0}});
  auto b2 = beta_measure(id, 0.1, id.states()[1], 3);
  double mass_on_start = 0.0;
  for (auto& [s, p] : b2)
    if (s.index == 1) mass_on_start += p;
  CHECK(mass_on_start == doctest::Approx(1.0));

  // Uniform 2-state chain, ell = 2: uniform over surviving states.
  EnvKernel two = EnvKernel::finite({{1.0, 0.0, 0}, {2.0, 0.0, 1}},
                                    {{0.5, 0.5}, {0.5, 0.5}});
  auto b3 = beta_measure(two, 0.1, two.states()[0], 2);
  REQUIRE(b3.size() == 2);
  CHECK(b3[0].second == doctest::Approx(0.5));
  CHECK(b3[1].second == doctest::Approx(0.5));
}
