#include <cmath>
#include <random>

#include "doctest.h"
#include "gwre/ldp.hpp"
#include "gwre/ray.hpp"
#include "oracles.hpp"

using namespace gwre;

TEST_CASE("hit_prob_exact closed-form cases") {
  CHECK(hit_prob_exact({{1.0, 1.0, 1.0, 1.0}, {}, {}}) ==
        doctest::Approx(0.2).epsilon(1e-14));
  CHECK(hit_prob_exact({{2.0, 2.0}, {}, {}}) ==
        doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  CHECK(hit_prob_exact({{0.5, 2.0}, {}, {}}) ==
        doctest::Approx(0.25).epsilon(1e-14));
  CHECK(hit_prob_exact({{}, {}, {}}) == 1.0);
}

TEST_CASE("hit_prob_exact agrees with the linear-system oracle") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> logw(std::log(1e-3), std::log(1e3));
  std::uniform_int_distribution<int> len(1, 100);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(len(gen));
    for (double& w : a) w = std::exp(logw(gen));
    double lib = hit_prob_exact({a, {}, {}});
    double oracle = oracles::hit_prob_linear_system(a);
    CHECK(std::abs(lib - oracle) <= 1e-12);
  }
}

TEST_CASE("hit_prob_exact is nondecreasing in each weight") {
  std::vector<double> a{0.4, 1.3, 0.9, 2.2};
  double base = hit_prob_exact({a, {}, {}});
  for (std::size_t j = 0; j < a.size(); ++j) {
    auto up = a;
    up[j] *= 1.1;
    CHECK(hit_prob_exact({up, {}, {}}) >= base - 1e-15);
  }
}

TEST_CASE("annealed hitting probability") {
  CounterRng rng(55);
  // Point mass a = 1: deterministic 1/5.
  auto [m1, s1] = annealed_hit_prob(EnvKernel::iid({{1.0, 1.0}}),
                                    {1.0, 0.0, -1}, 4, 100, rng);
  CHECK(m1 == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(s1 == doctest::Approx(0.0));

  // IID uniform on {1/2, 2}, n = 2: exhaustive 4-path enumeration.
  std::vector<std::pair<double, double>> law{{0.5, 0.5}, {2.0, 0.5}};
  double exact = oracles::annealed_enumeration(law, 2);
  auto [m2, s2] =
      annealed_hit_prob(EnvKernel::iid(law), {1.0, 0.0, -1}, 2, 40000, rng);
  CHECK(std::abs(m2 - exact) <= 3.0 * s2 + 1e-12);

  // Dyadic kernel from 1/2: deterministic ray (1/4, 1/8, 1/16).
  EnvKernel dy = dyadic_kernel();
  auto [m3, s3] = annealed_hit_prob(dy, dy.start(), 3, 50, rng);
  CHECK(m3 ==
        doctest::Approx(hit_prob_exact({{0.25, 0.125, 0.0625}, {}, {}})));
  CHECK(s3 == doctest::Approx(0.0));
}

TEST_CASE("rate estimates") {
  CounterRng rng(77);
  // Point mass a = 1: value = (1/n) ln(1/(n+1)).
  RateEstimate r1 =
      rate_estimate(EnvKernel::iid({{1.0, 1.0}}), {}, 25, 100, rng);
  CHECK(r1.value == doctest::Approx(std::log(1.0 / 26.0) / 25.0));

  // Point mass a = 0.4 at n = 40: close to ln 0.4.
  RateEstimate r2 =
      rate_estimate(EnvKernel::iid({{0.4, 1.0}}), {}, 40, 100, rng);
  CHECK(std::abs(r2.value - std::log(0.4)) < 0.05);

  // Jensen: beta-averaged log rate never exceeds the annealed rate.
  EnvKernel mix = EnvKernel::iid({{0.1, 0.5}, {0.8, 0.5}});
  RateEstimate r3 = rate_estimate(mix, {}, 30, 4000, rng);
  CHECK(r3.beta_log_value <=
        r3.value + 3.0 * (r3.stderr_ + r3.beta_log_stderr) + 1e-9);
}

TEST_CASE("reinforced ray quantities") {
  // No modification (A >= thresholds): Phi identically 1.
  RayWeights plain = RayWeights::reinforced({2.0, 3.0, 1.5}, {1.0, 1.0, 1.0},
                                            0.5);
  auto q1 = reinforced_ray_quantities(plain);
  for (double phi : q1.phi) CHECK(phi == doctest::Approx(1.0).epsilon(1e-14));

  // D = 1 everywhere: 1 - q_i^D = 1/(i+1) exactly, hence <= 1/i.
  std::vector<double> ones(50, 1.0);
  RayWeights unit{ones, ones, std::nullopt};
  auto q2 = reinforced_ray_quantities(unit);
  for (std::size_t i = 1; i <= ones.size(); ++i) {
    CHECK(1.0 - q2.qd[i - 1] == doctest::Approx(1.0 / (i + 1)).epsilon(1e-12));
    CHECK(1.0 - q2.qd[i - 1] <= 1.0 / i + 1e-12);
  }

  // Telescoping: prod q_i^A = Phi_n * Q_n^D exactly.
  RayWeights mixed = RayWeights::reinforced({0.5, 2.0, 0.4, 1.1},
                                            {1.0, 1.0, 1.0, 1.0}, 1.0);
  auto q3 = reinforced_ray_quantities(mixed);
  double prod_qa = 1.0;
  for (std::size_t i = 0; i < q3.qa.size(); ++i) {
    prod_qa *= q3.qa[i];
    CHECK(prod_qa ==
          doctest::Approx(q3.phi[i] * q3.Qd[i]).epsilon(1e-12));
  }

  // Q_n^D equals the plain hit probability of the D-weights.
  CHECK(q3.Qd.back() ==
        doctest::Approx(oracles::hit_prob_linear_system(*mixed.d))
            .epsilon(1e-12));

  // prod q_i^A equals the reinforced-chain absorption oracle; Phi_3 is their
  // ratio (L = 1, A = 1/2 below thresholds b = 1).
  RayWeights rw = RayWeights::reinforced({0.5, 0.5, 0.5}, {1.0, 1.0, 1.0}, 1.0);
  auto q4 = reinforced_ray_quantities(rw);
  double oracle = oracles::reinforced_ray_hit_prob(rw.a, *rw.d);
  double prod = q4.qa[0] * q4.qa[1] * q4.qa[2];
  CHECK(prod == doctest::Approx(oracle).epsilon(1e-12));
  double qd_hit = oracles::hit_prob_linear_system(*rw.d);
  CHECK(q4.phi.back() == doctest::Approx(oracle / qd_hit).epsilon(1e-12));
}

TEST_CASE("Phi lower bound for A > eps and D >= 1") {
  const double eps = 0.3;
  std::vector<double> a{0.4, 0.9, 0.35, 2.0, 0.5};
  std::vector<double> d{1.0, 1.2, 1.0, 2.0, 1.0};
  RayWeights w{a, d, std::nullopt};
  auto q = reinforced_ray_quantities(w);
  double bound = 1.0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    bound *= 1.0 / (1.0 + 1.0 / (i * eps));
    CHECK(q.phi[i - 1] >= bound - 1e-12);
  }
}
