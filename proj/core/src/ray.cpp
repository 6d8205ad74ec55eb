#include "gwre/ray.hpp"

#include <algorithm>
#include <cmath>

#include "gwre/errors.hpp"

namespace gwre {

RayWeights RayWeights::reinforced(std::vector<double> a,
                                  std::vector<double> thresholds, double L) {
  if (thresholds.size() != a.size())
    throw Error("RayWeights::reinforced: size mismatch");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    d[i] = a[i] < thresholds[i] ? L : a[i];
  RayWeights w;
  w.a = std::move(a);
  w.d = std::move(d);
  w.thresholds = std::move(thresholds);
  return w;
}

double hit_prob_exact(const RayWeights& weights) {
  const auto& a = weights.a;
  if (a.empty()) return 1.0;
  // Terms t_r = -sum_{j<=r} ln a_j; P = exp(-logsumexp(t_r)).
  // Compensated prefix sums keep n ~ 1e4 accurate for weights far from 1.
  std::vector<double> t(a.size() + 1);
  t[0] = 0.0;
  double sum = 0.0, comp = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (!(a[j] > 0.0)) throw Error("hit_prob_exact: weights must be positive");
    double term = -std::log(a[j]) - comp;
    double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
    t[j + 1] = sum;
  }
  double tmax = *std::max_element(t.begin(), t.end());
  double acc = 0.0;
  for (double v : t) acc += std::exp(v - tmax);
  return std::exp(-(tmax + std::log(acc)));
}

namespace {

double sample_ray_hit_prob(const EnvKernel& kernel, const EnvState& start,
                           int n, CounterRng& rng) {
  RayWeights ray;
  ray.a.reserve(n);
  EnvState state = start;
  for (int i = 0; i < n; ++i) {
    state = kernel.step(state, rng);
    ray.a.push_back(state.weight);
  }
  return hit_prob_exact(ray);
}

}  // namespace

std::pair<double, double> annealed_hit_prob(const EnvKernel& kernel,
                                            const EnvState& start, int n,
                                            int replicas, CounterRng& rng) {
  if (replicas < 1) throw Error("annealed_hit_prob: replicas must be >= 1");
  double sum = 0.0, sumsq = 0.0;
  for (int rep = 0; rep < replicas; ++rep) {
    double p = sample_ray_hit_prob(kernel, start, n, rng);
    sum += p;
    sumsq += p * p;
  }
  double mean = sum / replicas;
  double var = std::max(0.0, sumsq / replicas - mean * mean);
  double se = replicas > 1 ? std::sqrt(var / (replicas - 1)) : 0.0;
  return {mean, se};
}

RateEstimate rate_estimate(
    const EnvKernel& kernel,
    const std::vector<std::pair<EnvState, double>>& beta, int n, int replicas,
    CounterRng& rng) {
  if (n < 1) throw Error("rate_estimate: n must be >= 1");

  // For IID weights the environment average is dominated by rare rays of
  // unusually large weights, and the plain estimator is badly biased down
  // at practical replica counts. Draw rays from the tilted law
  // q(a) = p(a) a^l / E[A^l] at the minimizing exponent l and reweight;
  // the estimator stays unbiased and the dominant rays are now typical.
  double tilt_lambda = 0.0, tilt_cgf = 0.0;
  std::vector<std::pair<double, double>> tilted_law;
  if (kernel.variant() == EnvKernel::Variant::IID) {
    const auto& law = kernel.weight_law();
    auto cgf_iid = [&law](double lam) {
      double acc = 0.0;
      for (auto& [w, p] : law) acc += p * std::pow(w, lam);
      return std::log(acc);
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (cgf_iid(m1) < cgf_iid(m2))
        hi = m2;
      else
        lo = m1;
    }
    tilt_lambda = 0.5 * (lo + hi);
    tilt_cgf = cgf_iid(tilt_lambda);
    double z = std::exp(tilt_cgf);
    for (auto& [w, p] : law)
      tilted_law.emplace_back(w, p * std::pow(w, tilt_lambda) / z);
  }

  double psum = 0.0, psumsq = 0.0;
  double lsum = 0.0, lsumsq = 0.0;
  for (int rep = 0; rep < replicas; ++rep) {
    double p;
    if (!tilted_law.empty()) {
      RayWeights ray;
      ray.a.reserve(n);
      double sum_ln_a = 0.0;
      for (int i = 0; i < n; ++i) {
        double u = rng.uniform(), acc = 0.0, w = tilted_law.back().first;
        for (auto& [tw, tp] : tilted_law) {
          acc += tp;
          if (u < acc) {
            w = tw;
            break;
          }
        }
        ray.a.push_back(w);
        sum_ln_a += std::log(w);
      }
      double lik = std::exp(n * tilt_cgf - tilt_lambda * sum_ln_a);
      p = lik * hit_prob_exact(ray);
    } else {
      EnvState start =
          beta.empty() ? kernel.start() : sample_distribution(beta, rng);
      p = sample_ray_hit_prob(kernel, start, n, rng);
    }
    psum += p;
    psumsq += p * p;
    double lp = std::log(std::max(p, 1e-300));
    lsum += lp;
    lsumsq += lp * lp;
  }
  double pmean = psum / replicas;
  double pvar = std::max(0.0, psumsq / replicas - pmean * pmean);
  double pse = replicas > 1 ? std::sqrt(pvar / (replicas - 1)) : 0.0;
  double lmean = lsum / replicas;
  double lvar = std::max(0.0, lsumsq / replicas - lmean * lmean);
  double lse = replicas > 1 ? std::sqrt(lvar / (replicas - 1)) : 0.0;

  RateEstimate out;
  out.n = n;
  out.value = std::log(std::max(pmean, 1e-300)) / n;
  // Delta method on ln of the mean.
  out.stderr_ = pmean > 0 ? pse / (pmean * n) : 0.0;
  out.beta_log_value = lmean / n;
  out.beta_log_stderr = lse / n;
  return out;
}

ReinforcedRayQuantities reinforced_ray_quantities(const RayWeights& weights) {
  if (!weights.d) throw Error("reinforced_ray_quantities: d sequence missing");
  const auto& a = weights.a;
  const auto& d = *weights.d;
  if (d.size() != a.size())
    throw Error("reinforced_ray_quantities: a/d size mismatch");
  ReinforcedRayQuantities out;
  double qd_prev = 0.0;
  double Qd = 1.0;
  double phi = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double qd = d[i] / (1.0 + d[i] - qd_prev);
    double qa = a[i] / (1.0 + a[i] - qd_prev);
    Qd *= qd;
    phi *= qa / qd;
    out.qd.push_back(qd);
    out.qa.push_back(qa);
    out.Qd.push_back(Qd);
    out.phi.push_back(phi);
    qd_prev = qd;
  }
  return out;
}

}  // namespace gwre
