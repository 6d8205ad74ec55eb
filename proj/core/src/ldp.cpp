#include "gwre/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "gwre/errors.hpp"

namespace gwre {

namespace {
constexpr double kGolden = 0.6180339887498949;  // 1/phi
}

std::pair<double, double> golden_min(const std::function<double(double)>& f,
                                     double lo, double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  double x = 0.5 * (a + b);
  double fx = f(x);
  // Endpoints can win for monotone functions.
  double flo = f(lo), fhi = f(hi);
  if (flo <= fx && flo <= fhi) return {flo, lo};
  if (fhi <= fx) return {fhi, hi};
  return {fx, x};
}

// ---------------------------------------------------------------------------

namespace {

bool strongly_connected(const std::vector<std::vector<double>>& m) {
  std::size_t n = m.size();
  auto reach = [n](auto&& edge) {
    std::vector<char> seen(n, 0);
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v = 0; v < n; ++v)
        if (!seen[v] && edge(u, v)) {
          seen[v] = 1;
          ++count;
          queue.push_back(v);
        }
    }
    return count == n;
  };
  return reach([&](std::size_t u, std::size_t v) { return m[u][v] > 0.0; }) &&
         reach([&](std::size_t u, std::size_t v) { return m[v][u] > 0.0; });
}

}  // namespace

namespace {

// Power iteration without the connectivity check; used on tilted matrices
// whose small entries may underflow to zero even though the underlying
// kernel is irreducible.
double power_root(const std::vector<std::vector<double>>& m, double tol) {
  std::size_t n = m.size();
  if (n == 1) return m[0][0];
  // Shift by I: the shifted matrix is primitive, so plain power iteration
  // converges; the root shifts back exactly.
  std::vector<double> v(n, 1.0 / n), w(n);
  double lambda = 0.0;
  for (int iter = 0; iter < 200000; ++iter) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = v[i];
      for (std::size_t j = 0; j < n; ++j) acc += m[i][j] * v[j];
      w[i] = acc;
      norm += acc;
    }
    double next = norm;  // since ||v||_1 == 1
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    if (iter > 2 && std::abs(next - lambda) < tol * std::max(1.0, next))
      return next - 1.0;
    lambda = next;
  }
  throw KernelError("perron_root: power iteration did not converge");
}

}  // namespace

double perron_root(const std::vector<std::vector<double>>& m, double tol) {
  if (m.empty()) throw KernelError("perron_root: empty matrix");
  if (m.size() > 1 && !strongly_connected(m))
    throw KernelError("perron_root: reducible kernel");
  return power_root(m, tol);
}

// ---------------------------------------------------------------------------

namespace {

double logmeanexp(const std::vector<double>& xs) {
  double m = *std::max_element(xs.begin(), xs.end());
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc / xs.size());
}

double empirical_cgf(const EnvKernel& kernel, double lambda,
                     const EmpiricalCgfOptions& opts) {
  CounterRng rng(CounterRng::derive(opts.seed, 0x656d70ull));
  // Probe starts taken along one trajectory of the chain.
  std::vector<EnvState> probes{kernel.start()};
  EnvState cur = kernel.start();
  for (int i = 1; i < opts.probe_starts; ++i) {
    cur = kernel.step(cur, rng);
    probes.push_back(cur);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const EnvState& y : probes) {
    std::vector<double> vals;
    vals.reserve(opts.replicas);
    for (int r = 0; r < opts.replicas; ++r) {
      EnvState s = y;
      double sum = 0.0;
      for (int i = 0; i < opts.n; ++i) {
        s = kernel.step(s, rng);
        sum += s.weight;
      }
      vals.push_back(lambda * sum);
    }
    best = std::max(best, logmeanexp(vals) / opts.n);
  }
  return best;
}

}  // namespace

double cgf(const EnvKernel& kernel, double lambda,
           const EmpiricalCgfOptions& opts) {
  switch (kernel.variant()) {
    case EnvKernel::Variant::IID: {
      std::vector<double> terms;
      for (auto& [w, p] : kernel.weight_law())
        if (p > 0.0) terms.push_back(std::log(p) + lambda * w);
      double m = *std::max_element(terms.begin(), terms.end());
      double acc = 0.0;
      for (double t : terms) acc += std::exp(t - m);
      return m + std::log(acc);
    }
    case EnvKernel::Variant::FiniteMatrix: {
      const auto& states = kernel.states();
      const auto& p = kernel.matrix();
      std::size_t n = p.size();
      if (n > 1 && !strongly_connected(p))
        throw KernelError("cgf: reducible kernel");
      // Factor out the extreme tilt so exponents are <= 0: entries at the
      // extreme weight stay O(1), the rest may underflow harmlessly. The
      // connectivity check happens on p above, not on the tilted matrix.
      double c = -std::numeric_limits<double>::infinity();
      for (const auto& s : states) c = std::max(c, lambda * s.weight);
      std::vector<std::vector<double>> tilted(n, std::vector<double>(n));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          tilted[i][j] = p[i][j] * std::exp(lambda * states[j].weight - c);
      return c + std::log(power_root(tilted, 1e-13));
    }
    case EnvKernel::Variant::Sampler:
      return empirical_cgf(kernel, lambda, opts);
  }
  throw KernelError("cgf: unreachable");
}

Cgf make_cgf(const EnvKernel& kernel, const EmpiricalCgfOptions& opts) {
  Cgf out;
  switch (kernel.variant()) {
    case EnvKernel::Variant::IID:
      out.method = "closed-form-iid";
      break;
    case EnvKernel::Variant::FiniteMatrix:
      out.method = "perron-finite";
      break;
    case EnvKernel::Variant::Sampler:
      out.method = "empirical";
      break;
  }
  out.eval = [kernel, opts](double lambda) { return cgf(kernel, lambda, opts); };
  return out;
}

Cgf make_cgf_with_weights(const EnvKernel& kernel,
                          const std::vector<double>& tilt_weights) {
  const auto& p = kernel.matrix();
  if (tilt_weights.size() != p.size())
    throw KernelError("make_cgf_with_weights: weight/state size mismatch");
  Cgf out;
  out.method = "perron-finite";
  out.eval = [p, tilt_weights](double lambda) {
    std::size_t n = p.size();
    std::vector<std::vector<double>> tilted(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        tilted[i][j] = p[i][j] * std::exp(lambda * tilt_weights[j]);
    return std::log(perron_root(tilted));
  };
  return out;
}

// ---------------------------------------------------------------------------

LegendreValue legendre(const std::function<double(double)>& cgf_fn, double x,
                       double grid_lo, double grid_hi, double lambda_cap) {
  auto objective = [&](double l) { return l * x - cgf_fn(l); };
  double lo = grid_lo, hi = grid_hi;
  constexpr int kGridPoints = 33;
  // Expand until the maximizer is bracketed or the cap is reached.
  for (;;) {
    double best = -std::numeric_limits<double>::infinity(), best_l = lo;
    double step = (hi - lo) / (kGridPoints - 1);
    for (int i = 0; i < kGridPoints; ++i) {
      double l = lo + i * step;
      double v = objective(l);
      if (v > best) {
        best = v;
        best_l = l;
      }
    }
    bool at_left = best_l <= lo + 0.5 * step;
    bool at_right = best_l >= hi - 0.5 * step;
    if (!at_left && !at_right) {
      auto [neg, argmax] =
          golden_min([&](double l) { return -objective(l); },
                     best_l - step, best_l + step, 1e-10);
      return {-neg, false};
    }
    if ((at_left && lo <= -lambda_cap) || (at_right && hi >= lambda_cap)) {
      // Still climbing at the cap: unbounded unless the climb is only
      // floating-point noise.
      double edge = at_right ? hi : lo;
      double inner = at_right ? hi - step : lo + step;
      double slope = std::abs(objective(edge) - objective(inner)) / step;
      return {best, slope > 1e-9};
    }
    double width = hi - lo;
    if (at_left) lo = std::max(-lambda_cap, lo - 2.0 * width);
    if (at_right) hi = std::min(lambda_cap, hi + 2.0 * width);
  }
}

double PiecewiseLinearPath::min_value() const {
  double m = 0.0;
  for (double v : values) m = std::min(m, v);
  return m;
}

std::vector<double> PiecewiseLinearPath::slopes() const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    out.push_back((values[i + 1] - values[i]) / (knots[i + 1] - knots[i]));
  return out;
}

LegendreValue rate_functional(const PiecewiseLinearPath& path,
                              const std::function<double(double)>& cgf_fn) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < path.knots.size(); ++i) {
    double dt = path.knots[i + 1] - path.knots[i];
    double slope = (path.values[i + 1] - path.values[i]) / dt;
    LegendreValue lv = legendre(cgf_fn, slope);
    if (lv.unbounded) return {std::numeric_limits<double>::infinity(), true};
    total += dt * lv.value;
  }
  return {total, false};
}

// ---------------------------------------------------------------------------

namespace {

// min_t f - I(f) over uniform-knot paths. Piece costs are cached so a
// single-knot move only re-evaluates the two adjacent Legendre transforms.
class PathObjective {
 public:
  PathObjective(const std::function<double(double)>& phi, int k)
      : phi_(phi), k_(k) {}

  double piece_cost(double slope) const {
    LegendreValue lv = legendre(phi_, slope);
    return lv.unbounded ? 1e18 : lv.value;
  }

  double eval(const std::vector<double>& values,
              std::vector<double>* piece_costs = nullptr) const {
    double minv = 0.0, prev = 0.0, rate = 0.0;
    if (piece_costs) piece_costs->assign(k_, 0.0);
    for (int i = 0; i < k_; ++i) {
      double cost = piece_cost((values[i] - prev) * k_);
      if (piece_costs) (*piece_costs)[i] = cost;
      rate += cost / k_;
      minv = std::min(minv, values[i]);
      prev = values[i];
    }
    return rate >= 1e17 ? -1e18 : minv - rate;
  }

  // Objective after moving knot i to v, given cached piece costs.
  double eval_move(const std::vector<double>& values,
                   const std::vector<double>& piece_costs, int i,
                   double v) const {
    double rate = 0.0;
    for (int j = 0; j < k_; ++j) rate += piece_costs[j] / k_;
    double prev = i == 0 ? 0.0 : values[i - 1];
    rate -= piece_costs[i] / k_;
    rate += piece_cost((v - prev) * k_) / k_;
    if (i + 1 < k_) {
      rate -= piece_costs[i + 1] / k_;
      rate += piece_cost((values[i + 1] - v) * k_) / k_;
    }
    double minv = std::min(0.0, v);
    for (int j = 0; j < k_; ++j)
      if (j != i) minv = std::min(minv, values[j]);
    return rate >= 1e17 ? -1e18 : minv - rate;
  }

 private:
  const std::function<double(double)>& phi_;
  int k_;
};

}  // namespace

VariationalResult variational_solve(const std::function<double(double)>& phi,
                                    int k_pieces, int restarts,
                                    std::uint64_t seed) {
  if (std::abs(phi(0.0)) > 1e-10)
    throw Error("variational_solve: phi(0) must vanish");
  VariationalResult res;
  {
    auto [val, arg] = golden_min(phi, 0.0, 1.0, 1e-10);
    res.inf_phi = val;
    res.lambda_argmin = arg;
  }

  // Linear paths f(t) = c t reach the optimum for convex phi; search c
  // first, then let coordinate ascent refine the k-piece path.
  auto linear_objective = [&](double c) {
    LegendreValue lv = legendre(phi, c);
    if (lv.unbounded) return -1e18;
    return std::min(c, 0.0) - lv.value;
  };
  double h = 1e-6;
  std::vector<double> candidates{0.0, (phi(h) - phi(-h)) / (2 * h),
                                 (phi(1.0 + h) - phi(1.0 - h)) / (2 * h),
                                 (phi(res.lambda_argmin + h) -
                                  phi(res.lambda_argmin - h)) /
                                     (2 * h)};
  double best_c = 0.0, best_lin = -1e18;
  for (double c : candidates) {
    double v = linear_objective(c);
    if (v > best_lin) {
      best_lin = v;
      best_c = c;
    }
  }
  {
    auto [negv, c] = golden_min([&](double x) { return -linear_objective(x); },
                                best_c - 1.0, best_c + 1.0, 1e-10);
    if (-negv > best_lin) {
      best_lin = -negv;
      best_c = c;
    }
  }

  PathObjective objective(phi, k_pieces);
  std::vector<double> best_values(k_pieces);
  for (int i = 0; i < k_pieces; ++i)
    best_values[i] = best_c * (i + 1) / k_pieces;
  double best = objective.eval(best_values);

  CounterRng rng(seed);
  std::vector<double> piece_costs;
  for (int restart = 0; restart <= restarts; ++restart) {
    std::vector<double> values = best_values;
    if (restart > 0)
      for (double& v : values) v += 0.2 * (rng.uniform() - 0.5);
    double current = objective.eval(values, &piece_costs);
    for (int sweep = 0; sweep < 4; ++sweep) {
      bool improved = false;
      for (int i = 0; i < k_pieces; ++i) {
        double saved = values[i];
        auto coord = [&](double v) {
          return -objective.eval_move(values, piece_costs, i, v);
        };
        auto [negv, v] = golden_min(coord, saved - 0.5, saved + 0.5, 1e-8);
        if (-negv > current + 1e-12) {
          values[i] = v;
          current = objective.eval(values, &piece_costs);
          improved = true;
        }
      }
      if (!improved) break;
    }
    if (current > best) {
      best = current;
      best_values = values;
    }
  }

  res.achieved = std::max(best, best_lin);
  res.argmax.knots.resize(k_pieces + 1);
  res.argmax.values.resize(k_pieces + 1);
  res.argmax.values[0] = 0.0;
  for (int i = 0; i <= k_pieces; ++i)
    res.argmax.knots[i] = static_cast<double>(i) / k_pieces;
  for (int i = 0; i < k_pieces; ++i) res.argmax.values[i + 1] = best_values[i];
  return res;
}

std::pair<double, double> inf_cgf_01(const Cgf& cgf) {
  return golden_min(cgf.eval, 0.0, 1.0, 1e-10);
}

}  // namespace gwre
