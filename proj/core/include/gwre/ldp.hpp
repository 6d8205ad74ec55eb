#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gwre/env.hpp"
#include "gwre/rng.hpp"

namespace gwre {

/// Scaled cumulant generating function of partial sums of the weight
/// coordinate (callers pass log-scale kernels so the summands are ln A).
struct Cgf {
  std::function<double(double)> eval;
  std::string method;  // closed-form-iid | perron-finite | empirical
  double operator()(double lambda) const { return eval(lambda); }
};

struct EmpiricalCgfOptions {
  int n = 10000;
  int replicas = 1000;
  int probe_starts = 8;
  std::uint64_t seed = 0x636766ull;
};

/// Golden-section minimum of a convex function on [lo, hi].
std::pair<double, double> golden_min(const std::function<double(double)>& f,
                                     double lo, double hi, double tol = 1e-10);

/// Lambda(lambda) for one lambda. IID: ln E[e^{lambda W}] in closed form.
/// FiniteMatrix: ln of the Perron root of K(i,j) e^{lambda w_j} (throws
/// KernelError on reducible kernels). Sampler: empirical estimate, maxed
/// over probe starts.
double cgf(const EnvKernel& kernel, double lambda,
           const EmpiricalCgfOptions& opts = {});

/// Evaluator form of the above.
Cgf make_cgf(const EnvKernel& kernel, const EmpiricalCgfOptions& opts = {});

/// CGF tilted by a caller-supplied summand per state (used for the
/// D-coordinate tilting of reinforced kernels). FiniteMatrix only.
Cgf make_cgf_with_weights(const EnvKernel& kernel,
                          const std::vector<double>& tilt_weights);

/// Spectral radius of a nonnegative matrix by power iteration (shifted to
/// handle periodic chains). Throws KernelError when not irreducible.
double perron_root(const std::vector<std::vector<double>>& m,
                   double tol = 1e-13);

struct LegendreValue {
  double value = 0.0;
  bool unbounded = false;  // objective still climbing at the search cap
};

/// Legendre transform sup_lambda { lambda x - cgf(lambda) }: adaptive grid
/// bracketing followed by golden-section refinement.
LegendreValue legendre(const std::function<double(double)>& cgf_fn, double x,
                       double grid_lo = -1.0, double grid_hi = 1.0,
                       double lambda_cap = 1e6);

/// Piecewise-linear path on [0,1] with f(0) = 0.
struct PiecewiseLinearPath {
  std::vector<double> knots;   // 0 = t_0 < ... < t_k = 1
  std::vector<double> values;  // f(t_i), values[0] == 0

  double min_value() const;
  std::vector<double> slopes() const;
};

/// Integral of Lambda*(f') over [0,1]; +inf (flag) when a slope has an
/// unbounded transform.
LegendreValue rate_functional(const PiecewiseLinearPath& path,
                              const std::function<double(double)>& cgf_fn);

struct VariationalResult {
  double inf_phi = 0.0;      // inf over [0,1] of phi
  double lambda_argmin = 0.0;
  double achieved = 0.0;     // best min_t f - I(f) found
  PiecewiseLinearPath argmax;
  double gap() const { return inf_phi - achieved; }
};

/// Maximizes min_t f(t) - integral of phi*(f') over k-piece paths
/// (linear-path seeding plus coordinate ascent with random restarts) and
/// compares against inf_{[0,1]} phi.
VariationalResult variational_solve(const std::function<double(double)>& phi,
                                    int k_pieces = 64, int restarts = 8,
                                    std::uint64_t seed = 0x76617269ull);

/// inf over [0,1] of the CGF: (value, argmin).
std::pair<double, double> inf_cgf_01(const Cgf& cgf);

}  // namespace gwre
