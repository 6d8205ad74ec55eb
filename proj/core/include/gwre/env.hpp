#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gwre/errors.hpp"
#include "gwre/rng.hpp"

namespace gwre {

/// One step of the environment chain along a ray: the edge weight A plus an
/// auxiliary coordinate. `index` is the state id for finite-matrix kernels,
/// -1 otherwise. `aux` is an opaque token for sampler kernels (the dyadic
/// example uses it to carry dyadicness).
struct EnvState {
  double weight = 1.0;
  double aux = 0.0;
  int index = -1;
};

/// Window (lower, upper] on the log-weight scale; lower may be -inf.
struct TruncationWindow {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = 0.0;
};

/// Certificate for the uniform l-step kernel comparison: for all states x, y
/// and target sets B,  K^(l)(x,B) <= (kappa/N) sum_{m<=N} K^(m)(y,B).
struct MinorizationReport {
  int ell = 0;
  int n_mix = 0;
  double kappa = 1.0;
  bool satisfied = false;
};

/// Environment transition kernel along rays.
///
/// Three variants: IID (finite weight law, output independent of input),
/// FiniteMatrix (finite state set with a row-stochastic matrix), Sampler
/// (black-box step function). Kernels are immutable after construction.
class EnvKernel {
 public:
  enum class Variant { IID, FiniteMatrix, Sampler };

  using StepFn = std::function<EnvState(const EnvState&, CounterRng&)>;

  static EnvKernel iid(std::vector<std::pair<double, double>> weight_law);
  static EnvKernel finite(std::vector<EnvState> states,
                          std::vector<std::vector<double>> matrix);
  static EnvKernel sampler(StepFn step, EnvState start,
                           std::string name = "sampler");

  Variant variant() const { return variant_; }
  bool is_log_scale() const { return log_scale_; }
  const std::string& name() const { return name_; }

  /// Reasonable start state: the configured one for samplers, the first
  /// state for finite kernels, a draw-independent placeholder for IID.
  const EnvState& start() const { return start_; }
  EnvKernel with_start(EnvState s) const;

  const std::vector<std::pair<double, double>>& weight_law() const;
  const std::vector<EnvState>& states() const;
  const std::vector<std::vector<double>>& matrix() const;

  /// FiniteMatrix view of an IID kernel (identical rows); identity on
  /// FiniteMatrix; throws for samplers.
  EnvKernel as_matrix() const;

  EnvState step(const EnvState& state, CounterRng& rng) const;

 private:
  EnvKernel() = default;

  static EnvKernel filter_renormalize(const EnvKernel& kernel,
                                      const std::function<bool(double)>& keep,
                                      const std::string& what);

  Variant variant_ = Variant::IID;
  bool log_scale_ = false;
  std::string name_;
  EnvState start_;
  std::vector<std::pair<double, double>> law_;       // IID
  std::vector<double> law_cumulative_;               // IID
  std::vector<EnvState> states_;                     // FiniteMatrix
  std::vector<std::vector<double>> matrix_;          // FiniteMatrix
  StepFn sampler_;                                   // Sampler

  friend EnvKernel log_transform(const EnvKernel&);
  friend EnvKernel truncate(const EnvKernel&, const TruncationWindow&);
  friend EnvKernel restrict_weight_above(const EnvKernel&, double);
};

/// Worst-case escape probability eta_{eps,r} = 1 - inf_y P(eps < A_1 <= r | y).
/// Exact for IID and FiniteMatrix. For samplers: probe starts are collected
/// by iterating the chain, each start's window probability is estimated by
/// Monte Carlo, and the plug-in estimate minus three binomial standard
/// errors is reported (clamped to [0,1]).
double eta(const EnvKernel& kernel, double eps, double r, int n_probe,
           CounterRng& rng);
double eta(const EnvKernel& kernel, double eps, double r, int n_probe = 1000);

/// Pushes the kernel through ln on the weight coordinate.
EnvKernel log_transform(const EnvKernel& kernel);

/// Row-renormalized restriction of a log-scale kernel to states with
/// log-weight in (window.lower, window.upper]. Throws KernelError when a
/// surviving row has no mass on the window.
EnvKernel truncate(const EnvKernel& kernel, const TruncationWindow& window);

/// Weight-scale restriction to {A > eps} (the eps-truncated kernel).
EnvKernel restrict_weight_above(const EnvKernel& kernel, double eps);

/// Searches 1 <= ell <= N, ell <= ell_max, N <= n_max for the smallest
/// certificate with kappa <= kappa_max. Exact for IID and FiniteMatrix.
MinorizationReport check_assumption1(const EnvKernel& kernel, int ell_max,
                                     int n_max, double kappa_max = 100.0);

/// Largest violation of the minorization inequality for the given
/// certificate, by direct matrix-power enumeration over all state pairs and
/// singleton targets. <= 0 means the certificate holds.
double minorization_violation(const EnvKernel& kernel,
                              const MinorizationReport& report);

/// l-step distribution of the eps-truncated kernel started from x_star.
/// Exact for finite kernels; empirical (n_samples paths) for samplers.
std::vector<std::pair<EnvState, double>> beta_measure(const EnvKernel& kernel,
                                                      double eps,
                                                      const EnvState& x_star,
                                                      int ell,
                                                      int n_samples = 0,
                                                      CounterRng* rng = nullptr);

/// Draws a start state from a beta_measure table.
EnvState sample_distribution(
    const std::vector<std::pair<EnvState, double>>& dist, CounterRng& rng);

// Built-in example kernels.

/// Deterministic halving on dyadic weights; uniform(0, C) from non-dyadic
/// ones. state.aux == 1 marks a dyadic weight.
EnvKernel dyadic_kernel(double C = 2.0, double start_weight = 0.5);

/// Finite halving chain on weights 2^-k, k = 0..n_states-1 (the dyadic
/// example restricted to its absorbing dyadic orbit).
EnvKernel dyadic_grid_kernel(int n_states = 64);

/// Mixture kernel (1-alpha) Exp(1) + alpha Exp(max(x,1)), exact sampler.
EnvKernel exp_mixture_kernel(double alpha);

/// Grid discretization of the mixture kernel: log-spaced weight grid, cell
/// masses from exact CDF differences, rows sum to 1 by construction.
EnvKernel exp_mixture_grid_kernel(double alpha, int n_points = 256,
                                  double lo = 1e-3, double hi = 5e4);

}  // namespace gwre
