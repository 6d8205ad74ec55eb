#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gwre/env.hpp"
#include "gwre/ldp.hpp"
#include "gwre/walk.hpp"

namespace gwre {

enum class Verdict { Transient, Recurrent, PositiveRecurrent, Indeterminate };
enum class TheoremTag {
  T2_1,
  T3_8i,
  T3_8ii,
  T4_1,
  C4_2,
  T4_5,
  ConstantThresholdExample
};

std::string to_string(Verdict v);
std::string to_string(TheoremTag t);

/// Outcome of evaluating a transience/recurrence criterion. `margin` is the
/// signed slack of the decisive inequality (positive favors transience,
/// negative recurrence); |margin| below the decision tolerance yields
/// Indeterminate.
struct RegimeReport {
  TheoremTag theorem = TheoremTag::T2_1;
  Verdict verdict = Verdict::Indeterminate;
  double margin = 0.0;
  double b = 0.0;
  double eta_value = 0.0;
  double inf_cgf_transient = 0.0;  // inf Lambda over the decisive window
  double inf_cgf_recurrent = 0.0;  // inf Lambda of the untruncated kernel
  TruncationWindow window;
  std::string detail;
};

inline constexpr double kDecisionTol = 1e-6;

/// IID environment: m = inf_{[0,1]} E[A^lambda] against 1/b.
RegimeReport classify_iid(const std::vector<std::pair<double, double>>& law,
                          double b, double tol = kDecisionTol);

/// Markov environment: transience via the truncated-kernel CGF condition
/// (evaluated on every window, verdict from the widest, i.e. last, one) and
/// recurrence via the untruncated log-kernel CGF. Each window is paired with
/// eta at its own weight range; `eta_grid` entries (eps, r) are reported as
/// additional evaluations in the detail string.
RegimeReport classify_markov(
    const EnvKernel& kernel, double b,
    const std::vector<TruncationWindow>& windows,
    const std::vector<std::pair<double, double>>& eta_grid = {},
    double tol = kDecisionTol);

/// Per-window evaluation backing classify_markov (monotone trend report).
struct WindowEvaluation {
  TruncationWindow window;
  double inf_cgf = 0.0;
  double eta = 0.0;
  double transient_slack = 0.0;
};
std::vector<WindowEvaluation> evaluate_windows(
    const EnvKernel& kernel, double b,
    const std::vector<TruncationWindow>& windows);

/// Acceptance-rejection discounts of the embedded branching construction
/// for non-IID kernels: delta_eps = kappa^{-1} (1-eta)^{N+ell} and the
/// {eps/(1+eps)}^N step factor.
struct GreenDiscount {
  double delta_eps = 1.0;
  double eps = 0.0;
  int n_mix = 0;
  double factor() const;

  static GreenDiscount from_report(const MinorizationReport& report,
                                   double eta_eps_inf, double eps);
};

struct GreenTestResult {
  std::optional<int> n_star;
  double product = 0.0;  // discounted b^{n*} P(T_{-1} > T_{n*})
  double stderr_ = 0.0;
};

/// Scans n <= n_max for the first level certifying a supercritical green
/// tree: discounted product minus three standard errors above 1.
GreenTestResult green_branching_test(const EnvKernel& kernel, double b,
                                     double survival, int n_max, int replicas,
                                     CounterRng& rng,
                                     const GreenDiscount& discount = {});

struct ConductanceReport {
  std::vector<double> level_sums;   // S_n, n = 1..depth_max
  std::vector<double> ratios;       // S_{n+1} / S_n
  double partial_sum = 0.0;
  double mean_tail_ratio = 0.0;     // over the last half of the levels
  bool divergent = false;
};

/// Level sums of ancestry weight products on the realized tree.
ConductanceReport conductance_diagnostic(WalkEnvironment& env, int depth_max);

/// Post-modification weight per state of a reinforced kernel. kernel_star is
/// a weight-scale kernel whose states carry A in `weight` and the threshold
/// b_nu in `aux`; D = L where A < b_nu, else A.
std::vector<double> d_weights(const EnvKernel& kernel_star, double L);

/// Parameter-regime dispatch: L, p >= 1 uses the eta criterion (eta == 0
/// short-circuits to unconditional transience); L < p uses the D-coordinate
/// CGF of the kernel truncated below at ln L, with the constant-threshold
/// special case adding the positive-recurrence side. The threshold stored in
/// each state's `aux` governs D; `params.threshold` is used for the
/// constant-threshold detection.
RegimeReport classify_reinforced(
    const EnvKernel& kernel_star, double b, const ReinforcedParams& params,
    const std::vector<std::pair<double, double>>& eta_grid,
    const std::vector<TruncationWindow>& windows, double tol = kDecisionTol);

struct ReturnTimeBound {
  double partial_sum = 0.0;  // 1 + sum of per-level bounds up to n_max
  double tail_ratio = 0.0;   // ratio of the last two terms
  double tail_bound = 0.0;   // geometric tail estimate; inf if ratio >= 1
  bool finite = false;
};

/// Partial-sum bound on the expected return time for the constant-threshold
/// example: 1 + sum_n b^n E[hit probability with D-weights], via Monte Carlo
/// on the modified chain.
ReturnTimeBound expected_return_time_bound(const EnvKernel& kernel_star,
                                           double L, double b, int n_max,
                                           int replicas, CounterRng& rng);

}  // namespace gwre
