#include "gwre/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gwre/ray.hpp"

namespace gwre {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Transient: return "Transient";
    case Verdict::Recurrent: return "Recurrent";
    case Verdict::PositiveRecurrent: return "PositiveRecurrent";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

std::string to_string(TheoremTag t) {
  switch (t) {
    case TheoremTag::T2_1: return "T2.1";
    case TheoremTag::T3_8i: return "T3.8i";
    case TheoremTag::T3_8ii: return "T3.8ii";
    case TheoremTag::T4_1: return "T4.1";
    case TheoremTag::C4_2: return "C4.2";
    case TheoremTag::T4_5: return "T4.5";
    case TheoremTag::ConstantThresholdExample: return "ConstantThresholdExample";
  }
  return "T2.1";
}

RegimeReport classify_iid(const std::vector<std::pair<double, double>>& law,
                          double b, double tol) {
  if (!(b > 1.0)) throw Error("classify_iid: b must exceed 1");
  EnvKernel kernel = EnvKernel::iid(law);
  Cgf cgf = make_cgf(log_transform(kernel));
  auto [inf_val, argmin] = inf_cgf_01(cgf);
  RegimeReport report;
  report.theorem = TheoremTag::T2_1;
  report.b = b;
  report.inf_cgf_transient = inf_val;
  report.inf_cgf_recurrent = inf_val;
  report.margin = inf_val + std::log(b);
  if (report.margin > tol) {
    report.verdict = Verdict::Transient;
  } else if (report.margin < -tol) {
    report.verdict = Verdict::Recurrent;
    report.theorem = TheoremTag::T3_8ii;
  } else {
    report.verdict = Verdict::Indeterminate;
  }
  std::ostringstream os;
  os << "m=" << std::exp(inf_val) << " at lambda=" << argmin
     << " vs 1/b=" << 1.0 / b;
  report.detail = os.str();
  return report;
}

std::vector<WindowEvaluation> evaluate_windows(
    const EnvKernel& kernel, double b,
    const std::vector<TruncationWindow>& windows) {
  if (kernel.is_log_scale())
    throw Error("evaluate_windows: expects a weight-scale kernel");
  EnvKernel klog = log_transform(kernel);
  std::vector<WindowEvaluation> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    WindowEvaluation ev;
    ev.window = w;
    EnvKernel q = truncate(klog, w);
    ev.inf_cgf = inf_cgf_01(make_cgf(q)).first;
    double eps = std::max(std::exp(w.lower), 1e-300);
    double r = std::exp(w.upper);
    ev.eta = eta(kernel, eps, r);
    ev.transient_slack = ev.eta < 1.0
                             ? ev.inf_cgf + std::log(b) + std::log1p(-ev.eta)
                             : -kInf;
    out.push_back(ev);
  }
  return out;
}

RegimeReport classify_markov(
    const EnvKernel& kernel, double b,
    const std::vector<TruncationWindow>& windows,
    const std::vector<std::pair<double, double>>& eta_grid, double tol) {
  if (!(b > 1.0)) throw Error("classify_markov: b must exceed 1");
  auto evals = evaluate_windows(kernel, b, windows);
  double inf_full = inf_cgf_01(make_cgf(log_transform(kernel))).first;
  double rec_margin = inf_full + std::log(b);

  RegimeReport report;
  report.b = b;
  report.inf_cgf_recurrent = inf_full;
  std::ostringstream os;
  for (const auto& ev : evals)
    os << "window(" << ev.window.lower << "," << ev.window.upper
       << "]: infL=" << ev.inf_cgf << " eta=" << ev.eta
       << " slack=" << ev.transient_slack << "; ";
  for (const auto& [eps, r] : eta_grid)
    os << "eta(" << eps << "," << r << ")=" << eta(kernel, eps, r) << "; ";
  os << "infL_full=" << inf_full;
  report.detail = os.str();

  if (!evals.empty()) {
    const auto& decisive = evals.back();
    report.window = decisive.window;
    report.eta_value = decisive.eta;
    report.inf_cgf_transient = decisive.inf_cgf;
    if (decisive.transient_slack > tol) {
      report.theorem = TheoremTag::T3_8i;
      report.verdict = Verdict::Transient;
      report.margin = decisive.transient_slack;
      return report;
    }
  }
  if (rec_margin < -tol) {
    report.theorem = TheoremTag::T3_8ii;
    report.verdict = Verdict::Recurrent;
    report.margin = rec_margin;
    return report;
  }
  report.theorem = TheoremTag::T3_8i;
  report.verdict = Verdict::Indeterminate;
  report.margin = evals.empty() ? rec_margin : evals.back().transient_slack;
  return report;
}

double GreenDiscount::factor() const {
  return delta_eps * std::pow(eps / (1.0 + eps), n_mix);
}

GreenDiscount GreenDiscount::from_report(const MinorizationReport& report,
                                         double eta_eps_inf, double eps) {
  GreenDiscount d;
  d.delta_eps = (1.0 / report.kappa) *
                std::pow(1.0 - eta_eps_inf, report.n_mix + report.ell);
  d.eps = eps;
  d.n_mix = report.n_mix;
  return d;
}

GreenTestResult green_branching_test(const EnvKernel& kernel, double b,
                                     double survival, int n_max, int replicas,
                                     CounterRng& rng,
                                     const GreenDiscount& discount) {
  GreenTestResult result;
  for (int n = 1; n <= n_max; ++n) {
    auto [mean, se] = annealed_hit_prob(kernel, kernel.start(), n, replicas,
                                        rng);
    double f = survival * discount.factor() * std::pow(b, n);
    result.product = f * mean;
    result.stderr_ = f * se;
    if (result.product - 3.0 * result.stderr_ > 1.0) {
      result.n_star = n;
      return result;
    }
  }
  return result;
}

ConductanceReport conductance_diagnostic(WalkEnvironment& env, int depth_max) {
  if (depth_max < 1) throw Error("conductance_diagnostic: depth_max < 1");
  ConductanceReport report;
  std::vector<std::pair<NodeId, double>> frontier{{kRoot, 1.0}};
  for (int n = 1; n <= depth_max; ++n) {
    std::vector<std::pair<NodeId, double>> next;
    double sum = 0.0;
    for (auto& [v, prod] : frontier) {
      for (NodeId c : env.children(v)) {
        double p = prod * env.weight(c);
        sum += p;
        next.emplace_back(c, p);
      }
    }
    report.level_sums.push_back(sum);
    report.partial_sum += sum;
    frontier = std::move(next);
    if (frontier.empty()) {
      while (static_cast<int>(report.level_sums.size()) < depth_max)
        report.level_sums.push_back(0.0);
      break;
    }
  }
  for (std::size_t i = 0; i + 1 < report.level_sums.size(); ++i) {
    double s = report.level_sums[i];
    report.ratios.push_back(s > 0.0 ? report.level_sums[i + 1] / s : 0.0);
  }
  if (!report.ratios.empty()) {
    std::size_t from = report.ratios.size() / 2;
    double acc = 0.0;
    for (std::size_t i = from; i < report.ratios.size(); ++i)
      acc += report.ratios[i];
    report.mean_tail_ratio = acc / (report.ratios.size() - from);
  }
  report.divergent = report.mean_tail_ratio > 1.0;
  return report;
}

std::vector<double> d_weights(const EnvKernel& kernel_star, double L) {
  EnvKernel mk = kernel_star.as_matrix();
  std::vector<double> out;
  out.reserve(mk.states().size());
  for (const auto& s : mk.states())
    out.push_back(s.weight < s.aux ? L : s.weight);
  return out;
}

RegimeReport classify_reinforced(
    const EnvKernel& kernel_star, double b, const ReinforcedParams& params,
    const std::vector<std::pair<double, double>>& eta_grid,
    const std::vector<TruncationWindow>& windows, double tol) {
  if (!(b > 1.0)) throw Error("classify_reinforced: b must exceed 1");
  if (kernel_star.is_log_scale())
    throw Error("classify_reinforced: expects a weight-scale kernel");
  EnvKernel mk = kernel_star.as_matrix();
  const double lb = std::log(b);
  RegimeReport report;
  report.b = b;

  if (params.L >= 1.0 && params.p >= 1.0) {
    double eta_min = 0.0;
    if (!eta_grid.empty()) {
      eta_min = 1.0;
      for (const auto& [eps, r] : eta_grid)
        eta_min = std::min(eta_min, eta(mk, eps, r));
    }
    report.theorem =
        eta_min == 0.0 ? TheoremTag::C4_2 : TheoremTag::T4_1;
    report.eta_value = eta_min;
    report.margin = eta_min < 1.0 ? lb + std::log1p(-eta_min) : -kInf;
    report.verdict =
        report.margin > tol ? Verdict::Transient : Verdict::Indeterminate;
    std::ostringstream os;
    os << "L=" << params.L << " p=" << params.p << " eta=" << eta_min
       << " ln b + ln(1-eta)=" << report.margin;
    report.detail = os.str();
    return report;
  }

  if (params.L < params.p) {
    // Constant-threshold example: b_nu identically p-clamped, all weights
    // strictly between L and the threshold.
    bool example = params.threshold.kind == ThresholdRule::Kind::Constant;
    double thr = std::max(params.threshold.value, params.p);
    if (example)
      for (const auto& s : mk.states())
        example = example && s.weight > params.L && s.weight < thr;
    if (example) {
      double eps_tilde = 1.0 / params.L - 1.0 / params.p;
      // Whole kernel survives the [ln L, ln C] truncation; CGF tilted by ln D.
      EnvKernel klog = log_transform(mk);
      std::vector<double> tilt;
      tilt.reserve(klog.states().size());
      for (const auto& s : klog.states()) {
        double a = std::exp(s.weight);
        tilt.push_back(std::log(a < s.aux ? params.L : a));
      }
      double inf_val =
          inf_cgf_01(make_cgf_with_weights(klog, tilt)).first;
      double mt = inf_val + lb;
      double mr = inf_val + lb + std::log1p(eps_tilde);
      report.theorem = TheoremTag::ConstantThresholdExample;
      report.inf_cgf_transient = inf_val;
      report.inf_cgf_recurrent = inf_val;
      if (mt > tol) {
        report.verdict = Verdict::Transient;
        report.margin = mt;
      } else if (mr < -tol) {
        report.verdict = Verdict::PositiveRecurrent;
        report.margin = mr;
      } else {
        report.verdict = Verdict::Indeterminate;
        report.margin = mt;
      }
      std::ostringstream os;
      os << "eps~=" << eps_tilde << " infL=" << inf_val
         << " transient margin=" << mt << " recurrent margin=" << mr;
      report.detail = os.str();
      return report;
    }

    if (windows.empty())
      throw Error("classify_reinforced: L < p needs a truncation window");
    TruncationWindow wq{std::log(params.L), windows.back().upper};
    EnvKernel q = truncate(log_transform(mk), wq);
    std::vector<double> tilt;
    tilt.reserve(q.states().size());
    for (const auto& s : q.states()) {
      double a = std::exp(s.weight);
      tilt.push_back(std::log(a < s.aux ? params.L : a));
    }
    double inf_val = inf_cgf_01(make_cgf_with_weights(q, tilt)).first;
    double eta_l = eta(mk, params.L, kInf);
    report.theorem = TheoremTag::T4_5;
    report.window = wq;
    report.eta_value = eta_l;
    report.inf_cgf_transient = inf_val;
    report.margin =
        eta_l < 1.0 ? inf_val + lb + std::log1p(-eta_l) : -kInf;
    report.verdict =
        report.margin > tol ? Verdict::Transient : Verdict::Indeterminate;
    std::ostringstream os;
    os << "infL~=" << inf_val << " eta(L,inf)=" << eta_l;
    report.detail = os.str();
    return report;
  }

  throw Error(
      "classify_reinforced: parameter regime not covered (need L, p >= 1 or "
      "L < p)");
}

ReturnTimeBound expected_return_time_bound(const EnvKernel& kernel_star,
                                           double L, double b, int n_max,
                                           int replicas, CounterRng& rng) {
  if (n_max < 2) throw Error("expected_return_time_bound: n_max < 2");
  EnvKernel mk = kernel_star.as_matrix();
  // sup over start states of the mean hitting probability, per level.
  std::vector<double> sup_mean(n_max + 1, 0.0);
  for (const auto& start : mk.states()) {
    std::vector<double> acc(n_max + 1, 0.0);
    for (int rep = 0; rep < replicas; ++rep) {
      EnvState s = start;
      double inv_prod = 1.0;
      double denom = 1.0;  // sum over r of prod_{j<=r} d_j^{-1}
      for (int n = 1; n <= n_max; ++n) {
        s = mk.step(s, rng);
        double d = s.weight < s.aux ? L : s.weight;
        inv_prod /= d;
        denom += inv_prod;
        // P(T_{-1} > T_n): reach level n before the adjoined parent.
        acc[n] += 1.0 / denom;
      }
    }
    for (int n = 1; n <= n_max; ++n)
      sup_mean[n] = std::max(sup_mean[n], acc[n] / replicas);
  }
  ReturnTimeBound bound;
  bound.partial_sum = 1.0;
  double prev_term = 0.0;
  double last_term = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    prev_term = last_term;
    last_term = std::pow(b, n) * sup_mean[n];
    bound.partial_sum += last_term;
  }
  bound.tail_ratio = prev_term > 0.0 ? last_term / prev_term : 0.0;
  if (bound.tail_ratio < 1.0) {
    bound.finite = true;
    bound.tail_bound = last_term * bound.tail_ratio / (1.0 - bound.tail_ratio);
  } else {
    bound.tail_bound = kInf;
  }
  return bound;
}

}  // namespace gwre
