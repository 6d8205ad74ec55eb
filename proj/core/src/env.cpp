#include "gwre/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gwre {

namespace {

constexpr double kRowTol = 1e-12;
constexpr double kMinWeight = 1e-300;

void validate_law(const std::vector<std::pair<double, double>>& law,
                  bool log_scale) {
  if (law.empty()) throw KernelError("iid kernel: empty weight law");
  double total = 0.0;
  for (auto& [w, p] : law) {
    if (!log_scale && !(w > kMinWeight && std::isfinite(w)))
      throw KernelError("iid kernel: weights must be positive and finite");
    if (p < 0.0) throw KernelError("iid kernel: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kRowTol)
    throw KernelError("iid kernel: law sums to " + std::to_string(total));
}

std::vector<double> cumulative_of(
    const std::vector<std::pair<double, double>>& law) {
  std::vector<double> c;
  double acc = 0.0;
  for (auto& [w, p] : law) c.push_back(acc += p);
  return c;
}

}  // namespace

EnvKernel EnvKernel::iid(std::vector<std::pair<double, double>> weight_law) {
  EnvKernel k;
  k.variant_ = Variant::IID;
  k.name_ = "iid";
  validate_law(weight_law, false);
  k.law_ = std::move(weight_law);
  k.law_cumulative_ = cumulative_of(k.law_);
  k.start_ = EnvState{k.law_.front().first, 0.0, -1};
  return k;
}

EnvKernel EnvKernel::finite(std::vector<EnvState> states,
                            std::vector<std::vector<double>> matrix) {
  EnvKernel k;
  k.variant_ = Variant::FiniteMatrix;
  k.name_ = "finite";
  if (states.empty()) throw KernelError("finite kernel: no states");
  if (matrix.size() != states.size())
    throw KernelError("finite kernel: matrix/state size mismatch");
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!(states[i].weight > kMinWeight && std::isfinite(states[i].weight)))
      throw KernelError("finite kernel: state " + std::to_string(i) +
                        " has non-positive weight");
    states[i].index = static_cast<int>(i);
    if (matrix[i].size() != states.size())
      throw KernelError("finite kernel: row " + std::to_string(i) +
                        " has wrong length");
    double total = std::accumulate(matrix[i].begin(), matrix[i].end(), 0.0);
    if (std::abs(total - 1.0) > kRowTol)
      throw KernelError("finite kernel: row " + std::to_string(i) +
                        " sums to " + std::to_string(total));
    for (double p : matrix[i])
      if (p < 0.0) throw KernelError("finite kernel: negative entry");
  }
  k.states_ = std::move(states);
  k.matrix_ = std::move(matrix);
  k.start_ = k.states_.front();
  return k;
}

EnvKernel EnvKernel::sampler(StepFn step, EnvState start, std::string name) {
  EnvKernel k;
  k.variant_ = Variant::Sampler;
  k.name_ = std::move(name);
  k.sampler_ = std::move(step);
  k.start_ = start;
  return k;
}

EnvKernel EnvKernel::with_start(EnvState s) const {
  EnvKernel k = *this;
  if (variant_ == Variant::FiniteMatrix) {
    if (s.index < 0 || s.index >= static_cast<int>(states_.size()))
      throw KernelError("with_start: state index out of range");
    s = states_[s.index];
  }
  k.start_ = s;
  return k;
}

const std::vector<std::pair<double, double>>& EnvKernel::weight_law() const {
  if (variant_ != Variant::IID) throw KernelError("not an iid kernel");
  return law_;
}

const std::vector<EnvState>& EnvKernel::states() const {
  if (variant_ != Variant::FiniteMatrix)
    throw KernelError("not a finite-matrix kernel");
  return states_;
}

const std::vector<std::vector<double>>& EnvKernel::matrix() const {
  if (variant_ != Variant::FiniteMatrix)
    throw KernelError("not a finite-matrix kernel");
  return matrix_;
}

EnvKernel EnvKernel::as_matrix() const {
  switch (variant_) {
    case Variant::FiniteMatrix:
      return *this;
    case Variant::IID: {
      std::vector<EnvState> states;
      std::vector<double> row;
      for (auto& [w, p] : law_) {
        states.push_back(EnvState{w, 0.0, static_cast<int>(states.size())});
        row.push_back(p);
      }
      EnvKernel k;
      k.variant_ = Variant::FiniteMatrix;
      k.name_ = name_ + "-matrix";
      k.log_scale_ = log_scale_;
      k.states_ = std::move(states);
      k.matrix_.assign(k.states_.size(), row);
      k.start_ = k.states_.front();
      return k;
    }
    case Variant::Sampler:
      throw KernelError("as_matrix: sampler kernels have no matrix form");
  }
  throw KernelError("as_matrix: unreachable");
}

EnvState EnvKernel::step(const EnvState& state, CounterRng& rng) const {
  switch (variant_) {
    case Variant::IID: {
      double u = rng.uniform();
      for (std::size_t i = 0; i + 1 < law_.size(); ++i)
        if (u < law_cumulative_[i]) return EnvState{law_[i].first, 0.0, -1};
      return EnvState{law_.back().first, 0.0, -1};
    }
    case Variant::FiniteMatrix: {
      if (state.index < 0 || state.index >= static_cast<int>(states_.size()))
        throw KernelError("step: state index invalid for finite kernel");
      std::size_t j = rng.discrete(matrix_[state.index]);
      return states_[j];
    }
    case Variant::Sampler: {
      try {
        return sampler_(state, rng);
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        throw KernelError(std::string("sampler failure: ") + e.what());
      }
    }
  }
  throw KernelError("step: unreachable");
}

// ---------------------------------------------------------------------------

double eta(const EnvKernel& kernel, double eps, double r, int n_probe,
           CounterRng& rng) {
  if (!(eps > 0.0 && eps < r)) throw KernelError("eta: need 0 < eps < r");
  auto in_window = [&](double w) { return w > eps && w <= r; };
  switch (kernel.variant()) {
    case EnvKernel::Variant::IID: {
      double p = 0.0;
      for (auto& [w, q] : kernel.weight_law())
        if (in_window(w)) p += q;
      return 1.0 - p;
    }
    case EnvKernel::Variant::FiniteMatrix: {
      const auto& states = kernel.states();
      double pmin = 1.0;
      for (const auto& row : kernel.matrix()) {
        double p = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j)
          if (in_window(states[j].weight)) p += row[j];
        pmin = std::min(pmin, p);
      }
      return 1.0 - pmin;
    }
    case EnvKernel::Variant::Sampler: {
      int n_starts = std::min(n_probe, 64);
      int n_inner = std::max(n_probe, 100);
      EnvState probe = kernel.start();
      double pmin = 1.0;
      for (int s = 0; s < n_starts; ++s) {
        int hits = 0;
        for (int i = 0; i < n_inner; ++i)
          if (in_window(kernel.step(probe, rng).weight)) ++hits;
        pmin = std::min(pmin, static_cast<double>(hits) / n_inner);
        probe = kernel.step(probe, rng);
      }
      // Report conservatively: eta enters criteria through ln(1 - eta).
      double est = 1.0 - pmin;
      double se = std::sqrt(std::max(pmin * (1.0 - pmin), 1e-12) / n_inner);
      return std::clamp(est - 3.0 * se, 0.0, 1.0);
    }
  }
  throw KernelError("eta: unreachable");
}

double eta(const EnvKernel& kernel, double eps, double r, int n_probe) {
  CounterRng rng(CounterRng::derive(0x657461ull, n_probe));
  return eta(kernel, eps, r, n_probe, rng);
}

EnvKernel log_transform(const EnvKernel& kernel) {
  if (kernel.is_log_scale())
    throw KernelError("log_transform: kernel is already on the log scale");
  EnvKernel k = kernel;
  k.log_scale_ = true;
  k.name_ = kernel.name() + "-ln";
  switch (kernel.variant()) {
    case EnvKernel::Variant::IID:
      for (auto& [w, p] : k.law_) w = std::log(w);
      break;
    case EnvKernel::Variant::FiniteMatrix:
      for (auto& s : k.states_) s.weight = std::log(s.weight);
      break;
    case EnvKernel::Variant::Sampler: {
      EnvKernel::StepFn base = kernel.sampler_;
      k.sampler_ = [base](const EnvState& s, CounterRng& rng) {
        EnvState lin{std::exp(s.weight), s.aux, s.index};
        EnvState out = base(lin, rng);
        out.weight = std::log(out.weight);
        return out;
      };
      break;
    }
  }
  k.start_.weight = std::log(kernel.start().weight);
  if (kernel.variant() == EnvKernel::Variant::FiniteMatrix)
    k.start_ = k.states_[kernel.start().index];
  return k;
}

// Row-renormalized restriction to states whose weight satisfies `keep`.
EnvKernel EnvKernel::filter_renormalize(const EnvKernel& kernel,
                                        const std::function<bool(double)>& keep,
                                        const std::string& what) {
  switch (kernel.variant()) {
    case EnvKernel::Variant::IID: {
      std::vector<std::pair<double, double>> law;
      double mass = 0.0;
      for (auto& [w, p] : kernel.weight_law())
        if (keep(w)) {
          law.emplace_back(w, p);
          mass += p;
        }
      if (mass <= 0.0)
        throw KernelError(what + ": iid law has zero mass on the window");
      for (auto& [w, p] : law) p /= mass;
      EnvKernel k;
      k.variant_ = EnvKernel::Variant::IID;
      k.log_scale_ = kernel.is_log_scale();
      k.name_ = kernel.name() + "-" + what;
      k.law_ = std::move(law);
      k.law_cumulative_ = cumulative_of(k.law_);
      k.start_ = EnvState{k.law_.front().first, 0.0, -1};
      return k;
    }
    case EnvKernel::Variant::FiniteMatrix: {
      const auto& states = kernel.states();
      const auto& matrix = kernel.matrix();
      std::vector<int> surviving;
      for (std::size_t j = 0; j < states.size(); ++j)
        if (keep(states[j].weight)) surviving.push_back(static_cast<int>(j));
      if (surviving.empty())
        throw KernelError(what + ": no state lies in the window");
      std::vector<EnvState> new_states;
      std::vector<std::vector<double>> new_matrix;
      for (int i : surviving) {
        double mass = 0.0;
        for (int j : surviving) mass += matrix[i][j];
        if (mass <= 0.0)
          throw KernelError(what + ": state " + std::to_string(i) +
                            " (weight " + std::to_string(states[i].weight) +
                            ") has zero mass on the window");
        std::vector<double> row;
        row.reserve(surviving.size());
        for (int j : surviving) row.push_back(matrix[i][j] / mass);
        new_matrix.push_back(std::move(row));
      }
      for (int i : surviving) {
        EnvState s = states[i];
        s.index = static_cast<int>(new_states.size());
        new_states.push_back(s);
      }
      EnvKernel k;
      k.variant_ = EnvKernel::Variant::FiniteMatrix;
      k.log_scale_ = kernel.is_log_scale();
      k.name_ = kernel.name() + "-" + what;
      k.states_ = std::move(new_states);
      k.matrix_ = std::move(new_matrix);
      k.start_ = k.states_.front();
      for (std::size_t s = 0; s < surviving.size(); ++s)
        if (surviving[s] == kernel.start().index) k.start_ = k.states_[s];
      return k;
    }
    case EnvKernel::Variant::Sampler: {
      EnvKernel::StepFn base = kernel.sampler_;
      EnvKernel k = kernel;
      k.name_ = kernel.name() + "-" + what;
      k.sampler_ = [base, keep, what](const EnvState& s, CounterRng& rng) {
        for (int attempt = 0; attempt < 100000; ++attempt) {
          EnvState out = base(s, rng);
          if (keep(out.weight)) return out;
        }
        throw KernelError(what + ": rejection sampler starved");
      };
      return k;
    }
  }
  throw KernelError(what + ": unreachable");
}

EnvKernel truncate(const EnvKernel& kernel, const TruncationWindow& window) {
  if (!kernel.is_log_scale())
    throw KernelError("truncate: expects a log-scale kernel");
  if (!(window.lower < window.upper))
    throw KernelError("truncate: window lower must be below upper");
  auto keep = [window](double w) {
    return w > window.lower && w <= window.upper;
  };
  return EnvKernel::filter_renormalize(kernel, keep, "truncated");
}

EnvKernel restrict_weight_above(const EnvKernel& kernel, double eps) {
  if (kernel.is_log_scale())
    throw KernelError("restrict_weight_above: expects a weight-scale kernel");
  auto keep = [eps](double w) { return w > eps; };
  return EnvKernel::filter_renormalize(kernel, keep, "eps-truncated");
}

// ---------------------------------------------------------------------------

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix matmul(const Matrix& a, const Matrix& b) {
  std::size_t n = a.size();
  Matrix c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double aik = a[i][k];
      if (aik == 0.0) continue;
      const auto& bk = b[k];
      for (std::size_t j = 0; j < n; ++j) c[i][j] += aik * bk[j];
    }
  return c;
}

std::vector<Matrix> matrix_powers(const Matrix& p, int up_to) {
  std::vector<Matrix> powers;
  powers.push_back(p);
  for (int m = 2; m <= up_to; ++m)
    powers.push_back(matmul(powers.back(), p));
  return powers;
}

}  // namespace

MinorizationReport check_assumption1(const EnvKernel& kernel, int ell_max,
                                     int n_max, double kappa_max) {
  if (kernel.variant() == EnvKernel::Variant::IID)
    return MinorizationReport{1, 1, 1.0, true};
  if (kernel.variant() == EnvKernel::Variant::Sampler)
    throw KernelError(
        "check_assumption1: needs a finite-state kernel; sampler kernels "
        "take a user-asserted certificate");

  const auto& p = kernel.matrix();
  const std::size_t n = p.size();
  auto powers = matrix_powers(p, std::max(ell_max, n_max));

  for (int ell = 1; ell <= ell_max; ++ell) {
    for (int N = ell; N <= n_max; ++N) {
      double kappa = 1.0;
      bool feasible = true;
      for (std::size_t x = 0; feasible && x < n; ++x) {
        for (std::size_t y = 0; feasible && y < n; ++y) {
          for (std::size_t j = 0; j < n; ++j) {
            double num = powers[ell - 1][x][j];
            if (num <= 0.0) continue;
            double den = 0.0;
            for (int m = 1; m <= N; ++m) den += powers[m - 1][y][j];
            den /= N;
            if (den <= 0.0) {
              feasible = false;
              break;
            }
            kappa = std::max(kappa, num / den);
          }
        }
      }
      if (feasible && kappa <= kappa_max)
        return MinorizationReport{ell, N, kappa, true};
    }
  }
  return MinorizationReport{0, 0, 0.0, false};
}

double minorization_violation(const EnvKernel& kernel,
                              const MinorizationReport& report) {
  if (!report.satisfied)
    throw KernelError("minorization_violation: unsatisfied report");
  EnvKernel mk = kernel.as_matrix();
  const auto& p = mk.matrix();
  const std::size_t n = p.size();
  auto powers = matrix_powers(p, std::max(report.ell, report.n_mix));
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t j = 0; j < n; ++j) {
        double lhs = powers[report.ell - 1][x][j];
        double rhs = 0.0;
        for (int m = 1; m <= report.n_mix; ++m) rhs += powers[m - 1][y][j];
        rhs *= report.kappa / report.n_mix;
        worst = std::max(worst, lhs - rhs);
      }
  return worst;
}

std::vector<std::pair<EnvState, double>> beta_measure(const EnvKernel& kernel,
                                                      double eps,
                                                      const EnvState& x_star,
                                                      int ell, int n_samples,
                                                      CounterRng* rng) {
  if (ell < 1) throw KernelError("beta_measure: ell must be >= 1");
  if (!(x_star.weight >= 1.0))
    throw KernelError("beta_measure: x_star must have weight >= 1");
  if (kernel.variant() == EnvKernel::Variant::Sampler) {
    if (n_samples <= 0 || rng == nullptr)
      throw KernelError("beta_measure: sampler variant needs n_samples and rng");
    EnvKernel trunc = restrict_weight_above(kernel, eps);
    std::vector<std::pair<EnvState, double>> out;
    double w = 1.0 / n_samples;
    for (int s = 0; s < n_samples; ++s) {
      EnvState state = x_star;
      for (int i = 0; i < ell; ++i) state = trunc.step(state, *rng);
      out.emplace_back(state, w);
    }
    return out;
  }
  EnvKernel trunc = restrict_weight_above(kernel.as_matrix(), eps);
  const auto& states = trunc.states();
  const auto& matrix = trunc.matrix();
  int start = -1;
  if (kernel.variant() == EnvKernel::Variant::IID) {
    // Memoryless: one conditioned step from any state gives the same law,
    // so an x_star outside the support is fine.
    start = 0;
  } else {
    for (std::size_t j = 0; j < states.size(); ++j)
      if (std::abs(states[j].weight - x_star.weight) < 1e-12 &&
          (x_star.index < 0 || states[j].aux == x_star.aux))
        start = static_cast<int>(j);
  }
  if (start < 0)
    throw KernelError("beta_measure: x_star not among surviving states");
  std::vector<double> v(states.size(), 0.0);
  v[start] = 1.0;
  for (int i = 0; i < ell; ++i) {
    std::vector<double> next(states.size(), 0.0);
    for (std::size_t a = 0; a < states.size(); ++a) {
      if (v[a] == 0.0) continue;
      for (std::size_t b = 0; b < states.size(); ++b)
        next[b] += v[a] * matrix[a][b];
    }
    v = std::move(next);
  }
  std::vector<std::pair<EnvState, double>> out;
  for (std::size_t j = 0; j < states.size(); ++j)
    if (v[j] > 0.0) out.emplace_back(states[j], v[j]);
  return out;
}

EnvState sample_distribution(
    const std::vector<std::pair<EnvState, double>>& dist, CounterRng& rng) {
  if (dist.empty()) throw KernelError("sample_distribution: empty table");
  double u = rng.uniform();
  double acc = 0.0;
  for (auto& [s, p] : dist) {
    acc += p;
    if (u < acc) return s;
  }
  return dist.back().first;
}

// --------------------------- built-in examples -----------------------------

EnvKernel dyadic_kernel(double C, double start_weight) {
  auto step = [C](const EnvState& s, CounterRng& rng) {
    if (s.aux == 1.0) return EnvState{s.weight / 2.0, 1.0, -1};
    double w = rng.uniform_pos() * C;
    return EnvState{w, 0.0, -1};
  };
  // Dyadic starts halve forever; non-dyadic ones renew uniformly.
  bool dyadic_start = true;
  double m = start_weight;
  for (int i = 0; i < 1100 && m != std::floor(m); ++i) m *= 2.0;
  dyadic_start = (m == std::floor(m)) && std::isfinite(m);
  return EnvKernel::sampler(step,
                            EnvState{start_weight, dyadic_start ? 1.0 : 0.0, -1},
                            "dyadic");
}

EnvKernel dyadic_grid_kernel(int n_states) {
  std::vector<EnvState> states;
  std::vector<std::vector<double>> matrix(n_states,
                                          std::vector<double>(n_states, 0.0));
  double w = 1.0;
  for (int k = 0; k < n_states; ++k) {
    states.push_back(EnvState{w, 1.0, k});
    w /= 2.0;
    int next = std::min(k + 1, n_states - 1);
    matrix[k][next] = 1.0;
  }
  EnvKernel k = EnvKernel::finite(std::move(states), std::move(matrix));
  return k;
}

EnvKernel exp_mixture_kernel(double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw KernelError("exp_mixture_kernel: alpha must be in [0,1]");
  auto step = [alpha](const EnvState& s, CounterRng& rng) {
    double rate = rng.bernoulli(alpha) ? std::max(s.weight, 1.0) : 1.0;
    return EnvState{rng.exponential(rate), 0.0, -1};
  };
  return EnvKernel::sampler(step, EnvState{1.0, 0.0, -1}, "exp-mixture");
}

EnvKernel exp_mixture_grid_kernel(double alpha, int n_points, double lo,
                                  double hi) {
  if (n_points < 2) throw KernelError("exp_mixture_grid_kernel: n_points < 2");
  std::vector<double> grid(n_points);
  double lr = std::log(lo), step = (std::log(hi) - lr) / (n_points - 1);
  for (int i = 0; i < n_points; ++i) grid[i] = std::exp(lr + i * step);

  // Cell j = [bnd_j, bnd_{j+1}); bnd_0 = 0 and bnd_n = inf, so every row is
  // exactly stochastic without renormalization.
  std::vector<double> bnd(n_points + 1);
  bnd[0] = 0.0;
  for (int j = 1; j < n_points; ++j) bnd[j] = std::sqrt(grid[j - 1] * grid[j]);
  bnd[n_points] = std::numeric_limits<double>::infinity();

  auto cdf = [alpha](double rate_hat, double w) {
    if (!std::isfinite(w)) return 1.0;
    return (1.0 - alpha) * (-std::expm1(-w)) + alpha * (-std::expm1(-rate_hat * w));
  };

  std::vector<EnvState> states;
  std::vector<std::vector<double>> matrix;
  for (int i = 0; i < n_points; ++i) {
    states.push_back(EnvState{grid[i], 0.0, i});
    double rate_hat = std::max(grid[i], 1.0);
    std::vector<double> row(n_points);
    double total = 0.0;
    for (int j = 0; j < n_points; ++j) {
      row[j] = cdf(rate_hat, bnd[j + 1]) - cdf(rate_hat, bnd[j]);
      total += row[j];
    }
    // Guard residual floating-point mass so rows validate at 1e-12.
    for (double& p : row) p /= total;
    matrix.push_back(std::move(row));
  }
  return EnvKernel::finite(std::move(states), std::move(matrix));
}

}  // namespace gwre
