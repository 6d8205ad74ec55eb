#include "gwre/offspring.hpp"

#include <algorithm>
#include <cmath>

#include "gwre/errors.hpp"

namespace gwre {

OffspringLaw::OffspringLaw(std::vector<std::pair<int, double>> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error("offspring law: empty support");
  std::sort(entries_.begin(), entries_.end());
  double total = 0.0;
  for (auto& [k, p] : entries_) {
    if (k < 0) throw Error("offspring law: negative count");
    if (p < 0.0) throw Error("offspring law: negative probability");
    total += p;
    mean_ += k * p;
    cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error("offspring law: probabilities sum to " + std::to_string(total));
}

double OffspringLaw::pgf(double s) const {
  double v = 0.0;
  for (auto& [k, p] : entries_) v += p * std::pow(s, k);
  return v;
}

int OffspringLaw::sample(CounterRng& rng) const {
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < entries_.size(); ++i)
    if (u < cumulative_[i]) return entries_[i].first;
  return entries_.back().first;
}

double extinction_probability(const OffspringLaw& law, double tol) {
  if (tol <= 0.0) throw Error("extinction_probability: tol must be positive");
  double q = 0.0;
  for (;;) {
    double next = law.pgf(q);
    if (std::abs(next - q) < tol) return next;
    q = next;
  }
}

}  // namespace gwre
