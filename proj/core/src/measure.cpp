#include "banksim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "banksim/error.hpp"

namespace banksim {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> samples) : samples_(std::move(samples)) {
  for (double v : samples_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw DomainError("empirical measure atoms must be finite and >= 0");
  }
  std::sort(samples_.begin(), samples_.end());
}

double EmpiricalMeasure::integrate(const std::function<double(double)>& f) const {
  if (empty()) throw EmptyMeasure();
  double sum = 0.0;
  for (double v : samples_) sum += f(v);
  return sum / static_cast<double>(samples_.size());
}

double EmpiricalMeasure::mean() const {
  if (empty()) throw EmptyMeasure();
  double sum = 0.0;
  for (double v : samples_) sum += v;
  return sum / static_cast<double>(samples_.size());
}

double EmpiricalMeasure::moment(double p) const {
  if (!(p > 0.0)) throw DomainError("moment order must be positive");
  if (p == 1.0) return mean();
  return integrate([p](double v) { return std::pow(v, p); });
}

double EmpiricalMeasure::quantile(double q) const {
  if (empty()) throw EmptyMeasure();
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  const auto n = samples_.size();
  const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  return samples_[k == 0 ? 0 : std::min(k, n) - 1];
}

MeasureStats measure_stats(const EmpiricalMeasure& m, double p) {
  return {m.mean(), m.moment(p)};
}

double wasserstein_p(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
  if (!(p >= 1.0)) throw DomainError("W_p requires p >= 1");
  if (a.empty() || b.empty()) throw EmptyMeasure();
  const auto xs = a.samples();
  const auto ys = b.samples();
  const auto na = static_cast<std::uint64_t>(xs.size());
  const auto nb = static_cast<std::uint64_t>(ys.size());
  // Work on the common grid of multiples of 1/(na*nb): atom i of `a` covers
  // [i*nb, (i+1)*nb) and atom j of `b` covers [j*na, (j+1)*na).
  std::uint64_t i = 0, j = 0, pos = 0;
  double cost = 0.0;
  while (i < na && j < nb) {
    const std::uint64_t end = std::min((i + 1) * nb, (j + 1) * na);
    const double gap = std::abs(xs[i] - ys[j]);
    const double weight = static_cast<double>(end - pos);
    cost += weight * (p == 1.0 ? gap : std::pow(gap, p));
    pos = end;
    if (end == (i + 1) * nb) ++i;
    if (end == (j + 1) * na) ++j;
  }
  cost /= static_cast<double>(na) * static_cast<double>(nb);
  return p == 1.0 ? cost : std::pow(cost, 1.0 / p);
}

double fraction_below(const EmpiricalMeasure& m, double threshold) {
  if (m.empty()) throw EmptyMeasure();
  const auto s = m.samples();
  const auto below = std::upper_bound(s.begin(), s.end(), threshold) - s.begin();
  return static_cast<double>(below) / static_cast<double>(s.size());
}

}  // namespace banksim
