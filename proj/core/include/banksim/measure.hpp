#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace banksim {

/// Uniform probability measure on a finite multiset of nonnegative reals,
/// kept sorted.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  explicit EmpiricalMeasure(std::vector<double> samples);

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  /// (mu, f). Throws EmptyMeasure.
  double integrate(const std::function<double(double)>& f) const;
  double mean() const;
  double moment(double p) const;
  /// Lower quantile F^{-1}(q) for q in [0, 1].
  double quantile(double q) const;

  bool operator==(const EmpiricalMeasure&) const = default;

 private:
  std::vector<double> samples_;
};

struct MeasureStats {
  double mean = 0.0;
  double p_moment = 0.0;
};

MeasureStats measure_stats(const EmpiricalMeasure& m, double p);

/// Exact W_p between two discrete measures via the monotone quantile coupling.
/// Throws DomainError for p < 1 and EmptyMeasure for empty inputs.
double wasserstein_p(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p);

/// Fraction of atoms with value <= threshold.
double fraction_below(const EmpiricalMeasure& m, double threshold);

}  // namespace banksim
