#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pcrlab/errors.hpp"

namespace pcrlab {

/// Neumaier-compensated accumulator. Used for every sum that feeds an
/// identity check asserted near machine precision (tail traces, risk sums,
/// weighted statistics).
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

/// Quantile with linear interpolation between order statistics (the common
/// "type 7" rule). q in [0, 1]; input is copied and sorted.
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw InputError("quantile: empty sample");
  if (q < 0.0 || q > 1.0) throw InputError("quantile: q outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

/// Ordinary least-squares slope of y on x.
inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InputError("least_squares_slope: need two samples of equal length >= 2");
  }
  const double n = static_cast<double>(x.size());
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum sxy, sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy.add((x[i] - mx) * (y[i] - my));
    sxx.add((x[i] - mx) * (x[i] - mx));
  }
  if (sxx.value() == 0.0) throw InputError("least_squares_slope: degenerate x");
  return sxy.value() / sxx.value();
}

struct MeanAndStdError {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n)
};

inline MeanAndStdError mean_and_std_error(std::span<const double> xs) {
  if (xs.size() < 2) throw InputError("mean_and_std_error: need at least 2 samples");
  CompensatedSum s;
  for (double x : xs) s.add(x);
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  CompensatedSum sq;
  for (double x : xs) sq.add((x - mean) * (x - mean));
  const double var = sq.value() / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

}  // namespace pcrlab
