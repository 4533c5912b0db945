#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pcrlab/errors.hpp"
#include "pcrlab/numeric.hpp"
#include "pcrlab/spectral.hpp"

namespace pcrlab {

enum class SpectrumKind { exponential, polynomial, spiked, explicit_list };

inline const char* to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::exponential: return "exponential";
    case SpectrumKind::polynomial: return "polynomial";
    case SpectrumKind::spiked: return "spiked";
    case SpectrumKind::explicit_list: return "explicit";
  }
  return "?";
}

/// Prescribed covariance eigenvalues l_1 >= ... >= l_p in the population
/// basis (fixed to the standard basis). Generated kinds are strictly
/// positive; the explicit kind additionally admits trailing zeros so rank
/// edge cases can be exercised.
class CovarianceSpectrum {
 public:
  static CovarianceSpectrum exponential(double alpha, int p) {
    if (!(alpha > 0.0)) throw InputError("spectrum: exponential decay needs alpha > 0");
    require_dim(p);
    Vector values(p);
    for (int j = 0; j < p; ++j) values[j] = std::exp(-alpha * static_cast<double>(j + 1));
    CovarianceSpectrum s(SpectrumKind::exponential, std::move(values));
    s.alpha_ = alpha;
    return s;
  }

  static CovarianceSpectrum polynomial(double alpha, int p) {
    if (!(alpha > 1.0)) throw InputError("spectrum: polynomial decay needs alpha > 1");
    require_dim(p);
    Vector values(p);
    for (int j = 0; j < p; ++j) values[j] = std::pow(static_cast<double>(j + 1), -alpha);
    CovarianceSpectrum s(SpectrumKind::polynomial, std::move(values));
    s.alpha_ = alpha;
    return s;
  }

  static CovarianceSpectrum spiked(const std::vector<double>& spikes, double bulk, int p) {
    require_dim(p);
    if (!(bulk > 0.0)) throw InputError("spectrum: spiked bulk must be positive");
    if (static_cast<int>(spikes.size()) >= p) {
      throw InputError("spectrum: spiked model needs fewer spikes than dimensions");
    }
    for (std::size_t i = 0; i < spikes.size(); ++i) {
      if (!(spikes[i] > bulk)) throw InputError("spectrum: spikes must lie strictly above the bulk");
      if (i > 0 && spikes[i] > spikes[i - 1]) {
        throw InputError("spectrum: spikes must be nonincreasing");
      }
    }
    Vector values = Vector::Constant(p, bulk);
    for (std::size_t i = 0; i < spikes.size(); ++i) values[static_cast<Eigen::Index>(i)] = spikes[i];
    CovarianceSpectrum s(SpectrumKind::spiked, std::move(values));
    s.spike_count_ = static_cast<int>(spikes.size());
    s.bulk_ = bulk;
    return s;
  }

  static CovarianceSpectrum explicit_list(const std::vector<double>& values) {
    if (values.empty()) throw InputError("spectrum: explicit list must be nonempty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
        throw InputError("spectrum: explicit eigenvalues must be finite and nonnegative");
      }
      if (i > 0 && values[i] > values[i - 1]) {
        throw InputError("spectrum: explicit eigenvalues must be nonincreasing");
      }
    }
    Vector v = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    return CovarianceSpectrum(SpectrumKind::explicit_list, std::move(v));
  }

  SpectrumKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(values_.size()); }
  const Vector& eigenvalues() const { return values_; }

  /// l_{j+1} in math indexing: eigenvalue(0) is the largest.
  double eigenvalue(int j) const {
    if (j < 0 || j >= dim()) throw InputError("spectrum: eigenvalue index out of range");
    return values_[j];
  }

  int spike_count() const { return spike_count_; }
  double bulk() const { return bulk_; }
  double decay_rate() const { return alpha_; }

  double trace() const { return tail_trace_impl(0, 1); }

  /// Analytic bound on the mass the ambient truncation drops beyond p:
  /// geometric tail for exponential decay, integral bound for polynomial.
  /// Spiked and explicit spectra are finite by construction.
  double truncation_tail_bound() const {
    const double p = static_cast<double>(dim());
    switch (kind_) {
      case SpectrumKind::exponential:
        return std::exp(-alpha_ * (p + 1.0)) / (1.0 - std::exp(-alpha_));
      case SpectrumKind::polynomial:
        return std::pow(p, 1.0 - alpha_) / (alpha_ - 1.0);
      default:
        return 0.0;
    }
  }

  double tail_trace_impl(int d, int power) const {
    if (d < 0 || d > dim()) throw InputError("tail_trace: d must be in [0, p]");
    if (power != 1 && power != 2) throw InputError("tail_trace: power must be 1 or 2");
    CompensatedSum acc;
    // Ascending magnitudes: walk the sorted tail from the smallest entry up.
    for (int k = dim() - 1; k >= d; --k) {
      const double v = values_[k];
      acc.add(power == 1 ? v : v * v);
    }
    return acc.value();
  }

 private:
  CovarianceSpectrum(SpectrumKind kind, Vector values) : kind_(kind), values_(std::move(values)) {}

  static void require_dim(int p) {
    if (p < 1) throw InputError("spectrum: dimension must be >= 1");
  }

  SpectrumKind kind_;
  Vector values_;
  double alpha_ = 0.0;
  int spike_count_ = 0;
  double bulk_ = 0.0;
};

/// tr_{>d}(Sigma^power): exact compensated partial sum over the finite tail.
inline double tail_trace(const CovarianceSpectrum& spectrum, int d, int power = 1) {
  return spectrum.tail_trace_impl(d, power);
}

}  // namespace pcrlab
