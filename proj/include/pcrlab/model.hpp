#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "pcrlab/errors.hpp"
#include "pcrlab/rng.hpp"
#include "pcrlab/spectrum.hpp"

namespace pcrlab {

/// Whitened-coordinate laws, all standardized to mean 0 and variance 1.
enum class CoefficientLaw { gaussian, rademacher, uniform };

inline const char* to_string(CoefficientLaw law) {
  switch (law) {
    case CoefficientLaw::gaussian: return "gaussian";
    case CoefficientLaw::rademacher: return "rademacher";
    case CoefficientLaw::uniform: return "uniform";
  }
  return "?";
}

inline CoefficientLaw coefficient_law_from_string(const std::string& name) {
  if (name == "gaussian") return CoefficientLaw::gaussian;
  if (name == "rademacher") return CoefficientLaw::rademacher;
  if (name == "uniform") return CoefficientLaw::uniform;
  throw InputError("unknown coefficient law: " + name);
}

inline double draw(CoefficientLaw law, rng::Stream& stream) {
  switch (law) {
    case CoefficientLaw::gaussian:
      return stream.next_gaussian();
    case CoefficientLaw::rademacher:
      return stream.next_bit() ? 1.0 : -1.0;
    case CoefficientLaw::uniform:
      // Uniform on [-sqrt(3), sqrt(3)): variance 1.
      return std::sqrt(3.0) * (2.0 * stream.next_unit() - 1.0);
  }
  return 0.0;
}

/// Recorded psi_2 proxies per family (bounded-support bound for the bounded
/// laws, the large-p limit sqrt(2/e) for the gaussian). Diagnostics only; no
/// downstream computation consumes them.
inline double psi2_proxy(CoefficientLaw law) {
  switch (law) {
    case CoefficientLaw::gaussian: return 0.858;
    case CoefficientLaw::rademacher: return 1.0;
    case CoefficientLaw::uniform: return std::sqrt(3.0);
  }
  return 0.0;
}

/// Sample an n x p design with rows x_i = sum_j sqrt(l_j) eta_ij u_j, where
/// the whitened coordinates eta_ij are i.i.d. from `law`. Each (i, j) entry
/// has its own counter substream, so generation is order-independent and
/// parallel-safe. `basis`, when given, supplies the population eigenvectors
/// u_j as columns (default: standard basis).
inline Matrix sample_design(const CovarianceSpectrum& spectrum, CoefficientLaw law, int n,
                            std::uint64_t seed, const Matrix* basis = nullptr) {
  if (n < 1) throw InputError("sample_design: n must be >= 1");
  const int p = spectrum.dim();
  if (basis != nullptr && (basis->rows() != p || basis->cols() != p)) {
    throw InputError("sample_design: basis must be p x p");
  }
  const Vector scale = spectrum.eigenvalues().cwiseSqrt();
  Matrix design(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      rng::Stream stream(rng::derive_key(seed, {rng::kDesignTag, static_cast<std::uint64_t>(i),
                                                static_cast<std::uint64_t>(j)}));
      design(i, j) = scale[j] * draw(law, stream);
    }
  }
  if (basis != nullptr) design = design * basis->transpose();
  return design;
}

/// One draw of the regression model: responses = design * f_true + noise,
/// held exactly as computed so the identity can be asserted bitwise.
struct RegressionInstance {
  Matrix design;
  Vector responses;
  Vector f_true;
  double sigma = 0.0;
  Vector noise;
  CovarianceSpectrum spectrum;
  std::uint64_t rng_seed = 0;

  int n() const { return static_cast<int>(design.rows()); }
  int p() const { return static_cast<int>(design.cols()); }
};

inline RegressionInstance make_instance(const CovarianceSpectrum& spectrum, CoefficientLaw law,
                                        int n, Vector f_true, double sigma, std::uint64_t seed,
                                        CoefficientLaw noise_law = CoefficientLaw::gaussian,
                                        const Matrix* basis = nullptr) {
  if (f_true.size() != spectrum.dim()) {
    throw InputError("make_instance: f_true length must equal the ambient dimension");
  }
  if (!(sigma >= 0.0)) throw InputError("make_instance: sigma must be >= 0");

  RegressionInstance instance{Matrix(), Vector(), std::move(f_true), sigma,
                              Vector(),  spectrum, seed};
  instance.design = sample_design(spectrum, law, n, seed, basis);
  instance.noise.resize(n);
  for (int i = 0; i < n; ++i) {
    rng::Stream stream(rng::derive_key(seed, {rng::kNoiseTag, static_cast<std::uint64_t>(i)}));
    instance.noise[i] = sigma * draw(noise_law, stream);
  }
  instance.responses = instance.design * instance.f_true + instance.noise;
  return instance;
}

/// Haar-ish random orthogonal matrix: QR of a gaussian matrix with the sign
/// gauge fixed by the diagonal of R. Exposed for basis-robustness tests.
inline Matrix random_orthogonal(int p, std::uint64_t seed) {
  if (p < 1) throw InputError("random_orthogonal: p must be >= 1");
  Matrix g(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      rng::Stream stream(rng::derive_key(seed, {rng::kRotationTag, static_cast<std::uint64_t>(i),
                                                static_cast<std::uint64_t>(j)}));
      g(i, j) = stream.next_gaussian();
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace pcrlab
