#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pcrlab/errors.hpp"
#include "pcrlab/estimators.hpp"
#include "pcrlab/numeric.hpp"
#include "pcrlab/spectral.hpp"
#include "pcrlab/spectrum.hpp"

namespace pcrlab {

/// Exact conditional risk of a truncation-level estimator: squared bias,
/// variance, and their sum.
struct RiskReport {
  double bias_sq = 0.0;
  double variance = 0.0;
  double total = 0.0;
  int d = 0;
  EstimatorFamily family = EstimatorFamily::pcr;
};

/// mu-split of the projector excess risk. The two parts depend on mu; their
/// sum does not.
struct ExcessRiskSplit {
  double mu = 0.0;
  double lower_part = 0.0;  // sum_{j<=d} (l_j - mu) ||P_j Phat_{>d}||_2^2
  double upper_part = 0.0;  // sum_{k>d} (mu - l_k) ||P_k Phat_{<=d}||_2^2
  double total = 0.0;       // R(Phat_{<=d}) - tr_{>d}(Sigma), computed independently
};

/// Regime diagnostics: effective-rank curve and its first crossing, effective
/// dimensions, and empirical/population eigenvalue ratios.
struct RegimeDiagnostics {
  std::vector<double> effective_ranks;  // tr_{>d}(Sigma)/l_{d+1} for d = 0..p-1
  std::optional<int> j_star;
  std::vector<double> effective_dimension;  // N(mu) over a caller-chosen mu grid
  std::vector<double> head_eigen_ratios;    // lhat_j / l_j for j <= j*
  std::vector<double> tail_eigen_ratios;    // lhat_j * n / tr_{>n}(Sigma) for j* < j <= n
};

/// <g, Sigma g>, the squared L2(P^X) norm of the functional x -> <g, x>.
/// Computed analytically from the prescribed spectrum, never by sampling.
/// `basis` supplies the population eigenvectors when they are not the
/// standard basis.
inline double l2_norm_sq(const Vector& g, const CovarianceSpectrum& spectrum,
                         const Matrix* basis = nullptr) {
  if (g.size() != spectrum.dim()) throw InputError("l2_norm_sq: dimension mismatch");
  CompensatedSum acc;
  if (basis == nullptr) {
    for (int j = 0; j < spectrum.dim(); ++j) acc.add(spectrum.eigenvalue(j) * g[j] * g[j]);
  } else {
    if (basis->rows() != g.size() || basis->cols() != g.size()) {
      throw InputError("l2_norm_sq: basis must be p x p");
    }
    const Vector coords = basis->transpose() * g;
    for (int j = 0; j < spectrum.dim(); ++j) {
      acc.add(spectrum.eigenvalue(j) * coords[j] * coords[j]);
    }
  }
  return acc.value();
}

/// Squared prediction error <fhat - f, Sigma (fhat - f)>.
inline double prediction_error(const Vector& coefficients, const Vector& f_true,
                               const CovarianceSpectrum& spectrum, const Matrix* basis = nullptr) {
  if (coefficients.size() != f_true.size()) {
    throw InputError("prediction_error: coefficient/f dimension mismatch");
  }
  return l2_norm_sq(coefficients - f_true, spectrum, basis);
}

inline double prediction_error(const Estimate& estimate, const Vector& f_true,
                               const CovarianceSpectrum& spectrum, const Matrix* basis = nullptr) {
  return prediction_error(estimate.coefficients, f_true, spectrum, basis);
}

/// Exact conditional bias-variance decomposition for PCR at level d:
///   bias_sq = ||Phat_{>d} f||_{L2}^2,
///   variance = (sigma^2/n) sum_{j<=d} lhat_j^{-1} ||uhat_j||_{L2}^2.
inline RiskReport conditional_risk(const RegressionInstance& instance,
                                   const EigenDecomposition& empirical, int d) {
  const int p = instance.p();
  if (empirical.eigenvectors.rows() != p) {
    throw InputError("conditional_risk: decomposition dimension mismatch");
  }
  if (d < 0 || d > empirical.count()) {
    throw InputError("conditional_risk: d out of range for the decomposition");
  }
  if (d > 0) {
    const double tau = rank_tolerance(empirical.eigenvalues[0]);
    if (!(empirical.eigenvalues[d - 1] > tau) || d > empirical.vector_count()) {
      throw RankDeficiencyError(
          "conditional_risk: empirical eigenvalue " + std::to_string(d) +
              " is at or below the rank tolerance",
          d);
    }
  }

  RiskReport report;
  report.d = d;
  report.family = EstimatorFamily::pcr;

  Vector residual = instance.f_true;
  if (d > 0) {
    const auto head = empirical.eigenvectors.leftCols(d);
    residual -= head * (head.transpose() * instance.f_true);
  }
  report.bias_sq = l2_norm_sq(residual, instance.spectrum);

  CompensatedSum var;
  const double noise_factor =
      instance.sigma * instance.sigma / static_cast<double>(instance.n());
  for (int j = 0; j < d; ++j) {
    const double weight = l2_norm_sq(empirical.eigenvectors.col(j), instance.spectrum);
    var.add(weight / empirical.eigenvalues[j]);
  }
  report.variance = noise_factor * var.value();
  report.total = report.bias_sq + report.variance;
  return report;
}

enum class ProjectorBasis { population, empirical };

/// Reconstruction error R(P) = tr(Sigma) - tr(P Sigma) of a rank-d projector.
/// The population projector gives exactly the tail trace; the empirical one
/// needs the decomposition's leading d vectors.
inline double reconstruction_error(int d, ProjectorBasis which, const CovarianceSpectrum& spectrum,
                                   const EigenDecomposition* empirical = nullptr) {
  const int p = spectrum.dim();
  if (d < 0 || d > p) throw InputError("reconstruction_error: d must be in [0, p]");
  if (which == ProjectorBasis::population) return tail_trace(spectrum, d, 1);

  if (empirical == nullptr) {
    throw InputError("reconstruction_error: empirical basis requested without a decomposition");
  }
  if (empirical->eigenvectors.rows() != p || d > empirical->vector_count()) {
    throw InputError("reconstruction_error: decomposition does not carry d vectors");
  }
  // tr(Sigma) - tr(P Sigma) = sum_k l_k (1 - P_kk); every term is nonnegative.
  CompensatedSum acc;
  for (int k = 0; k < p; ++k) {
    const double row_mass = empirical->eigenvectors.leftCols(d).row(k).squaredNorm();
    acc.add(spectrum.eigenvalue(k) * (1.0 - row_mass));
  }
  return acc.value();
}

/// Reconstruction error of an explicit projector matrix; rejects inputs with
/// ||P^2 - P||_max above the projector tolerance.
inline double reconstruction_error(const Matrix& projector, const CovarianceSpectrum& spectrum) {
  const int p = spectrum.dim();
  if (projector.rows() != p || projector.cols() != p) {
    throw InputError("reconstruction_error: projector must be p x p");
  }
  const double defect = (projector * projector - projector).cwiseAbs().maxCoeff();
  if (!(defect <= tol::kProjector)) {
    throw InputError("reconstruction_error: input is not a projector (||P^2 - P||_max = " +
                     std::to_string(defect) + ")");
  }
  CompensatedSum acc;
  for (int k = 0; k < p; ++k) {
    acc.add(spectrum.eigenvalue(k) * (1.0 - projector(k, k)));
  }
  return acc.value();
}

/// mu-split of the excess risk of the empirical rank-d projector. The total
/// is computed independently as R(Phat_{<=d}) - tr_{>d}(Sigma), so the type
/// invariant lower + upper == total is a real identity check.
inline ExcessRiskSplit excess_risk_split(const CovarianceSpectrum& spectrum,
                                         const EigenDecomposition& empirical, int d, double mu) {
  const int p = spectrum.dim();
  if (d < 0 || d > p) throw InputError("excess_risk_split: d must be in [0, p]");
  if (empirical.eigenvectors.rows() != p) {
    throw InputError("excess_risk_split: decomposition dimension mismatch");
  }
  if (d > empirical.vector_count()) {
    throw RankDeficiencyError("excess_risk_split: decomposition carries fewer than d vectors", d);
  }

  Vector row_mass = Vector::Zero(p);  // (Phat_{<=d})_kk
  if (d > 0) {
    row_mass = empirical.eigenvectors.leftCols(d).rowwise().squaredNorm();
  }

  ExcessRiskSplit split;
  split.mu = mu;

  CompensatedSum lower, upper, total;
  for (int j = 0; j < d; ++j) {
    lower.add((spectrum.eigenvalue(j) - mu) * (1.0 - row_mass[j]));
    total.add(spectrum.eigenvalue(j) * (1.0 - row_mass[j]));
  }
  for (int k = d; k < p; ++k) {
    upper.add((mu - spectrum.eigenvalue(k)) * row_mass[k]);
    total.add(-spectrum.eigenvalue(k) * row_mass[k]);
  }
  split.lower_part = lower.value();
  split.upper_part = upper.value();
  split.total = total.value();
  return split;
}

/// Effective-rank curve tr_{>d}(Sigma)/l_{d+1} for d = 0..p-1 and its first
/// crossing of B*n (absent when the curve never crosses). A zero tail pins
/// the ratio to 0: no crossing can happen once the spectrum is exhausted.
inline RegimeDiagnostics effective_rank_curve(const CovarianceSpectrum& spectrum, int n, double B) {
  if (n < 1) throw InputError("effective_rank_curve: n must be >= 1");
  if (!(B > 1.0)) throw InputError("effective_rank_curve: B must be > 1");

  RegimeDiagnostics diag;
  const int p = spectrum.dim();
  diag.effective_ranks.reserve(p);
  const double threshold = B * static_cast<double>(n);
  for (int d = 0; d < p; ++d) {
    const double next = spectrum.eigenvalue(d);
    const double ratio = next > 0.0 ? tail_trace(spectrum, d, 1) / next : 0.0;
    diag.effective_ranks.push_back(ratio);
    if (!diag.j_star.has_value() && ratio >= threshold) diag.j_star = d;
  }
  return diag;
}

/// Effective dimension N(mu) = sum_j l_j/(l_j + mu); equals p at mu = 0 for a
/// positive spectrum and decreases toward tr(Sigma)/mu.
inline double effective_dimension(const CovarianceSpectrum& spectrum, double mu) {
  if (mu < 0.0) throw InputError("effective_dimension: mu must be >= 0");
  const int p = spectrum.dim();
  if (mu == 0.0 && !(spectrum.eigenvalue(p - 1) > 0.0)) {
    throw InputError("effective_dimension: mu = 0 needs a positive spectrum");
  }
  CompensatedSum acc;
  for (int j = p - 1; j >= 0; --j) {
    const double l = spectrum.eigenvalue(j);
    acc.add(l / (l + mu));
  }
  return acc.value();
}

/// Operator norm of (Sigma + mu)^{-1/2} (Sigmahat - Sigma) (Sigma + mu)^{-1/2}
/// in the population basis: the largest absolute eigenvalue of the whitened
/// difference.
inline double relative_perturbation_norm(const CovarianceSpectrum& spectrum,
                                         const SymMatrix& empirical_cov, double mu) {
  const int p = spectrum.dim();
  if (empirical_cov.dim() != p) {
    throw InputError("relative_perturbation_norm: dimension mismatch");
  }
  if (mu == 0.0 && !(spectrum.eigenvalue(p - 1) > 0.0)) {
    throw InputError("relative_perturbation_norm: mu = 0 needs a positive spectrum");
  }
  if (mu < 0.0) throw InputError("relative_perturbation_norm: mu must be >= 0");

  Vector whiten(p);
  for (int j = 0; j < p; ++j) whiten[j] = 1.0 / std::sqrt(spectrum.eigenvalue(j) + mu);

  Matrix w = empirical_cov.entries();
  for (int j = 0; j < p; ++j) w(j, j) -= spectrum.eigenvalue(j);
  w = whiten.asDiagonal() * w * whiten.asDiagonal();

  const EigenDecomposition eig = sym_eigendecompose(SymMatrix(std::move(w)));
  return std::max(std::abs(eig.eigenvalues[0]), std::abs(eig.eigenvalues[eig.count() - 1]));
}

/// Eigenvalue bias ratios: lhat_j/l_j on the head (j <= j*) and the upward
/// bias lhat_j * n / tr_{>n}(Sigma) on the tail (j* < j <= n).
inline RegimeDiagnostics eigen_bias_report(const CovarianceSpectrum& spectrum,
                                           const EigenDecomposition& empirical, int n, int j_star) {
  if (j_star < 0) throw InputError("eigen_bias_report: j_star must be >= 0");
  if (j_star >= n) throw PreconditionError("eigen_bias_report: sandwich ratios need j_star < n");
  if (empirical.count() < n) {
    throw InputError("eigen_bias_report: decomposition carries fewer than n eigenvalues");
  }
  if (n > spectrum.dim()) throw InputError("eigen_bias_report: n exceeds the ambient dimension");

  RegimeDiagnostics diag;
  diag.j_star = j_star;
  for (int j = 0; j < j_star; ++j) {
    diag.head_eigen_ratios.push_back(empirical.eigenvalues[j] / spectrum.eigenvalue(j));
  }
  const double tail = tail_trace(spectrum, n, 1);
  if (!(tail > 0.0)) {
    throw InputError("eigen_bias_report: tr_{>n}(Sigma) must be positive for tail ratios");
  }
  for (int j = j_star; j < n; ++j) {
    diag.tail_eigen_ratios.push_back(empirical.eigenvalues[j] * static_cast<double>(n) / tail);
  }
  return diag;
}

/// Classical-regime risk bound with constants set to 1:
/// l_{d+1} ||f||^2 + sigma^2 d / n.
inline double classical_bound(const CovarianceSpectrum& spectrum, double f_norm_sq, double sigma,
                              int n, int d) {
  if (d < 0 || d >= spectrum.dim()) throw InputError("classical_bound: need 0 <= d < p");
  if (n < 1) throw InputError("classical_bound: n must be >= 1");
  return spectrum.eigenvalue(d) * f_norm_sq +
         sigma * sigma * static_cast<double>(d) / static_cast<double>(n);
}

/// The d = n analytic cap on the cross term: n tr_{>j*}(Sigma^2) / tr_{>j*}(Sigma).
inline double dn_trace_cap(const CovarianceSpectrum& spectrum, int n, int j_star) {
  if (j_star < 0 || j_star > spectrum.dim()) throw InputError("dn_trace_cap: j_star out of range");
  const double tail1 = tail_trace(spectrum, j_star, 1);
  if (!(tail1 > 0.0)) throw InputError("dn_trace_cap: tr_{>j*}(Sigma) must be positive");
  return static_cast<double>(n) * tail_trace(spectrum, j_star, 2) / tail1;
}

/// High-dimensional-regime risk bound with constants set to 1:
///   (tr_{>j*}(Sigma)/n) ||f||^2 + t^2 sigma^2 j*/n + (sigma^2/tr_{>j*}(Sigma)) * cross_term.
/// `cross_term` is sum_{j=j*+1}^d tr(Phat_j Sigma_{>j*}) from
/// cross_projected_trace, or the d = n analytic cap from dn_trace_cap.
inline double highdim_bound(const CovarianceSpectrum& spectrum, double f_norm_sq, double sigma,
                            int n, std::optional<int> j_star, double t, double cross_term) {
  if (!j_star.has_value()) {
    throw PreconditionError(
        "highdim_bound: no effective-rank crossing (j* absent); use classical_bound instead");
  }
  if (*j_star < 0 || *j_star > spectrum.dim()) throw InputError("highdim_bound: j_star out of range");
  if (n < 1) throw InputError("highdim_bound: n must be >= 1");
  if (cross_term < 0.0) throw InputError("highdim_bound: cross term must be >= 0");
  const double tail = tail_trace(spectrum, *j_star, 1);
  if (!(tail > 0.0)) throw InputError("highdim_bound: tr_{>j*}(Sigma) must be positive");
  const double dn = static_cast<double>(n);
  return tail / dn * f_norm_sq + t * t * sigma * sigma * static_cast<double>(*j_star) / dn +
         sigma * sigma * cross_term / tail;
}

/// sum_{j=j*+1}^d tr(Phat_j Sigma_{>j*}) = sum_j sum_{k>j*} l_k <uhat_j, u_k>^2.
inline double cross_projected_trace(const EigenDecomposition& empirical,
                                    const CovarianceSpectrum& spectrum, int j_star, int d) {
  const int p = spectrum.dim();
  if (j_star < 0 || !(j_star < d)) {
    throw InputError("cross_projected_trace: need 0 <= j* < d");
  }
  if (d > empirical.vector_count()) {
    throw RankDeficiencyError("cross_projected_trace: decomposition carries fewer than d vectors",
                              d);
  }
  if (empirical.eigenvectors.rows() != p) {
    throw InputError("cross_projected_trace: dimension mismatch");
  }
  CompensatedSum acc;
  for (int j = j_star; j < d; ++j) {
    for (int k = p - 1; k >= j_star; --k) {
      const double c = empirical.eigenvectors(k, j);
      acc.add(spectrum.eigenvalue(k) * c * c);
    }
  }
  return acc.value();
}

/// Diagnostic evaluation of the excess-risk perturbation bound at (d, mu, t):
///   value = (t^2/n) sum_{j<=r} l_j tr_{>r}(Sigma) / (l_j - l_{d+1}),
/// with r the largest index such that l_r > mu. Also evaluates the bound's
/// admissibility condition against c1 * n.
struct ExcessRiskBoundDiag {
  double value = 0.0;
  double condition_lhs = 0.0;
  bool condition_holds = true;
  int r = 0;
};

inline ExcessRiskBoundDiag excess_risk_bound_diag(const CovarianceSpectrum& spectrum, int n, int d,
                                                  double mu, double t, double c1) {
  const int p = spectrum.dim();
  if (d < 1 || d >= p) throw InputError("excess_risk_bound_diag: need 1 <= d < p");
  if (n < 1) throw InputError("excess_risk_bound_diag: n must be >= 1");
  if (!(t >= 1.0)) throw InputError("excess_risk_bound_diag: t must be >= 1");
  if (!(c1 > 0.0)) throw InputError("excess_risk_bound_diag: c1 must be > 0");
  const double lambda_next = spectrum.eigenvalue(d);
  if (!(mu >= lambda_next)) {
    // With mu below l_{d+1}, l_j - l_{d+1} can vanish inside the sum; the
    // admissibility condition fails before any division is attempted.
    throw PreconditionError("excess_risk_bound_diag: requires mu >= l_{d+1}");
  }

  ExcessRiskBoundDiag diag;
  int r = 0;
  while (r < p && spectrum.eigenvalue(r) > mu) ++r;
  diag.r = r;
  if (r == 0) return diag;  // empty sum: bound 0, condition vacuous

  const double lambda_r = spectrum.eigenvalue(r - 1);
  CompensatedSum head, tail;
  for (int j = 0; j < r; ++j) {
    head.add(spectrum.eigenvalue(j) / (spectrum.eigenvalue(j) - lambda_next));
  }
  for (int k = d; k < p; ++k) {
    tail.add(spectrum.eigenvalue(k) / (lambda_r - spectrum.eigenvalue(k)));
  }
  diag.condition_lhs =
      lambda_r / (lambda_r - lambda_next) * std::max(head.value(), tail.value());
  diag.condition_holds = diag.condition_lhs <= c1 * static_cast<double>(n);

  const double tail_r = tail_trace(spectrum, r, 1);
  CompensatedSum sum;
  for (int j = 0; j < r; ++j) {
    sum.add(spectrum.eigenvalue(j) * tail_r / (spectrum.eigenvalue(j) - lambda_next));
  }
  diag.value = t * t / static_cast<double>(n) * sum.value();
  return diag;
}

enum class ConcentrationMode { square, linear };

/// Weighted concentration statistic sum_j a_j (n^{-1} sum_i X_ij)^power over
/// centered samples (columns are coordinates, rows are observations).
inline double weighted_concentration_stat(const Vector& weights, const Matrix& samples,
                                          ConcentrationMode mode) {
  if (weights.size() != samples.cols()) {
    throw InputError("weighted_concentration_stat: one weight per column required");
  }
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (!(weights[j] >= 0.0)) {
      throw InputError("weighted_concentration_stat: weights must be nonnegative");
    }
  }
  if (samples.rows() < 1) throw InputError("weighted_concentration_stat: empty sample");

  const double n = static_cast<double>(samples.rows());
  CompensatedSum acc;
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    CompensatedSum col;
    for (Eigen::Index i = 0; i < samples.rows(); ++i) col.add(samples(i, j));
    const double mean = col.value() / n;
    acc.add(weights[j] * (mode == ConcentrationMode::square ? mean * mean : mean));
  }
  return acc.value();
}

/// Projection-theorem split of the oracle prediction error:
///   ||fhat - f||_{L2}^2 = ||fhat - P_{<=d} f||_{L2}^2 + ||P_{>d} f||_{L2}^2.
struct OracleRiskSplit {
  double cross_fit_err = 0.0;
  double tail_bias = 0.0;
};

inline OracleRiskSplit oracle_risk_identity(const RegressionInstance& instance, int d,
                                            const Matrix* basis = nullptr) {
  const Estimate estimate = oracle_fit(instance, d, basis);
  const int p = instance.p();

  Vector f_head;
  if (basis == nullptr) {
    f_head = Vector::Zero(p);
    f_head.head(d) = instance.f_true.head(d);
  } else {
    const auto head = basis->leftCols(d);
    f_head = head * (head.transpose() * instance.f_true);
  }

  OracleRiskSplit split;
  split.cross_fit_err = l2_norm_sq(estimate.coefficients - f_head, instance.spectrum, basis);

  if (basis == nullptr) {
    CompensatedSum acc;
    for (int k = p - 1; k >= d; --k) {
      acc.add(instance.spectrum.eigenvalue(k) * instance.f_true[k] * instance.f_true[k]);
    }
    split.tail_bias = acc.value();
  } else {
    split.tail_bias = l2_norm_sq(instance.f_true - f_head, instance.spectrum, basis);
  }
  return split;
}

}  // namespace pcrlab
