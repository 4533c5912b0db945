#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "pcrlab/errors.hpp"
#include "pcrlab/model.hpp"
#include "pcrlab/spectral.hpp"

namespace pcrlab {

enum class EstimatorFamily { pcr, oracle, min_norm };

inline const char* to_string(EstimatorFamily family) {
  switch (family) {
    case EstimatorFamily::pcr: return "pcr";
    case EstimatorFamily::oracle: return "oracle";
    case EstimatorFamily::min_norm: return "min_norm";
  }
  return "?";
}

/// A fitted coefficient vector in ambient coordinates, tagged with the
/// estimator family, the truncation level used (min_norm records d = n) and,
/// when one was formed, the design decomposition it came from.
struct Estimate {
  Vector coefficients;
  EstimatorFamily family = EstimatorFamily::pcr;
  int d = 0;
  std::shared_ptr<const SamplingSvd> spectrum_used;
};

namespace detail {

inline void check_pcr_level(const SamplingSvd& svd, int d) {
  const int m = static_cast<int>(svd.singular_values.size());
  if (d < 0 || d > m) {
    throw InputError("pcr_fit: d must be in [0, min(n, p)]");
  }
  if (d == 0) return;
  const double lambda_1 = svd.covariance_eigenvalue(0);
  const double tau = rank_tolerance(lambda_1);
  const double lambda_d = svd.covariance_eigenvalue(d - 1);
  if (!(lambda_d > tau) || d > svd.rank()) {
    throw RankDeficiencyError(
        "pcr_fit: empirical eigenvalue " + std::to_string(d) +
            " is at or below the rank tolerance (lambda_hat = " + std::to_string(lambda_d) + ")",
        d);
  }
}

}  // namespace detail

/// Principal component regression at truncation level d:
///   f_hat = n^{-1/2} sum_{j<=d} l_j^{-1/2} <Y, v_j> u_j,
/// the least-squares fit of the responses on the span of the top-d empirical
/// eigenvectors. d = 0 returns the zero estimate (sweep base point).
inline Estimate pcr_fit(const RegressionInstance& instance, int d,
                        std::shared_ptr<const SamplingSvd> svd) {
  if (svd == nullptr) throw InputError("pcr_fit: missing decomposition");
  detail::check_pcr_level(*svd, d);

  Vector coeffs = Vector::Zero(instance.p());
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(instance.n()));
  for (int j = 0; j < d; ++j) {
    const double score = svd->left_frame.col(j).dot(instance.responses);
    coeffs += (inv_sqrt_n * score / svd->singular_values[j]) * svd->right_frame.col(j);
  }
  return Estimate{std::move(coeffs), EstimatorFamily::pcr, d, std::move(svd)};
}

inline Estimate pcr_fit(const RegressionInstance& instance, int d) {
  return pcr_fit(instance, d, std::make_shared<SamplingSvd>(sampling_svd(instance.design)));
}

/// Oracle counterpart: least squares of the responses on the projected
/// covariates P_{<=d} x_i, expressed in ambient coordinates. The population
/// basis defaults to the standard basis; pass `basis` (orthonormal columns)
/// to override. Solves the d x d normal equations with an LDLT factorization
/// and a relative pivot guard.
inline Estimate oracle_fit(const RegressionInstance& instance, int d, const Matrix* basis = nullptr) {
  const int p = instance.p();
  const int n = instance.n();
  if (d < 0 || d > p) throw InputError("oracle_fit: d must be in [0, p]");
  if (basis != nullptr && (basis->rows() != p || basis->cols() < d)) {
    throw InputError("oracle_fit: basis must be p x (>= d)");
  }
  if (d == 0) {
    return Estimate{Vector::Zero(p), EstimatorFamily::oracle, 0, nullptr};
  }

  // Projected covariates in the population coordinates.
  Matrix z = basis != nullptr ? Matrix(instance.design * basis->leftCols(d))
                              : Matrix(instance.design.leftCols(d));

  Matrix normal = z.transpose() * z;
  Eigen::LDLT<Matrix> ldlt(normal);
  const Vector diag = ldlt.vectorD();
  const double pivot_max = diag.cwiseAbs().maxCoeff();
  const double guard = tol::kRankFactor * pivot_max;
  for (int j = 0; j < d; ++j) {
    if (!(diag[j] > guard)) {
      throw RankDeficiencyError(
          "oracle_fit: projected design is rank deficient at pivot " + std::to_string(j + 1) +
              " (need rank " + std::to_string(d) + ", n = " + std::to_string(n) + ")",
          j + 1);
    }
  }
  Vector beta = ldlt.solve(z.transpose() * instance.responses);

  Vector coeffs;
  if (basis != nullptr) {
    coeffs = basis->leftCols(d) * beta;
  } else {
    coeffs = Vector::Zero(p);
    coeffs.head(d) = beta;
  }
  return Estimate{std::move(coeffs), EstimatorFamily::oracle, d, nullptr};
}

/// Minimum-norm interpolator X^T (X X^T)^{-1} Y, computed through the Gram
/// eigendecomposition with the shared rank tolerance. Coincides with PCR at
/// d = n whenever the smallest Gram eigenvalue clears the tolerance.
inline Estimate min_norm_fit(const RegressionInstance& instance) {
  const int n = instance.n();
  auto svd = std::make_shared<SamplingSvd>(detail::sampling_svd_gram(instance.design));

  const int m = static_cast<int>(svd->singular_values.size());
  const double tau = rank_tolerance(m > 0 ? svd->covariance_eigenvalue(0) : 0.0);
  if (svd->rank() < n || m < n || !(svd->covariance_eigenvalue(n - 1) > tau)) {
    throw RankDeficiencyError(
        "min_norm_fit: Gram matrix is singular at the rank tolerance (needs lambda_hat_n > 0)", n);
  }

  // Invert the Gram matrix in the n-dimensional sample space, then pull the
  // interpolant back through the design: X^T (X X^T)^{-1} Y = X^T K^{-1} Y / n.
  const Vector scores = svd->left_frame.transpose() * instance.responses;
  const Vector weighted =
      scores.cwiseQuotient(svd->singular_values.head(n).array().square().matrix());
  const Vector dual = svd->left_frame * weighted;
  Vector coeffs = instance.design.transpose() * dual / static_cast<double>(n);
  return Estimate{std::move(coeffs), EstimatorFamily::min_norm, n, std::move(svd)};
}

}  // namespace pcrlab
