#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "pcrlab/errors.hpp"

namespace pcrlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace tol {
inline constexpr double kOrthonormality = 1e-10;   // ||U^T U - I||_max
inline constexpr double kReconstruction = 1e-9;    // ||A - U diag(l) U^T||_max / max(1, l1)
inline constexpr double kDualRelative = 1e-9;      // covariance vs Gram route eigenvalue gap
inline constexpr double kRankFactor = 1e-10;       // rank tolerance = factor * largest eigenvalue
inline constexpr double kProjector = 1e-8;         // ||P^2 - P||_max for projector inputs
}  // namespace tol

/// Rank tolerance below which eigenvalues are treated as zero for vector
/// recovery and (pseudo-)inversion.
inline double rank_tolerance(double lambda_max) { return tol::kRankFactor * lambda_max; }

/// Dense symmetric matrix. Symmetry is enforced on construction by averaging
/// mirrored entries, so entries(i,j) == entries(j,i) exactly afterwards.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
      throw InputError("SymMatrix: need a nonempty square matrix");
    }
    if (!entries_.allFinite()) {
      throw InputError("SymMatrix: entries must be finite");
    }
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < entries_.cols(); ++j) {
        const double v = 0.5 * (entries_(i, j) + entries_(j, i));
        entries_(i, j) = v;
        entries_(j, i) = v;
      }
    }
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double trace() const { return entries_.trace(); }

 private:
  Matrix entries_;
};

/// Eigenpairs sorted by nonincreasing eigenvalue. The Gram route recovers
/// eigenvectors only for eigenvalues above the rank tolerance, so the vector
/// count may be smaller than the eigenvalue count; asking for a missing vector
/// is a rank-deficiency error.
struct EigenDecomposition {
  Vector eigenvalues;   // length m, nonincreasing
  Matrix eigenvectors;  // dim x r with r <= m, orthonormal columns

  int count() const { return static_cast<int>(eigenvalues.size()); }
  int vector_count() const { return static_cast<int>(eigenvectors.cols()); }

  double eigenvalue(int j) const {
    if (j < 0 || j >= count()) throw InputError("EigenDecomposition: eigenvalue index out of range");
    return eigenvalues[j];
  }

  Vector eigenvector(int j) const {
    if (j < 0 || j >= count()) throw InputError("EigenDecomposition: eigenvector index out of range");
    if (j >= vector_count()) {
      throw RankDeficiencyError(
          "EigenDecomposition: eigenvector " + std::to_string(j + 1) +
              " not recovered (eigenvalue at or below rank tolerance)",
          j + 1);
    }
    return eigenvectors.col(j);
  }
};

/// Top-k eigenpairs of a symmetric matrix (k = dim when absent). Deterministic
/// for fixed input.
inline EigenDecomposition sym_eigendecompose(const SymMatrix& a,
                                             std::optional<int> k = std::nullopt) {
  const int dim = a.dim();
  const int want = k.value_or(dim);
  if (want < 1 || want > dim) throw InputError("sym_eigendecompose: k must be in [1, dim]");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.entries());
  if (solver.info() != Eigen::Success) {
    const double residual = a.entries().norm();
    throw ConvergenceError("sym_eigendecompose: eigensolver did not converge", residual);
  }

  // Eigen returns ascending order; flip to nonincreasing.
  EigenDecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse().head(want);
  out.eigenvectors = solver.eigenvectors().rowwise().reverse().leftCols(want);
  return out;
}

/// Empirical covariance of a design with rows as samples: (1/n) sum_i x_i x_i^T.
inline SymMatrix empirical_covariance(const Matrix& design) {
  if (design.rows() == 0 || design.cols() == 0) {
    throw InputError("empirical_covariance: empty design");
  }
  if (!design.allFinite()) throw InputError("empirical_covariance: design must be finite");
  const double n = static_cast<double>(design.rows());
  Matrix cov = (design.transpose() * design) / n;
  return SymMatrix(std::move(cov));
}

/// Normalized Gram matrix (1/n) (<x_i, x_j>)_{ij}; n x n, positive semidefinite.
inline SymMatrix gram_matrix(const Matrix& design) {
  if (design.rows() == 0 || design.cols() == 0) {
    throw InputError("gram_matrix: empty design");
  }
  if (!design.allFinite()) throw InputError("gram_matrix: design must be finite");
  const double n = static_cast<double>(design.rows());
  Matrix gram = (design * design.transpose()) / n;
  return SymMatrix(std::move(gram));
}

/// Spectrum of the empirical covariance computed through the Gram matrix: the
/// positive eigenvalues of (1/n) X X^T coincide with the top min(n,p)
/// eigenvalues of (1/n) X^T X, and right vectors are recovered as
/// u_j = (n l_j)^{-1/2} X^T v_j for eigenvalues above the rank tolerance.
inline EigenDecomposition spectrum_via_gram(const Matrix& design) {
  const auto n = design.rows();
  const auto p = design.cols();
  const int m = static_cast<int>(std::min(n, p));

  EigenDecomposition gram = sym_eigendecompose(gram_matrix(design));

  EigenDecomposition out;
  out.eigenvalues = gram.eigenvalues.head(m);

  const double tau = rank_tolerance(out.eigenvalues.size() > 0 ? out.eigenvalues[0] : 0.0);
  int r = 0;
  while (r < m && out.eigenvalues[r] > tau) ++r;

  out.eigenvectors.resize(p, r);
  const double dn = static_cast<double>(n);
  for (int j = 0; j < r; ++j) {
    out.eigenvectors.col(j) =
        design.transpose() * gram.eigenvectors.col(j) / std::sqrt(dn * out.eigenvalues[j]);
  }
  return out;
}

/// SVD of the scaled design n^{-1/2} X = sum_j sqrt(l_j) v_j u_j^T.
/// singular_values has min(n,p) entries; the frames hold the pairs whose
/// eigenvalue clears the rank tolerance.
struct SamplingSvd {
  Vector singular_values;  // sqrt of covariance eigenvalues, nonincreasing
  Matrix left_frame;       // n x r, orthonormal
  Matrix right_frame;      // p x r, orthonormal

  int rank() const { return static_cast<int>(right_frame.cols()); }

  double covariance_eigenvalue(int j) const {
    if (j < 0 || j >= singular_values.size()) {
      throw InputError("SamplingSvd: index out of range");
    }
    return singular_values[j] * singular_values[j];
  }

  EigenDecomposition covariance_spectrum() const {
    EigenDecomposition out;
    out.eigenvalues = singular_values.array().square();
    out.eigenvectors = right_frame;
    return out;
  }
};

namespace detail {

// Direct route: decompose the p x p covariance, then v_j = (n l_j)^{-1/2} X u_j.
inline SamplingSvd sampling_svd_direct(const Matrix& design) {
  const auto n = design.rows();
  const auto p = design.cols();
  const int m = static_cast<int>(std::min(n, p));

  EigenDecomposition cov = sym_eigendecompose(empirical_covariance(design));

  SamplingSvd out;
  Vector evals = cov.eigenvalues.head(m);
  // Clamp the tiny negative roundoff that a PSD matrix can produce.
  out.singular_values = evals.cwiseMax(0.0).cwiseSqrt();

  const double tau = rank_tolerance(evals.size() > 0 ? evals[0] : 0.0);
  int r = 0;
  while (r < m && evals[r] > tau) ++r;

  out.right_frame = cov.eigenvectors.leftCols(r);
  out.left_frame.resize(n, r);
  const double dn = static_cast<double>(n);
  for (int j = 0; j < r; ++j) {
    out.left_frame.col(j) = design * out.right_frame.col(j) / std::sqrt(dn * evals[j]);
  }
  return out;
}

// Gram route: decompose the n x n Gram matrix, then u_j = (n l_j)^{-1/2} X^T v_j.
inline SamplingSvd sampling_svd_gram(const Matrix& design) {
  const auto n = design.rows();
  const auto p = design.cols();
  const int m = static_cast<int>(std::min(n, p));

  EigenDecomposition gram = sym_eigendecompose(gram_matrix(design));

  SamplingSvd out;
  Vector evals = gram.eigenvalues.head(m);
  out.singular_values = evals.cwiseMax(0.0).cwiseSqrt();

  const double tau = rank_tolerance(evals.size() > 0 ? evals[0] : 0.0);
  int r = 0;
  while (r < m && evals[r] > tau) ++r;

  out.left_frame = gram.eigenvectors.leftCols(r);
  out.right_frame.resize(p, r);
  const double dn = static_cast<double>(n);
  for (int j = 0; j < r; ++j) {
    out.right_frame.col(j) =
        design.transpose() * out.left_frame.col(j) / std::sqrt(dn * evals[j]);
  }
  return out;
}

}  // namespace detail

/// Route rule: the Gram eigenproblem costs O(n^2 p + n^3) against O(p^3) for
/// the direct decomposition, so it wins when p > 2n. Both routes stay
/// available for cross-checks.
inline bool use_gram_route(Eigen::Index n, Eigen::Index p) { return p > 2 * n; }

inline SamplingSvd sampling_svd(const Matrix& design) {
  if (design.rows() == 0 || design.cols() == 0) throw InputError("sampling_svd: empty design");
  if (!design.allFinite()) throw InputError("sampling_svd: design must be finite");
  return use_gram_route(design.rows(), design.cols()) ? detail::sampling_svd_gram(design)
                                                      : detail::sampling_svd_direct(design);
}

/// Spectrum of the empirical covariance with automatic route selection.
/// The direct route returns all p eigenpairs; the Gram route returns the top
/// min(n,p) eigenvalues with vectors above the rank tolerance.
inline EigenDecomposition empirical_spectrum(const Matrix& design) {
  if (design.rows() == 0 || design.cols() == 0) {
    throw InputError("empirical_spectrum: empty design");
  }
  if (use_gram_route(design.rows(), design.cols())) return spectrum_via_gram(design);
  return sym_eigendecompose(empirical_covariance(design));
}

}  // namespace pcrlab
