#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pcrlab/model.hpp"
#include "pcrlab/rng.hpp"
#include "pcrlab/spectral.hpp"
#include "pcrlab/spectrum.hpp"

using namespace pcrlab;

namespace {

Matrix random_symmetric(int dim, std::uint64_t seed) {
  rng::Stream stream(rng::derive_key(seed, {0xABCD}));
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = stream.next_gaussian();
  }
  return 0.5 * (g + g.transpose());
}

Matrix random_design(int n, int p, std::uint64_t seed) {
  rng::Stream stream(rng::derive_key(seed, {0xD351}));
  Matrix x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = stream.next_gaussian();
  }
  return x;
}

// Compare eigenpairs at projector level: A u = lambda u.
void check_eigenpair(const Matrix& a, const Vector& u, double lambda, double tolerance) {
  REQUIRE((a * u - lambda * u).cwiseAbs().maxCoeff() < tolerance);
}

}  // namespace

TEST_CASE("identity matrix has a flat unit spectrum") {
  const auto eig = sym_eigendecompose(SymMatrix(Matrix::Identity(3, 3)));
  REQUIRE(eig.count() == 3);
  for (int j = 0; j < 3; ++j) REQUIRE(eig.eigenvalues[j] == Catch::Approx(1.0).margin(1e-14));
  const Matrix gram = eig.eigenvectors.transpose() * eig.eigenvectors;
  REQUIRE((gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < tol::kOrthonormality);
}

TEST_CASE("diagonal matrices sort eigenvalues and keep axis eigenvectors") {
  Matrix a = Matrix::Zero(3, 3);
  a.diagonal() << 3.0, 1.0, 2.0;
  const auto eig = sym_eigendecompose(SymMatrix(a));
  REQUIRE(eig.eigenvalues[0] == Catch::Approx(3.0).margin(1e-14));
  REQUIRE(eig.eigenvalues[1] == Catch::Approx(2.0).margin(1e-14));
  REQUIRE(eig.eigenvalues[2] == Catch::Approx(1.0).margin(1e-14));
  for (int j = 0; j < 3; ++j) check_eigenpair(a, eig.eigenvector(j), eig.eigenvalues[j], 1e-12);
}

TEST_CASE("2x2 case solved by hand: [[2,1],[1,2]]") {
  // Characteristic polynomial (2 - l)^2 - 1 = 0, so l = 3, 1 with
  // eigenvectors (1,1)/sqrt(2) and (1,-1)/sqrt(2) up to sign.
  Matrix a(2, 2);
  a << 2.0, 1.0, 1.0, 2.0;
  const auto eig = sym_eigendecompose(SymMatrix(a));
  REQUIRE(eig.eigenvalues[0] == Catch::Approx(3.0).margin(1e-14));
  REQUIRE(eig.eigenvalues[1] == Catch::Approx(1.0).margin(1e-14));
  const double s = 1.0 / std::sqrt(2.0);
  Vector expected0(2), expected1(2);
  expected0 << s, s;
  expected1 << s, -s;
  // Projector-level comparison absorbs the sign gauge.
  const Matrix p0 = eig.eigenvector(0) * eig.eigenvector(0).transpose();
  const Matrix p1 = eig.eigenvector(1) * eig.eigenvector(1).transpose();
  REQUIRE((p0 - expected0 * expected0.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE((p1 - expected1 * expected1.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eigendecomposition rejects bad inputs") {
  Matrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, std::nan("");
  REQUIRE_THROWS_AS(SymMatrix(bad), InputError);
  REQUIRE_THROWS_AS(SymMatrix(Matrix::Zero(2, 3)), InputError);
  const SymMatrix ok{Matrix::Identity(2, 2)};
  REQUIRE_THROWS_AS(sym_eigendecompose(ok, 3), InputError);
  REQUIRE_THROWS_AS(sym_eigendecompose(ok, 0), InputError);
  REQUIRE(sym_eigendecompose(ok, 1).count() == 1);
}

TEST_CASE("empirical covariance hand cases") {
  Matrix one_sample = Matrix::Zero(1, 3);
  one_sample(0, 0) = 1.0;
  REQUIRE((empirical_covariance(one_sample).entries() -
           Vector({{1.0, 0.0, 0.0}}).asDiagonal().toDenseMatrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);

  Matrix two_samples = Matrix::Zero(2, 3);
  two_samples(0, 0) = 1.0;
  two_samples(1, 1) = 1.0;
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = 0.5;
  expected(1, 1) = 0.5;
  REQUIRE((empirical_covariance(two_samples).entries() - expected).cwiseAbs().maxCoeff() == 0.0);

  REQUIRE(empirical_covariance(Matrix::Zero(4, 3)).entries().cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_THROWS_AS(empirical_covariance(Matrix(0, 3)), InputError);
}

TEST_CASE("empirical covariance trace identity") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Matrix x = random_design(17, 9, seed);
    const double trace = empirical_covariance(x).trace();
    const double row_norms = x.squaredNorm() / static_cast<double>(x.rows());
    REQUIRE(std::abs(trace - row_norms) <= 1e-12 * std::abs(row_norms));
  }
}

TEST_CASE("gram matrix hand cases") {
  Matrix one_sample = Matrix::Zero(1, 3);
  one_sample(0, 0) = 1.0;
  REQUIRE(gram_matrix(one_sample).entries()(0, 0) == 1.0);

  Matrix two_samples = Matrix::Zero(2, 3);
  two_samples(0, 0) = 1.0;
  two_samples(1, 1) = 1.0;
  REQUIRE((gram_matrix(two_samples).entries() - 0.5 * Matrix::Identity(2, 2))
              .cwiseAbs()
              .maxCoeff() == 0.0);

  // Rows (1,1) and (1,-1): inner products give 2 I / n = I.
  Matrix pm(2, 2);
  pm << 1.0, 1.0, 1.0, -1.0;
  REQUIRE((gram_matrix(pm).entries() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gram route eigenvalues match the direct route") {
  SECTION("orthonormal pair in three dimensions") {
    Matrix x = Matrix::Zero(2, 3);
    x(0, 0) = 1.0;
    x(1, 1) = 1.0;
    const auto dual = spectrum_via_gram(x);
    REQUIRE(dual.count() == 2);
    REQUIRE(dual.eigenvalues[0] == Catch::Approx(0.5).margin(1e-14));
    REQUIRE(dual.eigenvalues[1] == Catch::Approx(0.5).margin(1e-14));
  }

  SECTION("n = 2, p = 200 random design") {
    const Matrix x = random_design(2, 200, 99);
    const auto dual = spectrum_via_gram(x);
    const auto direct = sym_eigendecompose(empirical_covariance(x));
    for (int j = 0; j < dual.count(); ++j) {
      REQUIRE(std::abs(dual.eigenvalues[j] - direct.eigenvalues[j]) <=
              tol::kDualRelative * direct.eigenvalues[0]);
    }
  }

  SECTION("zero design has a zero spectrum and no recoverable vectors") {
    const auto dual = spectrum_via_gram(Matrix::Zero(3, 5));
    REQUIRE(dual.count() == 3);
    REQUIRE(dual.eigenvalues.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(dual.vector_count() == 0);
    REQUIRE_THROWS_AS(dual.eigenvector(0), RankDeficiencyError);
  }
}

TEST_CASE("gram duality over random shapes") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    rng::Stream shape(rng::derive_key(seed, {0x5eed}));
    const int n = 1 + static_cast<int>(shape.next_u64() % 128);
    const int p = 1 + static_cast<int>(shape.next_u64() % 128);
    const Matrix x = random_design(n, p, seed + 1000);
    const auto dual = spectrum_via_gram(x);
    const auto direct = sym_eigendecompose(empirical_covariance(x));
    const double scale = std::max(direct.eigenvalues[0], 1e-300);
    for (int j = 0; j < dual.count(); ++j) {
      REQUIRE(std::abs(dual.eigenvalues[j] - direct.eigenvalues[j]) <= tol::kDualRelative * scale);
    }
    // Recovered right vectors are genuine eigenvectors of the covariance.
    const Matrix cov = empirical_covariance(x).entries();
    for (int j = 0; j < dual.vector_count(); ++j) {
      check_eigenpair(cov, dual.eigenvector(j), dual.eigenvalues[j], 1e-9 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("sampling svd hand case: one scaled basis row") {
  Matrix x = Matrix::Zero(1, 3);
  x(0, 0) = 2.0;
  const auto svd = sampling_svd(x);
  REQUIRE(svd.singular_values.size() == 1);
  REQUIRE(svd.singular_values[0] == Catch::Approx(2.0).margin(1e-14));
  REQUIRE(std::abs(svd.left_frame(0, 0)) == Catch::Approx(1.0).margin(1e-14));
  // Joint sign gauge: v x u^T must reproduce the scaled design exactly.
  const Matrix recon = svd.singular_values[0] * svd.left_frame.col(0) *
                       svd.right_frame.col(0).transpose();
  REQUIRE((recon - x).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("orthogonal rows of equal norm give equal singular values") {
  Matrix x = Matrix::Zero(2, 4);
  x(0, 0) = 3.0;
  x(1, 2) = 3.0;
  const auto svd = sampling_svd(x);
  REQUIRE(svd.singular_values[0] == Catch::Approx(svd.singular_values[1]).margin(1e-12));
}

TEST_CASE("duplicating a row leaves the rank unchanged") {
  // Brute force on a 3 x 3 design whose third row repeats the first.
  Matrix base(2, 3);
  base << 1.0, 2.0, -1.0, 0.5, -1.0, 0.25;
  Matrix dup(3, 3);
  dup.row(0) = base.row(0);
  dup.row(1) = base.row(1);
  dup.row(2) = base.row(0);
  REQUIRE(sampling_svd(base).rank() == 2);
  REQUIRE(sampling_svd(dup).rank() == 2);
}

TEST_CASE("sampling svd reconstructs the scaled design on both routes") {
  for (auto [n, p] : {std::pair{12, 40}, std::pair{40, 12}, std::pair{16, 16}}) {
    const Matrix x = random_design(n, p, static_cast<std::uint64_t>(n * 100 + p));
    const auto svd = sampling_svd(x);
    Matrix recon = Matrix::Zero(n, p);
    for (int j = 0; j < svd.rank(); ++j) {
      recon += svd.singular_values[j] * svd.left_frame.col(j) * svd.right_frame.col(j).transpose();
    }
    const Matrix scaled = x / std::sqrt(static_cast<double>(n));
    REQUIRE((recon - scaled).cwiseAbs().maxCoeff() <=
            tol::kReconstruction * std::max(1.0, svd.singular_values[0]));
    // Both frames orthonormal.
    REQUIRE((svd.left_frame.transpose() * svd.left_frame -
             Matrix::Identity(svd.rank(), svd.rank()))
                .cwiseAbs()
                .maxCoeff() < tol::kOrthonormality);
    REQUIRE((svd.right_frame.transpose() * svd.right_frame -
             Matrix::Identity(svd.rank(), svd.rank()))
                .cwiseAbs()
                .maxCoeff() < tol::kOrthonormality);
  }
}

TEST_CASE("reconstruction and orthonormality invariants across dimensions") {
  for (int dim : {5, 32, 128, 512}) {
    const SymMatrix a{random_symmetric(dim, static_cast<std::uint64_t>(dim))};
    const auto eig = sym_eigendecompose(a);
    const Matrix recon =
        eig.eigenvectors * eig.eigenvalues.asDiagonal() * eig.eigenvectors.transpose();
    const double scale = std::max(1.0, std::abs(eig.eigenvalues[0]));
    REQUIRE((a.entries() - recon).cwiseAbs().maxCoeff() <= tol::kReconstruction * scale);
    REQUIRE((eig.eigenvectors.transpose() * eig.eigenvectors - Matrix::Identity(dim, dim))
                .cwiseAbs()
                .maxCoeff() <= tol::kOrthonormality);
    for (int j = 1; j < dim; ++j) REQUIRE(eig.eigenvalues[j] <= eig.eigenvalues[j - 1]);
  }
}

TEST_CASE("determinism: identical inputs give identical decompositions") {
  const Matrix x = random_design(20, 30, 5);
  const auto a = spectrum_via_gram(x);
  const auto b = spectrum_via_gram(x);
  REQUIRE(a.eigenvalues == b.eigenvalues);
  REQUIRE(a.eigenvectors == b.eigenvectors);
}

TEST_CASE("sign flips of recovered vectors leave projectors unchanged") {
  const Matrix x = random_design(8, 12, 21);
  auto eig = spectrum_via_gram(x);
  const int d = 3;
  const Matrix projector = eig.eigenvectors.leftCols(d) * eig.eigenvectors.leftCols(d).transpose();
  eig.eigenvectors.col(1) = -eig.eigenvectors.col(1);
  const Matrix flipped = eig.eigenvectors.leftCols(d) * eig.eigenvectors.leftCols(d).transpose();
  REQUIRE((projector - flipped).cwiseAbs().maxCoeff() == 0.0);
}
