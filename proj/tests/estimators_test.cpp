#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "pcrlab/estimators.hpp"
#include "pcrlab/model.hpp"
#include "pcrlab/risk.hpp"

using namespace pcrlab;

namespace {

RegressionInstance small_instance(int n, int p, double sigma, std::uint64_t seed,
                                  double spike = 8.0) {
  const auto spectrum = CovarianceSpectrum::spiked({spike}, 1.0, p);
  return make_instance(spectrum, CoefficientLaw::gaussian, n,
                       Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p))), sigma, seed);
}

}  // namespace

namespace {

RegressionInstance axis_sample_instance(double response) {
  Matrix design = Matrix::Zero(1, 3);
  design(0, 0) = 1.0;
  return RegressionInstance{design,
                            Vector::Constant(1, response),
                            Vector::Zero(3),
                            0.0,
                            Vector::Zero(1),
                            CovarianceSpectrum::explicit_list({1.0, 1.0, 1.0}),
                            0};
}

}  // namespace

TEST_CASE("pcr on a single axis-aligned sample solves 1-d least squares") {
  // X = e_1, Y = 2: the fit is 2 e_1.
  const RegressionInstance instance = axis_sample_instance(2.0);
  const Estimate fit = pcr_fit(instance, 1);
  REQUIRE(fit.coefficients[0] == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(std::abs(fit.coefficients[1]) < 1e-14);
  REQUIRE(std::abs(fit.coefficients[2]) < 1e-14);
  REQUIRE(fit.family == EstimatorFamily::pcr);
  REQUIRE(fit.d == 1);
  REQUIRE(fit.spectrum_used != nullptr);
}

TEST_CASE("noiseless responses in the fitted span are interpolated") {
  auto instance = small_instance(20, 10, 0.0, 31);
  const auto svd = std::make_shared<SamplingSvd>(sampling_svd(instance.design));
  const int d = 3;
  // Signal living in the span of the top-d empirical eigenvectors.
  Vector f = svd->right_frame.leftCols(d) * Vector::LinSpaced(d, 1.0, 2.0);
  instance.f_true = f;
  instance.noise = Vector::Zero(20);
  instance.responses = instance.design * f + instance.noise;

  const Estimate fit = pcr_fit(instance, d, svd);
  REQUIRE((fit.coefficients - f).cwiseAbs().maxCoeff() < 1e-10);
  const Vector residual = instance.design * fit.coefficients - instance.responses;
  REQUIRE(residual.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pcr reproduces the projected signal on noiseless data") {
  auto instance = small_instance(24, 12, 0.0, 77);
  const auto svd = std::make_shared<SamplingSvd>(sampling_svd(instance.design));
  for (int d : {1, 4, 9}) {
    const Estimate fit = pcr_fit(instance, d, svd);
    const auto head = svd->right_frame.leftCols(d);
    const Vector projected = head * (head.transpose() * instance.f_true);
    REQUIRE((fit.coefficients - projected).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("pcr rank handling") {
  // Two live directions, two dead ones: level 3 must name the failing index.
  const auto spectrum = CovarianceSpectrum::explicit_list({1.0, 0.5, 0.0, 0.0});
  const auto instance =
      make_instance(spectrum, CoefficientLaw::gaussian, 10, Vector::Zero(4), 1.0, 13);
  REQUIRE_NOTHROW(pcr_fit(instance, 2));
  try {
    pcr_fit(instance, 3);
    FAIL("expected a rank-deficiency error");
  } catch (const RankDeficiencyError& e) {
    REQUIRE(e.index() == 3);
  }

  const Estimate zero = pcr_fit(instance, 0);
  REQUIRE(zero.coefficients.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_THROWS_AS(pcr_fit(instance, 5), InputError);
}

TEST_CASE("oracle fit matches brute-force normal equations at d = p") {
  const auto spectrum = CovarianceSpectrum::polynomial(2.0, 6);
  const auto instance = make_instance(spectrum, CoefficientLaw::gaussian, 40,
                                      Vector::LinSpaced(6, 1.0, -1.0), 0.5, 5);
  const Estimate fit = oracle_fit(instance, 6);
  const Matrix& x = instance.design;
  const Vector brute = (x.transpose() * x).inverse() * (x.transpose() * instance.responses);
  REQUIRE((fit.coefficients - brute).cwiseAbs().maxCoeff() <
          1e-8 * std::max(1.0, brute.cwiseAbs().maxCoeff()));
}

TEST_CASE("oracle fit recovers realizable noiseless signals") {
  const auto spectrum = CovarianceSpectrum::polynomial(2.0, 8);
  Vector f = Vector::Zero(8);
  f.head(3) << 2.0, -1.0, 0.5;
  const auto instance = make_instance(spectrum, CoefficientLaw::gaussian, 20, f, 0.0, 6);
  const Estimate fit = oracle_fit(instance, 3);
  REQUIRE((fit.coefficients - f).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("oracle fit at d = 1 is the univariate regression slope") {
  const auto instance = small_instance(30, 5, 0.4, 8);
  const Estimate fit = oracle_fit(instance, 1);
  const double slope = instance.responses.dot(instance.design.col(0)) /
                       instance.design.col(0).squaredNorm();
  REQUIRE(fit.coefficients[0] == Catch::Approx(slope).margin(1e-12));
  REQUIRE(fit.coefficients.tail(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("oracle fit rejects rank-deficient projected designs") {
  const auto spectrum = CovarianceSpectrum::polynomial(2.0, 6);
  const auto instance =
      make_instance(spectrum, CoefficientLaw::gaussian, 3, Vector::Zero(6), 1.0, 9);
  REQUIRE_THROWS_AS(oracle_fit(instance, 5), RankDeficiencyError);  // d > n
}

TEST_CASE("min-norm fit on one axis-aligned sample") {
  const RegressionInstance instance = axis_sample_instance(3.0);
  const Estimate fit = min_norm_fit(instance);
  REQUIRE(fit.coefficients[0] == Catch::Approx(3.0).margin(1e-12));
  REQUIRE(fit.coefficients.tail(2).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(fit.d == 1);
  REQUIRE(fit.family == EstimatorFamily::min_norm);
}

TEST_CASE("min-norm coincides with pcr at d = n on overparametrized designs") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto instance = small_instance(16, 64, 1.0, seed);
    const Estimate mn = min_norm_fit(instance);
    const Estimate pcr = pcr_fit(instance, instance.n());
    REQUIRE((mn.coefficients - pcr.coefficients).norm() <=
            1e-8 * std::max(1.0, mn.coefficients.norm()));
    const Vector residual = instance.design * mn.coefficients - instance.responses;
    REQUIRE(residual.cwiseAbs().maxCoeff() <=
            1e-8 * (1.0 + instance.responses.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("min-norm interpolant has minimal norm in the row span") {
  const auto instance = small_instance(10, 40, 0.8, 12);
  const Estimate fit = min_norm_fit(instance);
  const SamplingSvd svd = sampling_svd(instance.design);
  rng::Stream stream(rng::derive_key(55, {1}));
  for (int trial = 0; trial < 3; ++trial) {
    Vector v(instance.p());
    for (int j = 0; j < instance.p(); ++j) v[j] = stream.next_gaussian();
    // Remove the row-span component; what is left is orthogonal to the fit.
    Vector v_perp = v - svd.right_frame * (svd.right_frame.transpose() * v);
    REQUIRE(v_perp.norm() > 1e-8);
    REQUIRE((fit.coefficients + v_perp).norm() > fit.coefficients.norm());
  }
}

TEST_CASE("min-norm fit rejects singular Gram matrices") {
  // n > p: the Gram matrix cannot be invertible.
  const auto instance = small_instance(12, 4, 1.0, 3);
  REQUIRE_THROWS_AS(min_norm_fit(instance), RankDeficiencyError);
}

TEST_CASE("joint sign flips of the svd gauge leave estimates unchanged") {
  const auto instance = small_instance(14, 30, 0.6, 40);
  auto svd = std::make_shared<SamplingSvd>(sampling_svd(instance.design));
  const Estimate base = pcr_fit(instance, 5, svd);

  auto flipped = std::make_shared<SamplingSvd>(*svd);
  flipped->left_frame.col(2) = -flipped->left_frame.col(2);
  flipped->right_frame.col(2) = -flipped->right_frame.col(2);
  const Estimate again = pcr_fit(instance, 5, flipped);
  REQUIRE((base.coefficients - again.coefficients).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("risk reports are invariant under the empirical sign gauge") {
  const auto instance = small_instance(14, 30, 0.6, 41);
  EigenDecomposition es = empirical_spectrum(instance.design);
  const RiskReport base = conditional_risk(instance, es, 4);
  es.eigenvectors.col(1) = -es.eigenvectors.col(1);
  const RiskReport flipped = conditional_risk(instance, es, 4);
  REQUIRE(base.bias_sq == Catch::Approx(flipped.bias_sq).margin(1e-15));
  REQUIRE(base.variance == Catch::Approx(flipped.variance).margin(1e-15));
}
