#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "pcrlab/model.hpp"
#include "pcrlab/numeric.hpp"
#include "pcrlab/spectrum.hpp"

using namespace pcrlab;

TEST_CASE("spectrum closed forms") {
  const auto poly = CovarianceSpectrum::polynomial(2.0, 4);
  REQUIRE(poly.eigenvalue(0) == 1.0);
  REQUIRE(poly.eigenvalue(1) == 0.25);
  REQUIRE(poly.eigenvalue(2) == Catch::Approx(1.0 / 9.0).margin(1e-16));
  REQUIRE(poly.eigenvalue(3) == 0.0625);

  const auto expo = CovarianceSpectrum::exponential(1.0, 3);
  REQUIRE(expo.eigenvalue(0) == Catch::Approx(std::exp(-1.0)).margin(1e-16));
  REQUIRE(expo.eigenvalue(1) == Catch::Approx(std::exp(-2.0)).margin(1e-16));
  REQUIRE(expo.eigenvalue(2) == Catch::Approx(std::exp(-3.0)).margin(1e-16));

  const auto spiked = CovarianceSpectrum::spiked({20.0}, 1.0, 1000);
  REQUIRE(spiked.eigenvalue(0) == 20.0);
  REQUIRE(spiked.eigenvalue(1) == 1.0);
  REQUIRE(spiked.eigenvalue(999) == 1.0);
  REQUIRE(spiked.spike_count() == 1);
}

TEST_CASE("spectrum parameter validation") {
  REQUIRE_THROWS_AS(CovarianceSpectrum::exponential(0.0, 4), InputError);
  REQUIRE_THROWS_AS(CovarianceSpectrum::polynomial(1.0, 4), InputError);
  REQUIRE_THROWS_AS(CovarianceSpectrum::spiked({2.0}, 0.0, 4), InputError);
  REQUIRE_THROWS_AS(CovarianceSpectrum::spiked({2.0, 3.0}, 1.0, 4), InputError);   // unordered
  REQUIRE_THROWS_AS(CovarianceSpectrum::spiked({1.0}, 1.0, 4), InputError);        // not above bulk
  REQUIRE_THROWS_AS(CovarianceSpectrum::explicit_list({1.0, 2.0}), InputError);    // increasing
  REQUIRE_THROWS_AS(CovarianceSpectrum::explicit_list({1.0, -0.5}), InputError);   // negative
  REQUIRE_NOTHROW(CovarianceSpectrum::explicit_list({1.0, 0.5, 0.0, 0.0}));        // zero tail ok
}

TEST_CASE("spectrum monotonicity across kinds and parameters") {
  std::vector<CovarianceSpectrum> spectra;
  for (double alpha : {0.3, 1.0, 2.5}) spectra.push_back(CovarianceSpectrum::exponential(alpha, 40));
  for (double alpha : {1.5, 2.0, 4.0}) spectra.push_back(CovarianceSpectrum::polynomial(alpha, 40));
  spectra.push_back(CovarianceSpectrum::spiked({9.0, 4.0, 2.0}, 0.5, 40));
  spectra.push_back(CovarianceSpectrum::explicit_list({3.0, 3.0, 1.0, 0.25}));
  for (const auto& s : spectra) {
    for (int j = 1; j < s.dim(); ++j) REQUIRE(s.eigenvalue(j) <= s.eigenvalue(j - 1));
  }
}

TEST_CASE("tail traces") {
  const auto spiked = CovarianceSpectrum::spiked({20.0}, 1.0, 1000);
  REQUIRE(tail_trace(spiked, 1, 1) == 999.0);

  const auto poly = CovarianceSpectrum::polynomial(2.0, 4);
  REQUIRE(tail_trace(poly, 2, 1) == Catch::Approx(25.0 / 144.0).margin(1e-16));
  REQUIRE(tail_trace(poly, 4, 1) == 0.0);
  REQUIRE(tail_trace(poly, 4, 2) == 0.0);
  REQUIRE(tail_trace(poly, 0, 2) ==
          Catch::Approx(1.0 + 1.0 / 16 + 1.0 / 81 + 1.0 / 256).margin(1e-15));
  REQUIRE_THROWS_AS(tail_trace(poly, 5, 1), InputError);
  REQUIRE_THROWS_AS(tail_trace(poly, -1, 1), InputError);
  REQUIRE_THROWS_AS(tail_trace(poly, 0, 3), InputError);
}

TEST_CASE("truncation tail bounds") {
  const auto expo = CovarianceSpectrum::exponential(1.0, 10);
  const double geometric = std::exp(-11.0) / (1.0 - std::exp(-1.0));
  REQUIRE(expo.truncation_tail_bound() == Catch::Approx(geometric).margin(1e-18));

  const auto poly = CovarianceSpectrum::polynomial(2.0, 100);
  REQUIRE(poly.truncation_tail_bound() == Catch::Approx(0.01).margin(1e-16));

  REQUIRE(CovarianceSpectrum::spiked({3.0}, 1.0, 8).truncation_tail_bound() == 0.0);
}

TEST_CASE("rademacher designs have support on +-1") {
  const auto one = CovarianceSpectrum::explicit_list({1.0});
  const Matrix x = sample_design(one, CoefficientLaw::rademacher, 64, 5);
  for (int i = 0; i < x.rows(); ++i) REQUIRE(std::abs(x(i, 0)) == 1.0);
}

TEST_CASE("sampling is deterministic given the seed") {
  const auto spectrum = CovarianceSpectrum::polynomial(2.0, 6);
  const Matrix a = sample_design(spectrum, CoefficientLaw::gaussian, 9, 42);
  const Matrix b = sample_design(spectrum, CoefficientLaw::gaussian, 9, 42);
  REQUIRE(a == b);
  const Matrix c = sample_design(spectrum, CoefficientLaw::gaussian, 9, 43);
  REQUIRE(a != c);
}

TEST_CASE("column variances converge to the prescribed eigenvalues") {
  const int n = 100000;
  std::vector<CovarianceSpectrum> spectra = {
      CovarianceSpectrum::polynomial(2.0, 4),
      CovarianceSpectrum::exponential(1.0, 4),
      CovarianceSpectrum::spiked({5.0}, 1.0, 4),
      CovarianceSpectrum::explicit_list({2.0, 1.0, 0.5, 0.25}),
  };
  for (const auto& spectrum : spectra) {
    for (CoefficientLaw law :
         {CoefficientLaw::gaussian, CoefficientLaw::rademacher, CoefficientLaw::uniform}) {
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Matrix x = sample_design(spectrum, law, n, seed);
        for (int j = 0; j < spectrum.dim(); ++j) {
          const double var = x.col(j).squaredNorm() / static_cast<double>(n);
          REQUIRE(std::abs(var - spectrum.eigenvalue(j)) <= 0.05 * spectrum.eigenvalue(j));
        }
      }
    }
  }
}

TEST_CASE("whitened coordinates have standardized moments") {
  const int n = 100000;
  const auto one = CovarianceSpectrum::explicit_list({1.0});
  for (CoefficientLaw law :
       {CoefficientLaw::gaussian, CoefficientLaw::rademacher, CoefficientLaw::uniform}) {
    const Matrix x = sample_design(one, law, n, 17);
    const double mean = x.col(0).mean();
    const double var = x.col(0).squaredNorm() / static_cast<double>(n) - mean * mean;
    REQUIRE(std::abs(mean) <= 4.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::abs(var - 1.0) <= 0.05);
  }
}

TEST_CASE("regression instances satisfy the model identity bitwise") {
  const auto spectrum = CovarianceSpectrum::polynomial(2.0, 8);
  Vector f(8);
  f << 1, -2, 0.5, 0, 3, 0, 0, 1;
  const auto instance = make_instance(spectrum, CoefficientLaw::gaussian, 12, f, 0.7, 99);
  const Vector recomputed = instance.design * instance.f_true + instance.noise;
  REQUIRE((instance.responses - recomputed).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noiseless instances interpolate exactly and zero signal leaves noise") {
  const auto spectrum = CovarianceSpectrum::polynomial(2.0, 5);
  Vector f = Vector::Ones(5);
  const auto noiseless = make_instance(spectrum, CoefficientLaw::gaussian, 7, f, 0.0, 3);
  REQUIRE((noiseless.responses - noiseless.design * f).cwiseAbs().maxCoeff() == 0.0);

  const auto pure_noise = make_instance(spectrum, CoefficientLaw::gaussian, 7, Vector::Zero(5), 1.5, 3);
  REQUIRE((pure_noise.responses - pure_noise.noise).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("instances are reproducible and validate inputs") {
  const auto spectrum = CovarianceSpectrum::polynomial(2.0, 5);
  const auto a = make_instance(spectrum, CoefficientLaw::gaussian, 6, Vector::Ones(5), 1.0, 11);
  const auto b = make_instance(spectrum, CoefficientLaw::gaussian, 6, Vector::Ones(5), 1.0, 11);
  REQUIRE(a.design == b.design);
  REQUIRE(a.noise == b.noise);
  REQUIRE(a.responses == b.responses);

  REQUIRE_THROWS_AS(make_instance(spectrum, CoefficientLaw::gaussian, 6, Vector::Ones(4), 1.0, 1),
                    InputError);
  REQUIRE_THROWS_AS(make_instance(spectrum, CoefficientLaw::gaussian, 6, Vector::Ones(5), -1.0, 1),
                    InputError);
  REQUIRE_THROWS_AS(sample_design(spectrum, CoefficientLaw::gaussian, 0, 1), InputError);
}

TEST_CASE("random orthogonal matrices are orthogonal and deterministic") {
  const Matrix q = random_orthogonal(12, 4);
  REQUIRE((q.transpose() * q - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(q == random_orthogonal(12, 4));
  REQUIRE(q != random_orthogonal(12, 5));
}

TEST_CASE("designs sampled in a rotated basis have the conjugated covariance") {
  const auto spectrum = CovarianceSpectrum::explicit_list({4.0, 1.0, 0.25});
  const Matrix q = random_orthogonal(3, 8);
  const int n = 200000;
  const Matrix x = sample_design(spectrum, CoefficientLaw::gaussian, n, 9, &q);
  const Matrix cov = x.transpose() * x / static_cast<double>(n);
  Matrix target = q * spectrum.eigenvalues().asDiagonal() * q.transpose();
  REQUIRE((cov - target).cwiseAbs().maxCoeff() < 0.1);
}
