// Pre-registered calibration run for the statistical check thresholds that
// carry no numeric theory constants. Prints observed extremes and the
// suggested frozen values; the frozen copies live in
// include/pcrlab/calibration.hpp and must only change together with a rerun
// of this tool.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <vector>

#include <CLI11.hpp>

#include "pcrlab/model.hpp"
#include "pcrlab/risk.hpp"
#include "pcrlab/verify.hpp"

using namespace pcrlab;

namespace {

void calibrate_eigen_sandwich(std::uint64_t seed) {
  const auto spectrum = CovarianceSpectrum::spiked({100.0, 50.0}, 1.0, 2000);
  const auto stats = checks::eigen_sandwich_stats(spectrum, CoefficientLaw::gaussian, 100, 200,
                                                  seed, 2.0, 1e300);
  std::printf("eigen upper ratio: max = %.4f  -> suggest kEigUpperMultiple ~ %.2f\n",
              stats.max_upper_ratio, 1.35 * stats.max_upper_ratio);
  std::printf("eigen lower ratio: min = %.4f  (spec-pinned threshold 0.5)\n",
              stats.min_lower_ratio);
}

void calibrate_pcr_vs_oracle(std::uint64_t seed) {
  const auto spectrum = CovarianceSpectrum::polynomial(2.0, 400);
  const Vector f = Vector::Constant(400, 1.0 / 20.0);
  const std::vector<int> n_list = {200, 400, 800, 1600, 3200};
  const auto stats = checks::classical_rate_stats(
      spectrum, CoefficientLaw::gaussian, f, 1.0, n_list,
      [](int n) { return static_cast<int>(std::lround(std::cbrt(static_cast<double>(n)))); }, 20,
      seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const double ratio = stats.median_pcr[i] / stats.median_oracle[i];
    std::printf("pcr/oracle: n=%d d=%d median ratio = %.4f\n", n_list[i], stats.d_used[i], ratio);
    worst = std::max(worst, ratio);
  }
  std::printf("pcr/oracle: worst = %.4f  -> suggest kPcrVsOracleMultiple ~ %.2f\n", worst,
              1.5 * worst);
  std::printf("rate slope: %.4f (target -2/3)\n", stats.slope);
}

void calibrate_trace_cap(std::uint64_t seed) {
  const auto spectrum = CovarianceSpectrum::spiked({100.0, 50.0}, 1.0, 2000);
  const auto stats = checks::trace_cap_stats(spectrum, CoefficientLaw::gaussian, 100, 200, seed,
                                             2.0, 1.0);
  std::printf("trace cap ratio (multiple 1): max = %.4f  -> suggest kTraceCapMultiple ~ %.2f\n",
              stats.max_ratio, 1.5 * stats.max_ratio);
}

void calibrate_excess_risk(std::uint64_t seed) {
  double worst = 0.0;
  for (auto spikes : {std::pair{100.0, 50.0}, std::pair{1000.0, 500.0}}) {
    const auto spectrum =
        CovarianceSpectrum::spiked({spikes.first, spikes.second}, 1.0, 2000);
    const auto stats = checks::excess_risk_multiple_stats(spectrum, CoefficientLaw::gaussian, 100,
                                                          200, seed, 2.0, 2.0, 1.0);
    std::printf("excess risk multiple (t=2, budget 1, spikes %g/%g): max ratio = %.5f\n",
                spikes.first, spikes.second, stats.max_ratio);
    worst = std::max(worst, stats.max_ratio);
  }
  std::printf("excess risk multiple: worst = %.5f  -> suggest kExcessRiskMultiple ~ %.3f\n",
              worst, 1.6 * worst);
}

void calibrate_concentration(std::uint64_t seed) {
  Vector weights(64);
  for (int j = 0; j < 64; ++j) weights[j] = std::pow(j + 1.0, -2.0);
  const std::vector<int> n_list = {100, 1000, 10000};
  double worst = 0.0;
  for (CoefficientLaw law : {CoefficientLaw::gaussian, CoefficientLaw::rademacher}) {
    for (ConcentrationMode mode : {ConcentrationMode::square, ConcentrationMode::linear}) {
      const auto q = checks::concentration_quantiles(law, mode, weights, n_list, 400, seed);
      std::printf("concentration %s/%s quantiles:", to_string(law),
                  mode == ConcentrationMode::square ? "square" : "linear");
      for (double v : q) {
        std::printf(" %.4f", v);
        worst = std::max(worst, v);
      }
      std::printf("\n");
    }
  }
  std::printf("concentration: max quantile = %.4f  -> suggest kConcentrationQuantileBound ~ %.2f\n",
              worst, 1.5 * worst);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcrlab calibration run (statistical thresholds)"};
  std::uint64_t seed = 0xCA1B;
  app.add_option("--seed", seed, "calibration seed (default 0xCA1B)");
  CLI11_PARSE(app, argc, argv);

  std::printf("calibration seed: 0x%" PRIX64 "\n", seed);
  calibrate_eigen_sandwich(seed);
  calibrate_trace_cap(seed);
  calibrate_excess_risk(seed);
  calibrate_concentration(seed);
  calibrate_pcr_vs_oracle(seed);
  return 0;
}
