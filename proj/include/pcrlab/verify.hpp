#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcrlab/calibration.hpp"
#include "pcrlab/config.hpp"
#include "pcrlab/estimators.hpp"
#include "pcrlab/model.hpp"
#include "pcrlab/numeric.hpp"
#include "pcrlab/risk.hpp"
#include "pcrlab/sweep.hpp"

namespace pcrlab {

struct CheckResult {
  enum class Status { pass, fail, skip };
  std::string name;
  Status status = Status::pass;
  std::string details;
};

inline const char* to_string(CheckResult::Status s) {
  switch (s) {
    case CheckResult::Status::pass: return "pass";
    case CheckResult::Status::fail: return "fail";
    case CheckResult::Status::skip: return "skip";
  }
  return "?";
}

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool passed() const {
    for (const auto& c : checks) {
      if (c.status == CheckResult::Status::fail) return false;
    }
    return true;
  }
};

inline nlohmann::json suite_to_json(const SuiteReport& report) {
  nlohmann::json j;
  j["suite"] = report.suite;
  j["pass"] = report.passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"name", c.name}, {"status", to_string(c.status)}, {"details", c.details}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Check kernels. Each is a pure function of explicit parameters so the CLI
// verify suites and the acceptance runner exercise identical code.
// ---------------------------------------------------------------------------
namespace checks {

/// Monte Carlo check of the exact conditional bias-variance identity: returns
/// |mean of `draws` resampled prediction errors - (B_d^2 + V_d)| in units of
/// the Monte Carlo standard error.
inline double bias_variance_deviation_se(const RegressionInstance& instance,
                                         const SamplingSvd& svd, int d, int draws,
                                         std::uint64_t noise_seed) {
  if (!(instance.sigma > 0.0)) throw InputError("bias_variance check needs sigma > 0");
  const RiskReport exact = conditional_risk(instance, svd.covariance_spectrum(), d);

  const int n = instance.n();
  const int p = instance.p();
  Vector bias_part = -instance.f_true;
  bias_part += svd.right_frame.leftCols(d) *
               (svd.right_frame.leftCols(d).transpose() * instance.f_true);

  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> errors(static_cast<std::size_t>(draws));
  Vector noise(n), diff(p);
  for (int m = 0; m < draws; ++m) {
    for (int i = 0; i < n; ++i) {
      rng::Stream stream(rng::derive_key(noise_seed, {rng::kCheckTag, static_cast<std::uint64_t>(m),
                                                      static_cast<std::uint64_t>(i)}));
      noise[i] = instance.sigma * stream.next_gaussian();
    }
    diff = bias_part;
    for (int j = 0; j < d; ++j) {
      const double score = svd.left_frame.col(j).dot(noise);
      diff += (inv_sqrt_n * score / svd.singular_values[j]) * svd.right_frame.col(j);
    }
    errors[static_cast<std::size_t>(m)] = l2_norm_sq(diff, instance.spectrum);
  }
  const MeanAndStdError stats = mean_and_std_error(errors);
  return std::abs(stats.mean - exact.total) / stats.std_error;
}

struct SplitIdentityStats {
  double max_defect_rel = 0.0;  // |lower + upper - total| / max(1, tr)
  double mu_spread_rel = 0.0;   // spread of totals across the mu grid / max(1, tr)
};

/// Exercises the mu-split identity on the standard mu grid {0, l_{d+1},
/// midpoint, negative, 2 l_1}.
inline SplitIdentityStats split_identity_stats(const CovarianceSpectrum& spectrum,
                                               const EigenDecomposition& empirical, int d) {
  const int p = spectrum.dim();
  const double scale = std::max(1.0, spectrum.trace());
  const double lambda_next = d < p ? spectrum.eigenvalue(d) : 0.0;
  const double lambda_1 = spectrum.eigenvalue(0);
  const std::vector<double> mus = {0.0, lambda_next, 0.5 * (lambda_1 + spectrum.eigenvalue(p - 1)),
                                   -0.5 * lambda_1, 2.0 * lambda_1};

  SplitIdentityStats stats;
  double min_total = std::numeric_limits<double>::infinity();
  double max_total = -std::numeric_limits<double>::infinity();
  for (double mu : mus) {
    const ExcessRiskSplit split = excess_risk_split(spectrum, empirical, d, mu);
    const double defect = std::abs(split.lower_part + split.upper_part - split.total);
    stats.max_defect_rel = std::max(stats.max_defect_rel, defect / scale);
    min_total = std::min(min_total, split.lower_part + split.upper_part);
    max_total = std::max(max_total, split.lower_part + split.upper_part);
  }
  stats.mu_spread_rel = (max_total - min_total) / scale;
  return stats;
}

/// Worst eigenvalue disagreement between the covariance and Gram routes,
/// relative to the top eigenvalue.
inline double gram_duality_gap(const Matrix& design) {
  const EigenDecomposition direct = sym_eigendecompose(empirical_covariance(design));
  const EigenDecomposition dual = spectrum_via_gram(design);
  const int m = static_cast<int>(std::min(design.rows(), design.cols()));
  const double scale = std::max(direct.eigenvalues[0], 1e-300);
  double worst = 0.0;
  for (int j = 0; j < m; ++j) {
    worst = std::max(worst, std::abs(direct.eigenvalues[j] - dual.eigenvalues[j]) / scale);
  }
  return worst;
}

struct CoincidenceStats {
  double coincidence_rel = 0.0;  // ||min_norm - pcr_n|| / max(1, ||min_norm||)
  double interp_rel = 0.0;       // max_i |<fhat, x_i> - y_i| / (1 + ||Y||_inf)
};

inline CoincidenceStats minnorm_coincidence(const RegressionInstance& instance) {
  const Estimate mn = min_norm_fit(instance);
  const Estimate pcr = pcr_fit(instance, instance.n());
  CoincidenceStats stats;
  stats.coincidence_rel = (mn.coefficients - pcr.coefficients).norm() /
                          std::max(1.0, mn.coefficients.norm());
  const Vector residual = instance.design * mn.coefficients - instance.responses;
  stats.interp_rel = residual.cwiseAbs().maxCoeff() /
                     (1.0 + instance.responses.cwiseAbs().maxCoeff());
  return stats;
}

/// Projection-theorem defect of the oracle fit, measured against both the
/// library prediction error and an independent dense quadratic-form oracle.
inline double oracle_identity_defect_rel(const RegressionInstance& instance, int d) {
  const Estimate est = oracle_fit(instance, d);
  const double pe = prediction_error(est, instance.f_true, instance.spectrum);
  const Matrix sigma = instance.spectrum.eigenvalues().asDiagonal();
  const Vector diff = est.coefficients - instance.f_true;
  const double pe_dense = diff.dot(sigma * diff);
  const OracleRiskSplit split = oracle_risk_identity(instance, d);
  const double sum = split.cross_fit_err + split.tail_bias;
  const double scale = std::max(pe, 1e-15);
  return std::max(std::abs(sum - pe), std::abs(sum - pe_dense)) / scale;
}

struct SandwichStats {
  int seeds = 0;
  int lower_ok = 0;   // lhat_n * n / tr_{>n} >= 1/2
  int upper_ok = 0;   // lhat_{j*+1} * n / tr_{>n} <= multiple
  int head_ok = 0;    // lhat_j >= l_j / 2 for all j <= j*
  double max_upper_ratio = 0.0;
  double min_lower_ratio = std::numeric_limits<double>::infinity();
};

/// Frequency statistics for the eigenvalue sandwich on an overparametrized
/// spectrum (needs n < p so tr_{>n} > 0).
inline SandwichStats eigen_sandwich_stats(const CovarianceSpectrum& spectrum, CoefficientLaw law,
                                          int n, int seeds, std::uint64_t seed0, double B,
                                          double upper_multiple) {
  const std::optional<int> j_star = effective_rank_curve(spectrum, n, B).j_star;
  if (!j_star.has_value() || *j_star >= n) {
    throw PreconditionError("eigen_sandwich_stats: needs j* < n");
  }
  const double tail = tail_trace(spectrum, n, 1);
  SandwichStats stats;
  stats.seeds = seeds;
  for (int s = 0; s < seeds; ++s) {
    const Matrix design = sample_design(spectrum, law, n, row_seed(seed0, s));
    const Vector evals = sym_eigendecompose(gram_matrix(design)).eigenvalues;
    const double lower_ratio = evals[n - 1] * static_cast<double>(n) / tail;
    const double upper_ratio = evals[*j_star] * static_cast<double>(n) / tail;
    if (lower_ratio >= 0.5) ++stats.lower_ok;
    if (upper_ratio <= upper_multiple) ++stats.upper_ok;
    bool head = true;
    for (int j = 0; j < *j_star; ++j) {
      if (!(evals[j] >= 0.5 * spectrum.eigenvalue(j))) head = false;
    }
    if (head) ++stats.head_ok;
    stats.max_upper_ratio = std::max(stats.max_upper_ratio, upper_ratio);
    stats.min_lower_ratio = std::min(stats.min_lower_ratio, lower_ratio);
  }
  return stats;
}

/// Per-seed ratio of the post-change to pre-change slope of the variance
/// curve V_d of a spiked spectrum (change point at d = r + 1).
inline std::vector<double> changepoint_slope_ratios(const CovarianceSpectrum& spectrum,
                                                    CoefficientLaw law, int n, double sigma,
                                                    int seeds, std::uint64_t seed0) {
  const int r = spectrum.spike_count();
  if (spectrum.kind() != SpectrumKind::spiked || r < 2) {
    throw PreconditionError("changepoint_slope_ratios: needs a spiked spectrum with r >= 2");
  }
  if (n <= r + 2) throw PreconditionError("changepoint_slope_ratios: n too small");

  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(seeds));
  for (int s = 0; s < seeds; ++s) {
    const Matrix design = sample_design(spectrum, law, n, row_seed(seed0, s));
    const EigenDecomposition es = spectrum_via_gram(design);
    const int levels = std::min(n, es.vector_count());
    if (levels < n) continue;  // rank-deficient draw; does not contribute

    std::vector<double> v_curve(static_cast<std::size_t>(levels) + 1, 0.0);
    CompensatedSum acc;
    const double noise_factor = sigma * sigma / static_cast<double>(n);
    for (int j = 0; j < levels; ++j) {
      acc.add(l2_norm_sq(es.eigenvectors.col(j), spectrum) / es.eigenvalues[j]);
      v_curve[static_cast<std::size_t>(j) + 1] = noise_factor * acc.value();
    }

    std::vector<double> x_pre, y_pre, x_post, y_post;
    for (int d = 1; d <= r; ++d) {
      x_pre.push_back(d);
      y_pre.push_back(v_curve[static_cast<std::size_t>(d)]);
    }
    for (int d = r + 1; d <= levels; ++d) {
      x_post.push_back(d);
      y_post.push_back(v_curve[static_cast<std::size_t>(d)]);
    }
    ratios.push_back(least_squares_slope(x_post, y_post) / least_squares_slope(x_pre, y_pre));
  }
  return ratios;
}

struct HighdimRatioStats {
  double median_ratio = 0.0;          // observed conditional risk / bound
  double max_cross_violation = 0.0;   // max of cross - l_{j*+1}(d - j*), scaled
  int seeds = 0;
};

/// Observed-vs-bound statistics in the high-dimensional regime at one (n, d).
inline HighdimRatioStats highdim_ratio_stats(const CovarianceSpectrum& spectrum,
                                             CoefficientLaw law, int n, int d, const Vector& f,
                                             double sigma, double B, double t, int seeds,
                                             std::uint64_t seed0) {
  const std::optional<int> j_star = effective_rank_curve(spectrum, n, B).j_star;
  if (!j_star.has_value() || !(*j_star < d)) {
    throw PreconditionError("highdim_ratio_stats: needs j* < d");
  }
  const double f_norm_sq = f.squaredNorm();
  const double lambda_next = spectrum.eigenvalue(*j_star);

  HighdimRatioStats stats;
  std::vector<double> ratios;
  for (int s = 0; s < seeds; ++s) {
    const RegressionInstance instance =
        make_instance(spectrum, law, n, f, sigma, row_seed(seed0, s));
    const EigenDecomposition es = empirical_spectrum(instance.design);
    if (d > es.vector_count()) continue;
    const double total = conditional_risk(instance, es, d).total;
    const double cross = cross_projected_trace(es, spectrum, *j_star, d);
    const double cap = lambda_next * static_cast<double>(d - *j_star);
    stats.max_cross_violation =
        std::max(stats.max_cross_violation, (cross - cap) / std::max(cap, 1e-300));
    const double bound = highdim_bound(spectrum, f_norm_sq, sigma, n, j_star, t, cross);
    ratios.push_back(total / bound);
  }
  stats.seeds = static_cast<int>(ratios.size());
  stats.median_ratio = median(ratios);
  return stats;
}

struct TraceCapStats {
  int seeds = 0;
  int ok = 0;
  double max_ratio = 0.0;  // cross(j*, n) / (multiple * cap)
};

/// Frequency of the d = n trace cap over seeded designs.
inline TraceCapStats trace_cap_stats(const CovarianceSpectrum& spectrum, CoefficientLaw law, int n,
                                     int seeds, std::uint64_t seed0, double B, double multiple) {
  const std::optional<int> j_star = effective_rank_curve(spectrum, n, B).j_star;
  if (!j_star.has_value() || !(*j_star < n)) {
    throw PreconditionError("trace_cap_stats: needs j* < n");
  }
  const double cap = dn_trace_cap(spectrum, n, *j_star);
  TraceCapStats stats;
  stats.seeds = seeds;
  for (int s = 0; s < seeds; ++s) {
    const Matrix design = sample_design(spectrum, law, n, row_seed(seed0, s));
    const EigenDecomposition es = spectrum_via_gram(design);
    if (es.vector_count() < n) continue;
    const double cross = cross_projected_trace(es, spectrum, *j_star, n);
    if (cross <= multiple * cap) ++stats.ok;
    stats.max_ratio = std::max(stats.max_ratio, cross / (multiple * cap));
  }
  return stats;
}

struct ExcessRiskMultipleStats {
  int seeds = 0;
  int ok = 0;
  double max_ratio = 0.0;
};

/// Frequency of E_{<=j*}(0) <= multiple * t^2 j* tr_{>j*}(Sigma)/n.
inline ExcessRiskMultipleStats excess_risk_multiple_stats(const CovarianceSpectrum& spectrum,
                                                          CoefficientLaw law, int n, int seeds,
                                                          std::uint64_t seed0, double B, double t,
                                                          double multiple) {
  const std::optional<int> j_star = effective_rank_curve(spectrum, n, B).j_star;
  if (!j_star.has_value() || *j_star < 1) {
    throw PreconditionError("excess_risk_multiple_stats: needs j* >= 1");
  }
  const double budget =
      multiple * t * t * static_cast<double>(*j_star) * tail_trace(spectrum, *j_star, 1) /
      static_cast<double>(n);
  ExcessRiskMultipleStats stats;
  stats.seeds = seeds;
  for (int s = 0; s < seeds; ++s) {
    const Matrix design = sample_design(spectrum, law, n, row_seed(seed0, s));
    const EigenDecomposition es = empirical_spectrum(design);
    if (*j_star > es.vector_count()) continue;
    const double observed = excess_risk_split(spectrum, es, *j_star, 0.0).lower_part;
    if (observed <= budget) ++stats.ok;
    stats.max_ratio = std::max(stats.max_ratio, observed / budget);
  }
  return stats;
}

/// Rate-normalized 1 - 1/e quantiles of the weighted concentration statistic,
/// one per sample size. Square mode normalizes by n/||a||_1, linear mode by
/// its own rate 1/(||a||_1 (1/sqrt(n) + 1/n)).
inline std::vector<double> concentration_quantiles(CoefficientLaw law, ConcentrationMode mode,
                                                   const Vector& weights,
                                                   const std::vector<int>& n_list, int reps,
                                                   std::uint64_t seed0) {
  const double weight_mass = weights.sum();
  std::vector<double> quantiles;
  quantiles.reserve(n_list.size());
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const int n = n_list[idx];
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(reps));
    Matrix samples(n, weights.size());
    for (int rep = 0; rep < reps; ++rep) {
      for (Eigen::Index j = 0; j < weights.size(); ++j) {
        for (int i = 0; i < n; ++i) {
          rng::Stream stream(rng::derive_key(
              seed0, {rng::kCheckTag, idx, static_cast<std::uint64_t>(rep),
                      static_cast<std::uint64_t>(j) * 1000003ULL + static_cast<std::uint64_t>(i)}));
          samples(i, j) = draw(law, stream);
        }
      }
      const double stat = weighted_concentration_stat(weights, samples, mode);
      const double scale =
          mode == ConcentrationMode::square
              ? static_cast<double>(n) / weight_mass
              : 1.0 / (weight_mass * (1.0 / std::sqrt(static_cast<double>(n)) +
                                      1.0 / static_cast<double>(n)));
      stats.push_back(stat * scale);
    }
    quantiles.push_back(quantile(stats, 1.0 - std::exp(-1.0)));
  }
  return quantiles;
}

struct ClassicalRateStats {
  double slope = 0.0;
  std::vector<double> median_pcr;     // per n
  std::vector<double> median_oracle;  // per n
  std::vector<int> d_used;            // per n
};

/// Median conditional PCR and realized oracle risks over a replicate grid,
/// with the log-log slope of the PCR medians against n.
inline ClassicalRateStats classical_rate_stats(const CovarianceSpectrum& spectrum,
                                               CoefficientLaw law, const Vector& f, double sigma,
                                               const std::vector<int>& n_list,
                                               const std::function<int(int)>& d_of_n, int reps,
                                               std::uint64_t seed0) {
  ClassicalRateStats stats;
  std::vector<double> log_n, log_risk;
  for (int n : n_list) {
    const int d = d_of_n(n);
    stats.d_used.push_back(d);
    std::vector<double> totals, oracles;
    for (int rep = 0; rep < reps; ++rep) {
      const RegressionInstance instance =
          make_instance(spectrum, law, n, f, sigma, row_seed(seed0, rep));
      const EigenDecomposition es = empirical_spectrum(instance.design);
      totals.push_back(conditional_risk(instance, es, d).total);
      oracles.push_back(prediction_error(oracle_fit(instance, d), f, spectrum));
    }
    stats.median_pcr.push_back(median(totals));
    stats.median_oracle.push_back(median(oracles));
    log_n.push_back(std::log(static_cast<double>(n)));
    log_risk.push_back(std::log(stats.median_pcr.back()));
  }
  if (n_list.size() >= 2) stats.slope = least_squares_slope(log_n, log_risk);
  return stats;
}

}  // namespace checks

// ---------------------------------------------------------------------------
// Config-driven suites.
// ---------------------------------------------------------------------------
namespace detail {

inline CheckResult make_result(const std::string& name, bool pass, const std::string& details) {
  return {name, pass ? CheckResult::Status::pass : CheckResult::Status::fail, details};
}

inline CheckResult make_skip(const std::string& name, const std::string& why) {
  return {name, CheckResult::Status::skip, why};
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

inline std::vector<int> positive_levels(const ExperimentConfig& cfg, int n, int p, int cap = 3) {
  std::vector<int> out;
  for (int d : cfg.d_grid.materialize(n, p)) {
    if (d >= 1 && d <= std::min(n, p) && static_cast<int>(out.size()) < cap) out.push_back(d);
  }
  return out;
}

inline SuiteReport identities_suite(const ExperimentConfig& cfg) {
  SuiteReport report{"identities", {}};
  const CovarianceSpectrum spectrum = cfg.spectrum.build();
  const int p = spectrum.dim();
  const int n = cfg.n_grid.front();
  const Vector f = cfg.f_true.build(p);
  const int reps = std::min(cfg.replicates, 8);

  {  // bitwise model identity
    double worst = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const RegressionInstance inst =
          make_instance(spectrum, cfg.law, n, f, cfg.sigma, row_seed(cfg.base_seed, rep));
      const double defect =
          (inst.responses - (inst.design * inst.f_true + inst.noise)).cwiseAbs().maxCoeff();
      worst = std::max(worst, defect);
    }
    report.checks.push_back(make_result("model_identity_bitwise", worst == 0.0,
                                        "max |Y - Xf - eps| = " + fmt(worst)));
  }

  {  // decomposition invariants on the first replicate
    const RegressionInstance inst =
        make_instance(spectrum, cfg.law, n, f, cfg.sigma, row_seed(cfg.base_seed, 0));
    const EigenDecomposition es = empirical_spectrum(inst.design);
    const double orth = es.vector_count() > 0
                            ? (es.eigenvectors.transpose() * es.eigenvectors -
                               Matrix::Identity(es.vector_count(), es.vector_count()))
                                  .cwiseAbs()
                                  .maxCoeff()
                            : 0.0;
    bool ok = orth <= tol::kOrthonormality;
    std::string details = "||U^T U - I||_max = " + fmt(orth);
    if (p <= 512) {
      const SymMatrix cov = empirical_covariance(inst.design);
      const EigenDecomposition full = sym_eigendecompose(cov);
      const Matrix recon = full.eigenvectors * full.eigenvalues.asDiagonal() *
                           full.eigenvectors.transpose();
      const double rec = (cov.entries() - recon).cwiseAbs().maxCoeff() /
                         std::max(1.0, full.eigenvalues[0]);
      ok = ok && rec <= tol::kReconstruction;
      details += ", reconstruction = " + fmt(rec);
    }
    report.checks.push_back(make_result("decomposition_invariants", ok, details));
  }

  {  // mu-split identity and mu independence
    double worst_defect = 0.0, worst_spread = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const RegressionInstance inst =
          make_instance(spectrum, cfg.law, n, f, cfg.sigma, row_seed(cfg.base_seed, rep));
      const EigenDecomposition es = empirical_spectrum(inst.design);
      for (int d : positive_levels(cfg, n, p)) {
        if (d > es.vector_count()) continue;
        const auto stats = checks::split_identity_stats(spectrum, es, d);
        worst_defect = std::max(worst_defect, stats.max_defect_rel);
        worst_spread = std::max(worst_spread, stats.mu_spread_rel);
      }
    }
    report.checks.push_back(make_result(
        "excess_risk_split_identity", worst_defect <= 1e-10 && worst_spread <= 1e-10,
        "max defect = " + fmt(worst_defect) + ", mu spread = " + fmt(worst_spread)));
  }

  {  // dual-route eigenvalue agreement
    const CovarianceSpectrum dual_spectrum =
        p <= 512 ? spectrum
                 : CovarianceSpectrum::explicit_list(std::vector<double>(
                       spectrum.eigenvalues().data(), spectrum.eigenvalues().data() + 512));
    double worst = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const Matrix design = sample_design(dual_spectrum, cfg.law, std::min(n, 256),
                                          row_seed(cfg.base_seed, rep));
      worst = std::max(worst, checks::gram_duality_gap(design));
    }
    std::string details = "max relative eigenvalue gap = " + fmt(worst);
    if (p > 512) details += " (leading 512-dim truncation)";
    report.checks.push_back(make_result("gram_duality", worst <= tol::kDualRelative, details));
  }

  if (p >= n) {  // min-norm / d = n coincidence and interpolation
    double worst_coincidence = 0.0, worst_interp = 0.0;
    bool rank_trouble = false;
    for (int rep = 0; rep < reps; ++rep) {
      const RegressionInstance inst =
          make_instance(spectrum, cfg.law, n, f, cfg.sigma, row_seed(cfg.base_seed, rep));
      try {
        const auto stats = checks::minnorm_coincidence(inst);
        worst_coincidence = std::max(worst_coincidence, stats.coincidence_rel);
        worst_interp = std::max(worst_interp, stats.interp_rel);
      } catch (const RankDeficiencyError&) {
        rank_trouble = true;
      }
    }
    report.checks.push_back(make_result(
        "minnorm_pcr_coincidence",
        !rank_trouble && worst_coincidence <= 1e-8 && worst_interp <= 1e-8,
        "max coincidence = " + fmt(worst_coincidence) + ", max interpolation residual = " +
            fmt(worst_interp) + (rank_trouble ? ", rank-deficient draw encountered" : "")));
  } else {
    report.checks.push_back(make_skip("minnorm_pcr_coincidence", "requires p >= n"));
  }

  {  // oracle projection identity
    double worst = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const RegressionInstance inst =
          make_instance(spectrum, cfg.law, n, f, cfg.sigma, row_seed(cfg.base_seed, rep));
      for (int d : positive_levels(cfg, n, p)) {
        worst = std::max(worst, checks::oracle_identity_defect_rel(inst, d));
      }
    }
    report.checks.push_back(make_result("oracle_projection_identity", worst <= 1e-10,
                                        "max relative defect = " + fmt(worst)));
  }

  if (cfg.sigma > 0.0) {  // Monte Carlo bias-variance identity
    const RegressionInstance inst =
        make_instance(spectrum, cfg.law, n, f, cfg.sigma, row_seed(cfg.base_seed, 0));
    const SamplingSvd svd = sampling_svd(inst.design);
    double worst = 0.0;
    for (int d : positive_levels(cfg, n, p)) {
      if (d > svd.rank()) continue;
      worst = std::max(worst, checks::bias_variance_deviation_se(
                                  inst, svd, d, 10000, rng::derive_key(cfg.base_seed, {77})));
    }
    report.checks.push_back(make_result("bias_variance_monte_carlo", worst <= 3.0,
                                        "max deviation = " + fmt(worst) + " standard errors"));
  } else {
    report.checks.push_back(make_skip("bias_variance_monte_carlo", "sigma = 0"));
  }

  return report;
}

inline SuiteReport classical_suite(const ExperimentConfig& cfg) {
  SuiteReport report{"classical", {}};
  const CovarianceSpectrum spectrum = cfg.spectrum.build();
  const int p = spectrum.dim();
  const Vector f = cfg.f_true.build(p);

  // Admissibility gate: max(d, tr_{>d}/l_{d+1}) <= c1 n.
  std::vector<std::pair<int, int>> qualifying;
  std::ostringstream gate;
  for (int n : cfg.n_grid) {
    const RegimeDiagnostics regime = effective_rank_curve(spectrum, n, cfg.constants.B);
    for (int d : positive_levels(cfg, n, p, 1000)) {
      if (d >= p) continue;
      const double lhs = std::max(static_cast<double>(d), regime.effective_ranks[d]);
      if (lhs <= cfg.constants.c1 * n) {
        qualifying.emplace_back(n, d);
      } else {
        gate << " (n=" << n << ",d=" << d << ")";
      }
    }
  }
  if (qualifying.empty()) {
    report.checks.push_back(make_skip("classical_condition", "condition-not-met for every (n, d)"));
    report.checks.push_back(make_skip("pcr_vs_oracle", "condition-not-met"));
    report.checks.push_back(make_skip("rate_slope", "condition-not-met"));
    return report;
  }
  report.checks.push_back(make_result(
      "classical_condition", true,
      std::to_string(qualifying.size()) + " qualifying (n, d) cells; excluded:" +
          (gate.str().empty() ? " none" : gate.str())));

  {  // PCR within a calibrated multiple of the oracle; one decomposition per
     // (n, replicate) shared across the level grid
    double worst_ratio = 0.0;
    for (int n : cfg.n_grid) {
      std::vector<int> levels;
      for (const auto& [qn, qd] : qualifying) {
        if (qn == n) levels.push_back(qd);
      }
      if (levels.empty()) continue;
      std::map<int, std::vector<double>> totals, oracles;
      for (int rep = 0; rep < cfg.replicates; ++rep) {
        const RegressionInstance inst =
            make_instance(spectrum, cfg.law, n, f, cfg.sigma, row_seed(cfg.base_seed, rep));
        const EigenDecomposition es = empirical_spectrum(inst.design);
        for (int d : levels) {
          try {
            totals[d].push_back(conditional_risk(inst, es, d).total);
            oracles[d].push_back(prediction_error(oracle_fit(inst, d), f, spectrum));
          } catch (const RankDeficiencyError&) {
          }
        }
      }
      for (int d : levels) {
        if (totals[d].empty() || oracles[d].empty()) continue;
        worst_ratio = std::max(worst_ratio, median(totals[d]) / median(oracles[d]));
      }
    }
    report.checks.push_back(make_result(
        "pcr_vs_oracle", worst_ratio <= calibration::kPcrVsOracleMultiple,
        "worst median(PCR)/median(oracle) = " + fmt(worst_ratio) + " (budget " +
            fmt(calibration::kPcrVsOracleMultiple) + ")"));
  }

  if (spectrum.kind() == SpectrumKind::polynomial && cfg.n_grid.size() >= 3) {
    const double alpha = spectrum.decay_rate();
    const double target = -alpha / (alpha + 1.0);
    const auto stats = checks::classical_rate_stats(
        spectrum, cfg.law, f, cfg.sigma, cfg.n_grid,
        [&](int n) { return std::max(1, static_cast<int>(std::lround(std::pow(n, 1.0 / (alpha + 1.0))))); },
        cfg.replicates, cfg.base_seed);
    const bool ok = stats.slope >= target - 0.15 && stats.slope <= target + 0.15;
    report.checks.push_back(make_result(
        "rate_slope", ok,
        "log-log slope = " + fmt(stats.slope) + ", target " + fmt(target) + " +- 0.15"));
  } else {
    report.checks.push_back(
        make_skip("rate_slope", "needs a polynomial spectrum and >= 3 n values"));
  }

  return report;
}

inline SuiteReport highdim_suite(const ExperimentConfig& cfg) {
  SuiteReport report{"highdim", {}};
  const CovarianceSpectrum spectrum = cfg.spectrum.build();
  const int p = spectrum.dim();
  const double freq_threshold = 0.95;

  std::vector<std::pair<int, int>> with_jstar;  // (n, j*)
  for (int n : cfg.n_grid) {
    const auto j = effective_rank_curve(spectrum, n, cfg.constants.B).j_star;
    if (j.has_value() && *j < n && n <= p) with_jstar.emplace_back(n, *j);
  }
  if (with_jstar.empty()) {
    report.checks.push_back(
        make_skip("jstar_gate", "no effective-rank crossing below n for any configured n"));
    return report;
  }
  {
    std::ostringstream os;
    for (const auto& [n, j] : with_jstar) os << " n=" << n << ":j*=" << j;
    report.checks.push_back(make_result("jstar_gate", true, os.str()));
  }

  {  // eigenvalue sandwich frequencies
    bool ok = true;
    std::ostringstream os;
    for (const auto& [n, j] : with_jstar) {
      const auto stats =
          checks::eigen_sandwich_stats(spectrum, cfg.law, n, cfg.replicates, cfg.base_seed,
                                       cfg.constants.B, calibration::kEigUpperMultiple);
      const double need = freq_threshold * stats.seeds;
      ok = ok && stats.lower_ok >= need && stats.upper_ok >= need && stats.head_ok >= need;
      os << " n=" << n << ": lower " << stats.lower_ok << "/" << stats.seeds << ", upper "
         << stats.upper_ok << "/" << stats.seeds << ", head " << stats.head_ok << "/"
         << stats.seeds;
    }
    report.checks.push_back(make_result("eigenvalue_sandwich", ok, os.str()));
  }

  if (spectrum.kind() == SpectrumKind::spiked && spectrum.spike_count() >= 2) {
    bool ok = true;
    std::ostringstream os;
    for (const auto& [n, j] : with_jstar) {
      if (n <= spectrum.spike_count() + 2) continue;
      const auto ratios = checks::changepoint_slope_ratios(spectrum, cfg.law, n, cfg.sigma,
                                                           cfg.replicates, cfg.base_seed);
      if (ratios.empty()) continue;
      const double med = median(ratios);
      const double target = static_cast<double>(n) / static_cast<double>(p);
      ok = ok && med >= 0.5 * target && med <= 2.0 * target;
      os << " n=" << n << ": median ratio " << fmt(med) << " target " << fmt(target);
    }
    report.checks.push_back(make_result("variance_changepoint", ok, os.str()));
  } else {
    report.checks.push_back(
        make_skip("variance_changepoint", "needs a spiked spectrum with r >= 2"));
  }

  {  // observed/bound ratio: finite, cross term bounded, stable across n
    bool ok = true;
    std::vector<double> medians;
    std::ostringstream os;
    for (const auto& [n, j] : with_jstar) {
      const int d = std::max(j + 1, n / 2);
      Vector f = cfg.f_true.build(p);
      try {
        const auto stats =
            checks::highdim_ratio_stats(spectrum, cfg.law, n, d, f, cfg.sigma, cfg.constants.B,
                                        cfg.constants.t, cfg.replicates, cfg.base_seed);
        ok = ok && std::isfinite(stats.median_ratio) && stats.max_cross_violation <= 1e-9;
        medians.push_back(stats.median_ratio);
        os << " n=" << n << ": median ratio " << fmt(stats.median_ratio) << ", cross violation "
           << fmt(stats.max_cross_violation);
      } catch (const PreconditionError& e) {
        os << " n=" << n << ": " << e.what();
      }
    }
    if (medians.size() >= 2) {
      const auto [lo, hi] = std::minmax_element(medians.begin(), medians.end());
      ok = ok && *hi <= 2.0 * *lo;
      os << "; spread " << fmt(*hi / *lo);
    }
    report.checks.push_back(make_result("risk_bound_ratio", ok, os.str()));
  }

  {  // d = n trace cap frequency
    bool ok = true;
    bool ran = false;
    std::ostringstream os;
    for (const auto& [n, j] : with_jstar) {
      if (n >= p) continue;
      const auto stats = checks::trace_cap_stats(spectrum, cfg.law, n, cfg.replicates,
                                                 cfg.base_seed, cfg.constants.B,
                                                 calibration::kTraceCapMultiple);
      ran = true;
      ok = ok && stats.ok >= freq_threshold * stats.seeds;
      os << " n=" << n << ": " << stats.ok << "/" << stats.seeds
         << " within budget, max ratio " << fmt(stats.max_ratio);
    }
    if (ran) {
      report.checks.push_back(make_result("dn_trace_cap", ok, os.str()));
    } else {
      report.checks.push_back(make_skip("dn_trace_cap", "needs n < p"));
    }
  }

  {  // projector excess risk multiple at mu = 0
    bool ok = true;
    bool ran = false;
    std::ostringstream os;
    for (const auto& [n, j] : with_jstar) {
      if (j < 1) continue;
      const auto stats = checks::excess_risk_multiple_stats(
          spectrum, cfg.law, n, cfg.replicates, cfg.base_seed, cfg.constants.B, cfg.constants.t,
          calibration::kExcessRiskMultiple);
      ran = true;
      ok = ok && stats.ok >= freq_threshold * stats.seeds;
      os << " n=" << n << ": " << stats.ok << "/" << stats.seeds << ", max ratio "
         << fmt(stats.max_ratio);
    }
    if (ran) {
      report.checks.push_back(make_result("excess_risk_multiple", ok, os.str()));
    } else {
      report.checks.push_back(make_skip("excess_risk_multiple", "needs j* >= 1"));
    }
  }

  return report;
}

inline SuiteReport concentration_suite(const ExperimentConfig& cfg) {
  SuiteReport report{"concentration", {}};
  const CovarianceSpectrum spectrum = cfg.spectrum.build();
  const Vector weights = spectrum.eigenvalues();
  const std::vector<int> n_list = {100, 1000, 10000};
  const int reps = 300;

  for (ConcentrationMode mode : {ConcentrationMode::square, ConcentrationMode::linear}) {
    const auto quantiles =
        checks::concentration_quantiles(cfg.law, mode, weights, n_list, reps, cfg.base_seed);
    const auto [lo, hi] = std::minmax_element(quantiles.begin(), quantiles.end());
    const bool stable = *hi <= 2.0 * std::max(*lo, 1e-300);
    const bool bounded = *hi <= calibration::kConcentrationQuantileBound;
    std::ostringstream os;
    os << "quantiles:";
    for (double q : quantiles) os << ' ' << fmt(q);
    os << " (spread " << fmt(*hi / std::max(*lo, 1e-300)) << ")";
    report.checks.push_back(
        make_result(mode == ConcentrationMode::square ? "lemma_scaling_square"
                                                      : "lemma_scaling_linear",
                    stable && bounded, os.str()));
  }
  return report;
}

}  // namespace detail

inline SuiteReport run_suite(const ExperimentConfig& cfg, const std::string& suite) {
  cfg.validate();
  if (suite == "identities") return detail::identities_suite(cfg);
  if (suite == "classical") return detail::classical_suite(cfg);
  if (suite == "highdim") return detail::highdim_suite(cfg);
  if (suite == "concentration") return detail::concentration_suite(cfg);
  throw InputError("unknown verify suite '" + suite +
                   "' (expected identities|classical|highdim|concentration)");
}

}  // namespace pcrlab
