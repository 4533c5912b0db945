#pragma once

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pcrlab/config.hpp"
#include "pcrlab/estimators.hpp"
#include "pcrlab/model.hpp"
#include "pcrlab/numeric.hpp"
#include "pcrlab/risk.hpp"

namespace pcrlab {

/// One sweep cell: a (replicate, d) pair with every risk and bound the cell
/// supports. Fields that cannot be computed stay absent; genuine failures
/// leave a code in `reason` (absence by design, like min_norm off the d = n
/// row, does not).
struct SweepRow {
  std::uint64_t seed = 0;
  int replicate = 0;
  int n = 0;
  int p = 0;
  int d = 0;
  double sigma = 0.0;
  std::string family;  // coefficient-law family of the design

  std::optional<double> bias_sq;
  std::optional<double> variance;
  std::optional<double> total;
  std::optional<double> oracle_total;
  std::optional<double> min_norm_total;
  std::optional<double> excess_risk;
  std::optional<int> j_star;
  std::optional<double> eff_rank_d;
  std::optional<double> lambda_hat_d;
  std::optional<double> bound_classical;
  std::optional<double> bound_highdim;
  std::string reason;
};

/// Schema version 1 header; pinned by tests, bump only with the version.
inline constexpr const char* kCsvHeaderV1 =
    "seed,replicate,n,p,d,sigma,family,bias_sq,variance,total,oracle_total,min_norm_total,"
    "excess_risk,j_star,eff_rank_d,lambda_hat_d,bound_classical,bound_highdim,reason";

/// Canonical float serialization: 17 significant digits round-trips doubles
/// exactly.
inline std::string format_double17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::uint64_t row_seed(std::uint64_t base_seed, int replicate) {
  return rng::derive_key(base_seed, {rng::kRowTag, static_cast<std::uint64_t>(replicate)});
}

namespace detail {

inline void append_code(std::string& reason, const std::string& code) {
  if (!reason.empty()) reason += ';';
  reason += code;
}

inline std::vector<SweepRow> sweep_cell(const ExperimentConfig& cfg,
                                        const CovarianceSpectrum& spectrum, int n, int replicate) {
  const int p = spectrum.dim();
  const std::uint64_t seed = row_seed(cfg.base_seed, replicate);
  const Vector f = cfg.f_true.build(p);
  const RegressionInstance instance = make_instance(spectrum, cfg.law, n, f, cfg.sigma, seed);
  const EigenDecomposition es = empirical_spectrum(instance.design);
  const RegimeDiagnostics regime = effective_rank_curve(spectrum, n, cfg.constants.B);
  const double f_norm_sq = f.squaredNorm();

  std::vector<SweepRow> rows;
  for (int d : cfg.d_grid.materialize(n, p)) {
    SweepRow row;
    row.seed = seed;
    row.replicate = replicate;
    row.n = n;
    row.p = p;
    row.d = d;
    row.sigma = cfg.sigma;
    row.family = to_string(cfg.law);
    row.j_star = regime.j_star;

    if (d < p) {
      row.eff_rank_d = regime.effective_ranks[d];
      row.bound_classical = classical_bound(spectrum, f_norm_sq, cfg.sigma, n, d);
    }
    if (d >= 1 && d <= es.count()) row.lambda_hat_d = es.eigenvalues[d - 1];

    try {
      const RiskReport risk = conditional_risk(instance, es, d);
      row.bias_sq = risk.bias_sq;
      row.variance = risk.variance;
      row.total = risk.total;
    } catch (const RankDeficiencyError&) {
      append_code(row.reason, "pcr_rank_deficient");
    } catch (const InputError&) {
      append_code(row.reason, "pcr_level_unsupported");
    }

    try {
      row.excess_risk = excess_risk_split(spectrum, es, d, 0.0).total;
    } catch (const RankDeficiencyError&) {
      append_code(row.reason, "excess_risk_rank_deficient");
    } catch (const InputError&) {
      append_code(row.reason, "excess_risk_unsupported");
    }

    try {
      row.oracle_total = prediction_error(oracle_fit(instance, d), f, spectrum);
    } catch (const RankDeficiencyError&) {
      append_code(row.reason, "oracle_rank_deficient");
    } catch (const InputError&) {
      append_code(row.reason, "oracle_level_unsupported");
    }

    if (d == n) {
      try {
        row.min_norm_total = prediction_error(min_norm_fit(instance), f, spectrum);
      } catch (const RankDeficiencyError&) {
        append_code(row.reason, "min_norm_singular_gram");
      }
    }

    if (regime.j_star.has_value() && *regime.j_star < d && d <= es.vector_count()) {
      try {
        const double cross = cross_projected_trace(es, spectrum, *regime.j_star, d);
        row.bound_highdim = highdim_bound(spectrum, f_norm_sq, cfg.sigma, n, regime.j_star,
                                          cfg.constants.t, cross);
      } catch (const PreconditionError&) {
      } catch (const InputError&) {
        append_code(row.reason, "highdim_bound_unsupported");
      }
    }

    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Run the configured sweep. Replicates execute independently (bounded by
/// `workers`); rows come back in canonical (n, replicate, d) order regardless
/// of scheduling, so output is deterministic.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int workers = 1) {
  cfg.validate();
  const CovarianceSpectrum spectrum = cfg.spectrum.build();

  std::vector<std::pair<int, int>> cells;  // (n, replicate), canonical order
  for (int n : cfg.n_grid) {
    for (int rep = 0; rep < cfg.replicates; ++rep) cells.emplace_back(n, rep);
  }

  std::vector<std::vector<SweepRow>> results(cells.size());
  const int thread_count = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));

  if (thread_count == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      results[i] = detail::sweep_cell(cfg, spectrum, cells[i].first, cells[i].second);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
          results[i] = detail::sweep_cell(cfg, spectrum, cells[i].first, cells[i].second);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<SweepRow> rows;
  for (auto& cell_rows : results) {
    for (auto& row : cell_rows) rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

inline std::string csv_field(const std::optional<double>& v) {
  return v.has_value() ? format_double17(*v) : std::string();
}

inline std::string json_field(const std::optional<double>& v) {
  return v.has_value() ? format_double17(*v) : std::string("null");
}

}  // namespace detail

/// Serialize rows to CSV (fixed header order) or JSON lines (same key order).
inline void emit(const std::vector<SweepRow>& rows, OutputFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot open '" + path + "' for writing");

  if (format == OutputFormat::csv) {
    out << kCsvHeaderV1 << '\n';
    for (const SweepRow& r : rows) {
      out << r.seed << ',' << r.replicate << ',' << r.n << ',' << r.p << ',' << r.d << ','
          << format_double17(r.sigma) << ',' << r.family << ',' << detail::csv_field(r.bias_sq)
          << ',' << detail::csv_field(r.variance) << ',' << detail::csv_field(r.total) << ','
          << detail::csv_field(r.oracle_total) << ',' << detail::csv_field(r.min_norm_total) << ','
          << detail::csv_field(r.excess_risk) << ','
          << (r.j_star.has_value() ? std::to_string(*r.j_star) : std::string()) << ','
          << detail::csv_field(r.eff_rank_d) << ',' << detail::csv_field(r.lambda_hat_d) << ','
          << detail::csv_field(r.bound_classical) << ',' << detail::csv_field(r.bound_highdim)
          << ',' << r.reason << '\n';
    }
  } else {
    for (const SweepRow& r : rows) {
      out << "{\"seed\":" << r.seed << ",\"replicate\":" << r.replicate << ",\"n\":" << r.n
          << ",\"p\":" << r.p << ",\"d\":" << r.d << ",\"sigma\":" << format_double17(r.sigma)
          << ",\"family\":\"" << r.family << "\",\"bias_sq\":" << detail::json_field(r.bias_sq)
          << ",\"variance\":" << detail::json_field(r.variance)
          << ",\"total\":" << detail::json_field(r.total)
          << ",\"oracle_total\":" << detail::json_field(r.oracle_total)
          << ",\"min_norm_total\":" << detail::json_field(r.min_norm_total)
          << ",\"excess_risk\":" << detail::json_field(r.excess_risk) << ",\"j_star\":"
          << (r.j_star.has_value() ? std::to_string(*r.j_star) : std::string("null"))
          << ",\"eff_rank_d\":" << detail::json_field(r.eff_rank_d)
          << ",\"lambda_hat_d\":" << detail::json_field(r.lambda_hat_d)
          << ",\"bound_classical\":" << detail::json_field(r.bound_classical)
          << ",\"bound_highdim\":" << detail::json_field(r.bound_highdim) << ",\"reason\":\""
          << r.reason << "\"}\n";
    }
  }
  out.flush();
  if (!out) throw std::runtime_error("emit: write failure on '" + path + "'");
}

/// Per-(n, d) medians and quartiles of the main totals.
inline void print_summary(const std::vector<SweepRow>& rows, std::ostream& os) {
  std::map<std::pair<int, int>, std::vector<const SweepRow*>> groups;
  for (const SweepRow& r : rows) groups[{r.n, r.d}].push_back(&r);

  os << "summary (medians [q25, q75] over replicates)\n";
  for (const auto& [key, group] : groups) {
    std::vector<double> totals, oracles;
    for (const SweepRow* r : group) {
      if (r->total.has_value()) totals.push_back(*r->total);
      if (r->oracle_total.has_value()) oracles.push_back(*r->oracle_total);
    }
    os << "  n=" << key.first << " d=" << key.second << " rows=" << group.size();
    if (!totals.empty()) {
      os << " total=" << format_double17(median(totals)) << " ["
         << format_double17(quantile(totals, 0.25)) << ", "
         << format_double17(quantile(totals, 0.75)) << "]";
    }
    if (!oracles.empty()) os << " oracle_med=" << format_double17(median(oracles));
    os << '\n';
  }
}

}  // namespace pcrlab
