// Command-line front end: seeded sweeps, verification suites, and spectrum
// diagnostics over a single JSON experiment config.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcrlab/config.hpp"
#include "pcrlab/risk.hpp"
#include "pcrlab/sweep.hpp"
#include "pcrlab/verify.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitInputError = 2;

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::string suite;
};

pcrlab::ExperimentConfig load_config(const CliOptions& opt) {
  pcrlab::ExperimentConfig cfg = pcrlab::ExperimentConfig::load_file(opt.config_path);
  if (opt.seed.has_value()) cfg.base_seed = *opt.seed;
  if (opt.out.has_value()) cfg.output_path = *opt.out;
  if (opt.format.has_value()) {
    if (*opt.format == "csv") {
      cfg.output_format = pcrlab::OutputFormat::csv;
    } else if (*opt.format == "json") {
      cfg.output_format = pcrlab::OutputFormat::json;
    } else {
      throw pcrlab::InputError("--format must be 'csv' or 'json'");
    }
  }
  return cfg;
}

int run_sweep_command(const CliOptions& opt) {
  const pcrlab::ExperimentConfig cfg = load_config(opt);
  const auto rows = pcrlab::run_sweep(cfg, opt.workers);
  pcrlab::emit(rows, cfg.output_format, cfg.output_path);
  std::cout << "wrote " << rows.size() << " rows to " << cfg.output_path << "\n";
  pcrlab::print_summary(rows, std::cout);
  return kExitPass;
}

int run_verify_command(const CliOptions& opt) {
  const pcrlab::ExperimentConfig cfg = load_config(opt);
  const pcrlab::SuiteReport report = pcrlab::run_suite(cfg, opt.suite);
  const nlohmann::json j = pcrlab::suite_to_json(report);
  std::cout << j.dump(2) << "\n";
  if (opt.out.has_value()) {
    std::ofstream out(*opt.out);
    if (!out) throw std::runtime_error("cannot open '" + *opt.out + "' for the verify report");
    out << j.dump(2) << "\n";
  }
  return report.passed() ? kExitPass : kExitCheckFailure;
}

int run_spectrum_command(const CliOptions& opt) {
  const pcrlab::ExperimentConfig cfg = load_config(opt);
  const pcrlab::CovarianceSpectrum spectrum = cfg.spectrum.build();
  const int p = spectrum.dim();

  std::cout << "spectrum: kind=" << pcrlab::to_string(spectrum.kind()) << " p=" << p << "\n";
  std::cout << "  trace = " << pcrlab::format_double17(spectrum.trace())
            << ", tr(Sigma^2) = " << pcrlab::format_double17(pcrlab::tail_trace(spectrum, 0, 2))
            << ", truncation tail bound = "
            << pcrlab::format_double17(spectrum.truncation_tail_bound()) << "\n";

  std::cout << "  leading eigenvalues:";
  for (int j = 0; j < std::min(p, 8); ++j) {
    std::cout << " " << pcrlab::format_double17(spectrum.eigenvalue(j));
  }
  if (p > 8) {
    std::cout << " ... " << pcrlab::format_double17(spectrum.eigenvalue(p - 1));
  }
  std::cout << "\n";

  std::cout << "  tail traces (d, tr_>d, tr_>d of Sigma^2, effective rank):\n";
  const auto d_list = cfg.d_grid.materialize(cfg.n_grid.front(), p);
  for (int d : d_list) {
    if (d >= p) continue;
    const double lambda_next = spectrum.eigenvalue(d);
    const double ratio = lambda_next > 0.0 ? pcrlab::tail_trace(spectrum, d, 1) / lambda_next : 0.0;
    std::cout << "    " << d << "  " << pcrlab::format_double17(pcrlab::tail_trace(spectrum, d, 1))
              << "  " << pcrlab::format_double17(pcrlab::tail_trace(spectrum, d, 2)) << "  "
              << pcrlab::format_double17(ratio) << "\n";
  }

  std::cout << "  effective-rank crossings (B = " << cfg.constants.B << "):\n";
  for (int n : cfg.n_grid) {
    const auto j = pcrlab::effective_rank_curve(spectrum, n, cfg.constants.B).j_star;
    std::cout << "    n=" << n << "  j* = " << (j.has_value() ? std::to_string(*j) : "absent")
              << "\n";
  }

  std::cout << "  effective dimension N(mu):\n";
  std::vector<double> mus;
  if (spectrum.eigenvalue(p - 1) > 0.0) mus.push_back(0.0);
  for (double mu = spectrum.eigenvalue(p - 1); mu <= 10.0 * spectrum.eigenvalue(0); mu *= 10.0) {
    mus.push_back(mu);
    if (mu == 0.0) break;
  }
  for (double mu : mus) {
    std::cout << "    mu=" << pcrlab::format_double17(mu) << "  N(mu)="
              << pcrlab::format_double17(pcrlab::effective_dimension(spectrum, mu)) << "\n";
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcrlab: principal component regression laboratory"};
  app.require_subcommand(1);

  CliOptions opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", opt.config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", opt.seed, "override the config base seed");
    sub->add_option("--out", opt.out, "override the output path");
  };

  CLI::App* sweep = app.add_subcommand("sweep", "run the configured sweep and emit rows");
  add_common(sweep);
  sweep->add_option("--workers", opt.workers, "replicate-level worker threads")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--format", opt.format, "output format: csv or json");

  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  add_common(verify);
  verify->add_option("--suite", opt.suite, "identities|classical|highdim|concentration")
      ->required();

  CLI::App* spectrum = app.add_subcommand("spectrum", "print spectrum diagnostics");
  add_common(spectrum);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInputError;
  }

  try {
    if (sweep->parsed()) return run_sweep_command(opt);
    if (verify->parsed()) return run_verify_command(opt);
    if (spectrum->parsed()) return run_spectrum_command(opt);
  } catch (const pcrlab::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
  return kExitInputError;
}
