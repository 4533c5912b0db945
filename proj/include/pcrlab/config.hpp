#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcrlab/errors.hpp"
#include "pcrlab/model.hpp"
#include "pcrlab/spectrum.hpp"

namespace pcrlab {

inline constexpr int kConfigSchemaVersion = 1;

struct SpectrumSpec {
  SpectrumKind kind = SpectrumKind::polynomial;
  double alpha = 2.0;
  std::vector<double> spikes;
  double bulk = 1.0;
  std::vector<double> values;
  int p = 1;

  CovarianceSpectrum build() const {
    switch (kind) {
      case SpectrumKind::exponential: return CovarianceSpectrum::exponential(alpha, p);
      case SpectrumKind::polynomial: return CovarianceSpectrum::polynomial(alpha, p);
      case SpectrumKind::spiked: return CovarianceSpectrum::spiked(spikes, bulk, p);
      case SpectrumKind::explicit_list: return CovarianceSpectrum::explicit_list(values);
    }
    throw InputError("spectrum spec: unknown kind");
  }
};

enum class FTrueKind { flat_unit, unit_mass_first, explicit_vec };

struct FTrueSpec {
  FTrueKind kind = FTrueKind::flat_unit;
  std::vector<double> values;

  Vector build(int p) const {
    switch (kind) {
      case FTrueKind::flat_unit:
        return Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
      case FTrueKind::unit_mass_first: {
        Vector f = Vector::Zero(p);
        f[0] = 1.0;
        return f;
      }
      case FTrueKind::explicit_vec: {
        if (static_cast<int>(values.size()) != p) {
          throw InputError("f_true: explicit vector length must equal the ambient dimension");
        }
        return Eigen::Map<const Vector>(values.data(), p);
      }
    }
    throw InputError("f_true: unknown kind");
  }
};

struct TheoryConstants {
  double B = 2.0;
  double c1 = 0.25;
  double t = 2.0;
};

enum class OutputFormat { csv, json };

struct DGrid {
  enum class Mode { list, all, automatic };
  Mode mode = Mode::list;
  std::vector<int> values;

  /// Resolve to a sorted, deduplicated list of levels for one (n, p) cell.
  std::vector<int> materialize(int n, int p) const {
    const int cap = std::min(n, p);
    std::vector<int> out;
    switch (mode) {
      case Mode::list:
        out = values;
        break;
      case Mode::all:
        out.resize(cap + 1);
        for (int d = 0; d <= cap; ++d) out[d] = d;
        break;
      case Mode::automatic:
        out.push_back(0);
        for (int d = 1; d < cap; d *= 2) out.push_back(d);
        out.push_back(cap);
        break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

struct ExperimentConfig {
  SpectrumSpec spectrum;
  CoefficientLaw law = CoefficientLaw::gaussian;
  std::vector<int> n_grid;
  DGrid d_grid;
  FTrueSpec f_true;
  double sigma = 1.0;
  int replicates = 1;
  std::uint64_t base_seed = 1;
  TheoryConstants constants;
  std::string output_path = "sweep.csv";
  OutputFormat output_format = OutputFormat::csv;

  void validate() const {
    if (n_grid.empty()) throw InputError("config: n_grid must be nonempty");
    for (int n : n_grid) {
      if (n < 1) throw InputError("config: n values must be >= 1");
    }
    if (d_grid.mode == DGrid::Mode::list) {
      if (d_grid.values.empty()) throw InputError("config: d_grid must be nonempty");
      for (int d : d_grid.values) {
        if (d < 0) throw InputError("config: d values must be >= 0");
      }
    }
    if (replicates < 1) throw InputError("config: replicates must be >= 1");
    if (!(sigma >= 0.0)) throw InputError("config: sigma must be >= 0");
    if (!(constants.B > 1.0)) throw InputError("config: constants.B must be > 1");
    if (!(constants.c1 > 0.0)) throw InputError("config: constants.c1 must be > 0");
    if (!(constants.t >= 1.0)) throw InputError("config: constants.t must be >= 1");
    spectrum.build();  // surfaces parameter errors before any computation
  }

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load_file(const std::string& path);
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) {
      throw InputError("config: unknown key '" + item.key() + "' in " + where);
    }
  }
}

inline double require_number(const nlohmann::json& j, const std::string& key,
                             const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw InputError("config: " + where + " needs numeric '" + key + "'");
  }
  return j.at(key).get<double>();
}

inline std::vector<double> number_list(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InputError("config: " + where + " must be a nonempty array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError("config: " + where + " entries must be numeric");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("config: top level must be an object");
  detail::reject_unknown_keys(
      j,
      {"schema_version", "spectrum", "law", "n_grid", "d_grid", "f_true", "sigma", "replicates",
       "base_seed", "constants", "output"},
      "top level");

  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != kConfigSchemaVersion) {
    throw InputError("config: schema_version must be the integer " +
                     std::to_string(kConfigSchemaVersion));
  }

  ExperimentConfig cfg;

  if (!j.contains("spectrum") || !j.at("spectrum").is_object()) {
    throw InputError("config: missing 'spectrum' object");
  }
  {
    const auto& s = j.at("spectrum");
    detail::reject_unknown_keys(s, {"kind", "alpha", "spikes", "bulk", "eigenvalues", "p"},
                                "spectrum");
    const std::string kind = s.value("kind", "");
    if (kind == "exponential") {
      cfg.spectrum.kind = SpectrumKind::exponential;
      cfg.spectrum.alpha = detail::require_number(s, "alpha", "spectrum");
      cfg.spectrum.p = static_cast<int>(detail::require_number(s, "p", "spectrum"));
    } else if (kind == "polynomial") {
      cfg.spectrum.kind = SpectrumKind::polynomial;
      cfg.spectrum.alpha = detail::require_number(s, "alpha", "spectrum");
      cfg.spectrum.p = static_cast<int>(detail::require_number(s, "p", "spectrum"));
    } else if (kind == "spiked") {
      cfg.spectrum.kind = SpectrumKind::spiked;
      if (!s.contains("spikes")) throw InputError("config: spiked spectrum needs 'spikes'");
      cfg.spectrum.spikes = detail::number_list(s.at("spikes"), "spectrum.spikes");
      cfg.spectrum.bulk = detail::require_number(s, "bulk", "spectrum");
      cfg.spectrum.p = static_cast<int>(detail::require_number(s, "p", "spectrum"));
    } else if (kind == "explicit") {
      cfg.spectrum.kind = SpectrumKind::explicit_list;
      if (!s.contains("eigenvalues")) throw InputError("config: explicit spectrum needs 'eigenvalues'");
      cfg.spectrum.values = detail::number_list(s.at("eigenvalues"), "spectrum.eigenvalues");
      cfg.spectrum.p = static_cast<int>(cfg.spectrum.values.size());
    } else {
      throw InputError("config: spectrum.kind must be one of exponential|polynomial|spiked|explicit");
    }
  }

  if (j.contains("law")) {
    if (!j.at("law").is_string()) throw InputError("config: law must be a string");
    cfg.law = coefficient_law_from_string(j.at("law").get<std::string>());
  }

  if (!j.contains("n_grid")) throw InputError("config: missing 'n_grid'");
  for (double v : detail::number_list(j.at("n_grid"), "n_grid")) {
    cfg.n_grid.push_back(static_cast<int>(v));
  }

  if (!j.contains("d_grid")) throw InputError("config: missing 'd_grid'");
  {
    const auto& d = j.at("d_grid");
    if (d.is_string()) {
      const std::string mode = d.get<std::string>();
      if (mode == "all") {
        cfg.d_grid.mode = DGrid::Mode::all;
      } else if (mode == "auto") {
        cfg.d_grid.mode = DGrid::Mode::automatic;
      } else {
        throw InputError("config: d_grid string must be 'all' or 'auto'");
      }
    } else {
      cfg.d_grid.mode = DGrid::Mode::list;
      for (double v : detail::number_list(d, "d_grid")) {
        cfg.d_grid.values.push_back(static_cast<int>(v));
      }
    }
  }

  if (j.contains("f_true")) {
    const auto& f = j.at("f_true");
    if (!f.is_object()) throw InputError("config: f_true must be an object");
    detail::reject_unknown_keys(f, {"kind", "values"}, "f_true");
    const std::string kind = f.value("kind", "");
    if (kind == "flat_unit") {
      cfg.f_true.kind = FTrueKind::flat_unit;
    } else if (kind == "unit_mass_first") {
      cfg.f_true.kind = FTrueKind::unit_mass_first;
    } else if (kind == "explicit") {
      cfg.f_true.kind = FTrueKind::explicit_vec;
      if (!f.contains("values")) throw InputError("config: explicit f_true needs 'values'");
      cfg.f_true.values = detail::number_list(f.at("values"), "f_true.values");
    } else {
      throw InputError("config: f_true.kind must be flat_unit|unit_mass_first|explicit");
    }
  }

  if (j.contains("sigma")) cfg.sigma = detail::require_number(j, "sigma", "top level");
  if (j.contains("replicates")) {
    cfg.replicates = static_cast<int>(detail::require_number(j, "replicates", "top level"));
  }
  if (j.contains("base_seed")) {
    if (!j.at("base_seed").is_number_unsigned() && !j.at("base_seed").is_number_integer()) {
      throw InputError("config: base_seed must be an integer");
    }
    cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
  }

  if (j.contains("constants")) {
    const auto& c = j.at("constants");
    if (!c.is_object()) throw InputError("config: constants must be an object");
    detail::reject_unknown_keys(c, {"B", "c1", "t"}, "constants");
    if (c.contains("B")) cfg.constants.B = detail::require_number(c, "B", "constants");
    if (c.contains("c1")) cfg.constants.c1 = detail::require_number(c, "c1", "constants");
    if (c.contains("t")) cfg.constants.t = detail::require_number(c, "t", "constants");
  }

  if (j.contains("output")) {
    const auto& o = j.at("output");
    if (!o.is_object()) throw InputError("config: output must be an object");
    detail::reject_unknown_keys(o, {"path", "format"}, "output");
    if (o.contains("path")) {
      if (!o.at("path").is_string()) throw InputError("config: output.path must be a string");
      cfg.output_path = o.at("path").get<std::string>();
    }
    if (o.contains("format")) {
      const std::string fmt = o.at("format").get<std::string>();
      if (fmt == "csv") {
        cfg.output_format = OutputFormat::csv;
      } else if (fmt == "json") {
        cfg.output_format = OutputFormat::json;
      } else {
        throw InputError("config: output.format must be 'csv' or 'json'");
      }
    }
  }

  cfg.validate();
  return cfg;
}

inline ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config: JSON parse failure in '" + path + "': " + e.what());
  }
  return from_json(j);
}

}  // namespace pcrlab
