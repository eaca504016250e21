#pragma once

#include "sav/errors.hpp"
#include "sav/esisav.hpp"
#include "sav/models.hpp"
#include "sav/presets.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace sav {

using nlohmann::json;

/// Scheme identifier covering the ESI-SAV family and the baselines.
struct SchemeId {
  enum class Family { EsiSav, Sav, NewSav, Semi };
  Family family = Family::EsiSav;
  SchemeKind kind = SchemeKind::FirstOrder; // meaningful for EsiSav only

  int order() const { return family == Family::EsiSav ? scheme_order(kind) : 1; }
};

inline SchemeId parse_scheme(const std::string& name) {
  if (name == "esisav1" || name == "esisav" || name == "esi-sav")
    return {SchemeId::Family::EsiSav, SchemeKind::FirstOrder};
  if (name == "cn") return {SchemeId::Family::EsiSav, SchemeKind::CrankNicolson};
  if (name == "bdf2") return {SchemeId::Family::EsiSav, SchemeKind::BDF2};
  if (name == "bdf3") return {SchemeId::Family::EsiSav, SchemeKind::BDF3};
  if (name == "bdf4") return {SchemeId::Family::EsiSav, SchemeKind::BDF4};
  if (name == "sav") return {SchemeId::Family::Sav, SchemeKind::FirstOrder};
  if (name == "nsav" || name == "new_sav") return {SchemeId::Family::NewSav, SchemeKind::FirstOrder};
  if (name == "semi" || name == "semi_implicit")
    return {SchemeId::Family::Semi, SchemeKind::FirstOrder};
  throw config_error("unknown scheme '" + name + "'");
}

inline std::string scheme_id_name(const SchemeId& s) {
  switch (s.family) {
    case SchemeId::Family::EsiSav: return scheme_name(s.kind);
    case SchemeId::Family::Sav: return "sav";
    case SchemeId::Family::NewSav: return "nsav";
    case SchemeId::Family::Semi: return "semi";
  }
  return "?";
}

struct ModelConfig {
  std::string name = "allen_cahn"; // allen_cahn | cahn_hilliard | pfc | navier_stokes
  double epsilon = 0.1;
  double beta = 0.0;
  double nu = 0.1;                 // navier_stokes only
  std::optional<double> scale_c;   // default: 1 for AC and NS, |Omega| for CH/PFC
};

struct GridConfig {
  int nx = 128, ny = 128;
  double lx = 2.0 * M_PI, ly = 2.0 * M_PI;
};

struct IcConfig {
  std::string preset = "ac_cos";
};

struct OutputConfig {
  std::string series;    // CSV path; empty = no file
  std::string snapshots; // snapshot base path; empty = no snapshots
  std::vector<double> snapshot_times;
};

/// One harness run. Mirrors the JSON config file, snake_case keys.
/// dts/reference_dt/schemes are consumed by the converge and compare drivers.
struct RunConfig {
  ModelConfig model;
  std::string scheme = "esisav1";
  GridConfig grid;
  double dt = 0.1;
  double t_end = 1.0;
  IcConfig ic;
  std::uint64_t seed = 0;
  OutputConfig outputs;
  std::optional<bool> dealias; // default: off for phase fields, on for NS convection

  std::vector<double> dts;
  double reference_dt = 1e-4;
  std::vector<std::string> schemes;

  bool dealias_on() const { return dealias.value_or(model.name == "navier_stokes"); }
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error(std::string("config field '") + key + "': " + e.what());
  }
}

} // namespace detail

inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw config_error("config root must be a JSON object");
  RunConfig c;
  if (j.contains("model")) {
    const json& m = j.at("model");
    c.model.name = detail::get_or<std::string>(m, "name", c.model.name);
    c.model.epsilon = detail::get_or<double>(m, "epsilon", c.model.epsilon);
    c.model.beta = detail::get_or<double>(m, "beta", c.model.beta);
    c.model.nu = detail::get_or<double>(m, "nu", c.model.nu);
    if (m.contains("scale_c")) c.model.scale_c = m.at("scale_c").get<double>();
  }
  c.scheme = detail::get_or<std::string>(j, "scheme", c.scheme);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    c.grid.nx = detail::get_or<int>(g, "nx", c.grid.nx);
    c.grid.ny = detail::get_or<int>(g, "ny", c.grid.ny);
    c.grid.lx = detail::get_or<double>(g, "lx", c.grid.lx);
    c.grid.ly = detail::get_or<double>(g, "ly", c.grid.ly);
  }
  c.dt = detail::get_or<double>(j, "dt", c.dt);
  c.t_end = detail::get_or<double>(j, "t_end", c.t_end);
  if (j.contains("ic")) {
    const json& ic = j.at("ic");
    if (ic.is_string())
      c.ic.preset = ic.get<std::string>();
    else
      c.ic.preset = detail::get_or<std::string>(ic, "preset", c.ic.preset);
  }
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    c.outputs.series = detail::get_or<std::string>(o, "series", "");
    c.outputs.snapshots = detail::get_or<std::string>(o, "snapshots", "");
    c.outputs.snapshot_times =
        detail::get_or<std::vector<double>>(o, "snapshot_times", {});
  }
  if (j.contains("dealias")) c.dealias = j.at("dealias").get<bool>();
  c.dts = detail::get_or<std::vector<double>>(j, "dts", {});
  c.reference_dt = detail::get_or<double>(j, "reference_dt", c.reference_dt);
  c.schemes = detail::get_or<std::vector<std::string>>(j, "schemes", {});

  if (!(c.t_end > 0.0)) throw config_error("t_end must be positive");
  if (!(c.dt > 0.0)) throw config_error("dt must be positive");
  if (c.dt > c.t_end) throw config_error("dt must not exceed t_end");
  for (double t : c.outputs.snapshot_times)
    if (t < 0.0 || t > c.t_end) throw config_error("snapshot times must lie in [0, t_end]");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error("config parse error in '" + path + "': " + e.what());
  }
  return parse_config(j);
}

inline Grid build_grid(const RunConfig& c) {
  try {
    return make_grid(c.grid.nx, c.grid.ny, c.grid.lx, c.grid.ly);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
}

/// Builds the phase-field model named in the config. scale_c defaults to the
/// domain area, which keeps E/C at energy-density scale. Besides preventing
/// overflow of exp(E/C), this bounds the feedback amplification of xi drift:
/// perturbations off xi = 1 grow like exp(int (G mu, F') dt / C) during stiff
/// transients, so C must be comparable to the energy swing, not O(1).
inline ModelSpec build_model(const RunConfig& c, const Grid& grid) {
  const auto& m = c.model;
  const double scale_c = m.scale_c.value_or(grid.area());
  if (m.name == "allen_cahn") return allen_cahn(grid, m.epsilon, scale_c);
  if (m.name == "cahn_hilliard") return cahn_hilliard(grid, m.epsilon, m.beta, scale_c);
  if (m.name == "pfc") return pfc(grid, m.epsilon, scale_c);
  throw config_error("unknown model '" + m.name + "'");
}

inline Field build_ic(const RunConfig& c, const Grid& grid) {
  return preset_ic(c.ic.preset, grid, c.seed);
}

} // namespace sav
