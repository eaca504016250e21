#pragma once

#include "sav/errors.hpp"
#include "sav/field.hpp"

#include <json.hpp>

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace sav {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian float64");

/// One phase-field series row: t,energy,log_r,xi,v_xi,mass.
/// Baselines reuse the log_r column for their modified-energy scalar
/// (r^2 for SAV, R for NSAV, E for SEMI). mass is the spatial mean of phi.
struct SeriesRecord {
  double t, energy, log_r, xi, v_xi, mass;
};

/// One Navier-Stokes series row: t,kinetic_energy,log_r,xi,max_div.
struct NsSeriesRecord {
  double t, kinetic_energy, log_r, xi, max_div;
};

/// CSV sink, one row per step, 17 significant digits.
class SeriesWriter {
public:
  SeriesWriter() = default;
  SeriesWriter(const std::string& path, const std::string& header) { open(path, header); }

  void open(const std::string& path, const std::string& header) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    out_.open(path);
    if (!out_) throw config_error("cannot open series output '" + path + "'");
    out_ << header << "\n";
  }

  bool is_open() const { return out_.is_open(); }

  void write(std::initializer_list<double> values) {
    if (!out_) return;
    char buf[32];
    bool first = true;
    for (double v : values) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      if (!first) out_ << ',';
      out_ << buf;
      first = false;
    }
    out_ << '\n';
  }

  /// Partial results should survive an aborted run.
  void flush() {
    if (out_) out_.flush();
  }

private:
  std::ofstream out_;
};

namespace detail {

inline std::string snapshot_stem(const std::string& base, double t) {
  char label[32];
  std::snprintf(label, sizeof(label), "%g", t);
  return base + "_t" + label;
}

} // namespace detail

/// Writes <base>_t<time>.f64 (raw little-endian float64, row-major nx*ny)
/// plus a JSON sidecar with the grid geometry and run identity.
inline void write_snapshot(const std::string& base, const Field& f, double t,
                           const std::string& model, const std::string& scheme) {
  const std::string stem = detail::snapshot_stem(base, t);
  const auto parent = std::filesystem::path(stem).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);

  std::ofstream raw(stem + ".f64", std::ios::binary);
  if (!raw) throw config_error("cannot open snapshot output '" + stem + ".f64'");
  raw.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));

  const Grid& g = f.grid();
  nlohmann::json meta{{"nx", g.nx()},   {"ny", g.ny()},   {"lx", g.lx()}, {"ly", g.ly()},
                      {"t", t},         {"model", model}, {"scheme", scheme}};
  std::ofstream side(stem + ".json");
  side << meta.dump(2) << "\n";
}

struct Snapshot {
  nlohmann::json meta;
  std::vector<double> values;
};

inline Snapshot read_snapshot(const std::string& base, double t) {
  const std::string stem = detail::snapshot_stem(base, t);
  Snapshot s;
  std::ifstream side(stem + ".json");
  if (!side) throw config_error("missing snapshot sidecar '" + stem + ".json'");
  side >> s.meta;
  std::ifstream raw(stem + ".f64", std::ios::binary);
  if (!raw) throw config_error("missing snapshot data '" + stem + ".f64'");
  const std::size_t n =
      s.meta.at("nx").get<std::size_t>() * s.meta.at("ny").get<std::size_t>();
  s.values.resize(n);
  raw.read(reinterpret_cast<char*>(s.values.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
  if (!raw) throw config_error("snapshot data '" + stem + ".f64' is truncated");
  return s;
}

} // namespace sav
