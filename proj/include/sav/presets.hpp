#pragma once

#include "sav/errors.hpp"
#include "sav/field.hpp"
#include "sav/prng.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace sav {

/// One crystal seed patch: an axis-aligned square of the given side centered
/// at (cx, cy) carrying a hexagonal lattice of amplitude A and wavenumber q,
/// rotated by theta. Coordinates inside the patch are local to its center.
struct CrystalliteSpec {
  double cx = 0.0, cy = 0.0;
  double side = 0.0;
  double theta = 0.0;
  double mean_phi = 0.0;
  double amplitude = 0.0;
  double wavenumber = 0.0;
};

/// Constant background plus crystal lattices on the given patches:
/// phi = mean + A (cos(q yl / sqrt3) cos(q xl) - cos(2 q yl / sqrt3)/2),
/// xl = dx sin(theta) + dy cos(theta), yl = -dx cos(theta) + dy sin(theta).
inline Field crystallite_field(const Grid& grid, double background,
                               std::span<const CrystalliteSpec> patches) {
  for (const auto& p : patches) {
    if (!(p.amplitude > 0.0) || !(p.wavenumber > 0.0))
      throw config_error("crystallite_field: amplitude and wavenumber must be positive");
    const double h = 0.5 * p.side;
    if (p.cx - h < 0.0 || p.cx + h > grid.lx() || p.cy - h < 0.0 || p.cy + h > grid.ly())
      throw config_error("crystallite_field: patch extends outside the domain");
  }
  Field f(grid, background);
  for (const auto& p : patches) {
    const double s = std::sin(p.theta), c = std::cos(p.theta);
    const double q = p.wavenumber, a = p.amplitude;
    const double h = 0.5 * p.side;
    for (int i = 0; i < grid.nx(); ++i) {
      const double dx = grid.x(i) - p.cx;
      if (std::abs(dx) > h) continue;
      for (int j = 0; j < grid.ny(); ++j) {
        const double dy = grid.y(j) - p.cy;
        if (std::abs(dy) > h) continue;
        const double xl = dx * s + dy * c;
        const double yl = -dx * c + dy * s;
        f(i, j) = p.mean_phi +
                  a * (std::cos(q * yl / std::sqrt(3.0)) * std::cos(q * xl) -
                       0.5 * std::cos(2.0 * q * yl / std::sqrt(3.0)));
      }
    }
  }
  return f;
}

/// Deterministic named initial conditions. Random presets draw from the
/// counter-based generator at the flat row-major point index, so the same
/// (name, grid, seed) always yields the identical field.
///
///  - ac_cos:            0.1 cos(x) cos(y)
///  - ch_random:         0.25 + 0.4 Rand, Rand uniform in [-1,1] (not
///                       mean-corrected)
///  - pfc_random:        0.07 + 0.07 (Rand - sample mean), i.e. the draws are
///                       recentered so the field mean is exactly 0.07
///  - pfc_crystallites:  three seeded crystal patches (mean 0.285, A = 0.446,
///                       q = 0.66, side 40) in a 400 x 400 box
inline Field preset_ic(const std::string& name, const Grid& grid, std::uint64_t seed) {
  if (name == "ac_cos") {
    return sample_field(grid, [](double x, double y) { return 0.1 * std::cos(x) * std::cos(y); });
  }
  if (name == "ch_random") {
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.25 + 0.4 * rand_uniform(seed, i);
    return f;
  }
  if (name == "pfc_random") {
    Field f(grid);
    double mean = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = rand_uniform(seed, i);
      mean += f[i];
    }
    mean /= static_cast<double>(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.07 + 0.07 * (f[i] - mean);
    return f;
  }
  if (name == "pfc_crystallites") {
    const CrystalliteSpec patches[] = {
        {150.0, 150.0, 40.0, M_PI / 4.0, 0.285, 0.446, 0.66},
        {250.0, 300.0, 40.0, 0.0, 0.285, 0.446, 0.66},
        {300.0, 200.0, 40.0, -M_PI / 4.0, 0.285, 0.446, 0.66},
    };
    return crystallite_field(grid, 0.285, patches);
  }
  throw config_error("preset_ic: unknown preset '" + name + "'");
}

} // namespace sav
