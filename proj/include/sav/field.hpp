#pragma once

#include "sav/errors.hpp"
#include "sav/grid.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sav {

/// Real-valued scalar grid function, row-major nx*ny storage.
class Field {
public:
  Field() = default;
  explicit Field(Grid grid, double fill = 0.0)
      : grid_(std::move(grid)), values_(grid_.size(), fill) {}

  const Grid& grid() const { return grid_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator()(int ix, int iy) {
    return values_[static_cast<std::size_t>(ix) * grid_.ny() + iy];
  }
  double operator()(int ix, int iy) const {
    return values_[static_cast<std::size_t>(ix) * grid_.ny() + iy];
  }

  std::size_t size() const { return values_.size(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

private:
  Grid grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!a.same_as(b)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

/// Builds a field by sampling fn(x, y) at the collocation points.
template <class Fn>
Field sample_field(const Grid& grid, Fn&& fn) {
  Field f(grid);
  for (int i = 0; i < grid.nx(); ++i)
    for (int j = 0; j < grid.ny(); ++j) f(i, j) = fn(grid.x(i), grid.y(j));
  return f;
}

/// Pointwise map: out_i = fn(in_i).
template <class Fn>
Field map_field(const Field& f, Fn&& fn) {
  Field out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = fn(f[i]);
  return out;
}

/// Linear combination sum_j coeffs[j] * fields[j].
inline Field combine(std::span<const Field> fields, std::span<const double> coeffs) {
  if (fields.empty() || fields.size() != coeffs.size())
    throw std::invalid_argument("combine: size mismatch");
  Field out(fields[0].grid());
  for (std::size_t j = 0; j < fields.size(); ++j) {
    require_same_grid(out.grid(), fields[j].grid(), "combine");
    const double c = coeffs[j];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * fields[j][i];
  }
  return out;
}

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

inline double max_abs_diff(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double mean_value(const Field& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
  return s / static_cast<double>(f.size());
}

inline bool all_finite(const Field& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f[i])) return false;
  return true;
}

inline void ensure_finite(const Field& f, const char* what) {
  if (!all_finite(f)) throw numerical_error(std::string(what) + ": non-finite field values");
}

} // namespace sav
