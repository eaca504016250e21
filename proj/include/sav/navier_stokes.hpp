#pragma once

#include "sav/esisav.hpp"
#include "sav/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace sav {

/// Two-component velocity on a shared grid. Public operations keep the
/// spectral divergence at rounding level.
struct VelocityField {
  Field ux;
  Field uy;

  const Grid& grid() const { return ux.grid(); }
};

inline VelocityField make_velocity(Field ux, Field uy) {
  require_same_grid(ux.grid(), uy.grid(), "make_velocity");
  return VelocityField{std::move(ux), std::move(uy)};
}

namespace detail {

struct VelocitySpectra {
  Spectrum ux;
  Spectrum uy;
};

/// Removes the gradient part per mode: u_hat -= k (k . u_hat) / |k|^2.
inline void leray_project_in_place(VelocitySpectra& s) {
  const Grid& g = s.ux.grid();
  for (int i = 0; i < g.nx(); ++i) {
    const double kx = g.kx()[static_cast<std::size_t>(i)];
    for (int j = 0; j < g.ny(); ++j) {
      const double ky = g.ky()[static_cast<std::size_t>(j)];
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) continue; // mean mode untouched
      const std::size_t idx = static_cast<std::size_t>(i) * g.ny() + j;
      const std::complex<double> kdotu = kx * s.ux[idx] + ky * s.uy[idx];
      s.ux[idx] -= kx * kdotu / k2;
      s.uy[idx] -= ky * kdotu / k2;
    }
  }
}

/// (u . grad) u with derivatives spectral and products pointwise; optional
/// 2/3 truncation of the products.
inline VelocitySpectra convective_spectra(const VelocityField& u, bool dealias_on) {
  const Spectrum ux_hat = forward(u.ux);
  const Spectrum uy_hat = forward(u.uy);
  const Field dux_dx = inverse(derivative_x(ux_hat));
  const Field dux_dy = inverse(derivative_y(ux_hat));
  const Field duy_dx = inverse(derivative_x(uy_hat));
  const Field duy_dy = inverse(derivative_y(uy_hat));

  Field cx(u.grid()), cy(u.grid());
  for (std::size_t i = 0; i < cx.size(); ++i) {
    cx[i] = u.ux[i] * dux_dx[i] + u.uy[i] * dux_dy[i];
    cy[i] = u.ux[i] * duy_dx[i] + u.uy[i] * duy_dy[i];
  }
  VelocitySpectra out{forward(cx), forward(cy)};
  if (dealias_on) {
    dealias_in_place(out.ux);
    dealias_in_place(out.uy);
  }
  return out;
}

} // namespace detail

/// Spectral Leray projection onto divergence-free fields (periodic analogue
/// of the pressure constraint).
inline VelocityField leray_project(const VelocityField& u) {
  require_same_grid(u.ux.grid(), u.uy.grid(), "leray_project");
  detail::VelocitySpectra s{forward(u.ux), forward(u.uy)};
  detail::leray_project_in_place(s);
  return VelocityField{inverse(s.ux), inverse(s.uy)};
}

/// Convective term (u . grad) u in physical space.
inline VelocityField convective_term(const VelocityField& u, bool dealias_on = true) {
  require_same_grid(u.ux.grid(), u.uy.grid(), "convective_term");
  auto s = detail::convective_spectra(u, dealias_on);
  return VelocityField{inverse(s.ux), inverse(s.uy)};
}

/// Max-abs of the spectral divergence.
inline double max_divergence(const VelocityField& u) {
  Spectrum div = derivative_x(forward(u.ux));
  const Spectrum dy = derivative_y(forward(u.uy));
  for (std::size_t i = 0; i < div.size(); ++i) div[i] += dy[i];
  return max_abs(inverse(div));
}

/// Kinetic energy E(u) = 1/2 int |u|^2.
inline double kinetic_energy(const VelocityField& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.ux.size(); ++i) s += u.ux[i] * u.ux[i] + u.uy[i] * u.uy[i];
  return 0.5 * u.grid().cell_area() * s;
}

/// ESI-SAV state for the incompressible Navier-Stokes flow. nu is the
/// inverse Reynolds number; log R tracks exp(E(u)/C) in log space.
struct NsState {
  VelocityField u;
  double log_r = 0.0;
  double nu = 0.0;
  double scale_c = 1.0;
  long long step_index = 0;
  long long solve_count = 0;
  double last_xi = 1.0;
};

inline NsState make_ns_state(VelocityField u0, double nu, double scale_c = 1.0) {
  if (!(nu > 0.0)) throw std::invalid_argument("make_ns_state: nu must be positive");
  if (!(scale_c > 0.0)) throw std::invalid_argument("make_ns_state: scale_c must be positive");
  NsState st{leray_project(u0), 0.0, nu, scale_c, 0, 0, 1.0};
  st.log_r = kinetic_energy(st.u) / scale_c;
  return st;
}

/// First-order ESI-SAV step for periodic Navier-Stokes:
///   d = nu (grad u^n, grad u^n)/C,   log R^{n+1} = log R^n - log1p(dt d),
///   xi^{n+1} = exp(log R^{n+1} - E(u^n)/C),
///   (1 + dt nu |k|^2) u_hat^{n+1} = u_hat^n - dt xi^{n+1} P[(u . grad u)^n]_hat,
/// with P the Leray projector standing in for the pressure gradient.
inline void ns_step(NsState& st, double dt, bool dealias_on = true) {
  if (!(dt > 0.0)) throw std::invalid_argument("ns_step: dt must be positive");
  const Grid& g = st.u.grid();
  const Spectrum ux_hat = forward(st.u.ux);
  const Spectrum uy_hat = forward(st.u.uy);

  const double w = g.spectral_weight();
  double grad2 = 0.0, e2 = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    const double kx = g.kx()[static_cast<std::size_t>(i)];
    for (int j = 0; j < g.ny(); ++j) {
      const double ky = g.ky()[static_cast<std::size_t>(j)];
      const std::size_t idx = static_cast<std::size_t>(i) * g.ny() + j;
      const double m2 = std::norm(ux_hat[idx]) + std::norm(uy_hat[idx]);
      grad2 += (kx * kx + ky * ky) * m2;
      e2 += m2;
    }
  }
  const double d = st.nu * w * grad2 / st.scale_c;
  const double e_kin = 0.5 * w * e2;

  st.log_r = update_log_r(st.log_r, dt, d);
  const double xi = xi_value(st.log_r, e_kin / st.scale_c);
  st.last_xi = xi;

  auto conv = detail::convective_spectra(st.u, dealias_on);
  detail::leray_project_in_place(conv);

  Spectrum sx(g), sy(g);
  for (int i = 0; i < g.nx(); ++i) {
    const double kx = g.kx()[static_cast<std::size_t>(i)];
    for (int j = 0; j < g.ny(); ++j) {
      const double ky = g.ky()[static_cast<std::size_t>(j)];
      const std::size_t idx = static_cast<std::size_t>(i) * g.ny() + j;
      const double den = 1.0 + dt * st.nu * (kx * kx + ky * ky);
      sx[idx] = (ux_hat[idx] - dt * xi * conv.ux[idx]) / den;
      sy[idx] = (uy_hat[idx] - dt * xi * conv.uy[idx]) / den;
    }
  }
  ++st.solve_count;
  st.u = VelocityField{inverse(sx), inverse(sy)};
  ++st.step_index;
}

/// Pressure recovered from the periodic Poisson problem
/// Lap p = -div(u . grad u), zero-mean normalization.
inline Field pressure_diagnostic(const VelocityField& u, bool dealias_on = true) {
  auto conv = detail::convective_spectra(u, dealias_on);
  Spectrum div = derivative_x(conv.ux);
  const Spectrum dy = derivative_y(conv.uy);
  const Grid& g = u.grid();
  Spectrum p(g);
  for (int i = 0; i < g.nx(); ++i) {
    const double kx = g.kx()[static_cast<std::size_t>(i)];
    for (int j = 0; j < g.ny(); ++j) {
      const double ky = g.ky()[static_cast<std::size_t>(j)];
      const double k2 = kx * kx + ky * ky;
      const std::size_t idx = static_cast<std::size_t>(i) * g.ny() + j;
      p[idx] = (k2 == 0.0) ? 0.0 : (div[idx] + dy[idx]) / k2;
    }
  }
  return inverse(p);
}

/// Decaying Taylor-Green vortex u = (cos x sin y, -sin x cos y) e^{-2 nu t};
/// the standard closed-form validation flow on [0,2pi]^2.
inline VelocityField taylor_green(const Grid& grid, double nu, double t) {
  const double amp = std::exp(-2.0 * nu * t);
  return VelocityField{
      sample_field(grid, [amp](double x, double y) { return amp * std::cos(x) * std::sin(y); }),
      sample_field(grid, [amp](double x, double y) { return -amp * std::sin(x) * std::cos(y); })};
}

} // namespace sav
