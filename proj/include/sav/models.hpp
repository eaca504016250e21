#pragma once

#include "sav/spectral.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace sav {

enum class ModelKind { AllenCahn, CahnHilliard, PFC };

inline const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::AllenCahn: return "allen_cahn";
    case ModelKind::CahnHilliard: return "cahn_hilliard";
    case ModelKind::PFC: return "pfc";
  }
  return "?";
}

/// A dissipative model: free energy E(phi) = 1/2 (phi, L phi) + int F(phi),
/// evolving by phi_t = -G mu with mu = L phi + F'(phi). L and G are
/// constant-coefficient operators stored as spectral multipliers; G must be
/// positive semi-definite. scale_c is the positive constant dividing E inside
/// the exponential auxiliary variable so exp(E/C) stays representable.
struct ModelSpec {
  ModelKind kind;
  Grid grid;
  DiagonalSymbol l_symbol;
  DiagonalSymbol g_symbol;
  std::function<double(double)> f_density;
  std::function<double(double)> f_prime;
  double epsilon = 0.0;
  double beta = 0.0;
  double scale_c = 1.0;
};

namespace detail {

inline void check_model_args(double epsilon, double scale_c, const char* who) {
  if (!(epsilon > 0.0)) throw std::invalid_argument(std::string(who) + ": epsilon must be positive");
  if (!(scale_c > 0.0)) throw std::invalid_argument(std::string(who) + ": scale_c must be positive");
}

} // namespace detail

/// Allen-Cahn: L = -eps^2 Lap, G = I, F(phi) = (phi^2-1)^2 / 4.
inline ModelSpec allen_cahn(Grid grid, double epsilon, double scale_c = 1.0) {
  detail::check_model_args(epsilon, scale_c, "allen_cahn");
  const double e2 = epsilon * epsilon;
  return ModelSpec{
      ModelKind::AllenCahn,
      grid,
      make_symbol(grid, [e2](double kx, double ky) { return e2 * (kx * kx + ky * ky); }),
      make_symbol(grid, [](double, double) { return 1.0; }),
      [](double p) { return 0.25 * (p * p - 1.0) * (p * p - 1.0); },
      [](double p) { return p * p * p - p; },
      epsilon,
      0.0,
      scale_c};
}

/// Stabilized Cahn-Hilliard: L = -eps^2 Lap + beta, G = -Lap,
/// F(phi) = (phi^2 - 1 - beta)^2 / 4.
inline ModelSpec cahn_hilliard(Grid grid, double epsilon, double beta, double scale_c) {
  detail::check_model_args(epsilon, scale_c, "cahn_hilliard");
  if (beta < 0.0) throw std::invalid_argument("cahn_hilliard: beta must be nonnegative");
  const double e2 = epsilon * epsilon;
  return ModelSpec{
      ModelKind::CahnHilliard,
      grid,
      make_symbol(grid, [e2, beta](double kx, double ky) { return e2 * (kx * kx + ky * ky) + beta; }),
      make_symbol(grid, [](double kx, double ky) { return kx * kx + ky * ky; }),
      [beta](double p) {
        const double w = p * p - 1.0 - beta;
        return 0.25 * w * w;
      },
      [beta](double p) { return (p * p - 1.0 - beta) * p; },
      epsilon,
      beta,
      scale_c};
}

/// Phase field crystal (Swift-Hohenberg energy): L = (1 + Lap)^2 kept
/// implicit, G = -Lap. The -eps*phi part of the potential goes to F' so L
/// stays positive semi-definite and every implicit solve is invertible.
inline ModelSpec pfc(Grid grid, double epsilon, double scale_c) {
  detail::check_model_args(epsilon, scale_c, "pfc");
  return ModelSpec{
      ModelKind::PFC,
      grid,
      make_symbol(grid,
                  [](double kx, double ky) {
                    const double w = 1.0 - (kx * kx + ky * ky);
                    return w * w;
                  }),
      make_symbol(grid, [](double kx, double ky) { return kx * kx + ky * ky; }),
      [epsilon](double p) { return 0.25 * p * p * p * p - 0.5 * epsilon * p * p; },
      [epsilon](double p) { return p * p * p - epsilon * p; },
      epsilon,
      0.0,
      scale_c};
}

/// Nonlinear energy int F(phi) by collocation quadrature.
inline double nonlinear_energy(const ModelSpec& m, const Field& phi) {
  require_same_grid(m.grid, phi.grid(), "nonlinear_energy");
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += m.f_density(phi[i]);
  return m.grid.cell_area() * s;
}

/// Quadratic energy 1/2 (phi, L phi), evaluated spectrally.
inline double quadratic_energy(const ModelSpec& m, const Field& phi) {
  require_same_grid(m.grid, phi.grid(), "quadratic_energy");
  const Spectrum ph = forward(phi);
  double quad = 0.0;
  for (std::size_t i = 0; i < ph.size(); ++i) quad += m.l_symbol[i] * std::norm(ph[i]);
  return 0.5 * m.grid.spectral_weight() * quad;
}

/// Total free energy E(phi) = 1/2 (phi, L phi) + int F(phi). Unscaled;
/// divide by scale_c before exponentiating.
inline double energy(const ModelSpec& m, const Field& phi) {
  return quadratic_energy(m, phi) + nonlinear_energy(m, phi);
}

/// mu = L phi + F'(phi).
inline Field chemical_potential(const ModelSpec& m, const Field& phi) {
  require_same_grid(m.grid, phi.grid(), "chemical_potential");
  Field mu = apply_symbol(m.l_symbol, phi);
  for (std::size_t i = 0; i < mu.size(); ++i) mu[i] += m.f_prime(phi[i]);
  return mu;
}

} // namespace sav
