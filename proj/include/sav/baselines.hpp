#pragma once

#include "sav/esisav.hpp"
#include "sav/models.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace sav {

/// Classical SAV state: r(t) = sqrt(E1(phi) + c0) with E1 = int F.
struct SavState {
  Field phi;
  double r = 0.0;
  double c0 = 0.0;
  long long step_index = 0;
  long long solve_count = 0;
};

/// New-SAV (theta-relaxed) state: R(t) = E(phi) + c0.
struct NewSavState {
  Field phi;
  double big_r = 0.0;
  double c0 = 0.0;
  std::function<double(double)> theta_rule; // dt -> theta
  long long step_index = 0;
  long long solve_count = 0;
  double last_xi = 1.0;
  double last_multiplier = 1.0; // theta + (1-theta) xi
};

inline SavState make_sav_state(const ModelSpec& m, const Field& phi0) {
  require_same_grid(m.grid, phi0.grid(), "make_sav_state");
  const double e1 = nonlinear_energy(m, phi0);
  // The source assumes E1 bounded below but names no constant; anchor the
  // shift to the initial energy.
  const double c0 = 1.0 + std::abs(e1);
  return SavState{phi0, std::sqrt(e1 + c0), c0, 0, 0};
}

inline NewSavState make_new_sav_state(const ModelSpec& m, const Field& phi0) {
  require_same_grid(m.grid, phi0.grid(), "make_new_sav_state");
  const double e = energy(m, phi0);
  const double c0 = 1.0 + std::abs(e);
  return NewSavState{phi0, e + c0, c0, [](double dt) { return 1.0 + dt; }, 0, 0, 1.0, 1.0};
}

/// Classical first-order SAV step via the two-solve splitting
///   (I + dt G L) phi1 = phi^n,   (I + dt G L) phi2 = -dt G b^n,
///   b^n = F'(phi^n)/sqrt(E1(phi^n)+c0),
/// then the closed scalar equation for r^{n+1} and
/// phi^{n+1} = phi1 + r^{n+1} phi2. The modified energy
/// 1/2 (L phi, phi) + r^2 is non-increasing.
inline void sav_step(SavState& st, const ModelSpec& m, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sav_step: dt must be positive");
  const double e1 = nonlinear_energy(m, st.phi);
  if (!(e1 + st.c0 > 0.0))
    throw numerical_error("sav_step: E1 + c0 = " + std::to_string(e1 + st.c0) +
                          " is not positive; raise c0");
  const double denom = std::sqrt(e1 + st.c0);

  const Spectrum phi_hat = forward(st.phi);
  const Spectrum b_hat = forward(map_field(st.phi, [&](double p) { return m.f_prime(p) / denom; }));
  const auto& g = m.g_symbol;
  const auto& l = m.l_symbol;

  Spectrum phi1 = phi_hat;
  detail::solve_gl_in_place(1.0, dt, g, l, phi1, &st.solve_count);
  Spectrum phi2(m.grid);
  for (std::size_t i = 0; i < phi2.size(); ++i) phi2[i] = -dt * g[i] * b_hat[i];
  detail::solve_gl_in_place(1.0, dt, g, l, phi2, &st.solve_count);

  // r^{n+1} (1 - 1/2 (b, phi2)) = r^n + 1/2 (b, phi1 - phi^n); the
  // denominator is >= 1 because (b, phi2) = -dt (b, (I+dtGL)^{-1} G b) <= 0.
  const double b_phi1 = inner_product(b_hat, phi1);
  const double b_phi2 = inner_product(b_hat, phi2);
  const double b_phin = inner_product(b_hat, phi_hat);
  const double r_next = (st.r + 0.5 * (b_phi1 - b_phin)) / (1.0 - 0.5 * b_phi2);

  Spectrum next = phi1;
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += r_next * phi2[i];
  st.phi = inverse(next);
  st.r = r_next;
  ++st.step_index;
  if (!std::isfinite(st.r)) throw numerical_error("sav_step: non-finite r");
}

/// Theta-relaxed first-order SAV step. One constant-coefficient solve:
///   (I + dt G L) phi_bar = phi^n - dt G F'(phi^n),
/// mu_bar = L phi_bar + F'(phi_bar) feeds the scalar system
///   R^{n+1} = R^n - dt xi^{n+1} (G mu_bar, mu_bar),
///   xi^{n+1} = R^{n+1} / (E(phi_bar) + c0),
/// and by linearity phi^{n+1} = [theta + (1-theta) xi^{n+1}] phi_bar.
inline void new_sav_step(NewSavState& st, const ModelSpec& m, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("new_sav_step: dt must be positive");
  const auto& g = m.g_symbol;
  const auto& l = m.l_symbol;

  Spectrum bar = forward(st.phi);
  const Spectrum fp_hat = forward(map_field(st.phi, m.f_prime));
  for (std::size_t i = 0; i < bar.size(); ++i) bar[i] -= dt * g[i] * fp_hat[i];
  detail::solve_gl_in_place(1.0, dt, g, l, bar, &st.solve_count);
  const Field phi_bar = inverse(bar);

  const Spectrum fp_bar_hat = forward(map_field(phi_bar, m.f_prime));
  double diss = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < bar.size(); ++i) {
    const std::complex<double> mu = l[i] * bar[i] + fp_bar_hat[i];
    diss += g[i] * std::norm(mu);
    quad += l[i] * std::norm(bar[i]);
  }
  const double w = m.grid.spectral_weight();
  const double dissipation = w * diss;
  const double e_bar = 0.5 * w * quad + nonlinear_energy(m, phi_bar);
  const double denom = e_bar + st.c0;
  if (!(denom > 0.0))
    throw numerical_error("new_sav_step: E + c0 = " + std::to_string(denom) +
                          " is not positive; raise c0");

  const double xi = st.big_r / (denom + dt * dissipation);
  st.big_r = st.big_r * denom / (denom + dt * dissipation);
  const double theta = st.theta_rule(dt);
  const double mult = theta + (1.0 - theta) * xi;
  st.phi = map_field(phi_bar, [mult](double p) { return mult * p; });
  st.last_xi = xi;
  st.last_multiplier = mult;
  ++st.step_index;
  if (!std::isfinite(st.big_r)) throw numerical_error("new_sav_step: non-finite R");
}

/// Plain semi-implicit step: (I + dt G L) phi^{n+1} = phi^n - dt G F'(phi^n).
inline Field semi_implicit_step(const Field& phi, const ModelSpec& m, double dt,
                                long long* solve_count = nullptr) {
  require_same_grid(m.grid, phi.grid(), "semi_implicit_step");
  if (!(dt > 0.0)) throw std::invalid_argument("semi_implicit_step: dt must be positive");
  const auto& g = m.g_symbol;
  Spectrum rhs = forward(phi);
  const Spectrum fp_hat = forward(map_field(phi, m.f_prime));
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= dt * g[i] * fp_hat[i];
  detail::solve_gl_in_place(1.0, dt, g, m.l_symbol, rhs, solve_count);
  return inverse(rhs);
}

} // namespace sav
