#pragma once

#include "sav/models.hpp"
#include "sav/spectral.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sav {

enum class SchemeKind { FirstOrder, CrankNicolson, BDF2, BDF3, BDF4 };

inline int scheme_order(SchemeKind k) {
  switch (k) {
    case SchemeKind::FirstOrder: return 1;
    case SchemeKind::CrankNicolson: return 2;
    case SchemeKind::BDF2: return 2;
    case SchemeKind::BDF3: return 3;
    case SchemeKind::BDF4: return 4;
  }
  return 0;
}

inline const char* scheme_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::FirstOrder: return "esisav1";
    case SchemeKind::CrankNicolson: return "cn";
    case SchemeKind::BDF2: return "bdf2";
    case SchemeKind::BDF3: return "bdf3";
    case SchemeKind::BDF4: return "bdf4";
  }
  return "?";
}

/// Order-matched factor V(xi) multiplying the explicit nonlinear term.
/// Satisfies 1 - V(xi) = (1 - xi)^k exactly, so V(1) = 1 for every order.
inline double v_family(int k, double xi) {
  switch (k) {
    case 1: return xi;
    case 2: return xi * (2.0 - xi);
    case 3: return xi * (3.0 - 3.0 * xi + xi * xi);
    case 4: return xi * (2.0 - xi) * (2.0 - 2.0 * xi + xi * xi);
    default: throw std::invalid_argument("v_family: order must be in 1..4");
  }
}

/// One auxiliary-variable update in log space:
/// R^{n+1} = R^n / (1 + dt*d)  with d = (G mu_bar, mu_bar)/C >= 0.
/// Working with log R and log1p keeps the scheme well-defined when E/C is
/// large; R itself is never formed.
inline double update_log_r(double log_r, double dt, double d) {
  if (!(dt > 0.0)) throw std::invalid_argument("update_log_r: dt must be positive");
  if (!(d >= 0.0))
    throw numerical_error("update_log_r: negative dissipation d = " + std::to_string(d) +
                          " (mobility symbol must be positive semi-definite)");
  const double next = log_r - std::log1p(dt * d);
  if (!std::isfinite(next)) throw numerical_error("update_log_r: non-finite log R");
  return next;
}

/// xi = R^{n+1} / exp(E(phi*)/C), evaluated as exp(log R^{n+1} - E/C).
/// Underflow to 0 is benign (it switches the explicit nonlinear term off);
/// only overflow aborts.
inline double xi_value(double log_r_next, double scaled_energy) {
  const double arg = log_r_next - scaled_energy;
  if (!std::isfinite(arg) || arg > 700.0)
    throw numerical_error("xi_value: exp(" + std::to_string(arg) +
                          ") overflows; rerun with a larger scale_c");
  return std::exp(arg);
}

/// Stepper state for the exponential semi-implicit SAV schemes. The
/// auxiliary variable is kept as log R; Theorems guarantee it is finite and
/// non-increasing, and the update enforces both. history[0] is the newest
/// solution.
struct EsiSavState {
  std::vector<Field> history;
  double log_r = 0.0;
  long long step_index = 0;
  double dt = 0.0;

  // instrumentation and last-step diagnostics
  long long solve_count = 0;
  double last_xi = 1.0;
  double last_v = 1.0;

  // set by the Crank-Nicolson startup, consumed by the first CN step
  std::optional<Field> cn_half_predictor;

  const Field& phi() const { return history.front(); }
  double time() const { return static_cast<double>(step_index) * dt; }
};

/// Called after each completed step of size dt (startup included).
using StepSink =
    std::function<void(double t, const Field& phi, double log_r, double xi, double v)>;

inline EsiSavState make_esisav_state(const ModelSpec& m, const Field& phi0, double dt) {
  require_same_grid(m.grid, phi0.grid(), "make_esisav_state");
  if (!(dt > 0.0)) throw std::invalid_argument("make_esisav_state: dt must be positive");
  ensure_finite(phi0, "initial condition");
  EsiSavState st;
  st.history.push_back(phi0);
  st.dt = dt;
  st.log_r = energy(m, phi0) / m.scale_c; // R^0 = exp(E(phi^0)/C)
  return st;
}

namespace detail {

struct PredictorEval {
  Spectrum phi_hat; // transform of phi*
  Spectrum fp_hat;  // transform of F'(phi*)
  double dissipation; // (G mu_bar, mu_bar) with mu_bar = L phi* + F'(phi*)
  double energy;      // E(phi*)
};

inline PredictorEval eval_predictor(const ModelSpec& m, const Field& phi_star) {
  PredictorEval ev{forward(phi_star), forward(map_field(phi_star, m.f_prime)), 0.0, 0.0};
  const auto& l = m.l_symbol;
  const auto& g = m.g_symbol;
  double diss = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < ev.phi_hat.size(); ++i) {
    const std::complex<double> mu = l[i] * ev.phi_hat[i] + ev.fp_hat[i];
    diss += g[i] * std::norm(mu);
    quad += l[i] * std::norm(ev.phi_hat[i]);
  }
  const double w = m.grid.spectral_weight();
  ev.dissipation = w * diss;
  ev.energy = 0.5 * w * quad + nonlinear_energy(m, phi_star);
  return ev;
}

struct AuxUpdate {
  double xi;
  double v;
  double delta; // 1 - xi
};

/// Updates log R from the predictor dissipation and evaluates xi and V(xi).
/// xi is computed through expm1 so that 1 - V = (1 - xi)^k keeps full
/// relative precision even when xi is within machine epsilon of 1 (the
/// quantity the order diagnostic tracks).
inline AuxUpdate advance_aux(EsiSavState& st, const ModelSpec& m, double dissipation,
                             double energy_star, int k) {
  st.log_r = update_log_r(st.log_r, st.dt, dissipation / m.scale_c);
  const double arg = st.log_r - energy_star / m.scale_c;
  if (!std::isfinite(arg) || arg > 700.0)
    throw numerical_error("xi overflow: log R - E/C = " + std::to_string(arg) +
                          "; rerun with a larger scale_c");
  const double delta = -std::expm1(arg);
  double dk = delta;
  for (int i = 1; i < k; ++i) dk *= delta;
  AuxUpdate a{1.0 - delta, 1.0 - dk, delta};
  st.last_xi = a.xi;
  st.last_v = a.v;
  return a;
}

/// In-place solve of (a + c*g(k)*l(k)) x = rhs.
inline void solve_gl_in_place(double a, double c, const DiagonalSymbol& g,
                              const DiagonalSymbol& l, Spectrum& rhs, long long* counter) {
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    const double den = a + c * g[i] * l[i];
    if (std::abs(den) < 1e-14)
      throw numerical_error("implicit solve: singular " + describe_mode(rhs.grid(), i));
    rhs[i] /= den;
  }
  if (counter) ++*counter;
}

inline void push_history(EsiSavState& st, Field next, int capacity) {
  st.history.insert(st.history.begin(), std::move(next));
  if (static_cast<int>(st.history.size()) > capacity)
    st.history.resize(static_cast<std::size_t>(capacity));
  ++st.step_index;
}

inline Field history_combination(const EsiSavState& st, std::span<const double> coeffs) {
  return combine(std::span<const Field>(st.history.data(), coeffs.size()), coeffs);
}

} // namespace detail

/// Backward-Euler ESI-SAV step:
///   mu_bar = L phi^n + F'(phi^n),  log R^{n+1} via the dissipation of mu_bar,
///   xi^{n+1} = R^{n+1} / exp(E(phi^n)/C),
///   (I + dt G L) phi^{n+1} = phi^n - dt xi^{n+1} G F'(phi^n).
/// One constant-coefficient solve.
inline void step_first_order(EsiSavState& st, const ModelSpec& m) {
  if (st.history.empty()) throw std::logic_error("step_first_order: empty history");
  const auto ev = detail::eval_predictor(m, st.history.front());
  const auto aux = detail::advance_aux(st, m, ev.dissipation, ev.energy, 1);
  Spectrum rhs = ev.phi_hat;
  const auto& g = m.g_symbol;
  for (std::size_t i = 0; i < rhs.size(); ++i)
    rhs[i] -= st.dt * aux.xi * g[i] * ev.fp_hat[i];
  detail::solve_gl_in_place(1.0, st.dt, g, m.l_symbol, rhs, &st.solve_count);
  detail::push_history(st, inverse(rhs), 1);
}

/// Crank-Nicolson ESI-SAV step with predictor phi* = 3/2 phi^n - 1/2 phi^{n-1}
/// (the half-step startup value at n = 0):
///   (I + dt/2 G L) phi^{n+1} = phi^n - dt G ( 1/2 L phi^n + V(xi) F'(phi*) ),
/// with V(xi) = xi (2 - xi). One constant-coefficient solve.
inline void step_cn(EsiSavState& st, const ModelSpec& m) {
  Field phi_star(m.grid);
  if (st.step_index == 0) {
    if (!st.cn_half_predictor)
      throw std::logic_error("step_cn: first step requires startup (half-step predictor)");
    phi_star = *st.cn_half_predictor;
  } else {
    if (st.history.size() < 2) throw std::logic_error("step_cn: insufficient history");
    const double c[2] = {1.5, -0.5};
    phi_star = detail::history_combination(st, c);
  }
  const auto ev = detail::eval_predictor(m, phi_star);
  const auto aux = detail::advance_aux(st, m, ev.dissipation, ev.energy, 2);

  Spectrum rhs = forward(st.history.front());
  const auto& g = m.g_symbol;
  const auto& l = m.l_symbol;
  for (std::size_t i = 0; i < rhs.size(); ++i)
    rhs[i] = rhs[i] * (1.0 - 0.5 * st.dt * g[i] * l[i]) - st.dt * aux.v * g[i] * ev.fp_hat[i];
  detail::solve_gl_in_place(1.0, 0.5 * st.dt, g, l, rhs, &st.solve_count);
  detail::push_history(st, inverse(rhs), 2);
  st.cn_half_predictor.reset();
}

/// BDFk ESI-SAV step, k in {2,3,4}:
///   (b0 I + dt G L) phi^{n+1} = sum_j c_j phi^{n-j} - dt V(xi) G F'(phi*),
/// with the order-k extrapolated predictor phi*, mu_bar = L phi* + F'(phi*)
/// feeding the first-order log R update, and V from v_family(k, .).
inline void step_bdfk(EsiSavState& st, const ModelSpec& m, int k) {
  if (k < 2 || k > 4) throw std::invalid_argument("step_bdfk: k must be in 2..4");
  if (static_cast<int>(st.history.size()) < k)
    throw std::logic_error("step_bdfk: insufficient history; run startup first");

  static constexpr double lhs0[5] = {0, 0, 1.5, 11.0 / 6.0, 25.0 / 12.0};
  static constexpr double rhs2[] = {2.0, -0.5};
  static constexpr double rhs3[] = {3.0, -1.5, 1.0 / 3.0};
  static constexpr double rhs4[] = {4.0, -3.0, 4.0 / 3.0, -0.25};
  static constexpr double pred2[] = {2.0, -1.0};
  static constexpr double pred3[] = {3.0, -3.0, 1.0};
  static constexpr double pred4[] = {4.0, -6.0, 4.0, -1.0};
  const std::span<const double> rhs_c =
      k == 2 ? std::span<const double>(rhs2) : k == 3 ? std::span<const double>(rhs3)
                                                      : std::span<const double>(rhs4);
  const std::span<const double> pred_c =
      k == 2 ? std::span<const double>(pred2) : k == 3 ? std::span<const double>(pred3)
                                                       : std::span<const double>(pred4);

  const Field phi_star = detail::history_combination(st, pred_c);
  const auto ev = detail::eval_predictor(m, phi_star);
  const auto aux = detail::advance_aux(st, m, ev.dissipation, ev.energy, k);

  Spectrum rhs = forward(detail::history_combination(st, rhs_c));
  const auto& g = m.g_symbol;
  for (std::size_t i = 0; i < rhs.size(); ++i)
    rhs[i] -= st.dt * aux.v * g[i] * ev.fp_hat[i];
  detail::solve_gl_in_place(lhs0[k], st.dt, g, m.l_symbol, rhs, &st.solve_count);
  detail::push_history(st, inverse(rhs), k);
}

/// Startup from {phi^0}:
///  - FirstOrder: performs the first step, but feeds the R update with
///    mu_bar built from the semi-implicit prediction
///    (I + dt G L) phi_bar = phi^0 - dt G F'(phi^0) instead of phi^0.
///  - CrankNicolson: computes the half-step predictor
///    (I + dt/2 G L) phi^{*,1/2} = phi^0 - dt/2 G F'(phi^0) and stashes it.
///  - BDFk: fills the k-1 missing history levels by Crank-Nicolson
///    sub-stepping with substep dt^(k/2) (capped at dt), which keeps the
///    startup error at O(dt^{k+1}).
inline void startup(EsiSavState& st, const ModelSpec& m, SchemeKind target,
                    const StepSink& sink = {}) {
  if (st.step_index != 0 || st.history.size() != 1)
    throw std::logic_error("startup: state must be at step 0");
  const auto& g = m.g_symbol;
  const auto& l = m.l_symbol;

  switch (target) {
    case SchemeKind::FirstOrder: {
      const Field& phi0 = st.history.front();
      const Spectrum phi0_hat = forward(phi0);
      const Spectrum fp0_hat = forward(map_field(phi0, m.f_prime));
      Spectrum pred = phi0_hat;
      for (std::size_t i = 0; i < pred.size(); ++i) pred[i] -= st.dt * g[i] * fp0_hat[i];
      detail::solve_gl_in_place(1.0, st.dt, g, l, pred, &st.solve_count);
      const Field phi_bar = inverse(pred);
      const auto ev = detail::eval_predictor(m, phi_bar);
      const double e0 = energy(m, phi0);
      const auto aux = detail::advance_aux(st, m, ev.dissipation, e0, 1);
      Spectrum rhs = phi0_hat;
      for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs[i] -= st.dt * aux.xi * g[i] * fp0_hat[i];
      detail::solve_gl_in_place(1.0, st.dt, g, l, rhs, &st.solve_count);
      detail::push_history(st, inverse(rhs), 1);
      if (sink) sink(st.time(), st.phi(), st.log_r, st.last_xi, st.last_v);
      return;
    }
    case SchemeKind::CrankNicolson: {
      const Field& phi0 = st.history.front();
      Spectrum rhs = forward(phi0);
      const Spectrum fp0_hat = forward(map_field(phi0, m.f_prime));
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= 0.5 * st.dt * g[i] * fp0_hat[i];
      detail::solve_gl_in_place(1.0, 0.5 * st.dt, g, l, rhs, &st.solve_count);
      st.cn_half_predictor = inverse(rhs);
      return;
    }
    case SchemeKind::BDF2:
    case SchemeKind::BDF3:
    case SchemeKind::BDF4: {
      const int k = scheme_order(target);
      const double dt = st.dt;
      const double sub_raw = std::min(std::pow(dt, 0.5 * k), dt);
      const int n_sub = std::max(1, static_cast<int>(std::ceil(dt / sub_raw - 1e-9)));

      EsiSavState sub;
      sub.history.push_back(st.history.front());
      sub.dt = dt / n_sub;
      sub.log_r = st.log_r;
      startup(sub, m, SchemeKind::CrankNicolson);
      for (int level = 1; level < k; ++level) {
        for (int s = 0; s < n_sub; ++s) step_cn(sub, m);
        st.history.insert(st.history.begin(), sub.phi());
        if (sink) sink(level * dt, sub.phi(), sub.log_r, sub.last_xi, sub.last_v);
      }
      st.log_r = sub.log_r;
      st.last_xi = sub.last_xi;
      st.last_v = sub.last_v;
      st.solve_count += sub.solve_count;
      st.step_index = k - 1;
      return;
    }
  }
}

/// Advances by one or more steps of size dt, running startup transparently
/// the first time. Always completes at least one step per call; the sink sees
/// every completed step exactly once.
inline void advance(EsiSavState& st, const ModelSpec& m, SchemeKind kind,
                    const StepSink& sink = {}) {
  const auto emit = [&] {
    if (sink) sink(st.time(), st.phi(), st.log_r, st.last_xi, st.last_v);
  };
  if (st.step_index == 0) {
    switch (kind) {
      case SchemeKind::FirstOrder:
        startup(st, m, kind, sink); // performs the first step
        return;
      case SchemeKind::CrankNicolson:
        if (!st.cn_half_predictor) startup(st, m, kind, sink);
        step_cn(st, m);
        emit();
        return;
      default:
        startup(st, m, kind, sink); // fills k-1 levels
        return;
    }
  }
  switch (kind) {
    case SchemeKind::FirstOrder: step_first_order(st, m); break;
    case SchemeKind::CrankNicolson: step_cn(st, m); break;
    case SchemeKind::BDF2: step_bdfk(st, m, 2); break;
    case SchemeKind::BDF3: step_bdfk(st, m, 3); break;
    case SchemeKind::BDF4: step_bdfk(st, m, 4); break;
  }
  emit();
}

} // namespace sav
