#pragma once

#include "sav/baselines.hpp"
#include "sav/config.hpp"
#include "sav/esisav.hpp"
#include "sav/navier_stokes.hpp"
#include "sav/series.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace sav {

/// Least-squares slope of log(error) against log(dt).
inline double fitted_rate(std::span<const double> dts, std::span<const double> errors) {
  if (dts.size() != errors.size() || dts.size() < 2)
    throw std::invalid_argument("fitted_rate: need at least two (dt, error) pairs");
  const std::size_t n = dts.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(dts[i] > 0.0) || !(errors[i] > 0.0))
      throw std::invalid_argument("fitted_rate: dts and errors must be positive");
    x[i] = std::log(dts[i]);
    y[i] = std::log(errors[i]);
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

/// rate_i = log(e_{i-1}/e_i) / log(dt_{i-1}/dt_i); first entry is NaN.
inline std::vector<double> pairwise_rates(std::span<const double> dts,
                                          std::span<const double> errors) {
  std::vector<double> r(dts.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i < dts.size(); ++i)
    r[i] = std::log(errors[i - 1] / errors[i]) / std::log(dts[i - 1] / dts[i]);
  return r;
}

/// Number of steps for dt to reach t_end, requiring near-exact divisibility.
inline long long checked_steps(double t_end, double dt) {
  const long long n = std::llround(t_end / dt);
  if (n < 1 || std::abs(static_cast<double>(n) * dt - t_end) > 1e-12 * std::max(1.0, t_end))
    throw config_error("dt = " + std::to_string(dt) + " does not divide t_end = " +
                       std::to_string(t_end));
  return n;
}

struct StepStats {
  long long steps = 0;
  double seconds_per_step = 0.0;
  double solves_per_step = 0.0; // measured after startup
};

/// Called after each completed step with (t, phi, aux, xi, v). aux is the
/// scheme's modified-energy scalar: log R for ESI-SAV, r^2 for SAV, R for
/// NSAV, NaN for plain semi-implicit.
using PerStep = std::function<void(double, const Field&, double, double, double)>;

/// Runs n_steps of the chosen scheme from phi0 and returns the final field.
inline Field integrate(const ModelSpec& m, const Field& phi0, SchemeId scheme, double dt,
                       long long n_steps, const PerStep& per_step = {},
                       StepStats* stats = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  Field result(m.grid);
  double solves_per_step = 0.0;

  switch (scheme.family) {
    case SchemeId::Family::EsiSav: {
      if (n_steps < scheme.order())
        throw config_error("t_end/dt gives fewer steps than the scheme order needs");
      EsiSavState st = make_esisav_state(m, phi0, dt);
      StepSink sink;
      if (per_step)
        sink = [&](double t, const Field& phi, double log_r, double xi, double v) {
          per_step(t, phi, log_r, xi, v);
        };
      long long solves_mark = -1, steps_mark = 0;
      while (st.step_index < n_steps) {
        advance(st, m, scheme.kind, sink);
        if (solves_mark < 0) {
          solves_mark = st.solve_count;
          steps_mark = st.step_index;
        }
      }
      solves_per_step = (st.step_index > steps_mark)
                            ? static_cast<double>(st.solve_count - solves_mark) /
                                  static_cast<double>(st.step_index - steps_mark)
                            : static_cast<double>(st.solve_count) /
                                  static_cast<double>(st.step_index);
      result = st.phi();
      break;
    }
    case SchemeId::Family::Sav: {
      SavState st = make_sav_state(m, phi0);
      for (long long i = 1; i <= n_steps; ++i) {
        sav_step(st, m, dt);
        if (per_step) per_step(static_cast<double>(i) * dt, st.phi, st.r * st.r, 1.0, 1.0);
      }
      solves_per_step = static_cast<double>(st.solve_count) / static_cast<double>(n_steps);
      result = st.phi;
      break;
    }
    case SchemeId::Family::NewSav: {
      NewSavState st = make_new_sav_state(m, phi0);
      for (long long i = 1; i <= n_steps; ++i) {
        new_sav_step(st, m, dt);
        if (per_step)
          per_step(static_cast<double>(i) * dt, st.phi, st.big_r, st.last_xi,
                   st.last_multiplier);
      }
      solves_per_step = static_cast<double>(st.solve_count) / static_cast<double>(n_steps);
      result = st.phi;
      break;
    }
    case SchemeId::Family::Semi: {
      Field phi = phi0;
      long long solves = 0;
      for (long long i = 1; i <= n_steps; ++i) {
        phi = semi_implicit_step(phi, m, dt, &solves);
        if (per_step)
          per_step(static_cast<double>(i) * dt, phi,
                   std::numeric_limits<double>::quiet_NaN(), 1.0, 1.0);
      }
      solves_per_step = static_cast<double>(solves) / static_cast<double>(n_steps);
      result = phi;
      break;
    }
  }

  if (stats) {
    const auto t1 = std::chrono::steady_clock::now();
    stats->steps = n_steps;
    stats->seconds_per_step =
        std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(n_steps);
    stats->solves_per_step = solves_per_step;
  }
  return result;
}

struct EvolveReport {
  std::vector<SeriesRecord> series;
  long long steps = 0;
  bool modified_monotone = true; // log R (ESI-SAV), 1/2(L phi,phi)+r^2 (SAV), R (NSAV)
  bool energy_monotone = true;   // original E, with rounding slack
  bool finite = true;
  double mass_drift = 0.0; // max |mean(phi) - mean(phi0)|
  double energy_initial = 0.0;
  double energy_final = 0.0;
  double seconds_per_step = 0.0;
  double solves_per_step = 0.0;
};

/// Steps the configured scheme to t_end, streaming the series CSV and the
/// requested snapshots, and collecting monotonicity/finiteness verdicts.
inline EvolveReport run_evolution(const RunConfig& cfg) {
  const Grid grid = build_grid(cfg);
  const ModelSpec model = build_model(cfg, grid);
  const Field phi0 = build_ic(cfg, grid);
  const SchemeId scheme = parse_scheme(cfg.scheme);
  const long long n_steps = checked_steps(cfg.t_end, cfg.dt);

  SeriesWriter csv;
  if (!cfg.outputs.series.empty()) csv.open(cfg.outputs.series, "t,energy,log_r,xi,v_xi,mass");

  std::vector<double> snap_times = cfg.outputs.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t snap_idx = 0;
  const auto take_snapshots = [&](double t, const Field& phi) {
    while (snap_idx < snap_times.size() && snap_times[snap_idx] <= t + 0.5 * cfg.dt) {
      write_snapshot(cfg.outputs.snapshots, phi, snap_times[snap_idx], cfg.model.name,
                     cfg.scheme);
      ++snap_idx;
    }
  };

  EvolveReport rep;
  rep.steps = n_steps;
  const double mass0 = mean_value(phi0);
  rep.energy_initial = energy(model, phi0);
  rep.energy_final = rep.energy_initial;

  double prev_modified = std::numeric_limits<double>::infinity();
  double prev_energy = rep.energy_initial;
  switch (scheme.family) {
    case SchemeId::Family::EsiSav: prev_modified = rep.energy_initial / model.scale_c; break;
    case SchemeId::Family::Sav: {
      const double r0 = make_sav_state(model, phi0).r;
      prev_modified = quadratic_energy(model, phi0) + r0 * r0;
      break;
    }
    case SchemeId::Family::NewSav:
      prev_modified = make_new_sav_state(model, phi0).big_r;
      break;
    case SchemeId::Family::Semi: break;
  }

  if (!cfg.outputs.snapshots.empty()) take_snapshots(0.0, phi0);

  const PerStep per_step = [&](double t, const Field& phi, double aux, double xi, double v) {
    const double quad = quadratic_energy(model, phi);
    const double e = quad + nonlinear_energy(model, phi);
    const double mass = mean_value(phi);
    rep.energy_final = e;
    rep.mass_drift = std::max(rep.mass_drift, std::abs(mass - mass0));
    if (!std::isfinite(e) || !std::isfinite(mass) || !std::isfinite(xi)) rep.finite = false;

    double modified = aux;
    if (scheme.family == SchemeId::Family::Sav) modified = quad + aux; // aux = r^2
    if (scheme.family == SchemeId::Family::Semi) {
      aux = e;
      modified = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isnan(modified)) {
      // log R decays bit-exactly (log1p of a nonnegative number is
      // subtracted); the baseline scalars get rounding slack.
      const double slack = scheme.family == SchemeId::Family::EsiSav
                               ? 0.0
                               : 1e-9 * std::max(1.0, std::abs(prev_modified));
      if (modified > prev_modified + slack) rep.modified_monotone = false;
      if (!std::isfinite(modified)) rep.finite = false;
      prev_modified = modified;
    }
    if (e > prev_energy + 1e-9 * std::max(1.0, std::abs(prev_energy)))
      rep.energy_monotone = false;
    prev_energy = e;

    csv.write({t, e, aux, xi, v, mass});
    if (!cfg.outputs.snapshots.empty()) take_snapshots(t, phi);
    rep.series.push_back({t, e, aux, xi, v, mass});
  };

  StepStats stats;
  integrate(model, phi0, scheme, cfg.dt, n_steps, per_step, &stats);
  rep.seconds_per_step = stats.seconds_per_step;
  rep.solves_per_step = stats.solves_per_step;
  csv.flush();
  return rep;
}

struct ConvergenceRow {
  double dt = 0.0;
  double error = 0.0;
  double rate = std::numeric_limits<double>::quiet_NaN();
};

struct SchemeReport {
  std::string scheme;
  std::vector<ConvergenceRow> rows;
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  double seconds_per_step = 0.0;
  double solves_per_step = 0.0;
  std::string reference_scheme;
  double reference_dt = 0.0;
};

/// Temporal convergence study: self-generated reference (the scheme's own
/// run at reference_dt for first-order schemes, BDF4 otherwise), L-infinity
/// field errors at t_end, pairwise and fitted rates.
inline SchemeReport run_convergence(const RunConfig& cfg, std::vector<double> dts,
                                    double reference_dt) {
  if (dts.empty()) throw config_error("run_convergence: no dts given");
  std::sort(dts.begin(), dts.end(), std::greater<double>());
  if (!(reference_dt < dts.back()))
    throw config_error("run_convergence: reference_dt must be smaller than every dt");
  for (double dt : dts) checked_steps(cfg.t_end, dt);

  const Grid grid = build_grid(cfg);
  const ModelSpec model = build_model(cfg, grid);
  const Field phi0 = build_ic(cfg, grid);
  const SchemeId scheme = parse_scheme(cfg.scheme);
  const SchemeId ref_scheme =
      scheme.order() >= 2 ? SchemeId{SchemeId::Family::EsiSav, SchemeKind::BDF4} : scheme;

  SchemeReport rep;
  rep.scheme = scheme_id_name(scheme);
  rep.reference_scheme = scheme_id_name(ref_scheme);
  rep.reference_dt = reference_dt;

  const Field ref =
      integrate(model, phi0, ref_scheme, reference_dt, checked_steps(cfg.t_end, reference_dt));

  std::vector<double> errors;
  for (double dt : dts) {
    StepStats stats;
    const Field phi = integrate(model, phi0, scheme, dt, checked_steps(cfg.t_end, dt), {}, &stats);
    errors.push_back(max_abs_diff(phi, ref));
    rep.rows.push_back({dt, errors.back(), std::numeric_limits<double>::quiet_NaN()});
    rep.seconds_per_step = stats.seconds_per_step; // finest run wins
    rep.solves_per_step = stats.solves_per_step;
  }
  const auto rates = pairwise_rates(dts, errors);
  for (std::size_t i = 0; i < rates.size(); ++i) rep.rows[i].rate = rates[i];
  if (dts.size() >= 2) rep.fitted_rate = fitted_rate(dts, errors);
  return rep;
}

/// Head-to-head study over a shared (model, grid, IC, dt grid). Configs may
/// differ only in scheme and outputs.
inline std::vector<SchemeReport> run_comparison(std::span<const RunConfig> cfgs) {
  if (cfgs.empty()) throw config_error("run_comparison: no configs");
  const RunConfig& a = cfgs.front();
  for (const RunConfig& b : cfgs) {
    const bool same = a.model.name == b.model.name && a.model.epsilon == b.model.epsilon &&
                      a.model.beta == b.model.beta && a.model.nu == b.model.nu &&
                      a.model.scale_c == b.model.scale_c && a.grid.nx == b.grid.nx &&
                      a.grid.ny == b.grid.ny && a.grid.lx == b.grid.lx &&
                      a.grid.ly == b.grid.ly && a.ic.preset == b.ic.preset && a.seed == b.seed &&
                      a.t_end == b.t_end && a.dts == b.dts &&
                      a.reference_dt == b.reference_dt;
    if (!same)
      throw config_error("run_comparison: configs must share model, grid, IC and dt grid");
  }
  std::vector<SchemeReport> out;
  out.reserve(cfgs.size());
  for (const RunConfig& c : cfgs) out.push_back(run_convergence(c, c.dts, c.reference_dt));
  return out;
}

struct NsReport {
  std::vector<NsSeriesRecord> series;
  long long steps = 0;
  bool log_r_monotone = true;
  bool energy_monotone = true;
  bool finite = true;
  double max_divergence = 0.0;
  double seconds_per_step = 0.0;
};

/// Periodic Navier-Stokes run (Taylor-Green preset), NS series columns.
inline NsReport run_ns(const RunConfig& cfg) {
  if (cfg.model.name != "navier_stokes")
    throw config_error("run_ns: model.name must be 'navier_stokes'");
  if (cfg.ic.preset != "taylor_green" && cfg.ic.preset != "tg")
    throw config_error("run_ns: unknown velocity preset '" + cfg.ic.preset + "'");
  const Grid grid = build_grid(cfg);
  const long long n_steps = checked_steps(cfg.t_end, cfg.dt);
  NsState st = make_ns_state(taylor_green(grid, cfg.model.nu, 0.0), cfg.model.nu,
                             cfg.model.scale_c.value_or(1.0));

  SeriesWriter csv;
  if (!cfg.outputs.series.empty())
    csv.open(cfg.outputs.series, "t,kinetic_energy,log_r,xi,max_div");

  NsReport rep;
  rep.steps = n_steps;
  double prev_ke = kinetic_energy(st.u);
  double prev_log_r = st.log_r;
  const auto t0 = std::chrono::steady_clock::now();
  for (long long i = 1; i <= n_steps; ++i) {
    ns_step(st, cfg.dt, cfg.dealias_on());
    const double t = static_cast<double>(i) * cfg.dt;
    const double ke = kinetic_energy(st.u);
    const double div = max_divergence(st.u);
    rep.series.push_back({t, ke, st.log_r, st.last_xi, div});
    csv.write({t, ke, st.log_r, st.last_xi, div});
    if (st.log_r > prev_log_r) rep.log_r_monotone = false;
    if (ke > prev_ke + 1e-12 * std::max(1.0, prev_ke)) rep.energy_monotone = false;
    if (!std::isfinite(ke) || !std::isfinite(st.log_r)) rep.finite = false;
    rep.max_divergence = std::max(rep.max_divergence, div);
    prev_ke = ke;
    prev_log_r = st.log_r;
  }
  rep.seconds_per_step = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                             .count() /
                         static_cast<double>(n_steps);
  csv.flush();
  return rep;
}

inline json to_json(const SchemeReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"dt", row.dt},
                    {"error", row.error},
                    {"rate", std::isnan(row.rate) ? json(nullptr) : json(row.rate)}});
  return json{{"scheme", r.scheme},
              {"rows", rows},
              {"fitted_rate", r.fitted_rate},
              {"seconds_per_step", r.seconds_per_step},
              {"solves_per_step", r.solves_per_step},
              {"reference_scheme", r.reference_scheme},
              {"reference_dt", r.reference_dt}};
}

inline json to_json(const EvolveReport& r) {
  return json{{"steps", r.steps},
              {"modified_monotone", r.modified_monotone},
              {"energy_monotone", r.energy_monotone},
              {"finite", r.finite},
              {"mass_drift", r.mass_drift},
              {"energy_initial", r.energy_initial},
              {"energy_final", r.energy_final},
              {"seconds_per_step", r.seconds_per_step},
              {"solves_per_step", r.solves_per_step}};
}

inline json to_json(const NsReport& r) {
  return json{{"steps", r.steps},
              {"log_r_monotone", r.log_r_monotone},
              {"energy_monotone", r.energy_monotone},
              {"finite", r.finite},
              {"max_divergence", r.max_divergence},
              {"seconds_per_step", r.seconds_per_step}};
}

inline void print_report(std::ostream& os, const SchemeReport& r) {
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %-12s %-14s %-8s %-12s %-10s\n", "scheme", "dt",
                "error", "rate", "sec/step", "solves/step");
  os << line;
  for (const auto& row : r.rows) {
    if (std::isnan(row.rate))
      std::snprintf(line, sizeof(line), "%-10s %-12g %-14.5e %-8s %-12.3e %-10.3g\n",
                    r.scheme.c_str(), row.dt, row.error, "--", r.seconds_per_step,
                    r.solves_per_step);
    else
      std::snprintf(line, sizeof(line), "%-10s %-12g %-14.5e %-8.4f %-12.3e %-10.3g\n",
                    r.scheme.c_str(), row.dt, row.error, row.rate, r.seconds_per_step,
                    r.solves_per_step);
    os << line;
  }
}

} // namespace sav
