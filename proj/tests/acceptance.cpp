// Acceptance suite: one test case per criterion, tagged [c1]..[c10].
// Each prints a PASS/FAIL line with the measured numbers before asserting.

#include "dense_oracle.hpp"
#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

using namespace sav;
using testutil::kTwoPi;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int idx, const std::string& name, bool pass, const std::string& detail) {
  std::printf("ACCEPTANCE %2d %-34s %s  %s\n", idx, name.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
}

// T=10 runs cross the spinodal transition and need scale_c well above the
// energy swing (3 |Omega| here) so xi drift stays out of the measurement;
// the short T=2 runs keep scale_c = 1, where the 1-V diagnostic has the
// strongest signal.
RunConfig example1_config(double t_end, double scale_c) {
  RunConfig cfg;
  cfg.model = {"allen_cahn", 0.1, 0.0, 0.1, scale_c};
  cfg.scheme = "esisav1";
  cfg.grid = {128, 128, kTwoPi, kTwoPi};
  cfg.dt = 0.5;
  cfg.t_end = t_end;
  cfg.ic.preset = "ac_cos";
  cfg.seed = 0;
  return cfg;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

} // namespace

TEST_CASE("first-order convergence reproduces Table 1", "[c1]") {
  Timer timer;
  const std::vector<double> dts = {1.0 / 2, 1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  const double paper[6] = {2.5907e-3, 1.2967e-3, 6.4678e-4, 3.2103e-4, 1.5796e-4, 7.6388e-5};

  const SchemeReport rep = run_convergence(example1_config(10.0, 12.0 * M_PI * M_PI), dts, 1e-4);
  print_report(std::cout, rep);

  // rate fitted over the last three refinements
  std::vector<double> tail_dts, tail_errs;
  for (std::size_t i = 3; i < 6; ++i) {
    tail_dts.push_back(rep.rows[i].dt);
    tail_errs.push_back(rep.rows[i].error);
  }
  const double tail_rate = fitted_rate(tail_dts, tail_errs);
  const bool rates_ok = tail_rate >= 0.85 && tail_rate <= 1.15;

  bool mags_ok = true;
  for (std::size_t i = 0; i < 6; ++i) {
    const double ratio = std::max(rep.rows[i].error / paper[i], paper[i] / rep.rows[i].error);
    std::printf("  dt=%-9g error=%.5e  paper=%.5e  ratio=%.2f %s\n", rep.rows[i].dt,
                rep.rows[i].error, paper[i], ratio, ratio <= 3.0 ? "" : "OUT OF BAND");
    mags_ok = mags_ok && ratio <= 3.0;
  }
  const double secs = timer.seconds();
  const bool time_ok = secs <= 300.0;

  const bool pass = rates_ok && mags_ok && time_ok;
  report(1, "first-order convergence (Table 1)", pass,
         fmt("fitted last-3 rate=%.3f, %.0f s", tail_rate, secs) +
             (mags_ok ? "" : " (coarse-dt entries outside the x3 band; see output)"));
  REQUIRE(rates_ok);
  REQUIRE(time_ok);
  // The x3 band over the full column: the two coarsest entries cannot be
  // met by this scheme family (it is floored by its semi-implicit core,
  // whose dt=1/2 error already exceeds three times the target value).
  REQUIRE(mags_ok);
}

TEST_CASE("high-order convergence reproduces Table 2", "[c2]") {
  Timer timer;
  const RunConfig cfg = example1_config(2.0, 1.0);
  const Grid grid = build_grid(cfg);
  const ModelSpec model = build_model(cfg, grid);
  const Field phi0 = build_ic(cfg, grid);
  const std::vector<double> dts = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};

  const Field ref = integrate(model, phi0, parse_scheme("bdf4"), 1e-4, checked_steps(2.0, 1e-4));

  struct Row {
    const char* scheme;
    double lo, hi;
  };
  const std::vector<Row> table = {
      {"cn", 1.85, 2.15}, {"bdf2", 1.85, 2.15}, {"bdf3", 2.8, 3.2}, {"bdf4", 3.8, 4.2}};

  bool all_ok = true;
  double bdf4_finest = 0.0;
  std::string detail;
  for (const Row& row : table) {
    std::vector<double> errors;
    for (double dt : dts) {
      const Field phi =
          integrate(model, phi0, parse_scheme(row.scheme), dt, checked_steps(2.0, dt));
      errors.push_back(max_abs_diff(phi, ref));
    }
    const auto rates = pairwise_rates(dts, errors);
    const double finest_rate = rates.back();
    const bool ok = finest_rate >= row.lo && finest_rate <= row.hi;
    all_ok = all_ok && ok;
    detail += std::string(row.scheme) + fmt(": e=%.3e rate=%.3f  ", errors.back(), finest_rate);
    if (std::string(row.scheme) == "bdf4") bdf4_finest = errors.back();
    std::printf("  %-5s errors:", row.scheme);
    for (double e : errors) std::printf(" %.4e", e);
    std::printf("  finest rate %.4f\n", finest_rate);
  }
  const bool bdf4_ok = bdf4_finest < 1e-7;
  const double secs = timer.seconds();
  const bool time_ok = secs <= 600.0;

  const bool pass = all_ok && bdf4_ok && time_ok;
  report(2, "high-order convergence (Table 2)", pass, detail + fmt("%.0f s", secs));
  REQUIRE(all_ok);
  REQUIRE(bdf4_ok);
  REQUIRE(time_ok);
}

TEST_CASE("unconditional modified-energy decay on CH Example 2", "[c3]") {
  Timer timer;
  bool all_monotone = true, all_finite = true;
  std::string detail;
  for (double dt : {0.01, 0.1, 0.5, 1.0, 5.0}) {
    RunConfig cfg;
    cfg.model = {"cahn_hilliard", 0.025, 2.0, 0.1, std::nullopt};
    cfg.scheme = "esisav1";
    cfg.grid = {256, 256, kTwoPi, kTwoPi};
    cfg.dt = dt;
    cfg.t_end = 200.0;
    cfg.ic.preset = "ch_random";
    cfg.seed = 2023;
    const EvolveReport rep = run_evolution(cfg);
    all_monotone = all_monotone && rep.modified_monotone;
    all_finite = all_finite && rep.finite;
    detail += fmt("dt=%g:", dt) + std::string(rep.modified_monotone ? "ok " : "VIOLATION ");
  }
  const double secs = timer.seconds();
  const bool time_ok = secs <= 900.0;
  const bool pass = all_monotone && all_finite && time_ok;
  report(3, "CH Example 2 log R decay", pass, detail + fmt("%.0f s", secs));
  REQUIRE(all_monotone);
  REQUIRE(all_finite);
  REQUIRE(time_ok);
}

TEST_CASE("V(xi) identity and order diagnostic", "[c4]") {
  bool identity_ok = true;
  for (int k = 2; k <= 4; ++k) {
    for (int s = 0; s < 100; ++s) {
      const double xi = 1.0 + 0.5 * rand_uniform(777, static_cast<std::uint64_t>(100 * k + s));
      const double err = std::abs(v_family(k, xi) - (1.0 - std::pow(1.0 - xi, k)));
      identity_ok = identity_ok && err <= 1e-15;
    }
  }

  const RunConfig cfg = example1_config(2.0, 1.0);
  const Grid grid = build_grid(cfg);
  const ModelSpec model = build_model(cfg, grid);
  const Field phi0 = build_ic(cfg, grid);
  const std::vector<double> dts = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};

  struct Probe {
    const char* scheme;
    int k;
  };
  bool slopes_ok = true;
  std::string detail = identity_ok ? "identity<=1e-15 " : "identity FAILED ";
  for (const Probe& p : {Probe{"cn", 2}, Probe{"bdf2", 2}, Probe{"bdf3", 3}, Probe{"bdf4", 4}}) {
    std::vector<double> devs;
    for (double dt : dts) {
      double max_dev = 0.0;
      integrate(model, phi0, parse_scheme(p.scheme), dt, checked_steps(2.0, dt),
                [&](double, const Field&, double, double, double v) {
                  max_dev = std::max(max_dev, std::abs(1.0 - v));
                });
      devs.push_back(max_dev);
    }
    const double slope = fitted_rate(dts, devs);
    const bool ok = std::abs(slope - p.k) <= 0.25;
    slopes_ok = slopes_ok && ok;
    detail += std::string(p.scheme) + fmt(" slope=%.3f ", slope);
  }
  const bool pass = identity_ok && slopes_ok;
  report(4, "V(xi) identity and 1-V scaling", pass, detail);
  REQUIRE(identity_ok);
  REQUIRE(slopes_ok);
}

TEST_CASE("dense-matrix oracle equivalence on 8x8", "[c5]") {
  Timer timer;
  const Grid grid = make_grid(8, 8, kTwoPi, kTwoPi);
  const Field phi0 = preset_ic("ac_cos", grid, 0);
  const double dt = 1e-3;
  bool all_ok = true;
  std::string detail;

  const auto check_esisav = [&](const ModelSpec& model, SchemeKind kind, const char* name) {
    const oracle::DenseOps ops(model);
    EsiSavState st = make_esisav_state(model, phi0, dt);
    oracle::DenseEsiSav dense(ops, kind, ops.from_field(phi0), dt);
    double worst = 0.0;
    while (st.step_index < 10) {
      advance(st, model, kind);
      while (dense.step_index < st.step_index) dense.advance();
      double diff = 0.0;
      for (int i = 0; i < ops.n; ++i)
        diff = std::max(diff, std::abs(st.phi()[static_cast<std::size_t>(i)] - dense.hist.front()(i)));
      const double r_diff = std::abs(std::exp(st.log_r) - dense.R) / dense.R;
      const double xi_diff = std::abs(st.last_xi - dense.last_xi);
      worst = std::max({worst, diff, r_diff, xi_diff});
    }
    all_ok = all_ok && worst <= 1e-10;
    detail += std::string(name) + fmt("=%.1e ", worst);
  };

  const ModelSpec ac = allen_cahn(grid, 0.1, 1.0);
  check_esisav(ac, SchemeKind::FirstOrder, "esisav1");
  check_esisav(ac, SchemeKind::CrankNicolson, "cn");
  check_esisav(ac, SchemeKind::BDF2, "bdf2");
  check_esisav(ac, SchemeKind::BDF3, "bdf3");
  check_esisav(ac, SchemeKind::BDF4, "bdf4");
  const ModelSpec ch = cahn_hilliard(grid, 0.1, 2.0, grid.area());
  check_esisav(ch, SchemeKind::FirstOrder, "esisav1(CH)");

  {
    const oracle::DenseOps ops(ac);
    SavState st = make_sav_state(ac, phi0);
    oracle::DenseSav dense(ops, ops.from_field(phi0));
    double worst = 0.0;
    for (int n = 0; n < 10; ++n) {
      sav_step(st, ac, dt);
      dense.step(dt);
      for (int i = 0; i < ops.n; ++i)
        worst = std::max(worst, std::abs(st.phi[static_cast<std::size_t>(i)] - dense.phi(i)));
      worst = std::max(worst, std::abs(st.r - dense.r));
    }
    all_ok = all_ok && worst <= 1e-10;
    detail += fmt("sav=%.1e ", worst);
  }
  {
    const oracle::DenseOps ops(ac);
    NewSavState st = make_new_sav_state(ac, phi0);
    oracle::DenseNewSav dense(ops, ops.from_field(phi0));
    double worst = 0.0;
    for (int n = 0; n < 10; ++n) {
      new_sav_step(st, ac, dt);
      dense.step(dt);
      for (int i = 0; i < ops.n; ++i)
        worst = std::max(worst, std::abs(st.phi[static_cast<std::size_t>(i)] - dense.phi(i)));
      worst = std::max(worst, std::abs(st.big_r - dense.R));
    }
    all_ok = all_ok && worst <= 1e-10;
    detail += fmt("nsav=%.1e ", worst);
  }
  {
    const oracle::DenseOps ops(ac);
    Field phi = phi0;
    oracle::Vec dense = ops.from_field(phi0);
    double worst = 0.0;
    for (int n = 0; n < 10; ++n) {
      phi = semi_implicit_step(phi, ac, dt);
      dense = oracle::dense_semi_step(ops, dense, dt);
      for (int i = 0; i < ops.n; ++i)
        worst = std::max(worst, std::abs(phi[static_cast<std::size_t>(i)] - dense(i)));
    }
    all_ok = all_ok && worst <= 1e-10;
    detail += fmt("semi=%.1e ", worst);
  }

  const double secs = timer.seconds();
  const bool time_ok = secs <= 120.0;
  const bool pass = all_ok && time_ok;
  report(5, "dense oracle equivalence (1e-10)", pass, detail + fmt("%.1f s", secs));
  REQUIRE(all_ok);
  REQUIRE(time_ok);
}

TEST_CASE("mass conservation over 1e4 steps", "[c6]") {
  const auto drift_of = [](const ModelSpec& m, const Field& ic) {
    const double mass0 = mean_value(ic);
    double drift = 0.0;
    integrate(m, ic, parse_scheme("esisav1"), 0.1, 10000,
              [&](double, const Field& phi, double, double, double) {
                drift = std::max(drift, std::abs(mean_value(phi) - mass0));
              });
    return drift;
  };

  const Grid g_ch = make_grid(64, 64, kTwoPi, kTwoPi);
  const double ch_drift =
      drift_of(cahn_hilliard(g_ch, 0.1, 2.0, g_ch.area()), preset_ic("ch_random", g_ch, 7));

  const Grid g_pfc = make_grid(64, 64, 128.0, 128.0);
  const double pfc_drift =
      drift_of(pfc(g_pfc, 0.25, g_pfc.area()), preset_ic("pfc_random", g_pfc, 8));

  const bool pass = ch_drift <= 1e-12 && pfc_drift <= 1e-12;
  report(6, "mass conservation (1e4 steps)", pass,
         fmt("CH drift=%.2e, PFC drift=%.2e", ch_drift, pfc_drift));
  REQUIRE(ch_drift <= 1e-12);
  REQUIRE(pfc_drift <= 1e-12);
}

TEST_CASE("one-solve property surfaced in compare output", "[c7]") {
  RunConfig base;
  base.model = {"allen_cahn", 0.1, 0.0, 0.1, 1.0};
  base.grid = {16, 16, kTwoPi, kTwoPi};
  base.dt = 0.25;
  base.t_end = 0.5;
  base.ic.preset = "ac_cos";
  base.dts = {0.25, 0.125};
  base.reference_dt = 0.01;

  std::vector<RunConfig> cfgs;
  for (const char* s : {"sav", "nsav", "semi", "esisav1"}) {
    RunConfig c = base;
    c.scheme = s;
    cfgs.push_back(c);
  }
  const auto reports = run_comparison(cfgs);
  double sav_solves = 0, esisav_solves = 0;
  for (const auto& r : reports) {
    print_report(std::cout, r);
    if (r.scheme == "sav") sav_solves = r.solves_per_step;
    if (r.scheme == "esisav1") esisav_solves = r.solves_per_step;
  }
  // higher-order members of the family also stay at one solve per step
  const RunConfig cfg1 = example1_config(2.0, 1.0);
  const Grid grid = build_grid(cfg1);
  const ModelSpec model = build_model(cfg1, grid);
  const Field phi0 = build_ic(cfg1, grid);
  bool high_order_ok = true;
  for (const char* s : {"cn", "bdf2", "bdf3", "bdf4"}) {
    StepStats stats;
    integrate(model, phi0, parse_scheme(s), 0.25, 8, {}, &stats);
    high_order_ok = high_order_ok && stats.solves_per_step == 1.0;
  }

  const bool pass = esisav_solves == 1.0 && sav_solves == 2.0 && high_order_ok;
  report(7, "one solve per ESI-SAV step, two per SAV", pass,
         fmt("esisav=%g solves/step, sav=%g solves/step", esisav_solves, sav_solves));
  REQUIRE(esisav_solves == 1.0);
  REQUIRE(sav_solves == 2.0);
  REQUIRE(high_order_ok);
}

TEST_CASE("Navier-Stokes Taylor-Green validation", "[c8]") {
  Timer timer;
  const Grid grid = make_grid(64, 64, kTwoPi, kTwoPi);
  const double nu = 0.1, T = 1.0;
  const VelocityField exact = taylor_green(grid, nu, T);

  std::vector<double> dts = {1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80, 1.0 / 160};
  std::vector<double> errors;
  bool monotone_ok = true, div_ok = true;
  for (double dt : dts) {
    NsState st = make_ns_state(taylor_green(grid, nu, 0.0), nu);
    double prev_ke = kinetic_energy(st.u), prev_log_r = st.log_r;
    const long long n = checked_steps(T, dt);
    for (long long i = 0; i < n; ++i) {
      ns_step(st, dt);
      const double ke = kinetic_energy(st.u);
      monotone_ok = monotone_ok && ke <= prev_ke && st.log_r <= prev_log_r;
      div_ok = div_ok && max_divergence(st.u) <= 1e-10;
      prev_ke = ke;
      prev_log_r = st.log_r;
    }
    errors.push_back(
        std::max(max_abs_diff(st.u.ux, exact.ux), max_abs_diff(st.u.uy, exact.uy)));
  }
  const double rate = fitted_rate(dts, errors);
  const bool rate_ok = std::abs(rate - 1.0) <= 0.15;
  const double secs = timer.seconds();
  const bool time_ok = secs <= 60.0;

  const bool pass = rate_ok && monotone_ok && div_ok && time_ok;
  report(8, "NS Taylor-Green (rate, decay, div-free)", pass,
         fmt("rate=%.3f, err(1/160)=%.3e, %.1f s", rate, errors.back(), secs));
  REQUIRE(rate_ok);
  REQUIRE(monotone_ok);
  REQUIRE(div_ok);
  REQUIRE(time_ok);
}

TEST_CASE("PFC crystallite growth stays dissipative", "[c9]") {
  Timer timer;
  const auto out_dir = std::filesystem::path("acceptance_out");
  std::filesystem::create_directories(out_dir);
  bool all_ok = true, finite_ok = true;
  std::string detail;
  for (double dt : {0.01, 0.1, 1.0}) {
    RunConfig cfg;
    cfg.model = {"pfc", 0.25, 0.0, 0.1, std::nullopt};
    cfg.scheme = "esisav1";
    cfg.grid = {256, 256, 400.0, 400.0};
    cfg.dt = dt;
    cfg.t_end = 500.0;
    cfg.ic.preset = "pfc_crystallites";
    if (dt == 0.1) {
      cfg.outputs.snapshots = (out_dir / "pfc_example4").string();
      cfg.outputs.snapshot_times = {0.0, 200.0, 250.0, 350.0, 400.0, 500.0};
    }
    const EvolveReport rep = run_evolution(cfg);
    all_ok = all_ok && rep.energy_monotone && rep.modified_monotone;
    finite_ok = finite_ok && rep.finite;
    detail += fmt("dt=%g E %.6g -> ", dt, rep.energy_initial) + fmt("%.6g", rep.energy_final) +
              std::string(rep.energy_monotone ? " ok; " : " UP; ");
  }
  const double secs = timer.seconds();
  const bool time_ok = secs <= 1200.0;
  const bool pass = all_ok && finite_ok && time_ok;
  report(9, "PFC Example 4 energy decay", pass, detail + fmt("%.0f s", secs));
  REQUIRE(all_ok);
  REQUIRE(finite_ok);
  REQUIRE(time_ok);
}

TEST_CASE("baseline parity on Table 1", "[c10]") {
  RunConfig base = example1_config(10.0, 12.0 * M_PI * M_PI);
  base.dts = {1.0 / 2, 1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  base.reference_dt = 1e-4;
  std::vector<RunConfig> cfgs;
  for (const char* s : {"sav", "nsav", "semi", "esisav1"}) {
    RunConfig c = base;
    c.scheme = s;
    cfgs.push_back(c);
  }
  const auto reports = run_comparison(cfgs);
  for (const auto& r : reports) {
    print_report(std::cout, r);
    std::cout << "\n";
  }

  bool parity_ok = true;
  for (std::size_t d = 0; d < base.dts.size(); ++d) {
    double lo = reports[0].rows[d].error, hi = lo;
    for (const auto& r : reports) {
      lo = std::min(lo, r.rows[d].error);
      hi = std::max(hi, r.rows[d].error);
    }
    parity_ok = parity_ok && hi / lo <= 10.0;
  }
  bool rates_ok = true;
  std::string detail;
  for (const auto& r : reports) {
    double mean3 = 0.0;
    for (std::size_t i = r.rows.size() - 3; i < r.rows.size(); ++i) mean3 += r.rows[i].rate;
    mean3 /= 3.0;
    rates_ok = rates_ok && mean3 >= 0.8 && mean3 <= 1.2;
    detail += r.scheme + fmt("=%.3f ", mean3);
  }
  const bool pass = parity_ok && rates_ok;
  report(10, "baseline parity (errors and rates)", pass,
         fmt("parity ok=%g; mean last-3 rates: ", parity_ok ? 1 : 0) + detail);
  REQUIRE(parity_ok);
  REQUIRE(rates_ok);
}
