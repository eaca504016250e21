// savtk - experiment driver for the SAV-family spectral integrators.
//
// Subcommands: evolve, converge, compare, ns. Each reads a JSON config
// (--config) with optional flag overrides. Exit codes: 0 ok, 2 config error,
// 3 numerical failure, 4 check failed in --check mode.

#include "sav/sav.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

// Accepts "0.25" or "1/4" entries in a comma-separated list.
std::vector<double> parse_dt_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto slash = item.find('/');
    if (slash == std::string::npos) {
      out.push_back(std::stod(item));
    } else {
      const double num = std::stod(item.substr(0, slash));
      const double den = std::stod(item.substr(slash + 1));
      out.push_back(num / den);
    }
  }
  if (out.empty()) throw sav::config_error("empty dt list");
  return out;
}

struct CommonFlags {
  std::string config_path;
  std::string scheme, out, dts_text;
  double dt = 0.0;
  double reference_dt = 0.0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool check = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_dts) {
  cmd->add_option("--config", f.config_path, "JSON run configuration")->required();
  cmd->add_option("--dt", f.dt, "override time step");
  cmd->add_option("--scheme", f.scheme, "override scheme");
  cmd->add_option("--seed", f.seed, "override RNG seed")->each([&](const std::string&) {
    f.has_seed = true;
  });
  cmd->add_option("--out", f.out, "override output path (series CSV or report JSON)");
  cmd->add_flag("--check", f.check, "exit 4 if the run's built-in checks fail");
  if (with_dts) {
    cmd->add_option("--dts", f.dts_text, "comma-separated dt list (fractions allowed)");
    cmd->add_option("--reference-dt", f.reference_dt, "reference time step");
  }
}

sav::RunConfig load_with_overrides(const CommonFlags& f) {
  sav::RunConfig cfg = sav::load_config(f.config_path);
  if (f.dt > 0.0) cfg.dt = f.dt;
  if (!f.scheme.empty()) cfg.scheme = f.scheme;
  if (f.has_seed) cfg.seed = f.seed;
  if (!f.dts_text.empty()) cfg.dts = parse_dt_list(f.dts_text);
  if (f.reference_dt > 0.0) cfg.reference_dt = f.reference_dt;
  return cfg;
}

void write_report_json(const std::string& path, const sav::json& j) {
  std::ofstream out(path);
  if (!out) throw sav::config_error("cannot open report output '" + path + "'");
  out << j.dump(2) << "\n";
}

int run_evolve(const CommonFlags& flags) {
  sav::RunConfig cfg = load_with_overrides(flags);
  if (!flags.out.empty()) cfg.outputs.series = flags.out;
  const sav::EvolveReport rep = sav::run_evolution(cfg);
  std::printf("evolve: %s %s, %lld steps, E %.6g -> %.6g, modified monotone %s, %.3e s/step\n",
              cfg.model.name.c_str(), cfg.scheme.c_str(), rep.steps, rep.energy_initial,
              rep.energy_final, rep.modified_monotone ? "yes" : "NO", rep.seconds_per_step);
  if (flags.check && !(rep.finite && rep.modified_monotone)) {
    std::fprintf(stderr, "check failed: finite=%d modified_monotone=%d\n", rep.finite,
                 rep.modified_monotone);
    return 4;
  }
  return 0;
}

int run_converge(const CommonFlags& flags) {
  sav::RunConfig cfg = load_with_overrides(flags);
  if (cfg.dts.empty())
    throw sav::config_error("converge: provide dts via config or --dts");
  const sav::SchemeReport rep = sav::run_convergence(cfg, cfg.dts, cfg.reference_dt);
  sav::print_report(std::cout, rep);
  if (!flags.out.empty()) write_report_json(flags.out, sav::to_json(rep));
  if (flags.check) {
    for (const auto& row : rep.rows)
      if (!std::isfinite(row.error)) return 4;
  }
  return 0;
}

int run_compare(const CommonFlags& flags, const std::string& schemes_text) {
  sav::RunConfig base = load_with_overrides(flags);
  std::vector<std::string> schemes = base.schemes;
  if (!schemes_text.empty()) {
    schemes.clear();
    std::string item;
    std::stringstream ss(schemes_text);
    while (std::getline(ss, item, ','))
      if (!item.empty()) schemes.push_back(item);
  }
  if (schemes.empty()) schemes = {"sav", "nsav", "semi", "esisav1"};
  if (base.dts.empty()) throw sav::config_error("compare: provide dts via config or --dts");

  std::vector<sav::RunConfig> cfgs;
  for (const auto& s : schemes) {
    sav::RunConfig c = base;
    c.scheme = s;
    cfgs.push_back(std::move(c));
  }
  const auto reports = sav::run_comparison(cfgs);
  sav::json all = sav::json::array();
  for (const auto& r : reports) {
    sav::print_report(std::cout, r);
    std::cout << "\n";
    all.push_back(sav::to_json(r));
  }
  if (!flags.out.empty()) write_report_json(flags.out, all);
  return 0;
}

int run_ns_cmd(const CommonFlags& flags) {
  sav::RunConfig cfg = load_with_overrides(flags);
  if (!flags.out.empty()) cfg.outputs.series = flags.out;
  const sav::NsReport rep = sav::run_ns(cfg);
  std::printf("ns: nu=%g, %lld steps, log R monotone %s, KE monotone %s, max div %.3e\n",
              cfg.model.nu, rep.steps, rep.log_r_monotone ? "yes" : "NO",
              rep.energy_monotone ? "yes" : "NO", rep.max_divergence);
  if (flags.check &&
      !(rep.finite && rep.log_r_monotone && rep.max_divergence <= 1e-10)) {
    std::fprintf(stderr, "check failed: finite=%d log_r_monotone=%d max_div=%.3e\n", rep.finite,
                 rep.log_r_monotone, rep.max_divergence);
    return 4;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAV-family spectral time integrators for dissipative PDEs"};
  app.require_subcommand(1);

  CommonFlags evolve_f, converge_f, compare_f, ns_f;
  std::string schemes_text;

  add_common(app.add_subcommand("evolve", "time-step one configuration"), evolve_f, false);
  add_common(app.add_subcommand("converge", "temporal convergence study"), converge_f, true);
  auto* cmp = app.add_subcommand("compare", "multi-scheme comparison");
  add_common(cmp, compare_f, true);
  cmp->add_option("--schemes", schemes_text, "comma-separated scheme list");
  add_common(app.add_subcommand("ns", "Navier-Stokes Taylor-Green run"), ns_f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("evolve")) return run_evolve(evolve_f);
    if (app.got_subcommand("converge")) return run_converge(converge_f);
    if (app.got_subcommand("compare")) return run_compare(compare_f, schemes_text);
    if (app.got_subcommand("ns")) return run_ns_cmd(ns_f);
  } catch (const sav::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const sav::numerical_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
