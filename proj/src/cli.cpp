#include "fermitherm/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "CLI11.hpp"
#include "fermitherm/errors.hpp"
#include "fermitherm/experiments.hpp"

namespace fermitherm {

namespace {

struct Invocation {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  int jobs = 1;
  bool verbose = false;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string output_dir(const Invocation& inv) {
  if (!inv.out_dir.empty()) return inv.out_dir;
  if (const char* env = std::getenv("FERMITHERM_OUT"); env && *env) return env;
  return ".";
}

StudyConfig load_config(const Invocation& inv) {
  if (inv.config_path.empty()) throw ConfigError("--config PATH is required");
  nlohmann::json doc = load_json_file(inv.config_path);
  for (const auto& o : inv.overrides) apply_override(doc, o);
  return config_from_json(doc);
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const NonConvergence*>(&e)) return kExitNonConvergence;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const BoxTooLarge*>(&e) ||
      dynamic_cast<const DimensionMismatch*>(&e) || dynamic_cast<const AliasingError*>(&e)) {
    return kExitConfig;
  }
  if (dynamic_cast<const NotRegular*>(&e) || dynamic_cast<const SpectrumOutOfRange*>(&e) ||
      dynamic_cast<const NonHermitianKernel*>(&e) || dynamic_cast<const RangeError*>(&e)) {
    return kExitRegularity;
  }
  return kExitComputation;
}

int cmd_check_symbol(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const StudyConfig config = load_config(inv);
  const LatticeKernel cov = build_covariance(config);
  const RegularityReport r = check_regularity(cov, config.grid_n);
  const RegularityReport fine = check_regularity(cov, 2 * config.grid_n);
  const double drift = std::max(std::abs(r.min_value - fine.min_value), std::abs(r.max_value - fine.max_value));

  out << "symbol range  [" << num(r.min_value) << ", " << num(r.max_value) << "] on grid_n="
      << config.grid_n << "\n";
  out << "margin        " << num(r.margin) << "\n";
  out << "l1 norm       " << num(r.l1_norm) << "\n";
  out << "grid doubling range drift " << num(drift) << "\n";

  if (drift > defaults::kRegularityStability) {
    err << "error: regularity verdict not stable under grid doubling (drift " << num(drift) << ")\n";
    return kExitRegularity;
  }
  if (!r.is_regular || !fine.is_regular) {
    err << "error: covariance is not regular: symbol range leaves ]0,1[\n";
    return kExitRegularity;
  }
  const TruncatedKernel h = compose_wiener_levy(cov, config.grid_n, config.radius, config.tail_tol);
  const Symbol hs = symbol_from_kernel(h.kernel, config.grid_n);
  out << "h tail mass   " << num(h.tail_mass) << " (radius " << config.radius << ")\n";
  out << "h sup norm    " << num(operator_norm(hs)) << "\n";
  out << "h l1 norm     " << num(l1_norm(h.kernel)) << "\n";
  out << "regular: yes\n";
  return kExitOk;
}

int cmd_converge(const Invocation& inv, bool require_many_body, std::ostream& out, std::ostream& err) {
  const StudyConfig config = load_config(inv);
  if (require_many_body && config.many_body_L.empty()) {
    throw ConfigError("weak-gibbs needs a non-empty many_body_L");
  }
  if (inv.verbose) out << "config " << config_to_json(config).dump() << "\n";

  const ConvergenceReport report = run_convergence_study(config, inv.jobs);
  const std::filesystem::path dir(output_dir(inv));
  const std::string csv_path = (dir / (config.output + ".csv")).string();
  const std::string json_path = (dir / (config.output + ".json")).string();
  write_atomic(csv_path, convergence_csv(report));
  write_atomic(json_path, convergence_sidecar(report).dump(2) + "\n");

  const auto& f = report.functionals;
  out << "s = " << num(f.entropy) << "  e = " << num(f.energy) << "  p = " << num(f.pressure)
      << "  (grid_n " << f.grid_n << ", refinement gap " << num(f.refinement_gap) << ")\n";
  if (inv.verbose) {
    for (const auto& row : report.rows) {
      out << "L=" << row.one_particle.half_width << " S/|L|=" << num(row.one_particle.entropy_per_site)
          << " rel=" << num(row.one_particle.rel_entropy_per_site)
          << " surface=" << num(row.one_particle.surface_l1_per_site);
      if (row.many_body) {
        out << " log_c/|L|=" << num(row.many_body->log_c_per_site)
            << " ent_exact/|L|=" << num(row.many_body->rel_entropy_exact_per_site);
      }
      out << "\n";
    }
  }
  for (const auto& t : report.trends) {
    out << t.quantity << ": L=" << t.first_L << " " << num(t.first) << " -> L=" << t.last_L << " "
        << num(t.last) << (t.holds ? "  ok" : "  INCREASED") << "\n";
  }
  out << "wrote " << csv_path << " and " << json_path << "\n";
  if (!report.trends_hold()) {
    err << "error: [trend] an endpoint residual increased between the smallest and largest box\n";
    return kExitComputation;
  }
  return kExitOk;
}

int cmd_maxent(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const StudyConfig config = load_config(inv);
  const MaxEntReport report = max_entropy_study(config);
  const std::filesystem::path dir(output_dir(inv));
  const std::string csv_path = (dir / (config.output + "_maxent.csv")).string();
  write_atomic(csv_path, maxent_csv(report));

  bool dominated = true;
  for (const auto& c : report.cases) {
    out << "n=" << c.sites << " gaussian=" << num(c.gaussian_entropy) << " optimum=" << num(c.optimal_entropy)
        << " gap=" << num(c.gap) << " trace_distance=" << num(c.trace_distance)
        << " iterations=" << c.iterations << " perturbed=" << c.perturbed_states;
    if (c.perturbed_states > 0) out << " max_perturbed=" << num(c.max_perturbed_entropy);
    out << "\n";
    dominated = dominated && c.dominated;
  }
  out << "wrote " << csv_path << "\n";
  if (!dominated) {
    err << "error: [maxent] a perturbed feasible state exceeded the Gaussian entropy\n";
    return kExitComputation;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-volume thermodynamics of quasi-free lattice fermions", "fermitherm"};
  app.require_subcommand(1);
  app.fallthrough();

  Invocation inv;
  app.add_option("--config", inv.config_path, "study config (JSON)");
  app.add_option("--out", inv.out_dir, "output directory (default $FERMITHERM_OUT, else .)");
  app.add_option("--set", inv.overrides, "override a config key, e.g. --set covariance.a=0.2");
  app.add_option("--jobs", inv.jobs, "rows computed concurrently")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", inv.verbose, "print config and per-row values");

  auto* check = app.add_subcommand("check-symbol", "regularity of the covariance symbol and h diagnostics");
  auto* converge = app.add_subcommand("converge", "convergence study; writes CSV and JSON sidecar");
  auto* maxent = app.add_subcommand("maxent", "entropy maximization study on small boxes");
  auto* weak = app.add_subcommand("weak-gibbs", "converge with the many-body columns required");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (check->parsed()) return cmd_check_symbol(inv, out, err);
    if (converge->parsed()) return cmd_converge(inv, false, out, err);
    if (weak->parsed()) return cmd_converge(inv, true, out, err);
    if (maxent->parsed()) return cmd_maxent(inv, out, err);
  } catch (const Error& e) {
    err << "error: " << e.describe() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitComputation;
  }
  return kExitConfig;
}

}  // namespace fermitherm
