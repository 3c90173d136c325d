#include "fermitherm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <thread>

#include <unistd.h>

#include "fermitherm/errors.hpp"
#include "fermitherm/fock_oracle.hpp"
#include "fermitherm/scalar.hpp"

namespace fermitherm {

namespace {

constexpr double kFeasibilityTol = 1e-10;
constexpr double kDominanceSlack = 1e-9;
// Endpoint trends compare values that are identically zero for trivial
// symbols; rounding at that level is not a trend.
constexpr double kTrendSlack = 1e-12;

// Runs `body`, tagging any library error with `stage` on the way out.
template <class F>
auto staged(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(stage);
    throw;
  }
}

void run_parallel(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp<int>(jobs, 1, static_cast<int>(std::max<std::size_t>(count, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  // Report the failure of the smallest index so the message does not depend
  // on scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ManyBodyRow many_body_row(const StudyConfig& config, const LatticeKernel& cov,
                          const LatticeKernel& h, int L) {
  const Box box(config.dimension, L);
  const FockRep fock(box, config.fock_cap);
  const Eigen::MatrixXcd c_box = compress(cov, box).values();
  const HermitianMatrix h_box = compress(h, box);

  ManyBodyRow row;
  const auto omega = staged("many-body L=" + std::to_string(L), [&] {
    return gaussian_state(fock, c_box);
  });
  staged("weak-gibbs L=" + std::to_string(L), [&] {
    const auto nu = gibbs_state(quadratic_hamiltonian(fock, h_box.values())).rho;
    row.log_c_per_site = weak_gibbs_log_constant(omega, nu) / box.size();
    row.rel_entropy_exact_per_site = relative_entropy_exact(omega, nu) / box.size();
  });
  if (static_cast<int>(box.size()) <= config.maxent.max_sites) {
    staged("maxent L=" + std::to_string(L), [&] {
      const auto r = max_entropy_solve(fock, c_box, config.maxent.tol, config.maxent.max_iter);
      row.maxent_gap = r.optimal_entropy - finite_entropy(c_box);
    });
  }
  return row;
}

}  // namespace

LatticeKernel build_covariance(const StudyConfig& config, double* tail_mass) {
  return staged("covariance", [&] {
    const int d = config.dimension;
    const auto& spec = config.covariance;
    if (tail_mass) *tail_mass = 0.0;
    switch (spec.family) {
      case CovarianceSpec::Family::Constant:
        return LatticeKernel::constant(d, spec.c);
      case CovarianceSpec::Family::Trig: {
        LatticeKernel::Entries e;
        e[Offset(d, 0)] = 0.5;
        for (int axis = 0; axis < d; ++axis) {
          Offset x(d, 0);
          x[axis] = 1;
          e[x] = spec.a / 2;
          x[axis] = -1;
          e[x] = spec.a / 2;
        }
        return LatticeKernel(d, 1, e);
      }
      case CovarianceSpec::Family::FermiDirac: {
        const double beta = spec.beta;
        const double mu = spec.mu;
        const Symbol s = Symbol::from_function(d, config.grid_n, [beta, mu](std::span<const double> k) {
          double eps = 0.0;
          for (double kj : k) eps -= 2.0 * std::cos(kj);
          return 1.0 / (1.0 + std::exp(beta * (eps - mu)));
        });
        auto t = kernel_from_symbol(s, config.radius, config.tail_tol);
        if (tail_mass) *tail_mass = t.tail_mass;
        return std::move(t.kernel);
      }
      case CovarianceSpec::Family::Kernel:
        return *spec.kernel;
    }
    throw ConfigError("unknown covariance family");
  });
}

SymbolPipeline build_pipeline(const StudyConfig& config) {
  double cov_tail = 0.0;
  LatticeKernel cov = build_covariance(config, &cov_tail);
  const auto regularity = staged("regularity", [&] { return check_regularity(cov, config.grid_n); });
  auto h = staged("wiener-levy", [&] {
    return compose_wiener_levy(cov, config.grid_n, config.radius, config.tail_tol);
  });
  Symbol h_symbol = staged("symbol", [&] { return symbol_from_kernel(h.kernel, config.grid_n); });
  const auto functionals = staged("brillouin", [&] { return density_functionals(h.kernel, config.grid_n); });
  return SymbolPipeline{std::move(cov), cov_tail, regularity, std::move(h), std::move(h_symbol), functionals};
}

double ConvergenceReport::entropy_residual(const ReportRow& row) const {
  return std::abs(row.one_particle.entropy_per_site - functionals.entropy);
}

double ConvergenceReport::pressure_residual(const ReportRow& row) const {
  return std::abs(row.one_particle.pressure_per_site - functionals.pressure);
}

double ConvergenceReport::energy_residual(const ReportRow& row) const {
  return std::abs(row.one_particle.energy_per_site - functionals.energy);
}

bool ConvergenceReport::trends_hold() const {
  return std::all_of(trends.begin(), trends.end(), [](const EndpointTrend& t) { return t.holds; });
}

ConvergenceReport run_convergence_study(const StudyConfig& config, int jobs) {
  validate(config);
  const SymbolPipeline pipe = build_pipeline(config);

  std::set<int> all_L(config.one_particle_L.begin(), config.one_particle_L.end());
  all_L.insert(config.many_body_L.begin(), config.many_body_L.end());
  const std::set<int> many_body(config.many_body_L.begin(), config.many_body_L.end());
  const std::vector<int> Ls(all_L.begin(), all_L.end());

  // One task per one-particle row and one per many-body row; the many-body
  // ones dominate the cost, so they go first.
  struct Task {
    std::size_t row;
    bool many_body;
  };
  std::vector<Task> tasks;
  for (std::size_t i = Ls.size(); i-- > 0;) {
    if (many_body.count(Ls[i])) tasks.push_back({i, true});
  }
  for (std::size_t i = 0; i < Ls.size(); ++i) tasks.push_back({i, false});

  std::vector<ReportRow> rows(Ls.size());
  run_parallel(tasks.size(), jobs, [&](std::size_t t) {
    const Task task = tasks[t];
    const int L = Ls[task.row];
    if (task.many_body) {
      rows[task.row].many_body = staged("many-body L=" + std::to_string(L), [&] {
        return many_body_row(config, pipe.covariance, pipe.h.kernel, L);
      });
    } else {
      rows[task.row].one_particle = staged("one-particle L=" + std::to_string(L), [&] {
        return volume_row(pipe.covariance, pipe.h.kernel, pipe.h_symbol, L, config.im_z);
      });
    }
  });

  ConvergenceReport report{config, pipe.functionals, pipe.regularity, pipe.h.tail_mass, std::move(rows), {}};
  if (!report.rows.empty()) {
    const ReportRow& first = report.rows.front();
    const ReportRow& last = report.rows.back();
    const auto add = [&](const std::string& name, int first_L, int last_L, double a, double b) {
      report.trends.push_back({name, first_L, last_L, a, b, b <= a + kTrendSlack});
    };
    const int l0 = first.one_particle.half_width;
    const int l1 = last.one_particle.half_width;
    add("entropy_residual", l0, l1, report.entropy_residual(first), report.entropy_residual(last));
    add("pressure_residual", l0, l1, report.pressure_residual(first), report.pressure_residual(last));
    add("energy_residual", l0, l1, report.energy_residual(first), report.energy_residual(last));
    add("rel_entropy_per_site", l0, l1, first.one_particle.rel_entropy_per_site,
        last.one_particle.rel_entropy_per_site);
    add("surface_l1_per_site", l0, l1, first.one_particle.surface_l1_per_site,
        last.one_particle.surface_l1_per_site);

    const ReportRow* mb_first = nullptr;
    const ReportRow* mb_last = nullptr;
    for (const auto& row : report.rows) {
      if (!row.many_body) continue;
      if (!mb_first) mb_first = &row;
      mb_last = &row;
    }
    if (mb_first) {
      const int m0 = mb_first->one_particle.half_width;
      const int m1 = mb_last->one_particle.half_width;
      add("log_c_per_site", m0, m1, mb_first->many_body->log_c_per_site, mb_last->many_body->log_c_per_site);
      add("rel_entropy_exact_per_site", m0, m1, mb_first->many_body->rel_entropy_exact_per_site,
          mb_last->many_body->rel_entropy_exact_per_site);
    }
  }
  return report;
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::string out =
      "L,volume,entropy_per_site,pressure_per_site,energy_per_site,rel_entropy_per_site,"
      "surface_l1_per_site,log_c_per_site,maxent_gap\n";
  for (const auto& row : report.rows) {
    const VolumeRow& v = row.one_particle;
    out += std::to_string(v.half_width) + "," + std::to_string(v.volume) + "," +
           format_number(v.entropy_per_site) + "," + format_number(v.pressure_per_site) + "," +
           format_number(v.energy_per_site) + "," + format_number(v.rel_entropy_per_site) + "," +
           format_number(v.surface_l1_per_site) + ",";
    if (row.many_body) {
      out += format_number(row.many_body->log_c_per_site);
      out += ",";
      if (row.many_body->maxent_gap) out += format_number(*row.many_body->maxent_gap);
    } else {
      out += ",";
    }
    out += "\n";
  }
  return out;
}

nlohmann::json convergence_sidecar(const ConvergenceReport& report) {
  return {
      {"s", report.functionals.entropy},
      {"e", report.functionals.energy},
      {"p", report.functionals.pressure},
      {"grid_n", report.functionals.grid_n},
      {"refinement_gap", report.functionals.refinement_gap},
      {"config", config_to_json(report.config)},
  };
}

void write_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move '" + tmp.string() + "' to '" + path + "': " + ec.message());
  }
}

double VariationalCheck::max_residual() const {
  return std::max({grid_identity, finite_bookkeeping, exact_relative_mismatch,
                   std::max(0.0, -min_finite_relative)});
}

VariationalCheck gibbs_variational_check(const StudyConfig& config) {
  validate(config);
  const SymbolPipeline pipe = build_pipeline(config);
  VariationalCheck check;

  for (int n : {config.grid_n, 2 * config.grid_n}) {
    const Symbol hs = symbol_from_kernel(pipe.h.kernel, n);
    const double s = specific_entropy_density(hs.map_real(fermi));
    const double e = specific_energy_density(hs);
    const double p = pressure_density(hs);
    check.grid_identity = std::max(check.grid_identity, std::abs(p - (s - e)));
  }

  check.min_finite_relative = std::numeric_limits<double>::infinity();
  for (int L : config.one_particle_L) {
    const auto row = staged("variational L=" + std::to_string(L), [&] {
      return volume_row(pipe.covariance, pipe.h.kernel, pipe.h_symbol, L, config.im_z);
    });
    const double gap = row.pressure_per_site - row.entropy_per_site + row.energy_per_site;
    check.finite_bookkeeping = std::max(check.finite_bookkeeping, std::abs(gap - row.rel_entropy_per_site));
    check.min_finite_relative = std::min(check.min_finite_relative, gap);
  }
  if (config.one_particle_L.empty()) check.min_finite_relative = 0.0;

  for (int L : config.many_body_L) {
    staged("variational many-body L=" + std::to_string(L), [&] {
      const Box box(config.dimension, L);
      const FockRep fock(box, config.fock_cap);
      const HermitianMatrix c_box = compress(pipe.covariance, box);
      const HermitianMatrix h_box = compress(pipe.h.kernel, box);
      const double S = finite_entropy(c_box);
      const double E = finite_energy(pipe.covariance, h_box);
      const double P = finite_pressure(h_box);
      const auto omega = gaussian_state(fock, c_box.values());
      const auto nu = gibbs_state(quadratic_hamiltonian(fock, h_box.values())).rho;
      check.exact_relative_mismatch =
          std::max(check.exact_relative_mismatch, std::abs(E + P - S - relative_entropy_exact(omega, nu)));
    });
  }
  return check;
}

MaxEntReport max_entropy_study(const StudyConfig& config) {
  validate(config);
  std::vector<Eigen::MatrixXcd> covariances = config.maxent.covariances;
  if (covariances.empty()) {
    const LatticeKernel cov = build_covariance(config);
    staged("regularity", [&] {
      const auto r = check_regularity(cov, config.grid_n);
      if (!r.is_regular) {
        throw NotRegular("covariance symbol range [" + format_number(r.min_value) + ", " +
                         format_number(r.max_value) + "] is not inside ]0,1[");
      }
    });
    for (int n : config.maxent.site_counts) covariances.push_back(compress_segment(cov, n));
  }

  MaxEntReport report;
  for (std::size_t idx = 0; idx < covariances.size(); ++idx) {
    const Eigen::MatrixXcd& c = covariances[idx];
    const int n = static_cast<int>(c.rows());
    report.cases.push_back(staged("maxent n=" + std::to_string(n), [&] {
      MaxEntCase out;
      out.sites = n;
      const FockRep fock(n, config.fock_cap);
      out.gaussian_entropy = finite_entropy(c);
      const DensityMatrix gaussian = gaussian_state(fock, c);
      const auto r = max_entropy_solve(fock, c, config.maxent.tol, config.maxent.max_iter);
      out.optimal_entropy = r.optimal_entropy;
      out.gap = r.optimal_entropy - out.gaussian_entropy;
      out.trace_distance = trace_distance(r.optimizer, gaussian);
      out.iterations = r.iterations;
      out.constraint_residual = r.constraint_residual;

      const auto states = perturbed_feasible_states(fock, gaussian, config.maxent.perturbed_states,
                                                    config.maxent.seed + idx, kFeasibilityTol);
      out.perturbed_states = static_cast<int>(states.size());
      out.max_perturbed_entropy = -std::numeric_limits<double>::infinity();
      for (const auto& s : states) {
        out.max_perturbed_entropy = std::max(out.max_perturbed_entropy, von_neumann_entropy(s));
      }
      out.dominated = out.max_perturbed_entropy <= out.gaussian_entropy + kDominanceSlack;
      return out;
    }));
  }
  return report;
}

std::string maxent_csv(const MaxEntReport& report) {
  std::string out =
      "sites,gaussian_entropy,optimal_entropy,gap,trace_distance,iterations,constraint_residual,"
      "perturbed_states,max_perturbed_entropy\n";
  for (const auto& c : report.cases) {
    out += std::to_string(c.sites) + "," + format_number(c.gaussian_entropy) + "," +
           format_number(c.optimal_entropy) + "," + format_number(c.gap) + "," +
           format_number(c.trace_distance) + "," + std::to_string(c.iterations) + "," +
           format_number(c.constraint_residual) + "," + std::to_string(c.perturbed_states) + ",";
    if (c.perturbed_states > 0) out += format_number(c.max_perturbed_entropy);
    out += "\n";
  }
  return out;
}

}  // namespace fermitherm
