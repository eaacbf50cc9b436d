#pragma once

// Batch driver: executes a RunConfig and writes the result files.
//
// Every mode writes manifest.txt and trust_report.txt next to its CSV
// tables. CSV headers carry units in brackets. Per-point failures are
// recorded and do not stop the remaining points; the returned exit code is
// nonzero iff any point failed.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "zeropi/circuit.hpp"
#include "zeropi/config.hpp"
#include "zeropi/dispersive.hpp"
#include "zeropi/eigensolver.hpp"
#include "zeropi/grid.hpp"
#include "zeropi/spectrum.hpp"
#include "zeropi/version.hpp"

namespace zeropi {

struct RunOutcome {
  int exit_code = 0;
  std::size_t points = 0;
  std::size_t failed = 0;
  std::size_t untrusted = 0;
  std::vector<std::string> files;
};

namespace detail {

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name);
    if (!f) throw std::runtime_error("cannot write '" + (dir_ / name).string() + "'");
    f.precision(std::numeric_limits<double>::max_digits10);
    files_.push_back(name);
    return f;
  }

  [[nodiscard]] const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

inline std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline std::string e_header(std::size_t k) {
  std::string h;
  for (std::size_t i = 0; i < k; ++i) h += ",E" + std::to_string(i) + "[hbar_omega_p]";
  return h;
}

inline void write_energies(std::ostream& os, const std::vector<double>& e, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) {
    os << ',';
    if (i < e.size()) os << e[i];
  }
}

inline void write_report(std::ostream& os, const std::optional<DegeneracyReport>& r) {
  if (!r) {
    os << ",,,,,";
    return;
  }
  os << ',' << r->d_value << ',' << r->splitting << ',' << r->gap << ',';
  if (r->splitting_error) os << *r->splitting_error;
  os << ',' << (r->trusted ? "true" : "false");
}

inline const char* report_header() {
  return ",D,splitting[hbar_omega_p],gap[hbar_omega_p],splitting_disc_error[hbar_omega_p],trusted";
}

inline void write_grid(std::ostream& os, const std::optional<Grid2D>& g) {
  if (g)
    os << ',' << g->phi_max() << ',' << g->n_phi() << ',' << g->n_theta();
  else
    os << ",,,";
}

inline const char* grid_header() { return ",phi_max[rad],n_phi,n_theta"; }

inline void write_spectrum_csv(std::ostream& os, const EigenSolution& s) {
  os << "level,E[hbar_omega_p],residual[hbar_omega_p],disc_error[hbar_omega_p],disc_flagged\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << i << ',' << s.energies[i] << ',' << s.residual_norms[i] << ',';
    if (s.has_disc_error()) os << s.disc_error[i];
    os << ',' << (s.has_disc_error() && s.disc_flagged[i] ? "true" : "false") << '\n';
  }
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r, std::size_t k,
                            const std::vector<std::string>& axis_headers) {
  for (std::size_t i = 0; i < axis_headers.size(); ++i) os << (i ? "," : "") << axis_headers[i];
  os << ",status" << report_header() << e_header(k) << grid_header() << ",message\n";
  for (const auto& pt : r.points) {
    for (std::size_t i = 0; i < pt.axis.size(); ++i) os << (i ? "," : "") << pt.axis[i];
    os << ',' << to_string(pt.status);
    write_report(os, pt.report);
    write_energies(os, pt.energies, k);
    write_grid(os, pt.grid);
    os << ',' << csv_text(pt.message) << '\n';
  }
}

inline void describe_circuit(std::ostream& os, const CircuitParams& p) {
  os << "e_j = " << p.e_j << "\ne_l = " << p.e_l << "\ne_c_sigma = " << p.e_c_sigma << "\ne_c = " << p.e_c
     << "\ne_cj = " << p.e_cj << "\nphi_ext = " << p.phi_ext << '\n';
  const auto sc = derived_scales(p);
  os << "omega_p = " << sc.omega_p << "\nomega_chi = " << sc.omega_chi << '\n';
  const auto rc = regime_check(p);
  os << "regime: E_J/E_L = " << rc.ej_over_el << ", E_J/E_CSigma = " << rc.ej_over_ecsigma
     << ", E_CJ/E_L = " << rc.ecj_over_el << ", E_CJ/E_CSigma = " << rc.ecj_over_ecsigma
     << ", degenerate_regime = " << (rc.degenerate_regime ? "true" : "false") << '\n';
}

inline void describe_config(std::ostream& os, const RunConfig& cfg) {
  auto list = [&](const char* name, const std::vector<double>& v) {
    if (v.empty()) return;
    os << name << " =";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : " ") << v[i];
    os << '\n';
  };
  auto opt = [&](const char* name, const std::optional<double>& v) {
    if (v) os << name << " = " << *v << '\n';
  };
  os << "[run]\nmode = " << to_string(cfg.mode) << "\nworkers = " << cfg.workers << "\nseed = " << cfg.solver.seed
     << "\nresonance_factor = " << cfg.resonance_factor << "\ndump_matrix = " << (cfg.dump_matrix ? "true" : "false")
     << "\nlevels =";
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) os << (i ? ", " : " ") << cfg.levels[i];
  os << '\n';
  opt("plasma_frequency", cfg.plasma_frequency);
  os << "\n[circuit]\n";
  const auto& c = cfg.circuit;
  opt("omega_over_e_l", c.omega_over_e_l);
  opt("omega_over_e_c_sigma", c.omega_over_e_c_sigma);
  opt("omega_over_e_j", c.omega_over_e_j);
  opt("e_j", c.e_j);
  opt("e_l", c.e_l);
  opt("e_c_sigma", c.e_c_sigma);
  opt("e_cj", c.e_cj);
  opt("e_c", c.e_c);
  os << "phi_ext = " << c.phi_ext << '\n';
  const auto& d = cfg.disorder;
  os << "\n[disorder]\ndelta_e_j = " << d.delta_e_j << "\ndelta_c_j_rel = " << d.delta_c_j_rel
     << "\ndelta_c_rel = " << d.delta_c_rel << "\ndelta_e_l = " << d.delta_e_l << '\n';
  os << "\n[solver]\nk = " << cfg.k << "\nquality = " << to_string(cfg.quality) << "\ntol = " << cfg.solver.tol
     << "\nrefine = " << (cfg.refine ? "true" : "false") << "\nkrylov_steps = " << cfg.solver.krylov_steps
     << "\nmax_cycles = " << cfg.solver.max_cycles << "\nextra_vectors = " << cfg.solver.extra_vectors
     << "\nverify_count = " << (cfg.solver.verify_count ? "true" : "false") << '\n';
  os << "\n[sweep]\n";
  list("flux", cfg.flux);
  list("delta_e_j", cfg.delta_e_j);
  list("delta_e_j_rel", cfg.delta_e_j_rel);
  list("delta_c_j_rel", cfg.delta_c_j_rel);
  list("omega_over_e_l", cfg.omega_over_e_l);
  list("omega_over_e_c_sigma", cfg.omega_over_e_c_sigma);
  list("e_l", cfg.e_l);
  list("e_c_sigma", cfg.e_c_sigma);
  os << "ej_scan_points = " << cfg.ej_scan_points << "\nlog10_ej_min = " << cfg.log10_ej_min
     << "\nlog10_ej_max = " << cfg.log10_ej_max << "\nej_relative_tol = " << cfg.ej_relative_tol << '\n';
}

inline void trust_lines(std::ostream& os, const SweepResult& r) {
  for (const auto& pt : r.points) {
    if (pt.status == PointStatus::ok) continue;
    os << to_string(pt.status) << ':';
    for (std::size_t i = 0; i < pt.axis.size(); ++i) os << ' ' << r.axis_names[i] << '=' << pt.axis[i];
    if (pt.report) {
      os << " D=" << pt.report->d_value << " splitting=" << pt.report->splitting;
      if (pt.report->splitting_error) os << " splitting_disc_error=" << *pt.report->splitting_error;
      else os << " (single grid, no discretization estimate)";
    }
    if (!pt.message.empty()) os << " error: " << pt.message;
    os << '\n';
  }
  if (r.count(PointStatus::ok) == r.points.size()) os << "all " << r.points.size() << " points trusted\n";
}

inline SweepOptions sweep_options(const RunConfig& cfg) {
  SweepOptions o;
  o.quality = cfg.quality;
  o.refine = cfg.refine;
  o.solver = cfg.solver;
  o.workers = cfg.workers;
  return o;
}

inline OptimizeOptions optimize_options(const RunConfig& cfg) {
  OptimizeOptions o;
  o.quality = cfg.quality;
  o.solver = cfg.solver;
  o.log10_ej_min = cfg.log10_ej_min;
  o.log10_ej_max = cfg.log10_ej_max;
  o.scan_points = cfg.ej_scan_points;
  o.relative_tol = cfg.ej_relative_tol;
  o.phi_ext = cfg.circuit.phi_ext;
  return o;
}

inline EigenSolution solve_for(const RunConfig& cfg, const CircuitParams& p) {
  const Grid2D base = default_grid(p, cfg.quality);
  if (cfg.refine) return solve_on_grids(p, cfg.disorder, base, base.refined(), cfg.k, cfg.solver);
  return lowest_eigenpairs(assemble(p, cfg.disorder, base), cfg.k, cfg.solver);
}

}  // namespace detail

/// Runs the configured mode, writing into out_dir. Progress and errors go
/// to `log`.
inline RunOutcome run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  detail::OutputDir out(out_dir);
  RunOutcome res;
  std::ostringstream manifest_extra;
  std::ostringstream trust;

  auto record_solution = [&](const EigenSolution& s) {
    manifest_extra << "grid = " << s.grid << '\n';
    if (s.base_grid) manifest_extra << "base_grid = " << *s.base_grid << '\n';
    manifest_extra << "solver_cycles = " << s.cycles << "\nsolver_solves = " << s.solves << '\n';
  };
  auto record_sweep = [&](const SweepResult& r) {
    res.points += r.points.size();
    res.failed += r.count(PointStatus::failed);
    res.untrusted += r.count(PointStatus::untrusted);
    detail::trust_lines(trust, r);
  };
  // single-solve modes: a failed solve is a failed point
  auto single = [&](const CircuitParams& p) -> std::optional<EigenSolution> {
    ++res.points;
    try {
      if (cfg.dump_matrix) {
        auto f = out.open("matrix.txt");
        assemble(p, cfg.disorder, default_grid(p, cfg.quality)).write_coordinate(f);
      }
      EigenSolution s = detail::solve_for(cfg, p);
      record_solution(s);
      auto f = out.open("spectrum.csv");
      detail::write_spectrum_csv(f, s);
      return s;
    } catch (const std::exception& ex) {
      ++res.failed;
      trust << "failed: " << ex.what() << '\n';
      log << "error: " << ex.what() << '\n';
      return std::nullopt;
    }
  };
  auto degeneracy_row = [&](const EigenSolution& s, const CircuitParams& p) {
    SweepResult r{{"phi_ext"}, {}};
    SweepPoint pt;
    pt.axis = {p.phi_ext};
    pt.energies = s.energies;
    pt.grid = s.grid;
    try {
      pt.report = degeneracy(s);
      pt.status = pt.report->trusted ? PointStatus::ok : PointStatus::untrusted;
    } catch (const std::exception& ex) {
      pt.status = PointStatus::failed;
      pt.message = ex.what();
    }
    r.points.push_back(pt);
    // the solve itself was already counted as one point
    res.failed += r.count(PointStatus::failed);
    res.untrusted += r.count(PointStatus::untrusted);
    detail::trust_lines(trust, r);
    auto f = out.open("sweep.csv");
    detail::write_sweep_csv(f, r, cfg.k, {"phi_ext[rad]"});
  };

  std::optional<CircuitParams> circuit;
  if (cfg.mode != RunMode::ej_optimize && cfg.mode != RunMode::dmax_grid) circuit = cfg.circuit.resolve();

  switch (cfg.mode) {
    case RunMode::spectrum: {
      if (auto s = single(*circuit)) degeneracy_row(*s, *circuit);
      break;
    }
    case RunMode::wavefunction_export: {
      if (auto s = single(*circuit)) {
        for (std::size_t level : cfg.levels) {
          auto f = out.open("wavefunction_" + std::to_string(level) + ".csv");
          f << "phi[rad],theta[rad],amplitude[rad^-1]\n";
          for (const auto& w : export_wavefunction(*s, level)) f << w.phi << ',' << w.theta << ',' << w.amplitude << '\n';
          const RidgeMasses rm = ridge_masses(*s, level);
          manifest_extra << "ridge_mass_" << level << " = " << rm.zero << ", " << rm.pi << '\n';
        }
      }
      break;
    }
    case RunMode::dispersive: {
      if (auto s = single(*circuit)) {
        const Couplings c = coupling_elements(*s, *circuit, cfg.disorder);
        const DispersiveResult d = dispersive_shifts(s->energies, c.g_phi, c.g_theta,
                                                     derived_scales(*circuit).omega_chi, cfg.resonance_factor);
        auto fc = out.open("couplings.csv");
        fc << "l,lp,g_phi[hbar_omega_p],g_theta[hbar_omega_p],phi_element[rad],dtheta_element[rad^-1],"
              "detuning[hbar_omega_p]\n";
        for (Eigen::Index l = 0; l < c.g_phi.rows(); ++l)
          for (Eigen::Index m = 0; m < c.g_phi.cols(); ++m)
            fc << l << ',' << m << ',' << c.g_phi(l, m) << ',' << c.g_theta(l, m) << ',' << c.phi(l, m) << ','
               << c.d_theta(l, m) << ',' << d.detunings(l, m) << '\n';
        auto fs = out.open("shifts.csv");
        fs << "l,chi[hbar_omega_p],kappa[hbar_omega_p],chi_truncation[hbar_omega_p],kappa_truncation[hbar_omega_p]\n";
        for (std::size_t l = 0; l < d.stark.size(); ++l)
          fs << l << ',' << d.stark[l] << ',' << d.lamb[l] << ',' << d.stark_truncation[l] << ','
             << d.lamb_truncation[l] << '\n';
        manifest_extra << "omega_chi = " << d.omega_chi << '\n';
        for (const auto& [l, m] : d.resonances)
          trust << "resonance: l=" << l << " lp=" << m << " detuning=" << d.detunings(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m))
                << " |g|=" << std::hypot(d.g_phi(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m)), d.g_theta(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m)))
                << " (perturbative treatment may break down; pair excluded)\n";
        if (d.resonances.empty()) trust << "no resonances at factor " << cfg.resonance_factor << '\n';
      }
      break;
    }
    case RunMode::flux_sweep: {
      const SweepResult r = flux_sweep(*circuit, cfg.flux, cfg.k, detail::sweep_options(cfg), cfg.disorder);
      record_sweep(r);
      auto f = out.open("sweep.csv");
      detail::write_sweep_csv(f, r, cfg.k, {"phi_ext[rad]"});
      break;
    }
    case RunMode::disorder_sweep: {
      SweepResult r;
      std::vector<std::string> headers;
      if (!cfg.delta_c_j_rel.empty()) {
        r = cj_disorder_check(*circuit, cfg.delta_c_j_rel, cfg.k, detail::sweep_options(cfg), cfg.disorder);
        headers = {"delta_c_j_rel"};
      } else {
        std::vector<double> values = cfg.delta_e_j;
        if (!cfg.delta_e_j_rel.empty()) {
          values.clear();
          for (double v : cfg.delta_e_j_rel) values.push_back(v * circuit->e_j);
        }
        r = junction_disorder_sweep(*circuit, values, cfg.k, detail::sweep_options(cfg), cfg.disorder);
        headers = {"delta_e_j[hbar_omega_p]"};
      }
      record_sweep(r);
      auto f = out.open("sweep.csv");
      detail::write_sweep_csv(f, r, cfg.k, headers);
      break;
    }
    case RunMode::ej_optimize: {
      ++res.points;
      const double el = *cfg.circuit.inductive();
      const double ecs = *cfg.circuit.sum_charging();
      try {
        const OptimizeResult o = optimize_ej(el, ecs, cfg.k, detail::optimize_options(cfg));
        auto f = out.open("sweep.csv");
        f << "e_j[hbar_omega_p],status,D\n";
        for (const auto& [ej, d] : o.scan) {
          f << ej << ',' << (std::isnan(d) ? "failed" : "ok") << ',';
          if (!std::isnan(d)) f << d;
          f << '\n';
        }
        auto fo = out.open("optimum.csv");
        fo << "e_l[hbar_omega_p],e_c_sigma[hbar_omega_p],e_j_star[hbar_omega_p],status,flat" << detail::report_header()
           << detail::e_header(cfg.k) << detail::grid_header() << '\n';
        fo << el << ',' << ecs << ',' << o.e_j_star << ',' << (o.report.trusted ? "ok" : "untrusted") << ','
           << (o.flat ? "true" : "false");
        detail::write_report(fo, o.report);
        detail::write_energies(fo, o.energies, cfg.k);
        detail::write_grid(fo, o.grid);
        fo << '\n';
        manifest_extra << "evaluations = " << o.evaluations << '\n';
        if (!o.report.trusted) {
          ++res.untrusted;
          trust << "untrusted: e_j_star=" << o.e_j_star << " D=" << o.d_max << '\n';
        } else {
          trust << "optimum trusted\n";
        }
        if (o.flat) trust << "flat: D varies less than " << trust_resolution() << " over the scan\n";
      } catch (const std::exception& ex) {
        ++res.failed;
        trust << "failed: " << ex.what() << '\n';
        log << "error: " << ex.what() << '\n';
      }
      break;
    }
    case RunMode::dmax_grid: {
      const SweepResult r = dmax_grid(cfg.el_axis(), cfg.ecs_axis(), cfg.k, detail::optimize_options(cfg), cfg.workers);
      record_sweep(r);
      auto f = out.open("sweep.csv");
      f << "e_l[hbar_omega_p],e_c_sigma[hbar_omega_p],status,e_j_star[hbar_omega_p],flat" << detail::report_header()
        << detail::e_header(cfg.k) << detail::grid_header() << ",message\n";
      for (const auto& pt : r.points) {
        f << pt.axis[0] << ',' << pt.axis[1] << ',' << to_string(pt.status) << ',';
        if (pt.e_j_star) f << *pt.e_j_star;
        f << ',' << (pt.flat ? "true" : "false");
        detail::write_report(f, pt.report);
        detail::write_energies(f, pt.energies, cfg.k);
        detail::write_grid(f, pt.grid);
        f << ',' << detail::csv_text(pt.message) << '\n';
      }
      try {
        const LinearFit fit = fit_ejstar(r);
        auto ff = out.open("fit.csv");
        ff << "intercept[hbar_omega_p],slope[hbar_omega_p],points,rms_residual[hbar_omega_p]\n"
           << fit.intercept << ',' << fit.slope << ',' << fit.points << ',' << fit.rms_residual << '\n';
      } catch (const std::exception& ex) {
        trust << "no E_J* fit: " << ex.what() << '\n';
      }
      break;
    }
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    auto f = out.open("trust_report.txt");
    f << "# untrusted D values, failed points and resonance flags\n" << trust.str();
  }
  {
    auto f = out.open("manifest.txt");
    f << "zeropi " << kVersion << '\n' << "wall_time[s] = " << wall << '\n';
    f << "points = " << res.points << "\nfailed = " << res.failed << "\nuntrusted = " << res.untrusted << '\n';
    if (circuit) {
      f << "\n# resolved circuit [hbar_omega_p]\n";
      detail::describe_circuit(f, *circuit);
      if (cfg.plasma_frequency) {
        const PhysicalUnits u = physical_units(*circuit, *cfg.plasma_frequency);
        f << "L[H] = " << u.inductance << "\nC[F] = " << u.capacitance << "\nC_sigma[F] = " << u.capacitance_sum
          << "\nC_J[F] = " << u.capacitance_junction << '\n';
      }
    }
    f << "\n# results\n" << manifest_extra.str();
    f << "\n# resolved configuration\n";
    detail::describe_config(f, cfg);
    f << "\n# files\n";
    for (const auto& name : out.files()) f << name << '\n';
  }
  res.files = out.files();
  res.exit_code = res.failed > 0 ? 1 : 0;
  log << to_string(cfg.mode) << ": " << res.points << " point(s), " << res.failed << " failed, " << res.untrusted
      << " untrusted, " << wall << " s\n";
  return res;
}

}  // namespace zeropi
