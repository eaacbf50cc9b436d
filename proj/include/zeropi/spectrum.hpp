#pragma once

// Degeneracy metric, parameter sweeps, E_J optimization and wavefunction
// export.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zeropi/circuit.hpp"
#include "zeropi/eigensolver.hpp"
#include "zeropi/golden.hpp"
#include "zeropi/grid.hpp"
#include "zeropi/parallel.hpp"

namespace zeropi {

/// D = log10((E2 - E0) / (E1 - E0)).
struct DegeneracyReport {
  double d_value = 0.0;
  double splitting = 0.0;  // E1 - E0
  double gap = 0.0;        // E2 - E0
  /// Two-grid change of the splitting, when known.
  std::optional<double> splitting_error;
  bool trusted = false;
};

/// Splittings are trusted when the two-grid change is below this fraction.
inline constexpr double kTrustFraction = 0.1;

/// Resolution of D implied by the trust rule, log10(1 / (1 - 0.1)).
inline double trust_resolution() { return -std::log10(1.0 - kTrustFraction); }

inline DegeneracyReport degeneracy(const std::vector<double>& energies,
                                   std::optional<double> splitting_error = std::nullopt) {
  if (energies.size() < 3) throw std::invalid_argument("degeneracy: need at least 3 levels");
  DegeneracyReport r;
  r.splitting = energies[1] - energies[0];
  r.gap = energies[2] - energies[0];
  if (!(r.splitting > 0.0))
    throw std::domain_error("degeneracy: E1 - E0 is not positive (level ordering violated)");
  r.d_value = std::log10(r.gap / r.splitting);
  r.splitting_error = splitting_error;
  r.trusted = splitting_error && *splitting_error < kTrustFraction * r.splitting;
  return r;
}

inline DegeneracyReport degeneracy(const EigenSolution& e) {
  std::optional<double> err;
  if (e.has_disc_error() && e.base_energies.size() >= 2 && e.size() >= 2) {
    const double base = e.base_energies[1] - e.base_energies[0];
    err = std::abs((e.energies[1] - e.energies[0]) - base);
  }
  return degeneracy(e.energies, err);
}

enum class PointStatus { ok, untrusted, failed };

inline std::string to_string(PointStatus s) {
  switch (s) {
    case PointStatus::ok: return "ok";
    case PointStatus::untrusted: return "untrusted";
    case PointStatus::failed: return "failed";
  }
  return "?";
}

struct SweepPoint {
  std::vector<double> axis;  // coordinates, same order as SweepResult::axis_names
  PointStatus status = PointStatus::failed;
  std::vector<double> energies;
  std::optional<DegeneracyReport> report;
  std::optional<double> e_j_star;
  bool flat = false;  // optimization landscape flatter than the D resolution
  std::optional<Grid2D> grid;
  std::string message;  // failure reason
};

struct SweepResult {
  std::vector<std::string> axis_names;
  std::vector<SweepPoint> points;

  [[nodiscard]] std::size_t count(PointStatus s) const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [&](const SweepPoint& p) { return p.status == s; }));
  }
};

struct SweepOptions {
  GridQuality quality = GridQuality::standard;
  bool refine = true;  // two-grid solve per point; without it no D is trusted
  SolverOptions solver;
  std::size_t workers = 1;
  bool warm_start = true;
};

/// Parameters of one sweep point.
struct PointSpec {
  std::vector<double> axis;
  CircuitParams circuit;
  DisorderParams disorder;
};

/// Solves every point, chaining warm starts within each worker's chunk.
/// Failures are recorded per point.
inline SweepResult run_sweep(std::vector<std::string> axis_names, const std::vector<PointSpec>& specs,
                             std::size_t k, const SweepOptions& opt) {
  if (k < 3) throw std::invalid_argument("sweep: k must be at least 3");
  SweepResult out{std::move(axis_names), std::vector<SweepPoint>(specs.size())};
  run_chunks(specs.size(), opt.workers, [&](const Chunk& chunk) {
    std::optional<EigenSolution> previous;
    for (std::size_t i = chunk.begin; i < chunk.end; ++i) {
      const PointSpec& spec = specs[i];
      SweepPoint& pt = out.points[i];
      pt.axis = spec.axis;
      try {
        const Grid2D base = default_grid(spec.circuit, opt.quality);
        std::optional<StartGuess> guess;
        if (opt.warm_start && previous) guess = resample(*previous, base);
        const StartGuess* g = guess ? &*guess : nullptr;
        EigenSolution sol =
            opt.refine ? solve_on_grids(spec.circuit, spec.disorder, base, base.refined(), k, opt.solver,
                                        std::nullopt, g)
                       : lowest_eigenpairs(assemble(spec.circuit, spec.disorder, base), k, opt.solver, g);
        pt.energies = sol.energies;
        pt.grid = sol.grid;
        pt.report = degeneracy(sol);
        pt.status = pt.report->trusted ? PointStatus::ok : PointStatus::untrusted;
        previous = std::move(sol);
      } catch (const std::exception& ex) {
        pt.status = PointStatus::failed;
        pt.message = ex.what();
      }
    }
  });
  return out;
}

/// Lowest-k spectrum and D for each external flux.
inline SweepResult flux_sweep(const CircuitParams& p, const std::vector<double>& flux_values, std::size_t k,
                              const SweepOptions& opt = {}, const DisorderParams& d = {}) {
  std::vector<PointSpec> specs;
  for (double f : flux_values) {
    if (!std::isfinite(f)) throw std::invalid_argument("flux_sweep: flux values must be finite");
    CircuitParams q = p;
    q.phi_ext = f;
    specs.push_back({{f}, q, d});
  }
  return run_sweep({"phi_ext"}, specs, k, opt);
}

struct OptimizeOptions {
  GridQuality quality = GridQuality::standard;
  SolverOptions solver;
  double log10_ej_min = -1.5;
  double log10_ej_max = 0.0;
  std::size_t scan_points = 25;
  double relative_tol = 0.01;  // final bracket width in E_J
  double phi_ext = 0.0;
};

struct OptimizeResult {
  double e_j_star = 0.0;
  double d_max = 0.0;  // two-grid D at e_j_star
  DegeneracyReport report;
  bool flat = false;
  std::vector<std::pair<double, double>> scan;  // (E_J, D), D NaN where the solve failed
  std::vector<double> energies;
  std::optional<Grid2D> grid;
  std::size_t evaluations = 0;
};

/// Maximizes D over E_J with E_CJ = 1/(8 E_J): a logarithmic scan followed
/// by golden-section refinement in log E_J, then a two-grid solve at the
/// optimum for the trust flag.
inline OptimizeResult optimize_ej(double e_l, double e_c_sigma, std::size_t k, const OptimizeOptions& opt = {}) {
  if (!(e_l > 0.0) || !(e_c_sigma > 0.0))
    throw std::invalid_argument("optimize_ej: energies must be positive");
  if (k < 3) throw std::invalid_argument("optimize_ej: k must be at least 3");
  if (opt.scan_points < 3) throw std::invalid_argument("optimize_ej: need at least 3 scan points");
  if (!(opt.log10_ej_max > opt.log10_ej_min)) throw std::invalid_argument("optimize_ej: empty E_J range");

  OptimizeResult res;
  std::optional<EigenSolution> last;
  auto d_at = [&](double log_ej) {
    ++res.evaluations;
    try {
      const CircuitParams p = CircuitParams::plasma_units(std::pow(10.0, log_ej), e_l, e_c_sigma, opt.phi_ext);
      const SparseHamiltonian h = assemble(p, default_grid(p, opt.quality));
      std::optional<StartGuess> guess;
      if (last) guess = resample(*last, h.grid);
      EigenSolution sol = lowest_eigenpairs(h, k, opt.solver, guess ? &*guess : nullptr);
      const double d = degeneracy(sol.energies).d_value;
      last = std::move(sol);
      return d;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  const double step = (opt.log10_ej_max - opt.log10_ej_min) / static_cast<double>(opt.scan_points - 1);
  std::vector<double> logs;
  std::vector<double> ds;
  for (std::size_t i = 0; i < opt.scan_points; ++i) {
    logs.push_back(opt.log10_ej_min + static_cast<double>(i) * step);
    ds.push_back(d_at(logs.back()));
    res.scan.emplace_back(std::pow(10.0, logs.back()), ds.back());
  }

  std::optional<std::size_t> best;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (std::isnan(ds[i])) continue;
    lo = std::min(lo, ds[i]);
    if (!best || ds[i] > ds[*best]) best = i;
  }
  if (!best) throw std::runtime_error("optimize_ej: every scan point failed");

  double log_star = logs[*best];
  res.flat = ds[*best] - lo < trust_resolution();
  if (!res.flat) {
    const double a = logs[*best == 0 ? 0 : *best - 1];
    const double b = logs[std::min(*best + 1, logs.size() - 1)];
    const GoldenResult g = golden_maximize(d_at, a, b, std::log10(1.0 + opt.relative_tol));
    if (g.value > ds[*best]) log_star = g.x;
  }

  res.e_j_star = std::pow(10.0, log_star);
  const CircuitParams p = CircuitParams::plasma_units(res.e_j_star, e_l, e_c_sigma, opt.phi_ext);
  const Grid2D base = default_grid(p, opt.quality);
  std::optional<StartGuess> guess;
  if (last) guess = resample(*last, base);
  const EigenSolution sol =
      solve_on_grids(p, {}, base, base.refined(), k, opt.solver, std::nullopt, guess ? &*guess : nullptr);
  res.report = degeneracy(sol);
  res.d_max = res.report.d_value;
  res.energies = sol.energies;
  res.grid = sol.grid;
  return res;
}

/// optimize_ej over the (E_L, E_CSigma) product grid, E_L-major order.
inline SweepResult dmax_grid(const std::vector<double>& e_l_values, const std::vector<double>& e_c_sigma_values,
                             std::size_t k, const OptimizeOptions& opt = {}, std::size_t workers = 1) {
  if (e_l_values.empty() || e_c_sigma_values.empty())
    throw std::invalid_argument("dmax_grid: axis lists must be non-empty");
  for (double v : e_l_values)
    if (!(v > 0.0)) throw std::invalid_argument("dmax_grid: e_l values must be positive");
  for (double v : e_c_sigma_values)
    if (!(v > 0.0)) throw std::invalid_argument("dmax_grid: e_c_sigma values must be positive");

  SweepResult out{{"e_l", "e_c_sigma"}, {}};
  for (double el : e_l_values)
    for (double ec : e_c_sigma_values) {
      SweepPoint pt;
      pt.axis = {el, ec};
      out.points.push_back(std::move(pt));
    }

  run_chunks(out.points.size(), workers, [&](const Chunk& chunk) {
    for (std::size_t i = chunk.begin; i < chunk.end; ++i) {
      SweepPoint& pt = out.points[i];
      try {
        const OptimizeResult r = optimize_ej(pt.axis[0], pt.axis[1], k, opt);
        pt.energies = r.energies;
        pt.report = r.report;
        pt.e_j_star = r.e_j_star;
        pt.flat = r.flat;
        pt.grid = r.grid;
        pt.status = r.report.trusted ? PointStatus::ok : PointStatus::untrusted;
      } catch (const std::exception& ex) {
        pt.status = PointStatus::failed;
        pt.message = ex.what();
      }
    }
  });
  return out;
}

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  std::size_t points = 0;
  double rms_residual = 0.0;
};

/// Least-squares line y = intercept + slope * x.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("fit_line: need at least 2 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    scale = std::max(scale, std::abs(x[i]));
  }
  if (!(sxx > 1e-24 * n * std::max(1.0, scale * scale)))
    throw std::domain_error("fit_line: rank-deficient design, all x values coincide");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = x.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

/// Fits E_J* against log10(E_CSigma / E_L) over the trusted points of a
/// dmax_grid table.
inline LinearFit fit_ejstar(const SweepResult& table) {
  if (table.axis_names != std::vector<std::string>{"e_l", "e_c_sigma"})
    throw std::invalid_argument("fit_ejstar: expected a dmax_grid table");
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& pt : table.points) {
    if (pt.status != PointStatus::ok || !pt.e_j_star) continue;
    x.push_back(std::log10(pt.axis[1] / pt.axis[0]));
    y.push_back(*pt.e_j_star);
  }
  if (x.size() < 6)
    throw std::invalid_argument("fit_ejstar: need at least 6 trusted points, have " + std::to_string(x.size()));
  return fit_line(x, y);
}

struct WavefunctionSample {
  double phi = 0.0;
  double theta = 0.0;
  double amplitude = 0.0;
};

/// Grid samples of one level in row order (index = m * n_theta + n).
inline std::vector<WavefunctionSample> export_wavefunction(const EigenSolution& e, std::size_t level) {
  if (level >= e.size()) throw std::out_of_range("export_wavefunction: level out of range");
  const Grid2D& g = e.grid;
  std::vector<WavefunctionSample> out;
  out.reserve(g.size());
  for (std::size_t m = 0; m < g.n_phi(); ++m)
    for (std::size_t n = 0; n < g.n_theta(); ++n)
      out.push_back({g.phi(m), g.theta(n),
                     e.wavefunctions(static_cast<Eigen::Index>(g.index(m, n)), static_cast<Eigen::Index>(level))});
  return out;
}

/// Probability mass within pi/4 of the theta = 0 and theta = pi ridges.
struct RidgeMasses {
  double zero = 0.0;
  double pi = 0.0;
  /// Share of the windowed mass on the theta = 0 ridge.
  [[nodiscard]] double split() const { return zero / (zero + pi); }
  [[nodiscard]] double dominant() const { return std::max(zero, pi); }
};

inline RidgeMasses ridge_masses(const EigenSolution& e, std::size_t level) {
  if (level >= e.size()) throw std::out_of_range("ridge_masses: level out of range");
  const Grid2D& g = e.grid;
  constexpr double half = std::numbers::pi / 4.0;
  // points exactly on a window edge count half
  auto weight = [&](double dist) {
    if (std::abs(dist - half) < 1e-9) return 0.5;
    return dist < half ? 1.0 : 0.0;
  };
  std::vector<double> w0(g.n_theta());
  std::vector<double> wpi(g.n_theta());
  for (std::size_t n = 0; n < g.n_theta(); ++n) {
    const double t = g.theta(n);
    w0[n] = weight(std::min(t, 2.0 * std::numbers::pi - t));
    wpi[n] = weight(std::abs(t - std::numbers::pi));
  }
  RidgeMasses r;
  const auto col = e.wavefunctions.col(static_cast<Eigen::Index>(level));
  for (std::size_t m = 0; m < g.n_phi(); ++m)
    for (std::size_t n = 0; n < g.n_theta(); ++n) {
      const double a = col[static_cast<Eigen::Index>(g.index(m, n))];
      r.zero += w0[n] * a * a;
      r.pi += wpi[n] * a * a;
    }
  r.zero *= g.cell_area();
  r.pi *= g.cell_area();
  return r;
}

}  // namespace zeropi
