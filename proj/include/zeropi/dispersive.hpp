#pragma once

// Junction-disorder sweeps (exact 2D solves) and the dispersive reduction
// of capacitive and inductive disorder: couplings g_ll' of the (phi, theta)
// levels to the chi oscillator, Stark shifts chi_l (per photon) and Lamb
// shifts kappa_l (empty oscillator).

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zeropi/circuit.hpp"
#include "zeropi/eigensolver.hpp"
#include "zeropi/grid.hpp"
#include "zeropi/spectrum.hpp"

namespace zeropi {

struct Couplings {
  Eigen::MatrixXd g_phi;    // |g_phi(l, l')|
  Eigen::MatrixXd g_theta;  // |g_theta(l, l')|
  Eigen::MatrixXd phi;      // <l|phi|l'>
  Eigen::MatrixXd d_theta;  // <l|d_theta|l'>, antisymmetric
};

/// Matrix elements of phi (diagonal quadrature) and d_theta (centered
/// difference, periodic) between the solved levels, scaled by the disorder
/// prefactors.
inline Couplings coupling_elements(const EigenSolution& e, const CircuitParams& p, const DisorderParams& d) {
  p.validate();
  d.validate();
  const Grid2D& g = e.grid;
  const Eigen::MatrixXd& psi = e.wavefunctions;
  if (static_cast<std::size_t>(psi.rows()) != g.size())
    throw std::invalid_argument("coupling_elements: wavefunctions do not match the grid");

  Eigen::MatrixXd phi_psi(psi.rows(), psi.cols());
  Eigen::MatrixXd dpsi(psi.rows(), psi.cols());
  const std::size_t nt = g.n_theta();
  const double inv = 1.0 / (2.0 * g.dtheta());
  for (std::size_t m = 0; m < g.n_phi(); ++m) {
    const double phi = g.phi(m);
    for (std::size_t n = 0; n < nt; ++n) {
      const auto row = static_cast<Eigen::Index>(g.index(m, n));
      const auto up = static_cast<Eigen::Index>(g.index(m, (n + 1) % nt));
      const auto down = static_cast<Eigen::Index>(g.index(m, (n + nt - 1) % nt));
      phi_psi.row(row) = phi * psi.row(row);
      dpsi.row(row) = (psi.row(up) - psi.row(down)) * inv;
    }
  }

  Couplings c;
  c.phi = (psi.transpose() * phi_psi) * g.cell_area();
  c.d_theta = (psi.transpose() * dpsi) * g.cell_area();
  const double pre_theta =
      std::abs(p.e_c_sigma * d.delta_c_rel) * std::pow(32.0 * p.e_l / p.e_c, 0.25);
  const double pre_phi = std::abs(d.delta_e_l) * std::pow(8.0 * p.e_c / p.e_l, 0.25);
  c.g_theta = pre_theta * c.d_theta.cwiseAbs();
  c.g_phi = pre_phi * c.phi.cwiseAbs();
  return c;
}

struct DispersiveResult {
  double omega_chi = 0.0;
  Eigen::MatrixXd g_phi;
  Eigen::MatrixXd g_theta;
  Eigen::MatrixXd detunings;  // E_l - E_l' - omega_chi
  std::vector<double> stark;
  std::vector<double> lamb;
  /// Magnitude of the last kept term of each sum, a stand-in for the tail.
  std::vector<double> stark_truncation;
  std::vector<double> lamb_truncation;
  /// Pairs (l, l') left out of the sums because |Delta| < factor * |g|.
  std::vector<std::pair<std::size_t, std::size_t>> resonances;
  double resonance_factor = 10.0;
};

inline DispersiveResult dispersive_shifts(const std::vector<double>& energies, const Eigen::MatrixXd& g_phi,
                                          const Eigen::MatrixXd& g_theta, double omega_chi,
                                          double resonance_factor = 10.0) {
  const auto k = static_cast<Eigen::Index>(energies.size());
  if (g_phi.rows() != k || g_phi.cols() != k || g_theta.rows() != k || g_theta.cols() != k)
    throw std::invalid_argument("dispersive_shifts: coupling matrices must be k x k");
  if (!(omega_chi > 0.0)) throw std::invalid_argument("dispersive_shifts: omega_chi must be positive");
  if (!(resonance_factor >= 0.0)) throw std::invalid_argument("dispersive_shifts: negative resonance factor");

  DispersiveResult r;
  r.omega_chi = omega_chi;
  r.g_phi = g_phi;
  r.g_theta = g_theta;
  r.resonance_factor = resonance_factor;
  r.detunings.resize(k, k);
  for (Eigen::Index l = 0; l < k; ++l)
    for (Eigen::Index m = 0; m < k; ++m) r.detunings(l, m) = (energies[l] - energies[m]) - omega_chi;

  const auto uk = static_cast<std::size_t>(k);
  r.stark.assign(uk, 0.0);
  r.lamb.assign(uk, 0.0);
  r.stark_truncation.assign(uk, 0.0);
  r.lamb_truncation.assign(uk, 0.0);
  for (Eigen::Index l = 0; l < k; ++l) {
    for (Eigen::Index m = 0; m < k; ++m) {
      const double g2 = g_phi(l, m) * g_phi(l, m) + g_theta(l, m) * g_theta(l, m);
      if (g2 == 0.0) continue;
      const double there = r.detunings(l, m);
      const double back = r.detunings(m, l);
      const double limit = resonance_factor * std::sqrt(g2);
      if (std::abs(there) < limit || std::abs(back) < limit) {
        r.resonances.emplace_back(l, m);
        continue;
      }
      const double chi = g2 * (1.0 / there - 1.0 / back);
      const double kappa = g2 / there;
      const auto ul = static_cast<std::size_t>(l);
      r.stark[ul] += chi;
      r.lamb[ul] += kappa;
      if (m == k - 1) {
        r.stark_truncation[ul] = std::abs(chi);
        r.lamb_truncation[ul] = std::abs(kappa);
      }
    }
  }
  return r;
}

/// Couplings and shifts for a solved symmetric spectrum.
inline DispersiveResult dispersive(const EigenSolution& e, const CircuitParams& p, const DisorderParams& d,
                                   double resonance_factor = 10.0) {
  const Couplings c = coupling_elements(e, p, d);
  return dispersive_shifts(e.energies, c.g_phi, c.g_theta, derived_scales(p).omega_chi, resonance_factor);
}

/// D against the junction asymmetry dE_J. Other disorder fields of `base`
/// are kept.
inline SweepResult junction_disorder_sweep(const CircuitParams& p, const std::vector<double>& delta_ej_values,
                                           std::size_t k, const SweepOptions& opt = {},
                                           const DisorderParams& base = {}) {
  std::vector<PointSpec> specs;
  for (double v : delta_ej_values) {
    if (!(std::abs(v) < p.e_j)) throw std::invalid_argument("junction_disorder_sweep: need |dE_J| < E_J");
    DisorderParams d = base;
    d.delta_e_j = v;
    specs.push_back({{v}, p, d});
  }
  return run_sweep({"delta_e_j"}, specs, k, opt);
}

/// D against the junction-capacitance asymmetry dC_J / C_J.
inline SweepResult cj_disorder_check(const CircuitParams& p, const std::vector<double>& delta_cj_rel_values,
                                     std::size_t k, const SweepOptions& opt = {},
                                     const DisorderParams& base = {}) {
  std::vector<PointSpec> specs;
  for (double v : delta_cj_rel_values) {
    if (!(std::abs(v) <= 1.0)) throw std::invalid_argument("cj_disorder_check: need |dC_J/C_J| <= 1");
    DisorderParams d = base;
    d.delta_c_j_rel = v;
    specs.push_back({{v}, p, d});
  }
  return run_sweep({"delta_c_j_rel"}, specs, k, opt);
}

}  // namespace zeropi
