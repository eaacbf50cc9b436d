#pragma once

// Circuit model of the symmetric and disordered 0-pi device.
//
// All energies are expressed in units of the junction plasma energy
// hbar*omega_p unless a function says otherwise. Physical SI values only
// appear in physical_units().

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace zeropi {

/// Energy scales and external flux of the symmetric device.
struct CircuitParams {
  double e_j = 0.0;        // Josephson energy of each junction
  double e_l = 0.0;        // inductive energy Phi0^2 / L
  double e_c_sigma = 0.0;  // charging energy of C_sigma = C_J + C
  double e_c = 0.0;        // charging energy of one cross-capacitor
  double e_cj = 0.0;       // junction charging energy
  double phi_ext = 0.0;    // external flux in units of Phi0 (radians)

  /// Builds parameters from the inverse ratios hbar*omega_p / E used in the
  /// figure captions. E_CJ follows from omega_p = sqrt(8 E_J E_CJ) = 1 and
  /// E_C from 1/E_C = 1/E_CSigma - 1/E_CJ.
  static CircuitParams from_ratios(double omega_over_e_l, double omega_over_e_c_sigma,
                                   double omega_over_e_j, double phi_ext = 0.0);

  /// Builds parameters from raw energies. When e_c is given, the
  /// decomposition 1/E_CSigma = 1/E_C + 1/E_CJ is checked; otherwise E_C is
  /// derived from it.
  static CircuitParams from_energies(double e_j, double e_l, double e_c_sigma, double e_cj,
                                     std::optional<double> e_c = std::nullopt,
                                     double phi_ext = 0.0);

  /// Plasma-convention variant: E_CJ = 1/(8 E_J), E_C derived.
  static CircuitParams plasma_units(double e_j, double e_l, double e_c_sigma,
                                    double phi_ext = 0.0);

  void validate() const;
};

/// Pairwise deviations of nominally identical elements.
struct DisorderParams {
  double delta_e_j = 0.0;      // (E_J1 - E_J2) / 2
  double delta_c_j_rel = 0.0;  // dC_J / C_J
  double delta_c_rel = 0.0;    // dC / C
  double delta_e_l = 0.0;      // dE_L

  [[nodiscard]] bool is_symmetric() const {
    return delta_e_j == 0.0 && delta_c_j_rel == 0.0 && delta_c_rel == 0.0 && delta_e_l == 0.0;
  }

  // |dC_J/C_J| = 1 is accepted: the expanded Hamiltonian only depends on the
  // ratio linearly, and the junction sweep runs up to 100%.
  void validate() const {
    if (!std::isfinite(delta_e_j) || !std::isfinite(delta_e_l) ||
        !std::isfinite(delta_c_j_rel) || !std::isfinite(delta_c_rel))
      throw std::invalid_argument("disorder: non-finite value");
    if (std::abs(delta_c_j_rel) > 1.0)
      throw std::invalid_argument("disorder: |delta_c_j_rel| must not exceed 1");
    if (std::abs(delta_c_rel) >= 1.0)
      throw std::invalid_argument("disorder: |delta_c_rel| must be below 1");
  }
};

/// Normal-mode phases. Sigma decouples and is only carried along.
struct NormalCoords {
  double phi = 0.0;
  double theta = 0.0;
  double chi = 0.0;
  double sigma = 0.0;
};

using NodePhases = std::array<double, 4>;

inline NormalCoords node_to_normal(const NodePhases& n) {
  const double a = n[1] - n[2];  // phi2 - phi3
  const double b = n[3] - n[0];  // phi4 - phi1
  return NormalCoords{
      .phi = 0.5 * (a + b),
      .theta = 0.5 * ((n[1] - n[0]) - (n[3] - n[2])),
      .chi = 0.5 * (a - b),
      .sigma = n[0] + n[1] + n[2] + n[3],
  };
}

// Sigma is the plain sum of the node phases, so each node carries Sigma/4.
inline NodePhases normal_to_node(const NormalCoords& c) {
  const double s = 0.5 * c.sigma;
  return {
      0.5 * (s - c.theta - c.phi + c.chi),
      0.5 * (s + c.theta + c.phi + c.chi),
      0.5 * (s + c.theta - c.phi - c.chi),
      0.5 * (s - c.theta + c.phi - c.chi),
  };
}

/// V(phi, theta) of the symmetric device including the +2 E_J offset.
inline double potential_symmetric(const CircuitParams& p, double phi, double theta) {
  return -2.0 * p.e_j * std::cos(theta) * std::cos(phi - 0.5 * p.phi_ext) + p.e_l * phi * phi +
         2.0 * p.e_j;
}

/// Full potential with junction and inductive disorder, including the chi
/// oscillator terms.
inline double potential_disordered(const CircuitParams& p, const DisorderParams& d, double phi,
                                   double theta, double chi) {
  return potential_symmetric(p, phi, theta) +
         2.0 * d.delta_e_j * std::sin(theta) * std::sin(phi - 0.5 * p.phi_ext) +
         p.e_l * chi * chi + 2.0 * d.delta_e_l * phi * chi;
}

/// Separable double-well x harmonic potential, -2E_J|cos theta| + E_L phi^2 + 2E_J.
inline double potential_toy(const CircuitParams& p, double phi, double theta) {
  return -2.0 * p.e_j * std::abs(std::cos(theta)) + p.e_l * phi * phi + 2.0 * p.e_j;
}

struct DerivedScales {
  double omega_p = 0.0;    // sqrt(8 E_J E_CJ)
  double omega_chi = 0.0;  // sqrt(8 E_L E_C)
};

inline DerivedScales derived_scales(const CircuitParams& p) {
  return {std::sqrt(8.0 * p.e_j * p.e_cj), std::sqrt(8.0 * p.e_l * p.e_c)};
}

namespace si {
inline constexpr double planck = 6.62607015e-34;              // J s
inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double reduced_flux_quantum = hbar / (2.0 * elementary_charge);  // Wb
}  // namespace si

struct PhysicalUnits {
  double inductance = 0.0;      // L  [H]
  double capacitance = 0.0;     // C  [F], one cross-capacitor
  double capacitance_sum = 0.0; // C_sigma [F]
  double capacitance_junction = 0.0;  // C_J [F]
};

/// Converts hbar*omega_p-unit energies to circuit elements for a plasma
/// frequency f_p (Hz): L = Phi0^2/E_L, C = e^2/(2 E_C), Phi0 = hbar/2e.
inline PhysicalUnits physical_units(const CircuitParams& p, double f_p) {
  if (!(f_p > 0.0) || !std::isfinite(f_p))
    throw std::invalid_argument("physical_units: plasma frequency must be positive");
  const double unit = si::planck * f_p;  // hbar*omega_p in joules
  const double e2 = si::elementary_charge * si::elementary_charge;
  const double phi0_sq = si::reduced_flux_quantum * si::reduced_flux_quantum;
  return {
      .inductance = phi0_sq / (p.e_l * unit),
      .capacitance = e2 / (2.0 * p.e_c * unit),
      .capacitance_sum = e2 / (2.0 * p.e_c_sigma * unit),
      .capacitance_junction = e2 / (2.0 * p.e_cj * unit),
  };
}

/// Ratios entering E_L, E_CSigma << E_J, E_CJ.
struct RegimeReport {
  double ej_over_el = 0.0;
  double ej_over_ecsigma = 0.0;
  double ecj_over_el = 0.0;
  double ecj_over_ecsigma = 0.0;
  bool degenerate_regime = false;
};

inline RegimeReport regime_check(const CircuitParams& p, double threshold = 10.0) {
  RegimeReport r{p.e_j / p.e_l, p.e_j / p.e_c_sigma, p.e_cj / p.e_l, p.e_cj / p.e_c_sigma, false};
  r.degenerate_regime = r.ej_over_el > threshold && r.ej_over_ecsigma > threshold &&
                        r.ecj_over_el > threshold && r.ecj_over_ecsigma > threshold;
  return r;
}

// ---------------------------------------------------------------------------

inline void CircuitParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("circuit: ") + name + " must be positive and finite");
  };
  positive(e_j, "e_j");
  positive(e_l, "e_l");
  positive(e_c_sigma, "e_c_sigma");
  positive(e_c, "e_c");
  positive(e_cj, "e_cj");
  if (!std::isfinite(phi_ext)) throw std::invalid_argument("circuit: phi_ext must be finite");
}

namespace detail {
inline double cross_charging_energy(double e_c_sigma, double e_cj) {
  const double inv = 1.0 / e_c_sigma - 1.0 / e_cj;
  if (!(inv > 0.0))
    throw std::invalid_argument("circuit: E_CSigma must be smaller than E_CJ (C_sigma = C_J + C)");
  return 1.0 / inv;
}
}  // namespace detail

inline CircuitParams CircuitParams::from_ratios(double omega_over_e_l, double omega_over_e_c_sigma,
                                                double omega_over_e_j, double phi_ext) {
  if (!(omega_over_e_l > 0.0) || !(omega_over_e_c_sigma > 0.0) || !(omega_over_e_j > 0.0))
    throw std::invalid_argument("circuit: energy ratios must be positive");
  return plasma_units(1.0 / omega_over_e_j, 1.0 / omega_over_e_l, 1.0 / omega_over_e_c_sigma,
                      phi_ext);
}

inline CircuitParams CircuitParams::plasma_units(double e_j, double e_l, double e_c_sigma,
                                                 double phi_ext) {
  if (!(e_j > 0.0)) throw std::invalid_argument("circuit: e_j must be positive");
  return from_energies(e_j, e_l, e_c_sigma, 1.0 / (8.0 * e_j), std::nullopt, phi_ext);
}

inline CircuitParams CircuitParams::from_energies(double e_j, double e_l, double e_c_sigma,
                                                  double e_cj, std::optional<double> e_c,
                                                  double phi_ext) {
  CircuitParams p{e_j, e_l, e_c_sigma, 1.0, e_cj, phi_ext};
  // checks everything but e_c first so the derivation below sees sane inputs
  p.validate();
  if (e_c) {
    p.e_c = *e_c;
    p.validate();
    const double lhs = 1.0 / e_c_sigma;
    const double rhs = 1.0 / *e_c + 1.0 / e_cj;
    if (std::abs(lhs - rhs) > 1e-9 * std::max(std::abs(lhs), std::abs(rhs)))
      throw std::invalid_argument(
          "circuit: inconsistent charging energies, need 1/E_CSigma = 1/E_C + 1/E_CJ");
  } else {
    p.e_c = detail::cross_charging_energy(e_c_sigma, e_cj);
  }
  return p;
}

}  // namespace zeropi
