#pragma once

// Finite-difference discretization of the (phi, theta) plane.
//
// phi is truncated to [-phi_max, phi_max] with the wave function set to zero
// beyond the end points; theta is periodic on [0, 2pi). Grid vectors are
// stored phi-major: index = m * n_theta + n.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "zeropi/circuit.hpp"

namespace zeropi {

enum class GridQuality { coarse, standard, fine };

inline std::string to_string(GridQuality q) {
  switch (q) {
    case GridQuality::coarse: return "coarse";
    case GridQuality::standard: return "standard";
    case GridQuality::fine: return "fine";
  }
  return "?";
}

class Grid2D {
 public:
  Grid2D(double phi_max, std::size_t n_phi, std::size_t n_theta)
      : phi_max_(phi_max), n_phi_(n_phi), n_theta_(n_theta) {
    if (!(phi_max > 0.0) || !std::isfinite(phi_max))
      throw std::invalid_argument("grid: phi_max must be positive");
    if (n_phi < 3 || n_phi % 2 == 0)
      throw std::invalid_argument("grid: n_phi must be odd and at least 3");
    if (n_theta < 3) throw std::invalid_argument("grid: n_theta must be at least 3");
  }

  /// Smallest grid with spacings not exceeding the given bounds.
  static Grid2D with_spacing(double phi_max, double max_dphi, double max_dtheta,
                             bool even_theta = true) {
    const auto half = static_cast<std::size_t>(std::ceil(phi_max / max_dphi - 1e-9));
    auto n_theta =
        static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / max_dtheta - 1e-9));
    if (even_theta && n_theta % 2 != 0) ++n_theta;
    return Grid2D(phi_max, 2 * std::max<std::size_t>(half, 1) + 1, std::max<std::size_t>(n_theta, 3));
  }

  [[nodiscard]] double phi_max() const { return phi_max_; }
  [[nodiscard]] std::size_t n_phi() const { return n_phi_; }
  [[nodiscard]] std::size_t n_theta() const { return n_theta_; }
  [[nodiscard]] std::size_t half_width() const { return (n_phi_ - 1) / 2; }
  [[nodiscard]] std::size_t size() const { return n_phi_ * n_theta_; }

  [[nodiscard]] double dphi() const { return phi_max_ / static_cast<double>(half_width()); }
  [[nodiscard]] double dtheta() const {
    return 2.0 * std::numbers::pi / static_cast<double>(n_theta_);
  }
  [[nodiscard]] double cell_area() const { return dphi() * dtheta(); }

  [[nodiscard]] double phi(std::size_t m) const {
    return (static_cast<double>(m) - static_cast<double>(half_width())) * dphi();
  }
  [[nodiscard]] double theta(std::size_t n) const { return static_cast<double>(n) * dtheta(); }

  [[nodiscard]] std::size_t index(std::size_t m, std::size_t n) const { return m * n_theta_ + n; }

  /// Spacings halved in both directions and phi_max grown by 25%.
  [[nodiscard]] Grid2D refined() const {
    const double new_max = 1.25 * phi_max_;
    const auto half = static_cast<std::size_t>(std::ceil(new_max / (0.5 * dphi()) - 1e-9));
    return Grid2D(new_max, 2 * half + 1, 2 * n_theta_);
  }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  double phi_max_;
  std::size_t n_phi_;
  std::size_t n_theta_;
};

inline std::ostream& operator<<(std::ostream& os, const Grid2D& g) {
  return os << "phi_max=" << g.phi_max() << " n_phi=" << g.n_phi() << " n_theta=" << g.n_theta()
            << " dphi=" << g.dphi() << " dtheta=" << g.dtheta();
}

/// Grid sized for the harmonic envelope of the phi oscillator:
/// phi_max = max(6, 3.5 (8 E_CJ / E_L)^(1/4)).
inline Grid2D default_grid(const CircuitParams& p, GridQuality quality = GridQuality::standard) {
  const double phi_max = std::max(6.0, 3.5 * std::pow(8.0 * p.e_cj / p.e_l, 0.25));
  double dphi = 0.10;
  double dtheta = 2.0 * std::numbers::pi / 100.0;
  switch (quality) {
    case GridQuality::coarse:
      dphi = 0.15;
      dtheta = 2.0 * std::numbers::pi / 60.0;
      break;
    case GridQuality::standard: break;
    case GridQuality::fine:
      dphi = 0.05;
      dtheta = 2.0 * std::numbers::pi / 200.0;
      break;
  }
  return Grid2D::with_spacing(phi_max, dphi, dtheta);
}

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct MatrixEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Real symmetric finite-difference Hamiltonian together with its grid.
struct SparseHamiltonian {
  Grid2D grid;
  SparseMatrix matrix;
  /// Minimum of the diagonal potential; the kinetic part is positive
  /// definite, so the spectrum lies strictly above this value.
  double potential_min = 0.0;

  [[nodiscard]] std::size_t dimension() const { return grid.size(); }

  [[nodiscard]] std::vector<MatrixEntry> entries() const {
    std::vector<MatrixEntry> out;
    out.reserve(static_cast<std::size_t>(matrix.nonZeros()));
    for (int c = 0; c < matrix.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(matrix, c); it; ++it)
        out.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()),
                       it.value()});
    std::sort(out.begin(), out.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    return out;
  }

  /// Coordinate text dump: a header line "rows cols nnz", then one
  /// zero-based "row col value" triple per line.
  void write_coordinate(std::ostream& os) const {
    const auto all = entries();
    os << dimension() << ' ' << dimension() << ' ' << all.size() << '\n';
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& e : all) os << e.row << ' ' << e.col << ' ' << e.value << '\n';
    os.precision(old);
  }
};

/// Assembles -2E_CJ d_phi^2 - 2E_CSigma d_theta^2 + cross * d_phi d_theta + V
/// for an arbitrary diagonal potential V(phi, theta).
template <class Potential>
SparseHamiltonian assemble_with_potential(const CircuitParams& p, double cross_coefficient,
                                          const Grid2D& g, Potential&& potential) {
  const std::size_t n_phi = g.n_phi();
  const std::size_t n_theta = g.n_theta();
  const double dphi = g.dphi();
  const double dtheta = g.dtheta();

  const double a = 2.0 * p.e_cj / (dphi * dphi);
  const double b = 2.0 * p.e_c_sigma / (dtheta * dtheta);
  const double c = cross_coefficient / (4.0 * dphi * dtheta);
  const bool cross = cross_coefficient != 0.0;

  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(g.size() * (cross ? 9 : 5));

  auto at = [&](std::size_t m, std::size_t n) { return static_cast<int>(g.index(m, n)); };
  double vmin = std::numeric_limits<double>::infinity();

  for (std::size_t m = 0; m < n_phi; ++m) {
    const double phi = g.phi(m);
    for (std::size_t n = 0; n < n_theta; ++n) {
      const int row = at(m, n);
      const double v = potential(phi, g.theta(n));
      vmin = std::min(vmin, v);
      triplets.emplace_back(row, row, 2.0 * a + 2.0 * b + v);

      if (m > 0) triplets.emplace_back(row, at(m - 1, n), -a);
      if (m + 1 < n_phi) triplets.emplace_back(row, at(m + 1, n), -a);

      const std::size_t up = (n + 1) % n_theta;
      const std::size_t down = (n + n_theta - 1) % n_theta;
      triplets.emplace_back(row, at(m, up), -b);
      triplets.emplace_back(row, at(m, down), -b);

      if (cross) {
        if (m + 1 < n_phi) {
          triplets.emplace_back(row, at(m + 1, up), c);
          triplets.emplace_back(row, at(m + 1, down), -c);
        }
        if (m > 0) {
          triplets.emplace_back(row, at(m - 1, up), -c);
          triplets.emplace_back(row, at(m - 1, down), c);
        }
      }
    }
  }

  SparseMatrix h(static_cast<int>(g.size()), static_cast<int>(g.size()));
  h.setFromTriplets(triplets.begin(), triplets.end());
  h.makeCompressed();
  return SparseHamiltonian{g, std::move(h), vmin};
}

/// Hamiltonian of the junction-disordered device at chi = 0:
/// H_sym + 4 E_CSigma (dC_J/C_J) d_phi d_theta + 2 dE_J sin(theta) sin(phi - phi_ext/2).
///
/// Throws std::domain_error when the cross term makes the kinetic quadratic
/// form indefinite (E_CSigma (dC_J/C_J)^2 >= E_CJ); the grid operator is then
/// no longer bounded below by the potential.
inline SparseHamiltonian assemble(const CircuitParams& p, const DisorderParams& d, const Grid2D& g) {
  p.validate();
  d.validate();
  const double r = d.delta_c_j_rel;
  if (p.e_c_sigma * r * r >= p.e_cj)
    throw std::domain_error("assemble: junction-capacitance disorder makes the kinetic term indefinite");
  return assemble_with_potential(p, 4.0 * p.e_c_sigma * r, g, [&](double phi, double theta) {
    return potential_disordered(p, d, phi, theta, 0.0);
  });
}

inline SparseHamiltonian assemble(const CircuitParams& p, const Grid2D& g) {
  return assemble(p, DisorderParams{}, g);
}

/// Discrete L2 inner product sum(a * b) * dphi * dtheta.
inline double inner_product(const Eigen::Ref<const Eigen::VectorXd>& a,
                            const Eigen::Ref<const Eigen::VectorXd>& b, const Grid2D& g) {
  if (a.size() != b.size() || static_cast<std::size_t>(a.size()) != g.size())
    throw std::invalid_argument("inner_product: dimension mismatch");
  return a.dot(b) * g.cell_area();
}

/// Bilinear transfer of grid functions (columns of `from`) onto another
/// grid: zero outside the phi window, periodic in theta.
inline Eigen::MatrixXd resample(const Eigen::MatrixXd& from, const Grid2D& src, const Grid2D& dst) {
  if (static_cast<std::size_t>(from.rows()) != src.size())
    throw std::invalid_argument("resample: dimension mismatch");
  if (src == dst) return from;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dst.size()), from.cols());
  const auto half = static_cast<double>(src.half_width());
  const auto nt = src.n_theta();
  const auto last = static_cast<long>(src.n_phi()) - 1;
  for (std::size_t m = 0; m < dst.n_phi(); ++m) {
    const double u = dst.phi(m) / src.dphi() + half;
    const double fl = std::floor(u);
    const long i0 = static_cast<long>(fl);
    const double wu = u - fl;
    if (i0 < -1 || i0 > last) continue;
    for (std::size_t n = 0; n < dst.n_theta(); ++n) {
      const double t = dst.theta(n) / src.dtheta();
      const double tl = std::floor(t);
      const double wt = t - tl;
      const std::size_t j0 = static_cast<std::size_t>(static_cast<long>(tl)) % nt;
      const std::size_t j1 = (j0 + 1) % nt;
      const auto row = static_cast<Eigen::Index>(dst.index(m, n));
      auto add = [&](long i, double w) {
        if (i < 0 || i > last || w == 0.0) return;
        const auto mi = static_cast<std::size_t>(i);
        out.row(row) += w * ((1.0 - wt) * from.row(static_cast<Eigen::Index>(src.index(mi, j0))) +
                             wt * from.row(static_cast<Eigen::Index>(src.index(mi, j1))));
      };
      add(i0, 1.0 - wu);
      add(i0 + 1, wu);
    }
  }
  return out;
}

}  // namespace zeropi
