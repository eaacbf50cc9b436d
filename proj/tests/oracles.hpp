#pragma once

// Reference results built without the library's assembly or solver code:
// closed-form spectra and dense diagonalizations of explicitly written
// finite-difference matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace oracle {

/// Eigenvalues of a dense symmetric matrix, ascending.
inline std::vector<double> dense_eigenvalues(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd v = es.eigenvalues();
  return {v.data(), v.data() + v.size()};
}

inline std::vector<double> dense_eigenvalues(const Eigen::SparseMatrix<double>& a) {
  return dense_eigenvalues(Eigen::MatrixXd(a));
}

/// -c d^2/dx^2 + V(x) on n interior points x_j = x0 + j h, zero outside.
inline std::vector<double> dirichlet_1d(std::size_t n, double x0, double h, double c,
                                        const std::function<double(double)>& v) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double t = c / (h * h);
  for (std::size_t j = 0; j < n; ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    a(i, i) = 2.0 * t + v(x0 + static_cast<double>(j) * h);
    if (j + 1 < n) a(i, i + 1) = a(i + 1, i) = -t;
  }
  return dense_eigenvalues(a);
}

/// -c d^2/dx^2 + V(x) on a ring of n points x_j = j 2pi/n.
inline std::vector<double> periodic_1d(std::size_t n, double c, const std::function<double(double)>& v) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
  const double t = c / (h * h);
  for (std::size_t j = 0; j < n; ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    const auto next = static_cast<Eigen::Index>((j + 1) % n);
    a(i, i) += 2.0 * t + v(static_cast<double>(j) * h);
    a(i, next) -= t;
    a(next, i) -= t;
  }
  return dense_eigenvalues(a);
}

/// All pairwise sums of two spectra, ascending, truncated to `count`.
inline std::vector<double> sum_spectrum(const std::vector<double>& a, const std::vector<double>& b, std::size_t count) {
  std::vector<double> out;
  for (double x : a)
    for (double y : b) out.push_back(x + y);
  std::sort(out.begin(), out.end());
  out.resize(std::min(count, out.size()));
  return out;
}

/// Harmonic oscillator -2E_CJ d_phi^2 + E_L phi^2 times a free rotor
/// -2E_CSigma d_theta^2: sqrt(8 E_L E_CJ)(n + 1/2) + 2 E_CSigma m^2.
inline std::vector<double> oscillator_rotor(double e_l, double e_cj, double e_c_sigma, std::size_t count) {
  const double w = std::sqrt(8.0 * e_l * e_cj);
  std::vector<double> out;
  const int span = static_cast<int>(count) + 2;
  for (int n = 0; n < span; ++n)
    for (int m = -span; m <= span; ++m) out.push_back(w * (n + 0.5) + 2.0 * e_c_sigma * m * m);
  std::sort(out.begin(), out.end());
  out.resize(count);
  return out;
}

/// Dense matrix of -2E_CJ d_phi^2 - 2E_CSigma d_theta^2 + c d_phi d_theta + V
/// written entry by entry for a tiny grid, phi-major ordering.
inline Eigen::MatrixXd dense_hamiltonian(std::size_t n_phi, std::size_t n_theta, double dphi, double e_cj,
                                         double e_c_sigma, double cross,
                                         const std::function<double(double, double)>& v) {
  const auto n = static_cast<Eigen::Index>(n_phi * n_theta);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(n_theta);
  const double half = static_cast<double>(n_phi - 1) / 2.0;
  auto idx = [&](long m, long k) {
    const long kk = ((k % static_cast<long>(n_theta)) + static_cast<long>(n_theta)) % static_cast<long>(n_theta);
    return static_cast<Eigen::Index>(m * static_cast<long>(n_theta) + kk);
  };
  for (long m = 0; m < static_cast<long>(n_phi); ++m)
    for (long k = 0; k < static_cast<long>(n_theta); ++k) {
      const Eigen::Index i = idx(m, k);
      const double phi = (static_cast<double>(m) - half) * dphi;
      h(i, i) += 4.0 * e_cj / (dphi * dphi) + 4.0 * e_c_sigma / (dtheta * dtheta) + v(phi, static_cast<double>(k) * dtheta);
      for (long dm : {-1L, 1L}) {
        if (m + dm < 0 || m + dm >= static_cast<long>(n_phi)) continue;
        h(i, idx(m + dm, k)) += -2.0 * e_cj / (dphi * dphi);
        for (long dk : {-1L, 1L}) h(i, idx(m + dm, k + dk)) += cross * static_cast<double>(dm * dk) / (4.0 * dphi * dtheta);
      }
      for (long dk : {-1L, 1L}) h(i, idx(m, k + dk)) += -2.0 * e_c_sigma / (dtheta * dtheta);
    }
  return h;
}

}  // namespace oracle
