#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "zeropi/dispersive.hpp"

using namespace zeropi;

namespace {

Eigen::MatrixXd pair_matrix(double g) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 1) = m(1, 0) = g;
  return m;
}

const EigenSolution& shared_solution() {
  static const EigenSolution s = solve(CircuitParams::from_ratios(300, 300, 4.0), {}, 6, GridQuality::coarse);
  return s;
}

}  // namespace

TEST(DispersiveShifts, TwoLevelHandExample) {
  // E0 = 0, E1 = 1, omega_chi = 0.5, |g|^2 = 0.01:
  // Delta01 = -1.5, Delta10 = 0.5, kappa0 = -0.006667, chi0 = -0.02667
  const auto r = dispersive_shifts({0.0, 1.0}, pair_matrix(0.1), Eigen::MatrixXd::Zero(2, 2), 0.5, 1.0);
  EXPECT_DOUBLE_EQ(r.detunings(0, 1), -1.5);
  EXPECT_DOUBLE_EQ(r.detunings(1, 0), 0.5);
  EXPECT_NEAR(r.lamb[0], 0.01 / -1.5, 1e-12);
  EXPECT_NEAR(r.stark[0], 0.01 * (1 / -1.5 - 1 / 0.5), 1e-12);
  EXPECT_NEAR(r.lamb[0], -0.006667, 5e-7);
  EXPECT_NEAR(r.stark[0], -0.02667, 5e-6);
  EXPECT_NEAR(r.lamb[1], 0.01 / 0.5, 1e-12);
  EXPECT_TRUE(r.resonances.empty());

  // g_theta enters through |g|^2 = g_phi^2 + g_theta^2
  const auto split = dispersive_shifts({0.0, 1.0}, pair_matrix(0.06), pair_matrix(0.08), 0.5, 1.0);
  EXPECT_NEAR(split.lamb[0], r.lamb[0], 1e-15);
}

TEST(DispersiveShifts, DefaultFactorFlagsNearResonance) {
  // |Delta10| = 0.5 < 10 |g| = 1
  const auto r = dispersive_shifts({0.0, 1.0}, pair_matrix(0.1), Eigen::MatrixXd::Zero(2, 2), 0.5);
  EXPECT_EQ(r.resonances.size(), 2u);
  EXPECT_EQ(r.stark[0], 0.0);
  EXPECT_EQ(r.lamb[0], 0.0);
}

TEST(DispersiveShifts, DetuningIdentity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<double> e(12);
  for (double& x : e) x = u(rng);
  const double w = 0.37;
  const auto r = dispersive_shifts(e, Eigen::MatrixXd::Zero(12, 12), Eigen::MatrixXd::Zero(12, 12), w);
  for (int l = 0; l < 12; ++l)
    for (int m = 0; m < 12; ++m) EXPECT_NEAR(r.detunings(l, m) + r.detunings(m, l), -2 * w, 4e-16 * (3 + w));
}

TEST(DispersiveShifts, ZeroCouplingGivesZeroShifts) {
  const auto r = dispersive_shifts({0.0, 0.2, 0.5}, Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3), 0.2);
  for (double x : r.stark) EXPECT_EQ(x, 0.0);
  for (double x : r.lamb) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(dispersive_shifts({0.0, 1.0}, Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(2, 2), 0.2),
               std::invalid_argument);
  EXPECT_THROW(dispersive_shifts({0.0, 1.0}, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2), 0.0),
               std::invalid_argument);
}

TEST(Couplings, ZeroDisorderIsExactlyZero) {
  const auto p = CircuitParams::from_ratios(300, 300, 4.0);
  const auto& s = shared_solution();
  const auto c = coupling_elements(s, p, {});
  EXPECT_EQ(c.g_phi.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(c.g_theta.cwiseAbs().maxCoeff(), 0.0);
  const auto r = dispersive(s, p, {});
  for (double x : r.stark) EXPECT_EQ(x, 0.0);
  for (double x : r.lamb) EXPECT_EQ(x, 0.0);
}

TEST(Couplings, MatrixElementStructure) {
  const auto p = CircuitParams::from_ratios(300, 300, 4.0);
  const auto& s = shared_solution();
  DisorderParams d;
  d.delta_c_rel = 0.01;
  d.delta_e_l = 0.01 * p.e_l;
  const auto c = coupling_elements(s, p, d);
  const auto k = static_cast<Eigen::Index>(s.size());
  const double g_scale = c.g_phi.cwiseAbs().maxCoeff();
  for (Eigen::Index l = 0; l < k; ++l) {
    EXPECT_NEAR(c.d_theta(l, l), 0.0, 1e-12);
    for (Eigen::Index m = 0; m < k; ++m) {
      EXPECT_NEAR(c.d_theta(l, m), -c.d_theta(m, l), 1e-12);
      EXPECT_NEAR(c.phi(l, m), c.phi(m, l), 1e-12);
      EXPECT_NEAR(c.g_phi(l, m), c.g_phi(m, l), 1e-9 * g_scale);
      EXPECT_NEAR(c.g_theta(l, m), c.g_theta(m, l), 1e-15);
    }
  }

  // linear in dE_L and dC/C at a fixed solution
  DisorderParams d2 = d;
  d2.delta_e_l *= 3;
  d2.delta_c_rel *= 2;
  const auto c2 = coupling_elements(s, p, d2);
  EXPECT_LT((c2.g_phi - 3 * c.g_phi).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((c2.g_theta - 2 * c.g_theta).cwiseAbs().maxCoeff(), 1e-15);

  // prefactors as defined
  const double pre_theta = p.e_c_sigma * 0.01 * std::pow(32 * p.e_l / p.e_c, 0.25);
  EXPECT_NEAR(c.g_theta(0, 2), pre_theta * std::abs(c.d_theta(0, 2)), 1e-15);
  const double pre_phi = d.delta_e_l * std::pow(8 * p.e_c / p.e_l, 0.25);
  EXPECT_NEAR(c.g_phi(0, 1), pre_phi * std::abs(c.phi(0, 1)), 1e-15);
}

TEST(JunctionDisorder, SignFlipAndZero) {
  const auto p = CircuitParams::from_ratios(100, 100, 4.0);
  SweepOptions o;
  o.quality = GridQuality::coarse;
  o.refine = false;
  const auto r = junction_disorder_sweep(p, {0.0, 0.05, -0.05}, 4, o);
  ASSERT_EQ(r.points.size(), 3u);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_NEAR(r.points[1].energies[i], r.points[2].energies[i], 1e-8 * r.points[1].energies[i]);
  const auto sym = solve(p, {}, 4, GridQuality::coarse);
  EXPECT_NEAR(r.points[0].report->d_value, degeneracy(sym).d_value, 1e-6);
  EXPECT_THROW(junction_disorder_sweep(p, {p.e_j}, 4, o), std::invalid_argument);
}

TEST(CjDisorder, ZeroMatchesSymmetricAndRangeChecked) {
  const auto p = CircuitParams::from_ratios(100, 100, 4.0);
  SweepOptions o;
  o.quality = GridQuality::coarse;
  o.refine = false;
  const auto r = cj_disorder_check(p, {0.0, 1.0}, 4, o);
  const auto sym = solve(p, {}, 4, GridQuality::coarse);
  EXPECT_NEAR(r.points[0].report->d_value, degeneracy(sym).d_value, 1e-6);
  EXPECT_NE(r.points[1].status, PointStatus::failed) << r.points[1].message;
  EXPECT_THROW(cj_disorder_check(p, {1.2}, 4, o), std::invalid_argument);
}
