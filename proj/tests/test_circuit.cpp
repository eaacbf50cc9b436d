#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "zeropi/circuit.hpp"

using namespace zeropi;
constexpr double pi = std::numbers::pi;

TEST(Coordinates, ZeroMapsToZero) {
  const NormalCoords c = node_to_normal({0, 0, 0, 0});
  EXPECT_EQ(c.phi, 0.0);
  EXPECT_EQ(c.theta, 0.0);
  EXPECT_EQ(c.chi, 0.0);
  EXPECT_EQ(c.sigma, 0.0);
}

TEST(Coordinates, ThetaPattern) {
  const NormalCoords c = node_to_normal({-0.5, 0.5, 0.5, -0.5});
  EXPECT_DOUBLE_EQ(c.theta, 1.0);
  EXPECT_DOUBLE_EQ(c.phi, 0.0);
  EXPECT_DOUBLE_EQ(c.chi, 0.0);
  EXPECT_DOUBLE_EQ(c.sigma, 0.0);

  const NodePhases n = normal_to_node({.phi = 0, .theta = 1, .chi = 0, .sigma = 0});
  EXPECT_DOUBLE_EQ(n[0], -0.5);
  EXPECT_DOUBLE_EQ(n[1], 0.5);
  EXPECT_DOUBLE_EQ(n[2], 0.5);
  EXPECT_DOUBLE_EQ(n[3], -0.5);
}

TEST(Coordinates, RoundTripRandom) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int t = 0; t < 1000; ++t) {
    const NodePhases x{u(rng), u(rng), u(rng), u(rng)};
    const NodePhases y = normal_to_node(node_to_normal(x));
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(y[i], x[i], 1e-13);
    const NormalCoords c{u(rng), u(rng), u(rng), u(rng)};
    const NormalCoords d = node_to_normal(normal_to_node(c));
    EXPECT_NEAR(d.phi, c.phi, 1e-13);
    EXPECT_NEAR(d.theta, c.theta, 1e-13);
    EXPECT_NEAR(d.chi, c.chi, 1e-13);
    EXPECT_NEAR(d.sigma, c.sigma, 1e-13);
  }
}

TEST(Potential, SymmetricValues) {
  const auto p = CircuitParams::from_ratios(1e3, 1e3, 3.95);
  EXPECT_DOUBLE_EQ(potential_symmetric(p, 0, 0), 0.0);
  EXPECT_NEAR(potential_symmetric(p, 0, pi), 4.0 * p.e_j, 1e-15);
  auto q = p;
  q.phi_ext = pi;
  EXPECT_NEAR(potential_symmetric(q, pi / 2, 0), q.e_l * pi * pi / 4, 1e-15);
  // without the inductive term the minimum is exactly zero
  EXPECT_NEAR(potential_symmetric(q, pi / 2, 0) - q.e_l * pi * pi / 4, 0.0, 1e-15);
}

TEST(Potential, NonNegativeAndParity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20, 20);
  const auto p = CircuitParams::from_ratios(1e2, 1e3, 5.0);
  for (int t = 0; t < 2000; ++t) {
    const double phi = u(rng);
    const double theta = u(rng);
    const double v = potential_symmetric(p, phi, theta);
    EXPECT_GE(v, 0.0);
    EXPECT_DOUBLE_EQ(potential_symmetric(p, -phi, theta), v);
    EXPECT_DOUBLE_EQ(potential_symmetric(p, phi, -theta), v);
  }
}

TEST(Potential, FluxShiftByTwoPiIsThetaShiftByPi) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-6, 6);
  auto p = CircuitParams::from_ratios(1e3, 1e3, 3.95);
  for (int t = 0; t < 500; ++t) {
    p.phi_ext = u(rng);
    auto q = p;
    q.phi_ext += 2 * pi;
    const double phi = u(rng);
    const double theta = u(rng);
    EXPECT_NEAR(potential_symmetric(p, phi, theta), potential_symmetric(q, phi, theta + pi), 1e-12);
  }
}

TEST(Potential, Disordered) {
  auto p = CircuitParams::from_ratios(1e3, 1e3, 3.95);
  EXPECT_EQ(potential_disordered(p, {}, 0.3, 1.1, 0.0), potential_symmetric(p, 0.3, 1.1));

  DisorderParams d;
  d.delta_e_j = 0.02;
  EXPECT_NEAR(potential_disordered(p, d, 0.7, 1.3, 0.0), potential_disordered(p, d, -0.7, -1.3, 0.0), 1e-15);

  DisorderParams l;
  l.delta_e_l = 3e-4;
  const double base = potential_disordered(p, l, 1.0, 0.0, 0.0);
  EXPECT_NEAR(potential_disordered(p, l, 1.0, 0.0, 1.0) - base, p.e_l + 2 * l.delta_e_l, 1e-15);
}

TEST(Potential, ToyIsSeparable) {
  const auto p = CircuitParams::from_ratios(1e2, 1e2, 4.0);
  EXPECT_DOUBLE_EQ(potential_toy(p, 0, 0), 0.0);
  EXPECT_NEAR(potential_toy(p, 0, pi), 0.0, 1e-15);
  EXPECT_NEAR(potential_toy(p, 1.5, pi / 2), 2 * p.e_j + p.e_l * 2.25, 1e-12);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  const double ref = potential_toy(p, 0.0, 0.8) - potential_toy(p, 0.0, 0.0);
  for (int t = 0; t < 200; ++t) {
    const double phi = u(rng);
    EXPECT_NEAR(potential_toy(p, phi, 0.8) - potential_toy(p, phi, 0.0), ref, 1e-12);
  }
}

TEST(CircuitParams, FromRatios) {
  const auto p = CircuitParams::from_ratios(1e4, 2.2e3, 7.9);
  EXPECT_DOUBLE_EQ(p.e_j, 1 / 7.9);
  EXPECT_NEAR(p.e_cj, 7.9 / 8, 1e-15);
  EXPECT_NEAR(p.e_cj * p.e_j, 0.125, 1e-15);
  EXPECT_NEAR(1 / p.e_c_sigma, 1 / p.e_c + 1 / p.e_cj, 1e-9);
  EXPECT_NEAR(derived_scales(p).omega_p, 1.0, 1e-14);
}

TEST(CircuitParams, Validation) {
  EXPECT_THROW(CircuitParams::from_ratios(-1, 1e3, 4), std::invalid_argument);
  EXPECT_THROW(CircuitParams::from_energies(0.1, 0.0, 1e-3, 1.0), std::invalid_argument);
  // E_CSigma must lie below E_CJ
  EXPECT_THROW(CircuitParams::from_energies(0.1, 1e-3, 2.0, 1.0), std::invalid_argument);
  // consistent explicit E_C is accepted, inconsistent is rejected
  const double ecs = 1e-3;
  const double ecj = 1.0;
  const double ec = 1 / (1 / ecs - 1 / ecj);
  EXPECT_NO_THROW(CircuitParams::from_energies(0.125, 1e-3, ecs, ecj, ec));
  EXPECT_THROW(CircuitParams::from_energies(0.125, 1e-3, ecs, ecj, 2 * ec), std::invalid_argument);

  DisorderParams d;
  d.delta_c_rel = 1.0;
  EXPECT_THROW(d.validate(), std::invalid_argument);
  d.delta_c_rel = 0.0;
  d.delta_c_j_rel = 1.0;
  EXPECT_NO_THROW(d.validate());
  d.delta_c_j_rel = 1.5;
  EXPECT_THROW(d.validate(), std::invalid_argument);
  EXPECT_TRUE(DisorderParams{}.is_symmetric());
}

TEST(DerivedScales, Scaling) {
  auto p = CircuitParams::from_energies(0.2, 1e-3, 1e-3, 0.5);
  const double w = derived_scales(p).omega_p;
  p.e_j *= 4;
  EXPECT_NEAR(derived_scales(p).omega_p, 2 * w, 1e-14);

  auto q = CircuitParams::from_energies(0.2, 2e-3, 1e-3, 0.5);
  q.e_c = q.e_l;
  const auto s = derived_scales(q);
  EXPECT_NEAR(s.omega_chi / s.omega_p, std::sqrt(q.e_l * q.e_c / (q.e_j * q.e_cj)), 1e-14);
}

TEST(PhysicalUnits, FortyGigahertz) {
  const auto p = CircuitParams::from_ratios(1e3, 1e3, 4.0);
  const auto u = physical_units(p, 40e9);
  EXPECT_NEAR(u.inductance, 4.0e-6, 0.4e-6);
  // C_sigma = e^2 / (2 E_CSigma) is about half a picofarad
  EXPECT_GT(u.capacitance_sum, 0.4e-12);
  EXPECT_LT(u.capacitance_sum, 0.6e-12);
  const auto v = physical_units(p, 80e9);
  EXPECT_NEAR(v.inductance, u.inductance / 2, 1e-20);
  EXPECT_THROW(physical_units(p, 0.0), std::invalid_argument);
}

TEST(RegimeCheck, Flags) {
  const auto r = regime_check(CircuitParams::from_ratios(1e4, 2.2e3, 7.9));
  EXPECT_TRUE(r.degenerate_regime);
  const auto s = regime_check(CircuitParams::from_energies(0.1, 0.1, 1e-3, 1.25));
  EXPECT_FALSE(s.degenerate_regime);
  EXPECT_DOUBLE_EQ(s.ej_over_el, 1.0);
  const auto all = regime_check(CircuitParams::from_energies(1.0, 1e-3, 1e-3, 1.0));
  EXPECT_TRUE(all.degenerate_regime);
}
