#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "casimir_lab/electrostatics.hpp"

using namespace casimir_lab;

TEST(PatchForce, WorkedValues) {
  // 5.4 mV on a 15.6 cm lens at 7.29 um: about -17.4 pN.
  EXPECT_NEAR(patch_force(0.156, 5.4e-3, Separation::from_um(7.29)).piconewtons(), -17.4, 0.05);
  // One volt of uncompensated potential at 1 um: about -4.34 uN.
  const double f = applied_voltage_force(0.156, {1.0, 0.0, 0.0}, Separation::from_um(1.0)).newtons;
  EXPECT_NEAR(f / -4.34e-6, 1.0, 2e-3);
  // By hand.
  EXPECT_NEAR(patch_force(0.1, 0.01, Separation::from_um(1.0)).newtons,
              -std::numbers::pi * 8.8541878128e-12 * 0.1 * 1e-4 / 1e-6, 1e-25);
}

TEST(PatchForce, ScalesAsInverseDistanceAndVanishesWithoutPatches) {
  const auto f1 = patch_force(0.156, 0.02, Separation::from_um(2.0));
  const auto f2 = patch_force(0.156, 0.02, Separation::from_um(4.0));
  EXPECT_DOUBLE_EQ(f1.newtons / f2.newtons, 2.0);
  EXPECT_EQ(patch_force(0.156, 0.0, Separation::from_um(2.0)).newtons, 0.0);
  EXPECT_TRUE(f1.attractive());
  EXPECT_THROW(patch_force(0.156, -0.1, Separation::from_um(2.0)), DomainError);
  EXPECT_THROW(patch_force(0.0, 0.1, Separation::from_um(2.0)), DomainError);
}

TEST(AppliedVoltage, CompensatedVoltageLeavesPatchTerm) {
  const double R = 0.156;
  for (double d_um : {0.7, 1.3, 3.0, 7.3}) {
    const auto d = Separation::from_um(d_um);
    const ElectrostaticParams p{0.021, 0.021, 0.013};
    EXPECT_EQ(applied_voltage_force(R, p, d).newtons, patch_force(R, p.V_rms, d).newtons);
  }
  const ElectrostaticParams off{0.05, 0.02, 0.0};
  const double expected = -std::numbers::pi * constants::eps0 * R * 0.03 * 0.03 / 1e-6;
  EXPECT_NEAR(applied_voltage_force(R, off, Separation::from_um(1.0)).newtons / expected, 1.0, 1e-12);
}

TEST(AppliedVoltage, ResidualDriftWithSeparation) {
  ElectrostaticParams p{0.0, 0.02, 0.0, 1000.0, 1e-6};
  EXPECT_DOUBLE_EQ(p.residual_at(1e-6), 0.02);
  EXPECT_NEAR(p.residual_at(2e-6), 0.021, 1e-15);
  p.V = p.residual_at(2e-6);
  EXPECT_NEAR(applied_voltage_force(0.1, p, Separation::from_um(2.0)).newtons, 0.0, 1e-30);
}

TEST(PatchWindow, EffectiveRadiusAndAdmissibleSizes) {
  const auto w = patch_scale_window(0.156, Separation::from_um(7.0));
  EXPECT_NEAR(w.r_eff, 1.045e-3, 1e-6);
  EXPECT_DOUBLE_EQ(w.lambda_lo, 7e-6);
  EXPECT_NEAR(w.lambda_geo, std::sqrt(7e-6 * w.r_eff), 1e-18);
  for (double d_um : {0.7, 1.0, 3.0, 7.3}) {
    EXPECT_TRUE(patch_scale_window(0.156, Separation::from_um(d_um)).contains(50e-6)) << d_um;
  }
  EXPECT_FALSE(w.contains(5e-6));
  EXPECT_FALSE(w.contains(2e-3));
  EXPECT_THROW(patch_scale_window(1e-6, Separation::from_um(7.0)), DomainError);
}
