#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <vector>

#include "casimir_lab/geometry_pfa.hpp"

using namespace casimir_lab;

namespace {

// A cheap power-law stand-in for the plate-plate free energy.
double toy_energy(Separation d) { return -1e-27 / std::pow(d.meters(), 3); }

const SphereGeometry lens{0.156, std::nullopt};

}  // namespace

TEST(Pfa, PerfectLensIsTwoPiRTimesEnergy) {
  const auto d = Separation::from_um(2.0);
  EXPECT_DOUBLE_EQ(pfa_force(lens, toy_energy, d).newtons, 2.0 * std::numbers::pi * 0.156 * toy_energy(d));
  const SphereGeometry twice{0.312, std::nullopt};
  EXPECT_DOUBLE_EQ(pfa_force(twice, toy_energy, d).newtons, 2.0 * pfa_force(lens, toy_energy, d).newtons);
  EXPECT_TRUE(pfa_regime_ok(lens, d));
  EXPECT_FALSE(pfa_regime_ok({1e-4, std::nullopt}, d));
  EXPECT_THROW(pfa_force(SphereGeometry{-1.0, std::nullopt}, toy_energy, d), DomainError);
}

TEST(Pfa, ImperfectLensReductions) {
  const auto d = Separation::from_um(1.5);
  const double perfect = pfa_force(lens, toy_energy, d).newtons;
  // No offset, any R1.
  EXPECT_NEAR(pfa_force_imperfect(lens, {0.03, 0.0}, toy_energy, d).newtons / perfect, 1.0, 1e-14);
  // Bubble covers the whole lens.
  EXPECT_NEAR(pfa_force_imperfect(lens, {0.156, 0.7e-6}, toy_energy, d).newtons / perfect, 1.0, 1e-14);
  // No bubble: perfect lens at d + D.
  const double shifted = pfa_force(lens, toy_energy, Separation(d.meters() + 0.4e-6)).newtons;
  EXPECT_NEAR(pfa_force_imperfect(lens, {0.0, 0.4e-6}, toy_energy, d).newtons / shifted, 1.0, 1e-14);
}

TEST(Pfa, ReductionsWithLifshitzEnergy) {
  const auto m = presets::au_plasma();
  const auto d = Separation::from_um(1.0);
  const Temperature T(300.0);
  const double perfect = pfa_force(lens, m, d, T).newtons;
  EXPECT_NEAR(pfa_force_imperfect(lens, {0.05, 0.0}, m, d, T).newtons / perfect, 1.0, 1e-12);
  EXPECT_NEAR(pfa_force_imperfect(lens, {lens.R, 0.3e-6}, m, d, T).newtons / perfect, 1.0, 1e-12);
}

TEST(Pfa, PatchSumIsLinearAndChecked) {
  const auto d = Separation::from_um(1.0);
  const std::vector<PfaPatch> patches = {{0.05, 0.0}, {0.06, 0.2e-6}, {0.046, -0.1e-6}};
  double expected = 0.0;
  for (const auto& p : patches) expected += 2.0 * std::numbers::pi * p.radius * toy_energy(Separation(1e-6 + p.offset));
  EXPECT_NEAR(pfa_force_patches(lens, std::span<const PfaPatch>(patches), toy_energy, d).newtons / expected, 1.0,
              1e-14);

  const std::vector<PfaPatch> short_sum = {{0.05, 0.0}, {0.05, 0.2e-6}};
  EXPECT_THROW(pfa_force_patches(lens, std::span<const PfaPatch>(short_sum), toy_energy, d), ConfigError);
  const std::vector<PfaPatch> touching = {{0.1, 0.0}, {0.056, -1.0e-6}};
  EXPECT_THROW(pfa_force_patches(lens, std::span<const PfaPatch>(touching), toy_energy, d), DomainError);
  EXPECT_THROW(pfa_force_imperfect(lens, {0.2, 0.0}, toy_energy, d), ConfigError);
  EXPECT_THROW(pfa_force_imperfect(lens, {-0.01, 0.0}, toy_energy, d), ConfigError);
}

TEST(Pfa, ImperfectionFile) {
  const auto path = testing::TempDir() + "imperfections.csv";
  std::ofstream(path) << "r1_cm,d_offset_um\n7.8,0.35\n";
  const auto one = load_imperfections(path);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(one[0].R1, 0.078, 1e-15);
  EXPECT_NEAR(one[0].D, 0.35e-6, 1e-20);
  const auto bubble = imperfection_patches(lens, std::span<const Imperfection>(one));
  ASSERT_EQ(bubble.size(), 2u);
  EXPECT_NEAR(bubble[0].radius + bubble[1].radius, lens.R, 1e-15);

  std::ofstream(path) << "r1_cm,d_offset_um\n10,0\n5.6,0.2\n";
  const auto many = load_imperfections(path);
  const auto patches = imperfection_patches(lens, std::span<const Imperfection>(many));
  EXPECT_EQ(patches.size(), 2u);
  EXPECT_NO_THROW(pfa_force_patches(lens, std::span<const PfaPatch>(patches), toy_energy, Separation::from_um(1)));

  std::ofstream(path) << "r1_cm,d_offset_um\n-1,0\n";
  EXPECT_THROW(load_imperfections(path), DataError);
  std::ofstream(path) << "r1,d\n1,0\n";
  EXPECT_THROW(load_imperfections(path), DataError);
}

TEST(Masquerade, IdenticalModelsMatchExactly) {
  const auto m = presets::au_plasma();
  const std::vector<Separation> grid = {Separation::from_um(0.5), Separation::from_um(1.0), Separation::from_um(2.0),
                                        Separation::from_um(3.0)};
  MasqueradeOptions opt;
  opt.grid = 11;
  const auto r = find_masquerade(lens, m, m, grid, Temperature(300.0), opt);
  EXPECT_LT(r.max_rel_dev, 1e-6);
  EXPECT_EQ(r.verdict, MasqueradeResult::Verdict::matched);
  EXPECT_EQ(to_string(r.verdict), "matched");
}

TEST(Masquerade, AgreesWithBruteForceScan) {
  const auto target = presets::au_drude();
  const auto candidate = presets::au_plasma();
  const Temperature T(300.0);
  const std::vector<Separation> grid = {Separation::from_um(0.5), Separation::from_um(1.0), Separation::from_um(2.0),
                                        Separation::from_um(3.0)};
  MasqueradeOptions opt;
  opt.grid = 21;
  const auto r = find_masquerade(lens, target, candidate, grid, T, opt);

  // Oracle: a plain 2-D grid over (R1/R, D) evaluating every deviation directly.
  auto energy = [&](double d) { return free_energy_per_area(candidate, {Separation(d), T}).value; };
  std::vector<double> tgt;
  for (auto d : grid) tgt.push_back(2.0 * std::numbers::pi * lens.R * free_energy_per_area(target, {d, T}).value);
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 40; ++j) {
    const double D = -1e-6 + j * 0.05e-6;
    if (D <= -0.5e-6) continue;
    std::vector<double> near, far;
    for (auto d : grid) {
      near.push_back(energy(d.meters()));
      far.push_back(energy(d.meters() + D));
    }
    for (int k = 0; k < 50; ++k) {
      const double w = 0.5 + 0.01 * k;
      double sse = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double f = 2.0 * std::numbers::pi * lens.R * (w * near[i] + (1.0 - w) * far[i]);
        sse += std::pow(f / tgt[i] - 1.0, 2);
      }
      best = std::min(best, sse);
    }
  }
  EXPECT_LE(r.sum_sq_rel_dev, best * (1.0 + 1e-6));
  EXPECT_GE(r.best.R1, 0.5 * lens.R);
  EXPECT_LT(r.best.R1, lens.R);
  EXPECT_GE(r.best.D, opt.D_min);
  EXPECT_LE(r.best.D, opt.D_max);

  // Reported deviations agree with an independent evaluation at the optimum.
  const auto dev = masquerade_deviations(lens, r.best, target, candidate, grid, T);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(dev[i], r.deviations[i], 1e-6);
}

TEST(Masquerade, RejectsGridOutsideAllowedRange) {
  const auto m = presets::au_plasma();
  const std::vector<Separation> bad = {Separation::from_um(0.3), Separation::from_um(1.0)};
  EXPECT_THROW(find_masquerade(lens, m, m, bad, Temperature(300.0)), DomainError);
  const std::vector<Separation> one = {Separation::from_um(1.0)};
  EXPECT_THROW(find_masquerade(lens, m, m, one, Temperature(300.0)), ConfigError);
}
