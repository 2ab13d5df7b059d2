// Drude vs plasma pressure between two gold plates, and the sphere-plate
// force for a 15.6 cm lens, at room temperature.

#include <cstdio>
#include <numbers>

#include "casimir_lab/casimir_lab.hpp"

using namespace casimir_lab;

int main() {
  const auto drude = presets::au_drude();
  const auto plasma = presets::au_plasma();
  const Temperature T(300.0);
  const SphereGeometry lens{15.6 * units::cm, std::nullopt};

  std::printf("%8s %14s %14s %8s %12s %12s\n", "d [um]", "P_D [mPa]", "P_P [mPa]", "P_D/P_P", "F_D [pN]", "F_P [pN]");
  for (double d_um : {0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 7.0}) {
    const auto d = Separation::from_um(d_um);
    const double pd = casimir_pressure(drude, {d, T}).value;
    const double pp = casimir_pressure(plasma, {d, T}).value;
    const double fd = pfa_force(lens, drude, d, T).piconewtons();
    const double fp = pfa_force(lens, plasma, d, T).piconewtons();
    std::printf("%8.2f %14.6g %14.6g %8.4f %12.5g %12.5g\n", d_um, pd * 1e3, pp * 1e3, pd / pp, fd, fp);
  }

  // Large-separation limit: only the zero-frequency term survives.
  const auto d = Separation::from_um(7.0);
  std::printf("\nclassical limit at 7 um: Drude %.4g pN, plasma %.4g pN\n",
              asymptotic_force(Approach::drude, lens.R, d, T).piconewtons(),
              asymptotic_force(Approach::plasma, lens.R, d, T).piconewtons());
  return 0;
}
