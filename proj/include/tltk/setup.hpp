#pragma once

#include <array>

// Interferometer geometry: three standing-wave photodepletion gratings
// separated by a common distance L. The grating period is half the laser
// wavelength.

namespace tltk {

struct GratingSettings {
  double power = 0.0;       // incident laser power, W
  double waist_y = 0.0;     // vertical 1/e^2 waist, m
  double wavelength = 0.0;  // m

  double period() const { return 0.5 * wavelength; }
};

struct InterferometerSetup {
  std::array<GratingSettings, 3> gratings;
  double separation = 0.0;  // grating distance L, m

  // Fringe/grating period of the diffracting grating G2, m.
  double period() const { return gratings[1].period(); }

  // Throws ValidationError on non-physical values (negative power,
  // non-positive waists/wavelengths/separation, mismatched periods).
  void validate() const;
};

}  // namespace tltk
