#pragma once

#include <cstdint>
#include <string>

#include "crreg/volume.hpp"

namespace crreg {

/// Pointwise intensity mapping that turns the fixed "modality" into the
/// moving one.
enum class Remap { quadratic, inverted, sinus };

Remap parse_remap(const std::string& name);
std::string to_string(Remap r);
double apply_remap(Remap r, double x);

struct PhantomSpec {
  Dims dims{48, 48, 48};
  std::uint64_t seed = 1;
  double deformation_amplitude = 3.0;  // max displacement norm, voxels
  double deformation_smoothness = 6.0; // Gaussian sigma, voxels
  Remap remap = Remap::quadratic;
};

struct Phantom {
  Volume moving;
  Volume fixed;
  DisplacementField truth;
  LabelVolume labels_moving;
  LabelVolume labels_fixed;
};

/// Synthetic pair with known deformation. The fixed image is a sum of smooth
/// random blobs scaled to [0, 1]; `truth` is smoothed white noise scaled to the
/// requested amplitude and shrunk until its minimum Jacobian determinant
/// exceeds 0.1; moving = remap(fixed warped by -truth). Labels are
/// iso-intensity bands of the fixed image (warped the same way for moving).
/// Deterministic in `spec.seed`.
Phantom make_phantom(const PhantomSpec& spec);

}  // namespace crreg
