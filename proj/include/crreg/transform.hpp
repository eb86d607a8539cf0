#pragma once

#include <span>
#include <string>
#include <vector>

#include "crreg/volume.hpp"

namespace crreg {

/// Result of resampling the moving image through a displacement field.
struct WarpEval {
  Volume warped;
  /// Spatial gradient of the trilinear interpolant of the moving image at
  /// each sampled location, used to chain intensity gradients to u.
  std::vector<Vec3> sample_gradient;
};

/// Translation in voxels; rotation in degrees about the volume center,
/// applied z first, then y, then x (R = Rx * Ry * Rz).
struct AffineParams {
  Vec3 translation{0.0, 0.0, 0.0};
  Vec3 rotation_deg{0.0, 0.0, 0.0};
};

/// warped(p) = moving(p + u(p)) with trilinear interpolation; sample
/// coordinates are clamped to the image box.
WarpEval warp(const Volume& moving, const DisplacementField& field);

/// Trilinear value of `image` at a continuous voxel coordinate (border clamp).
double sample_trilinear(const Volume& image, const Vec3& point);

/// d loss / d u(p) = grad_wrt_warped(p) * sample_gradient(p).
DisplacementField chain_to_field(std::span<const double> grad_wrt_warped, const WarpEval& we);

/// u(p) = R (p - c) + c + t - p with c the volume center.
DisplacementField affine_field(const AffineParams& params, const Dims& dims);

struct RegularizerEval {
  double value = 0.0;
  std::vector<Vec3> grad;
};

/// Mean over voxels of the squared forward differences of all three
/// components along all three axes (difference taken as zero on the far face),
/// with its exact gradient.
RegularizerEval diffusion_reg(const DisplacementField& field);

/// Value only.
double diffusion_reg_value(const DisplacementField& field);

/// Box-average downsampling by two along each axis (partial boxes at odd
/// extents average what they cover).
Volume downsample(const Volume& v);

/// Trilinear upsampling of a field onto `fine` dims with the vectors doubled
/// (voxel units halve in size).
DisplacementField upsample_field(const DisplacementField& coarse, const Dims& fine);

}  // namespace crreg
