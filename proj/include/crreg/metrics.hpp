#pragma once

#include <map>
#include <string>
#include <vector>

#include "crreg/volume.hpp"

namespace crreg::metrics {

struct DiceResult {
  std::map<LabelVolume::Label, double> per_label;
  double mean = 0.0;
};

struct MetricsReport {
  std::map<LabelVolume::Label, double> dice_per_label;
  double dice_mean = 0.0;
  double pct_neg_jacobian = 0.0;
  double pct_ndv = 0.0;
  double field_grad_energy = 0.0;
};

/// DSC = 2|A and B| / (|A| + |B|) for every non-background label present in
/// either volume; the mean is taken over labels.
DiceResult dice(const LabelVolume& a, const LabelVolume& b);

/// Nearest-neighbour resampling at p + u(p), border clamp, ties rounded
/// toward the smaller index.
LabelVolume warp_labels(const LabelVolume& labels, const DisplacementField& field);

/// det(I + grad u) per voxel; central differences inside, one-sided on the
/// boundary faces.
std::vector<double> jacobian_det(const DisplacementField& field);

/// Percent of voxels with det <= 0.
double pct_neg_jacobian(const DisplacementField& field);

/// Non-diffeomorphic volume in percent. Each voxel forms the eight
/// determinants obtained by choosing forward or backward differences per axis
/// and contributes the mean of their negative parts, each capped at one
/// voxel so the result stays within [0, 100].
double ndv(const DisplacementField& field);

/// Field-only metrics; dice fields stay empty.
MetricsReport field_metrics(const DisplacementField& field);

/// Warps `moving_labels` by `field` and scores against `fixed_labels`.
MetricsReport evaluate(const DisplacementField& field, const LabelVolume& fixed_labels,
                       const LabelVolume& moving_labels);

}  // namespace crreg::metrics
