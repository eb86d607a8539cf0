#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crreg/registration.hpp"

namespace crreg {

enum class SweepAxis { tx, ty, tz, rx, ry, rz };

SweepAxis parse_axis(const std::string& name);
std::string to_string(SweepAxis a);

/// One point of a landscape or lambda sweep. Landscape rows leave the
/// metric fields unset.
struct SweepRow {
  double parameter = 0.0;
  LossTerms objective;
  std::optional<double> dice_mean;
  std::optional<double> pct_neg_jacobian;
  std::optional<double> pct_ndv;
  std::optional<double> field_grad_energy;
  std::optional<double> mean_displacement;
};

/// Similarity loss (no regularizer) of `moving` resampled through the affine
/// transform obtained by varying one parameter over `steps` evenly spaced
/// values in [-range, range]. Translations in voxels, rotations in degrees.
std::vector<SweepRow> landscape(const Volume& fixed, const Volume& moving,
                                const RegistrationConfig& cfg, SweepAxis axis, double range,
                                int steps);

/// One registration per lambda, each scored against the labels; rows sorted
/// by lambda.
std::vector<SweepRow> lambda_sweep(const Volume& fixed, const Volume& moving,
                                   const LabelVolume& fixed_labels,
                                   const LabelVolume& moving_labels,
                                   const RegistrationConfig& cfg, std::vector<double> lambdas);

/// Grid used when no lambdas are given; contains the published optimum for
/// each measure on both network backbones (MI: 1.7, 4.5; CR: 4.2, 7.7).
std::vector<double> default_lambda_grid(Metric metric);

void write_landscape_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Shortest-roundtrip-safe decimal for CSV and logs ("%.17g").
std::string format_double(double v);

}  // namespace crreg
