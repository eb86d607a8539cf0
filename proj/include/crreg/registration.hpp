#pragma once

#include <cstdint>
#include <vector>

#include "crreg/metrics.hpp"
#include "crreg/parzen.hpp"
#include "crreg/similarity.hpp"
#include "crreg/volume.hpp"

namespace crreg {

struct RegistrationConfig {
  Metric metric = Metric::cr;
  double lambda = 4.2;
  int levels = 3;
  int iters_per_level = 200;
  double step_size = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::size_t bins = 32;
  double bandwidth_scale = 1.0;
  std::uint64_t seed = 0;

  /// Throws Error on an out-of-range field.
  void validate() const;
};

/// One evaluation of L = similarity + lambda * L_reg. `regularizer` already
/// carries the lambda factor.
struct LossTerms {
  double total = 0.0;
  double similarity = 0.0;
  double regularizer = 0.0;
};

struct LossEval {
  LossTerms terms;
  DisplacementField grad;
};

/// Parzen setups used for a fixed/moving pair: each image bins its own range.
/// The warped image never leaves the moving image's range under trilinear
/// sampling, so the moving setup is reused for every warp.
struct PairBinning {
  parzen::ParzenConfig fixed;
  parzen::ParzenConfig moving;
};

PairBinning pair_binning(const Volume& fixed, const Volume& moving, const RegistrationConfig& cfg);

LossEval total_loss(const Volume& fixed, const Volume& moving, const DisplacementField& field,
                    const RegistrationConfig& cfg, const PairBinning& binning);
LossEval total_loss(const Volume& fixed, const Volume& moving, const DisplacementField& field,
                    const RegistrationConfig& cfg);

struct RegistrationReport {
  DisplacementField final_field;
  std::vector<LossTerms> loss_history;
  metrics::MetricsReport metrics;
  double wall_seconds = 0.0;
};

/// Coarse-to-fine dense-field optimization with Adam updates. Each level works
/// on box-downsampled images; the field is upsampled (and doubled) into the
/// next level. Every level keeps its best iterate, so the returned field is
/// the best iterate of the finest level.
/// `metrics` holds field metrics only; see the labelled overload for Dice.
RegistrationReport register_images(const Volume& fixed, const Volume& moving,
                                   const RegistrationConfig& cfg);

/// As above, with Dice of `moving_labels` warped onto `fixed_labels`.
RegistrationReport register_images(const Volume& fixed, const Volume& moving,
                                   const RegistrationConfig& cfg, const LabelVolume& fixed_labels,
                                   const LabelVolume& moving_labels);

}  // namespace crreg
