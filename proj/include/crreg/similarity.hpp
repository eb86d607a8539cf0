#pragma once

#include <string>
#include <vector>

#include "crreg/parzen.hpp"
#include "crreg/volume.hpp"

namespace crreg {

/// Value of a similarity measure and its gradient with respect to each
/// input image's voxel intensities.
struct SimilarityEval {
  double value = 0.0;
  std::vector<double> grad_wrt_first;
  std::vector<double> grad_wrt_second;
  /// Set when a constant image made the measure undefined; value and
  /// gradients are then zero.
  bool degenerate = false;
};

/// Soft-binned conditional statistics of Y given the bins of X.
struct CondStats {
  std::vector<double> bin_means;    // weighted mean of Y inside each X bin
  std::vector<double> bin_weights;  // n_k, sums to one
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  double var_between = 0.0;  // Var(E(Y|X)) = sum_k n_k (bin_mean_k - mean_y)^2
};

enum class Metric { cr, mi };

Metric parse_metric(const std::string& name);
std::string to_string(Metric m);

/// `cfg` bins the intensities of `x`.
CondStats cond_stats(const Volume& x, const Volume& y, const parzen::ParzenConfig& cfg);

/// eta(Y|X) = Var(E(Y|X)) / Var(Y), gradients w.r.t. x (first) and y (second).
SimilarityEval correlation_ratio(const Volume& x, const Volume& y,
                                 const parzen::ParzenConfig& cfg);

/// Symmetric loss -(eta(fixed|warped) + eta(warped|fixed)) / 2, in [-1, 0].
/// cfg_fixed bins the fixed image, cfg_warped the warped one.
SimilarityEval cr_loss(const Volume& fixed, const Volume& warped,
                       const parzen::ParzenConfig& cfg_fixed,
                       const parzen::ParzenConfig& cfg_warped);

/// Parzen-window mutual information in nats (positive; larger is better).
SimilarityEval mutual_information(const Volume& x, const Volume& y,
                                  const parzen::ParzenConfig& cfg_x,
                                  const parzen::ParzenConfig& cfg_y);

/// -MI, so that both measures share the lower-is-better convention.
SimilarityEval mi_loss(const Volume& fixed, const Volume& warped,
                       const parzen::ParzenConfig& cfg_fixed,
                       const parzen::ParzenConfig& cfg_warped);

/// cr_loss or mi_loss.
SimilarityEval similarity_loss(Metric metric, const Volume& fixed, const Volume& warped,
                               const parzen::ParzenConfig& cfg_fixed,
                               const parzen::ParzenConfig& cfg_warped);

/// Loss value only; skips the gradient passes.
double similarity_loss_value(Metric metric, const Volume& fixed, const Volume& warped,
                             const parzen::ParzenConfig& cfg_fixed,
                             const parzen::ParzenConfig& cfg_warped);

struct TimedEval {
  SimilarityEval eval;
  double mean_seconds = 0.0;
};

/// One untimed warm-up call, then the wall-clock mean of `repeats` full
/// (value + gradient) evaluations of similarity_loss.
TimedEval eval_timed(Metric metric, const Volume& fixed, const Volume& warped,
                     const parzen::ParzenConfig& cfg_fixed,
                     const parzen::ParzenConfig& cfg_warped, int repeats);

}  // namespace crreg
