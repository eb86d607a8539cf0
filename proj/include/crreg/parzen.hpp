#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crreg/volume.hpp"

namespace crreg::parzen {

/// Added to every bin-mass, row-sum and variance denominator.
inline constexpr double kEpsilon = 1e-10;

/// Gaussian soft-binning setup. Bin centers are evenly spaced mid-bin:
/// center_k = min + (k + 0.5) * (max - min) / bins.
class ParzenConfig {
 public:
  ParzenConfig(double intensity_min, double intensity_max, std::size_t bins, double bandwidth);

  std::size_t bins() const { return centers_.size(); }
  double bandwidth() const { return bandwidth_; }
  double intensity_min() const { return min_; }
  double intensity_max() const { return max_; }
  double bin_width() const { return (max_ - min_) / static_cast<double>(bins()); }
  std::span<const double> centers() const { return centers_; }
  /// exp(-(bin width / bandwidth)^2): consecutive kernel-weight ratios along
  /// the centers shrink by this factor.
  double step_decay() const { return step_decay_; }

  double clamp(double x) const { return x < min_ ? min_ : (x > max_ ? max_ : x); }
  /// Derivative of clamp(): 1 inside the closed range, 0 outside.
  double clamp_slope(double x) const { return (x < min_ || x > max_) ? 0.0 : 1.0; }

 private:
  double min_;
  double max_;
  double bandwidth_;
  double step_decay_;
  std::vector<double> centers_;
};

/// Range taken from the image, bandwidth = scale * bin width.
/// Throws Error for a constant image.
ParzenConfig default_config(const Volume& v, std::size_t bins = 32, double bandwidth_scale = 1.0);

/// Unnormalized Gaussian kernel weights of one intensity against every bin.
std::vector<double> weights(double x, const ParzenConfig& cfg);

/// Writes weights(x) and d/dx weights(x) into the given spans (size = bins).
void weights_and_slopes(double x, const ParzenConfig& cfg, std::span<double> w,
                        std::span<double> dw);

/// Row-major N x B table of kernel weights with cached marginals.
struct WeightTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;   // entries[i * cols + k]
  std::vector<double> row_sums;  // sum over bins, per voxel
  std::vector<double> col_sums;  // sum over voxels, per bin

  double operator()(std::size_t i, std::size_t k) const { return entries[i * cols + k]; }
  std::span<const double> row(std::size_t i) const {
    return {entries.data() + i * cols, cols};
  }
};

WeightTable weight_table(std::span<const double> intensities, const ParzenConfig& cfg);
inline WeightTable weight_table(const Volume& v, const ParzenConfig& cfg) {
  return weight_table(v.data(), cfg);
}

/// Each row divided by (row sum + eps * row max): every voxel then spreads
/// unit mass over the bins, however narrow the kernel. This is the table the
/// similarity measures accumulate.
WeightTable normalize_rows(const WeightTable& t);

/// Same values as normalize_rows(weight_table(...)), built in one pass with
/// exponents shifted so that rows far from every center do not underflow.
WeightTable responsibilities(std::span<const double> intensities, const ParzenConfig& cfg);

/// One row of responsibilities(): writes the bins() values for intensity x
/// into `out` and returns their sum. Lets callers stream over voxels without
/// holding the N x B table.
double responsibility_row(double x, const ParzenConfig& cfg, std::span<double> out);

/// n_k = col_sum_k / sum of all entries. Sums to one.
std::vector<double> normalized_bin_weights(const WeightTable& t);

}  // namespace crreg::parzen
