#include "crreg/parzen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace crreg::parzen {

ParzenConfig::ParzenConfig(double intensity_min, double intensity_max, std::size_t bins,
                           double bandwidth)
    : min_(intensity_min), max_(intensity_max), bandwidth_(bandwidth), step_decay_(0.0) {
  if (bins < 2) throw Error("parzen: need at least 2 bins");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw Error("parzen: bandwidth must be positive");
  }
  if (!(intensity_max > intensity_min)) {
    throw Error("parzen: degenerate intensity range [" + std::to_string(intensity_min) + ", " +
                std::to_string(intensity_max) + "]");
  }
  centers_.resize(bins);
  const double width = (max_ - min_) / static_cast<double>(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    centers_[k] = min_ + (static_cast<double>(k) + 0.5) * width;
  }
  step_decay_ = std::exp(-(width * width) / (bandwidth * bandwidth));
}

ParzenConfig default_config(const Volume& v, std::size_t bins, double bandwidth_scale) {
  const double lo = v.min();
  const double hi = v.max();
  if (!(hi > lo)) throw Error("parzen: degenerate intensity range (constant image)");
  return ParzenConfig(lo, hi, bins, bandwidth_scale * (hi - lo) / static_cast<double>(bins));
}

std::vector<double> weights(double x, const ParzenConfig& cfg) {
  std::vector<double> w(cfg.bins());
  const double xc = cfg.clamp(x);
  const double h = cfg.bandwidth();
  const double peak = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
  const auto centers = cfg.centers();
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double d = xc - centers[k];
    w[k] = peak * std::exp(-(d * d) / (2.0 * h * h));
  }
  return w;
}

void weights_and_slopes(double x, const ParzenConfig& cfg, std::span<double> w,
                        std::span<double> dw) {
  const double xc = cfg.clamp(x);
  const double slope = cfg.clamp_slope(x);
  const double h = cfg.bandwidth();
  const double peak = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
  const double inv_h2 = 1.0 / (h * h);
  const auto centers = cfg.centers();
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double d = xc - centers[k];
    w[k] = peak * std::exp(-(d * d) / (2.0 * h * h));
    dw[k] = -d * inv_h2 * w[k] * slope;
  }
}

WeightTable weight_table(std::span<const double> intensities, const ParzenConfig& cfg) {
  WeightTable t;
  t.rows = intensities.size();
  t.cols = cfg.bins();
  t.entries.resize(t.rows * t.cols);
  t.row_sums.assign(t.rows, 0.0);
  t.col_sums.assign(t.cols, 0.0);

  const double h = cfg.bandwidth();
  const double peak = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
  const auto centers = cfg.centers();
  for (std::size_t i = 0; i < t.rows; ++i) {
    const double xc = cfg.clamp(intensities[i]);
    double* row = t.entries.data() + i * t.cols;
    double sum = 0.0;
    for (std::size_t k = 0; k < t.cols; ++k) {
      const double d = xc - centers[k];
      row[k] = peak * std::exp(-(d * d) / (2.0 * h * h));
      sum += row[k];
      t.col_sums[k] += row[k];
    }
    t.row_sums[i] = sum;
  }
  return t;
}

WeightTable normalize_rows(const WeightTable& t) {
  WeightTable out;
  out.rows = t.rows;
  out.cols = t.cols;
  out.entries.resize(t.entries.size());
  out.row_sums.assign(t.rows, 0.0);
  out.col_sums.assign(t.cols, 0.0);
  for (std::size_t i = 0; i < t.rows; ++i) {
    const double* in = t.entries.data() + i * t.cols;
    const double top = t.cols == 0 ? 0.0 : *std::max_element(in, in + t.cols);
    // The guard scales with the row's peak; a fully underflowed row stays zero.
    const double guarded = t.row_sums[i] + kEpsilon * top;
    const double inv = guarded > 0.0 ? 1.0 / guarded : 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < t.cols; ++k) {
      const double a = t.entries[i * t.cols + k] * inv;
      out.entries[i * t.cols + k] = a;
      sum += a;
      out.col_sums[k] += a;
    }
    out.row_sums[i] = sum;
  }
  return out;
}

double responsibility_row(double x, const ParzenConfig& cfg, std::span<double> out) {
  const std::size_t bins = cfg.bins();
  if (out.size() != bins) throw Error("responsibility_row: output size must equal bin count");
  const double h2 = cfg.bandwidth() * cfg.bandwidth();
  const double lo = cfg.intensity_min();
  const double width = cfg.bin_width();
  const double half_step = width * width / 2.0;
  const double xc = cfg.clamp(x);
  // Values are relative to the nearest center's, so a row never underflows.
  // Along the evenly spaced centers consecutive Gaussian ratios shrink by a
  // constant factor, so a row costs two exponentials.
  const auto nearest = static_cast<std::size_t>(
      std::clamp(std::floor((xc - lo) / width), 0.0, static_cast<double>(bins - 1)));
  const double d = xc - cfg.centers()[nearest];
  out[nearest] = 1.0;
  double raw_sum = 1.0;
  double ratio = std::exp((d * width - half_step) / h2);
  double w = 1.0;
  for (std::size_t k = nearest + 1; k < bins; ++k) {
    w *= ratio;
    ratio *= cfg.step_decay();
    out[k] = w;
    raw_sum += w;
  }
  ratio = std::exp((-d * width - half_step) / h2);
  w = 1.0;
  for (std::size_t k = nearest; k-- > 0;) {
    w *= ratio;
    ratio *= cfg.step_decay();
    out[k] = w;
    raw_sum += w;
  }
  const double inv = 1.0 / (raw_sum + kEpsilon);
  double sum = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    out[k] *= inv;
    sum += out[k];
  }
  return sum;
}

WeightTable responsibilities(std::span<const double> intensities, const ParzenConfig& cfg) {
  WeightTable t;
  t.rows = intensities.size();
  t.cols = cfg.bins();
  t.entries.resize(t.rows * t.cols);
  t.row_sums.resize(t.rows);
  t.col_sums.assign(t.cols, 0.0);
  for (std::size_t i = 0; i < t.rows; ++i) {
    const std::span<double> row(t.entries.data() + i * t.cols, t.cols);
    t.row_sums[i] = responsibility_row(intensities[i], cfg, row);
    for (std::size_t k = 0; k < t.cols; ++k) t.col_sums[k] += row[k];
  }
  return t;
}

std::vector<double> normalized_bin_weights(const WeightTable& t) {
  double total = 0.0;
  for (double c : t.col_sums) total += c;
  if (!(total > 0.0)) throw Error("parzen: all-zero weight table");
  std::vector<double> n(t.cols);
  for (std::size_t k = 0; k < t.cols; ++k) n[k] = t.col_sums[k] / total;
  return n;
}

}  // namespace crreg::parzen
