#pragma once

// Shared fixtures and independent reference computations for the tests.
// Nothing here calls into the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "crreg/parzen.hpp"
#include "crreg/volume.hpp"

namespace testing_support {

using crreg::Dims;
using crreg::DisplacementField;
using crreg::Volume;

inline Dims cube(std::size_t n) { return {n, n, n}; }

inline Volume random_volume(const Dims& d, std::mt19937_64& rng, double lo = 0.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> data(d.count());
  for (double& v : data) v = u(rng);
  return Volume(d, std::move(data));
}

/// base^2 plus Gaussian noise: a partner image that depends on `base`
/// without being a function of it.
inline Volume correlated_volume(const Volume& base, std::mt19937_64& rng, double noise) {
  std::normal_distribution<double> n(0.0, noise);
  Volume out = base;
  for (double& v : out.data()) v = v * v + n(rng);
  return out;
}

inline DisplacementField random_field(const Dims& d, std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  DisplacementField f(d);
  for (auto& v : f.vectors()) v = {u(rng), u(rng), u(rng)};
  return f;
}

/// Parzen setup whose range extends a margin past the image range, so that
/// no intensity sits on a clamp boundary where the loss has a kink.
inline crreg::parzen::ParzenConfig padded_config(const Volume& v, std::size_t bins,
                                                 double scale = 1.0) {
  const double lo = v.min();
  const double hi = v.max();
  const double pad = 0.05 * (hi - lo);
  const double width = (hi - lo + 2.0 * pad) / static_cast<double>(bins);
  return crreg::parzen::ParzenConfig(lo - pad, hi + pad, bins, scale * width);
}

/// Gaussian kernel value, written out from the definition.
inline double gauss(double x, double center, double h) {
  const double z = (x - center) / h;
  return std::exp(-0.5 * z * z) / (h * std::sqrt(2.0 * 3.14159265358979323846));
}

/// Central difference of a scalar function of one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x0,
                                 double step) {
  return (f(x0 + step) - f(x0 - step)) / (2.0 * step);
}

/// Agreement rule for analytic vs numerical derivatives: relative error below
/// `rel`, or absolute error below `abs_small` when the analytic value is
/// itself below `small`.
inline bool derivative_close(double analytic, double numeric, double rel = 1e-4,
                             double abs_small = 1e-7, double small = 1e-3) {
  const double err = std::abs(analytic - numeric);
  if (std::abs(analytic) < small) return err <= abs_small || err <= rel * std::abs(analytic);
  return err <= rel * std::max(std::abs(analytic), std::abs(numeric));
}

struct ProbeResult {
  int probed = 0;
  int failures = 0;
  double worst_rel = 0.0;
};

/// Compares `analytic[i]` against a central difference of `f` in coordinate i
/// of `x` for `count` random distinct coordinates. `x` is restored afterwards.
inline ProbeResult probe_gradient(const std::function<double()>& f, std::vector<double>& x,
                                  const std::vector<double>& analytic, std::mt19937_64& rng,
                                  int count, double step = 1e-5) {
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  ProbeResult r;
  for (int n = 0; n < count && n < static_cast<int>(idx.size()); ++n) {
    const std::size_t i = idx[n];
    const double x0 = x[i];
    x[i] = x0 + step;
    const double up = f();
    x[i] = x0 - step;
    const double down = f();
    x[i] = x0;
    const double fd = (up - down) / (2.0 * step);
    ++r.probed;
    if (!derivative_close(analytic[i], fd)) ++r.failures;
    const double scale = std::max(std::abs(analytic[i]), 1e-3);
    r.worst_rel = std::max(r.worst_rel, std::abs(analytic[i] - fd) / scale);
  }
  return r;
}

/// Flattens a field to x0,y0,z0,x1,... and back.
inline std::vector<double> flatten(const DisplacementField& f) {
  std::vector<double> out;
  out.reserve(3 * f.size());
  for (const auto& v : f.vectors()) out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline DisplacementField unflatten(const Dims& d, const std::vector<double>& flat) {
  DisplacementField f(d);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
  return f;
}

/// Soft conditional statistics by direct double loops over voxels and bins,
/// each voxel's kernel weights normalized to unit mass.
struct NaiveStats {
  std::vector<double> bin_means;
  std::vector<double> bin_weights;
  double mean_y = 0.0;
  double var_y = 0.0;
  double var_between = 0.0;
};

inline NaiveStats naive_soft_stats(const Volume& x, const Volume& y,
                                   const crreg::parzen::ParzenConfig& cfg) {
  const std::size_t n = x.size();
  const std::size_t b = cfg.bins();
  const double eps = 1e-10;
  std::vector<double> mass(b, 0.0), sum_y(b, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = std::clamp(x[i], cfg.intensity_min(), cfg.intensity_max());
    double row = 0.0;
    double top = 0.0;
    for (std::size_t k = 0; k < b; ++k) {
      const double w = gauss(xi, cfg.centers()[k], cfg.bandwidth());
      row += w;
      top = std::max(top, w);
    }
    for (std::size_t k = 0; k < b; ++k) {
      const double a = gauss(xi, cfg.centers()[k], cfg.bandwidth()) / (row + eps * top);
      mass[k] += a;
      sum_y[k] += a * y[i];
    }
  }
  NaiveStats s;
  for (std::size_t i = 0; i < n; ++i) s.mean_y += y[i];
  s.mean_y /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) s.var_y += (y[i] - s.mean_y) * (y[i] - s.mean_y);
  s.var_y /= static_cast<double>(n);
  double total = 0.0;
  for (double m : mass) total += m;
  for (std::size_t k = 0; k < b; ++k) {
    s.bin_means.push_back(sum_y[k] / (mass[k] + eps));
    s.bin_weights.push_back(mass[k] / (total + eps));
    const double e = s.bin_means[k] - s.mean_y;
    s.var_between += s.bin_weights[k] * e * e;
  }
  return s;
}

/// Index of the hard bin containing x over [lo, hi] split into `bins`.
inline std::size_t hard_bin(double x, double lo, double hi, std::size_t bins) {
  const double t = (x - lo) / (hi - lo) * static_cast<double>(bins);
  const long k = static_cast<long>(std::floor(t));
  return static_cast<std::size_t>(std::clamp(k, 0L, static_cast<long>(bins) - 1));
}

/// Classical correlation ratio with hard bins on x.
inline double discrete_cr(const std::vector<double>& x, const std::vector<double>& y, double lo,
                          double hi, std::size_t bins) {
  const std::size_t n = x.size();
  std::vector<double> count(bins, 0.0), sum(bins, 0.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = hard_bin(x[i], lo, hi, bins);
    count[k] += 1.0;
    sum[k] += y[i];
    mean += y[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  double between = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    if (count[k] == 0.0) continue;
    const double e = sum[k] / count[k] - mean;
    between += count[k] / static_cast<double>(n) * e * e;
  }
  return between / var;
}

/// Mutual information (nats) of a hard joint histogram.
inline double discrete_mi(const std::vector<double>& x, const std::vector<double>& y, double xlo,
                          double xhi, double ylo, double yhi, std::size_t bins) {
  const std::size_t n = x.size();
  std::vector<double> joint(bins * bins, 0.0), px(bins, 0.0), py(bins, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = hard_bin(x[i], xlo, xhi, bins);
    const std::size_t b = hard_bin(y[i], ylo, yhi, bins);
    joint[a * bins + b] += 1.0;
    px[a] += 1.0;
    py[b] += 1.0;
  }
  const double inv = 1.0 / static_cast<double>(n);
  double mi = 0.0;
  for (std::size_t a = 0; a < bins; ++a) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double p = joint[a * bins + b] * inv;
      if (p > 0.0) mi += p * std::log(p / (px[a] * inv * py[b] * inv));
    }
  }
  return mi;
}

/// Diffusion energy by looping over all nine partials explicitly.
inline double naive_diffusion(const DisplacementField& f) {
  const Dims& d = f.dims();
  double sum = 0.0;
  for (std::size_t k = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        for (int c = 0; c < 3; ++c) {
          const double here = f.at(i, j, k)[c];
          if (i + 1 < d.nx) sum += std::pow(f.at(i + 1, j, k)[c] - here, 2);
          if (j + 1 < d.ny) sum += std::pow(f.at(i, j + 1, k)[c] - here, 2);
          if (k + 1 < d.nz) sum += std::pow(f.at(i, j, k + 1)[c] - here, 2);
        }
      }
    }
  }
  return sum / static_cast<double>(d.count());
}

}  // namespace testing_support
