#include "crreg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "crreg/metrics.hpp"
#include "crreg/transform.hpp"

namespace crreg {
namespace {

// Large blobs give the coarse anatomy; many voxel-scale blobs of random sign
// add the fine texture that makes misalignment visible to a global measure.
constexpr int kAnatomyBlobs = 16;
constexpr double kTextureBlobsPerVoxel = 1.0 / 8.0;
constexpr double kTextureSigmaMin = 0.6;
constexpr double kTextureSigmaMax = 1.0;
constexpr double kTextureContrast = 0.3;  // texture rms relative to anatomy range
constexpr double kMinJacobian = 0.1;
constexpr int kMaxRescalings = 10;
constexpr double kRescaleFactor = 0.8;
// Label bands split the fixed intensities at these quantiles.
constexpr double kBandQuantiles[] = {0.2, 0.4, 0.6, 0.8};

// std::mt19937_64 is bit-specified by the standard; the distributions are not,
// so the conversions to floating point are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Smooths white noise drawn on a grid padded by the kernel radius and returns
// the interior, so every output voxel averages the same number of samples.
std::vector<double> smooth_noise(const Dims& d, double sigma, Rng& rng) {
  const long radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (long t = -radius; t <= radius; ++t) {
    kernel[t + radius] = std::exp(-0.5 * static_cast<double>(t * t) / (sigma * sigma));
    sum += kernel[t + radius];
  }
  for (double& w : kernel) w /= sum;

  // Extents shrink by 2 * radius along each axis as it is filtered.
  long ext[3] = {static_cast<long>(d.nx) + 2 * radius, static_cast<long>(d.ny) + 2 * radius,
                 static_cast<long>(d.nz) + 2 * radius};
  std::vector<double> data(static_cast<std::size_t>(ext[0] * ext[1] * ext[2]));
  for (double& v : data) v = rng.normal();

  for (int axis = 0; axis < 3; ++axis) {
    long out_ext[3] = {ext[0], ext[1], ext[2]};
    out_ext[axis] -= 2 * radius;
    const long stride = axis == 0 ? 1 : (axis == 1 ? ext[0] : ext[0] * ext[1]);
    std::vector<double> out(static_cast<std::size_t>(out_ext[0] * out_ext[1] * out_ext[2]));
    for (long k = 0, o = 0; k < out_ext[2]; ++k) {
      for (long j = 0; j < out_ext[1]; ++j) {
        for (long i = 0; i < out_ext[0]; ++i, ++o) {
          const long src = i + ext[0] * (j + ext[1] * k);
          double acc = 0.0;
          for (long t = 0; t <= 2 * radius; ++t) acc += kernel[t] * data[src + t * stride];
          out[o] = acc;
        }
      }
    }
    data.swap(out);
    ext[axis] = out_ext[axis];
  }
  return data;
}

struct Blob {
  Vec3 center;
  double sigma;
  double weight;
};

// Adds the blob to `data`, evaluated within `reach` voxels of its center.
void splat(std::vector<double>& data, const Dims& d, const Blob& b, double reach) {
  long lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0L, static_cast<long>(std::ceil(b.center[a] - reach)));
    hi[a] = std::min(static_cast<long>(d[a]) - 1, static_cast<long>(std::floor(b.center[a] + reach)));
  }
  const double inv = 1.0 / (2.0 * b.sigma * b.sigma);
  for (long k = lo[2]; k <= hi[2]; ++k) {
    for (long j = lo[1]; j <= hi[1]; ++j) {
      for (long i = lo[0]; i <= hi[0]; ++i) {
        const double dx = static_cast<double>(i) - b.center[0];
        const double dy = static_cast<double>(j) - b.center[1];
        const double dz = static_cast<double>(k) - b.center[2];
        data[d.index(i, j, k)] += b.weight * std::exp(-(dx * dx + dy * dy + dz * dz) * inv);
      }
    }
  }
}

Volume make_anatomy(const Dims& d, Rng& rng) {
  const double extent = static_cast<double>(std::min({d.nx, d.ny, d.nz}));
  std::vector<double> anatomy(d.count(), 0.0);
  for (int n = 0; n < kAnatomyBlobs; ++n) {
    Blob b;
    for (int a = 0; a < 3; ++a) b.center[a] = rng.uniform(0.15, 0.85) * static_cast<double>(d[a] - 1);
    b.sigma = rng.uniform(0.08, 0.2) * extent;
    b.weight = rng.uniform(0.3, 1.0);
    splat(anatomy, d, b, static_cast<double>(std::max({d.nx, d.ny, d.nz})));
  }

  std::vector<double> texture(d.count(), 0.0);
  const auto texture_blobs =
      static_cast<std::size_t>(kTextureBlobsPerVoxel * static_cast<double>(d.count()));
  for (std::size_t n = 0; n < texture_blobs; ++n) {
    Blob b;
    for (int a = 0; a < 3; ++a) b.center[a] = rng.uniform() * static_cast<double>(d[a] - 1);
    b.sigma = rng.uniform(kTextureSigmaMin, kTextureSigmaMax);
    b.weight = rng.uniform(-1.0, 1.0);
    splat(texture, d, b, 3.0 * b.sigma);
  }

  const auto [alo, ahi] = std::minmax_element(anatomy.begin(), anatomy.end());
  const double anatomy_range = *ahi - *alo;
  double rms = 0.0;
  for (double t : texture) rms += t * t;
  rms = std::sqrt(rms / static_cast<double>(texture.size()));
  const double gain = rms > 0.0 ? kTextureContrast * anatomy_range / rms : 0.0;

  std::vector<double> data(d.count());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = anatomy[i] + gain * texture[i];
  const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (double& v : data) v = (v - min) / range;
  return Volume(d, std::move(data));
}

DisplacementField make_deformation(const PhantomSpec& spec, Rng& rng) {
  const Dims& d = spec.dims;
  DisplacementField field(d);
  if (spec.deformation_amplitude == 0.0) return field;

  std::vector<double> comp[3];
  for (auto& c : comp) c = smooth_noise(d, spec.deformation_smoothness, rng);

  double max_norm = 0.0;
  for (std::size_t i = 0; i < d.count(); ++i) {
    max_norm = std::max(max_norm, std::sqrt(comp[0][i] * comp[0][i] + comp[1][i] * comp[1][i] +
                                            comp[2][i] * comp[2][i]));
  }
  double scale = spec.deformation_amplitude / max_norm;
  for (int attempt = 0; attempt <= kMaxRescalings; ++attempt) {
    for (std::size_t i = 0; i < d.count(); ++i) {
      for (int c = 0; c < 3; ++c) field[i][c] = scale * comp[c][i];
    }
    const auto det = metrics::jacobian_det(field);
    if (*std::min_element(det.begin(), det.end()) > kMinJacobian) return field;
    scale *= kRescaleFactor;
  }
  throw Error("make_phantom: deformation still folds after " + std::to_string(kMaxRescalings) +
              " rescalings");
}

LabelVolume band_labels(const Volume& v) {
  std::vector<double> sorted = v.data();
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> thresholds;
  for (double q : kBandQuantiles) {
    thresholds.push_back(sorted[static_cast<std::size_t>(q * static_cast<double>(sorted.size()))]);
  }
  std::vector<LabelVolume::Label> labels(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    LabelVolume::Label l = 0;
    for (double t : thresholds) l += v[i] >= t ? 1 : 0;
    labels[i] = l;
  }
  return LabelVolume(v.dims(), std::move(labels));
}

}  // namespace

Remap parse_remap(const std::string& name) {
  if (name == "quadratic") return Remap::quadratic;
  if (name == "inverted") return Remap::inverted;
  if (name == "sinus") return Remap::sinus;
  throw Error("unknown remap '" + name + "' (expected quadratic, inverted or sinus)");
}

std::string to_string(Remap r) {
  switch (r) {
    case Remap::quadratic: return "quadratic";
    case Remap::inverted: return "inverted";
    case Remap::sinus: return "sinus";
  }
  return "?";
}

double apply_remap(Remap r, double x) {
  switch (r) {
    case Remap::quadratic: return x * x;
    case Remap::inverted: return 1.0 - x;
    case Remap::sinus: return std::sin(std::numbers::pi * x);
  }
  return x;
}

Phantom make_phantom(const PhantomSpec& spec) {
  check_dims(spec.dims);
  if (!(spec.deformation_amplitude >= 0.0)) throw Error("make_phantom: amplitude must be >= 0");
  if (!(spec.deformation_smoothness > 0.0)) throw Error("make_phantom: sigma must be > 0");

  Rng rng(spec.seed);
  Phantom p;
  p.fixed = make_anatomy(spec.dims, rng);
  p.truth = make_deformation(spec, rng);

  DisplacementField inverse(spec.dims);
  for (std::size_t i = 0; i < inverse.size(); ++i) {
    for (int c = 0; c < 3; ++c) inverse[i][c] = -p.truth[i][c];
  }
  p.moving = warp(p.fixed, inverse).warped;
  for (double& v : p.moving.data()) v = apply_remap(spec.remap, v);

  p.labels_fixed = band_labels(p.fixed);
  p.labels_moving = metrics::warp_labels(p.labels_fixed, inverse);
  return p;
}

}  // namespace crreg
