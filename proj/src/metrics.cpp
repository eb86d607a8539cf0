#include "crreg/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "crreg/transform.hpp"

namespace crreg::metrics {
namespace {

using Mat3 = std::array<Vec3, 3>;

double det3(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Difference of the field along `axis` at `idx`; `mode` is -1 backward,
// +1 forward, 0 central. Falls back to the available one-sided difference on
// the boundary.
Vec3 difference(const DisplacementField& f, std::size_t idx, std::size_t pos, int axis,
                int mode) {
  const Dims& d = f.dims();
  const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
  const bool has_prev = pos > 0;
  const bool has_next = pos + 1 < d[axis];
  if (mode == 0 && !(has_prev && has_next)) mode = has_next ? 1 : -1;
  if (mode == 1 && !has_next) mode = -1;
  if (mode == -1 && !has_prev) mode = 1;

  Vec3 out{};
  for (int c = 0; c < 3; ++c) {
    if (mode == 0) {
      out[c] = 0.5 * (f[idx + stride][c] - f[idx - stride][c]);
    } else if (mode == 1) {
      out[c] = f[idx + stride][c] - f[idx][c];
    } else {
      out[c] = f[idx][c] - f[idx - stride][c];
    }
  }
  return out;
}

double det_with_modes(const DisplacementField& f, std::size_t idx, const std::size_t pos[3],
                      const int modes[3]) {
  Mat3 j{};
  for (int b = 0; b < 3; ++b) {
    const Vec3 col = difference(f, idx, pos[b], b, modes[b]);
    for (int a = 0; a < 3; ++a) j[a][b] = (a == b ? 1.0 : 0.0) + col[a];
  }
  return det3(j);
}

template <typename Fn>
void for_each_voxel(const Dims& d, Fn&& fn) {
  for (std::size_t k = 0, idx = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i, ++idx) {
        const std::size_t pos[3] = {i, j, k};
        fn(idx, pos);
      }
    }
  }
}

}  // namespace

DiceResult dice(const LabelVolume& a, const LabelVolume& b) {
  require_same_dims(a.dims(), b.dims(), "dice");
  std::map<LabelVolume::Label, std::array<std::size_t, 3>> counts;  // |A|, |B|, |A and B|
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 0) ++counts[a[i]][0];
    if (b[i] != 0) ++counts[b[i]][1];
    if (a[i] != 0 && a[i] == b[i]) ++counts[a[i]][2];
  }
  DiceResult r;
  for (const auto& [label, c] : counts) {
    r.per_label[label] = 2.0 * static_cast<double>(c[2]) / static_cast<double>(c[0] + c[1]);
    r.mean += r.per_label[label];
  }
  if (!r.per_label.empty()) r.mean /= static_cast<double>(r.per_label.size());
  return r;
}

LabelVolume warp_labels(const LabelVolume& labels, const DisplacementField& field) {
  require_same_dims(labels.dims(), field.dims(), "warp_labels");
  const Dims& d = labels.dims();
  std::vector<LabelVolume::Label> out(d.count());
  auto snap = [](double q, std::size_t n) {
    // ceil(q - 0.5) sends exact halves down.
    const double r = std::ceil(q - 0.5);
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(n - 1)));
  };
  for_each_voxel(d, [&](std::size_t idx, const std::size_t pos[3]) {
    const Vec3& u = field[idx];
    const std::size_t i = snap(static_cast<double>(pos[0]) + u[0], d.nx);
    const std::size_t j = snap(static_cast<double>(pos[1]) + u[1], d.ny);
    const std::size_t k = snap(static_cast<double>(pos[2]) + u[2], d.nz);
    out[idx] = labels.at(i, j, k);
  });
  return LabelVolume(d, std::move(out));
}

std::vector<double> jacobian_det(const DisplacementField& field) {
  std::vector<double> det(field.size());
  const int central[3] = {0, 0, 0};
  for_each_voxel(field.dims(), [&](std::size_t idx, const std::size_t pos[3]) {
    det[idx] = det_with_modes(field, idx, pos, central);
  });
  return det;
}

double pct_neg_jacobian(const DisplacementField& field) {
  const auto det = jacobian_det(field);
  const auto neg = std::count_if(det.begin(), det.end(), [](double v) { return v <= 0.0; });
  return 100.0 * static_cast<double>(neg) / static_cast<double>(det.size());
}

double ndv(const DisplacementField& field) {
  double mass = 0.0;
  for_each_voxel(field.dims(), [&](std::size_t idx, const std::size_t pos[3]) {
    double voxel_mass = 0.0;
    for (int combo = 0; combo < 8; ++combo) {
      const int modes[3] = {(combo & 1) ? 1 : -1, (combo & 2) ? 1 : -1, (combo & 4) ? 1 : -1};
      voxel_mass += std::clamp(-det_with_modes(field, idx, pos, modes), 0.0, 1.0);
    }
    mass += voxel_mass / 8.0;
  });
  return 100.0 * mass / static_cast<double>(field.size());
}

MetricsReport field_metrics(const DisplacementField& field) {
  MetricsReport r;
  r.pct_neg_jacobian = pct_neg_jacobian(field);
  r.pct_ndv = ndv(field);
  r.field_grad_energy = diffusion_reg_value(field);
  return r;
}

MetricsReport evaluate(const DisplacementField& field, const LabelVolume& fixed_labels,
                       const LabelVolume& moving_labels) {
  require_same_dims(field.dims(), fixed_labels.dims(), "evaluate");
  MetricsReport r = field_metrics(field);
  const DiceResult d = dice(fixed_labels, warp_labels(moving_labels, field));
  r.dice_per_label = d.per_label;
  r.dice_mean = d.mean;
  return r;
}

}  // namespace crreg::metrics
