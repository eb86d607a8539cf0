#include "crreg/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crreg {
namespace {

// Cell lookup along one axis: clamps the coordinate into [0, n-1] and picks
// the cell [lo, lo+1] with lo = floor(q), except that the last lattice point
// uses the cell to its left.
struct AxisSample {
  std::size_t lo;
  double t;
  double slope;  // d(clamped)/dq
};

AxisSample axis_sample(double q, std::size_t n) {
  const double hi = static_cast<double>(n - 1);
  AxisSample s{0, 0.0, 1.0};
  if (q < 0.0) {
    q = 0.0;
    s.slope = 0.0;
  } else if (q > hi) {
    q = hi;
    s.slope = 0.0;
  }
  const double f = std::floor(q);
  s.lo = std::min(static_cast<std::size_t>(f), n - 2);
  s.t = q - static_cast<double>(s.lo);
  return s;
}

double lerp(double a, double b, double t) { return a * (1.0 - t) + b * t; }

struct Trilinear {
  double value;
  Vec3 gradient;
};

Trilinear trilinear(const Volume& img, const Vec3& q) {
  const Dims& d = img.dims();
  const AxisSample sx = axis_sample(q[0], d.nx);
  const AxisSample sy = axis_sample(q[1], d.ny);
  const AxisSample sz = axis_sample(q[2], d.nz);

  const double c000 = img.at(sx.lo, sy.lo, sz.lo);
  const double c100 = img.at(sx.lo + 1, sy.lo, sz.lo);
  const double c010 = img.at(sx.lo, sy.lo + 1, sz.lo);
  const double c110 = img.at(sx.lo + 1, sy.lo + 1, sz.lo);
  const double c001 = img.at(sx.lo, sy.lo, sz.lo + 1);
  const double c101 = img.at(sx.lo + 1, sy.lo, sz.lo + 1);
  const double c011 = img.at(sx.lo, sy.lo + 1, sz.lo + 1);
  const double c111 = img.at(sx.lo + 1, sy.lo + 1, sz.lo + 1);

  const double c00 = lerp(c000, c100, sx.t);
  const double c10 = lerp(c010, c110, sx.t);
  const double c01 = lerp(c001, c101, sx.t);
  const double c11 = lerp(c011, c111, sx.t);
  const double c0 = lerp(c00, c10, sy.t);
  const double c1 = lerp(c01, c11, sy.t);

  Trilinear out;
  out.value = lerp(c0, c1, sz.t);

  const double dx00 = c100 - c000;
  const double dx10 = c110 - c010;
  const double dx01 = c101 - c001;
  const double dx11 = c111 - c011;
  out.gradient[0] = sx.slope * lerp(lerp(dx00, dx10, sy.t), lerp(dx01, dx11, sy.t), sz.t);
  out.gradient[1] = sy.slope * lerp(c10 - c00, c11 - c01, sz.t);
  out.gradient[2] = sz.slope * (c1 - c0);
  return out;
}

Vec3 voxel(const Dims& d, std::size_t idx) {
  const std::size_t i = idx % d.nx;
  const std::size_t j = (idx / d.nx) % d.ny;
  const std::size_t k = idx / (d.nx * d.ny);
  return {static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)};
}

}  // namespace

WarpEval warp(const Volume& moving, const DisplacementField& field) {
  const Dims& d = field.dims();
  WarpEval we{Volume(d, 0.0, moving.spacing()), std::vector<Vec3>(d.count())};
  for (std::size_t k = 0, idx = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i, ++idx) {
        const Vec3& u = field[idx];
        const Trilinear s = trilinear(
            moving, {static_cast<double>(i) + u[0], static_cast<double>(j) + u[1],
                     static_cast<double>(k) + u[2]});
        we.warped[idx] = s.value;
        we.sample_gradient[idx] = s.gradient;
      }
    }
  }
  return we;
}

double sample_trilinear(const Volume& image, const Vec3& point) {
  return trilinear(image, point).value;
}

DisplacementField chain_to_field(std::span<const double> grad_wrt_warped, const WarpEval& we) {
  if (grad_wrt_warped.size() != we.sample_gradient.size()) {
    throw DimensionError("chain_to_field: gradient length " +
                         std::to_string(grad_wrt_warped.size()) + " vs " +
                         std::to_string(we.sample_gradient.size()) + " voxels");
  }
  DisplacementField out(we.warped.dims());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int c = 0; c < 3; ++c) out[i][c] = grad_wrt_warped[i] * we.sample_gradient[i][c];
  }
  return out;
}

DisplacementField affine_field(const AffineParams& params, const Dims& dims) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double ax = params.rotation_deg[0] * deg;
  const double ay = params.rotation_deg[1] * deg;
  const double az = params.rotation_deg[2] * deg;
  const double cx = std::cos(ax), sx = std::sin(ax);
  const double cy = std::cos(ay), sy = std::sin(ay);
  const double cz = std::cos(az), sz = std::sin(az);
  // Rx * Ry * Rz
  const double r[3][3] = {
      {cy * cz, -cy * sz, sy},
      {sx * sy * cz + cx * sz, -sx * sy * sz + cx * cz, -sx * cy},
      {-cx * sy * cz + sx * sz, cx * sy * sz + sx * cz, cx * cy},
  };
  const Vec3 center{0.5 * static_cast<double>(dims.nx - 1), 0.5 * static_cast<double>(dims.ny - 1),
                    0.5 * static_cast<double>(dims.nz - 1)};

  DisplacementField out(dims);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const Vec3 p = voxel(dims, idx);
    const Vec3 rel{p[0] - center[0], p[1] - center[1], p[2] - center[2]};
    for (int a = 0; a < 3; ++a) {
      const double rotated = r[a][0] * rel[0] + r[a][1] * rel[1] + r[a][2] * rel[2];
      out[idx][a] = rotated - rel[a] + params.translation[a];
    }
  }
  return out;
}

RegularizerEval diffusion_reg(const DisplacementField& field) {
  const Dims& d = field.dims();
  const std::size_t strides[3] = {1, d.nx, d.nx * d.ny};
  const double inv_n = 1.0 / static_cast<double>(d.count());

  RegularizerEval out;
  out.grad.assign(d.count(), Vec3{0.0, 0.0, 0.0});
  double sum = 0.0;
  for (std::size_t k = 0, idx = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i, ++idx) {
        const std::size_t pos[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          if (pos[a] + 1 >= d[a]) continue;
          const std::size_t next = idx + strides[a];
          for (int c = 0; c < 3; ++c) {
            const double diff = field[next][c] - field[idx][c];
            sum += diff * diff;
            out.grad[next][c] += 2.0 * inv_n * diff;
            out.grad[idx][c] -= 2.0 * inv_n * diff;
          }
        }
      }
    }
  }
  out.value = sum * inv_n;
  return out;
}

double diffusion_reg_value(const DisplacementField& field) { return diffusion_reg(field).value; }

Volume downsample(const Volume& v) {
  const Dims& d = v.dims();
  const Dims c{(d.nx + 1) / 2, (d.ny + 1) / 2, (d.nz + 1) / 2};
  const Vec3& sp = v.spacing();
  Volume out(c, 0.0, {2.0 * sp[0], 2.0 * sp[1], 2.0 * sp[2]});
  for (std::size_t k = 0; k < c.nz; ++k) {
    for (std::size_t j = 0; j < c.ny; ++j) {
      for (std::size_t i = 0; i < c.nx; ++i) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t dk = 0; dk < 2; ++dk) {
          for (std::size_t dj = 0; dj < 2; ++dj) {
            for (std::size_t di = 0; di < 2; ++di) {
              const std::size_t fi = 2 * i + di, fj = 2 * j + dj, fk = 2 * k + dk;
              if (fi >= d.nx || fj >= d.ny || fk >= d.nz) continue;
              sum += v.at(fi, fj, fk);
              ++count;
            }
          }
        }
        out.at(i, j, k) = sum / count;
      }
    }
  }
  return out;
}

DisplacementField upsample_field(const DisplacementField& coarse, const Dims& fine) {
  const Dims& cd = coarse.dims();
  std::vector<Volume> comps;
  for (int c = 0; c < 3; ++c) {
    Volume comp(cd);
    for (std::size_t i = 0; i < coarse.size(); ++i) comp[i] = coarse[i][c];
    comps.push_back(std::move(comp));
  }
  DisplacementField out(fine);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const Vec3 p = voxel(fine, idx);
    // Coarse voxel i averages fine voxels 2i and 2i+1, centered at 2i + 0.5.
    const Vec3 q{(p[0] - 0.5) / 2.0, (p[1] - 0.5) / 2.0, (p[2] - 0.5) / 2.0};
    for (int c = 0; c < 3; ++c) out[idx][c] = 2.0 * trilinear(comps[c], q).value;
  }
  return out;
}

}  // namespace crreg
