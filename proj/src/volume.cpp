#include "crreg/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crreg {

std::string to_string(const Dims& d) {
  return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

void check_dims(const Dims& d) {
  if (d.nx < 2 || d.ny < 2 || d.nz < 2) {
    throw DimensionError("every dimension must be >= 2, got " + to_string(d));
  }
}

void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": dimension mismatch " + to_string(a) +
                         " vs " + to_string(b));
  }
}

Volume::Volume(Dims dims, double fill, Vec3 spacing)
    : dims_(dims), spacing_(spacing), data_(dims.count(), fill) {
  check_dims(dims_);
}

Volume::Volume(Dims dims, std::vector<double> data, Vec3 spacing)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
  check_dims(dims_);
  if (data_.size() != dims_.count()) {
    throw DimensionError("volume data length " + std::to_string(data_.size()) +
                         " does not match dims " + to_string(dims_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error("non-finite intensity at voxel " + std::to_string(i));
    }
  }
}

double Volume::min() const { return *std::min_element(data_.begin(), data_.end()); }
double Volume::max() const { return *std::max_element(data_.begin(), data_.end()); }
double Volume::mean() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

DisplacementField::DisplacementField(Dims dims, Vec3 fill)
    : dims_(dims), vectors_(dims.count(), fill) {
  check_dims(dims_);
}

DisplacementField::DisplacementField(Dims dims, std::vector<Vec3> vectors)
    : dims_(dims), vectors_(std::move(vectors)) {
  check_dims(dims_);
  if (vectors_.size() != dims_.count()) {
    throw DimensionError("field length " + std::to_string(vectors_.size()) +
                         " does not match dims " + to_string(dims_));
  }
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    for (double c : vectors_[i]) {
      if (!std::isfinite(c)) {
        throw Error("non-finite displacement at voxel " + std::to_string(i));
      }
    }
  }
}

double DisplacementField::mean_magnitude() const {
  double sum = 0.0;
  for (const auto& v : vectors_) {
    sum += std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  }
  return sum / static_cast<double>(vectors_.size());
}

LabelVolume::LabelVolume(Dims dims, Label fill) : dims_(dims), labels_(dims.count(), fill) {
  check_dims(dims_);
}

LabelVolume::LabelVolume(Dims dims, std::vector<Label> labels)
    : dims_(dims), labels_(std::move(labels)) {
  check_dims(dims_);
  if (labels_.size() != dims_.count()) {
    throw DimensionError("label data length " + std::to_string(labels_.size()) +
                         " does not match dims " + to_string(dims_));
  }
}

double mean_endpoint_error(const DisplacementField& a, const DisplacementField& b) {
  require_same_dims(a.dims(), b.dims(), "mean_endpoint_error");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dx = a[i][0] - b[i][0];
    const double dy = a[i][1] - b[i][1];
    const double dz = a[i][2] - b[i][2];
    sum += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return sum / static_cast<double>(a.size());
}

}  // namespace crreg
