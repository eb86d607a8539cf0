#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace crreg {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

using Vec3 = std::array<double, 3>;

/// Voxel counts along x, y, z. Storage is x-fastest.
struct Dims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t count() const { return nx * ny * nz; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + nx * (j + ny * k);
  }
  std::size_t operator[](int axis) const {
    return axis == 0 ? nx : (axis == 1 ? ny : nz);
  }
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& d);

/// Throws DimensionError unless every extent is at least 2.
void check_dims(const Dims& d);

/// Throws DimensionError naming `what` when the two grids differ.
void require_same_dims(const Dims& a, const Dims& b, const char* what);

/// Scalar 3-D image. Intensities are stored as double regardless of the file
/// precision they were read from.
class Volume {
 public:
  Volume() = default;
  explicit Volume(Dims dims, double fill = 0.0, Vec3 spacing = {1.0, 1.0, 1.0});
  Volume(Dims dims, std::vector<double> data, Vec3 spacing = {1.0, 1.0, 1.0});

  const Dims& dims() const { return dims_; }
  const Vec3& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[dims_.index(i, j, k)];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[dims_.index(i, j, k)];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double min() const;
  double max() const;
  double mean() const;

 private:
  Dims dims_;
  Vec3 spacing_{1.0, 1.0, 1.0};
  std::vector<double> data_;
};

/// Per-voxel displacement u in voxel units; the transform is phi(p) = p + u(p).
class DisplacementField {
 public:
  DisplacementField() = default;
  explicit DisplacementField(Dims dims, Vec3 fill = {0.0, 0.0, 0.0});
  DisplacementField(Dims dims, std::vector<Vec3> vectors);

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return vectors_.size(); }

  Vec3& operator[](std::size_t i) { return vectors_[i]; }
  const Vec3& operator[](std::size_t i) const { return vectors_[i]; }
  Vec3& at(std::size_t i, std::size_t j, std::size_t k) {
    return vectors_[dims_.index(i, j, k)];
  }
  const Vec3& at(std::size_t i, std::size_t j, std::size_t k) const {
    return vectors_[dims_.index(i, j, k)];
  }

  const std::vector<Vec3>& vectors() const { return vectors_; }
  std::vector<Vec3>& vectors() { return vectors_; }

  /// Mean Euclidean norm of the displacement vectors.
  double mean_magnitude() const;

 private:
  Dims dims_;
  std::vector<Vec3> vectors_;
};

/// Integer segmentation; label 0 is background.
class LabelVolume {
 public:
  using Label = std::uint16_t;

  LabelVolume() = default;
  explicit LabelVolume(Dims dims, Label fill = 0);
  LabelVolume(Dims dims, std::vector<Label> labels);

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return labels_.size(); }

  Label& operator[](std::size_t i) { return labels_[i]; }
  Label operator[](std::size_t i) const { return labels_[i]; }
  Label at(std::size_t i, std::size_t j, std::size_t k) const {
    return labels_[dims_.index(i, j, k)];
  }

  const std::vector<Label>& labels() const { return labels_; }

 private:
  Dims dims_;
  std::vector<Label> labels_;
};

/// Mean endpoint distance between two fields on the same grid.
double mean_endpoint_error(const DisplacementField& a, const DisplacementField& b);

}  // namespace crreg
