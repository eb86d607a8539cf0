#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "crreg/io.hpp"
#include "crreg/metrics.hpp"
#include "crreg/phantom.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace crreg;
using testing_support::cube;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("crreg_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_floats(const fs::path& raw, const std::vector<float>& values) {
  std::ofstream out(raw, std::ios::binary);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
}

void write_header(const fs::path& hdr, const std::string& dimsize, const std::string& raw) {
  std::ofstream out(hdr);
  out << "NDims = 3\nDimSize = " << dimsize
      << "\nElementType = MET_FLOAT\nElementDataFile = " << raw << "\n";
}

}  // namespace

TEST(Dims, RowMajorIndexing) {
  const Dims d{3, 4, 5};
  EXPECT_EQ(d.index(0, 0, 0), 0u);
  EXPECT_EQ(d.index(1, 0, 0), 1u);
  EXPECT_EQ(d.index(0, 1, 0), 3u);
  EXPECT_EQ(d.index(0, 0, 1), 12u);
  EXPECT_EQ(d.index(2, 3, 4), 2u + 3u * (3u + 4u * 4u));

  Volume v(d);
  for (std::size_t k = 0; k < d.nz; ++k) {
    for (std::size_t j = 0; j < d.ny; ++j) {
      for (std::size_t i = 0; i < d.nx; ++i) {
        Volume single(d);
        single.at(i, j, k) = 1.0;
        EXPECT_EQ(single[i + d.nx * (j + d.ny * k)], 1.0);
        EXPECT_DOUBLE_EQ(single.mean(), 1.0 / 60.0);
      }
    }
  }
}

TEST(Volume, RejectsInvalidConstruction) {
  EXPECT_THROW(Volume(Dims{1, 4, 4}), DimensionError);
  EXPECT_THROW(Volume(Dims{4, 4, 4}, std::vector<double>(63, 0.0)), DimensionError);
  std::vector<double> bad(64, 0.0);
  bad[5] = std::nan("");
  EXPECT_THROW(Volume(Dims{4, 4, 4}, bad), Error);
}

TEST(Io, ConstantVolumeLoads) {
  const auto dir = scratch_dir("const");
  write_floats(dir / "c.raw", std::vector<float>(64, 0.5f));
  write_header(dir / "c.mhd", "4 4 4", "c.raw");
  const Volume v = io::load_volume(dir / "c.mhd");
  ASSERT_EQ(v.size(), 64u);
  for (double x : v.data()) EXPECT_EQ(x, 0.5);
}

TEST(Io, PayloadSizeMismatchIsReported) {
  const auto dir = scratch_dir("short");
  write_floats(dir / "s.raw", std::vector<float>(63, 0.5f));
  write_header(dir / "s.mhd", "4 4 4", "s.raw");
  try {
    io::load_volume(dir / "s.mhd");
    FAIL() << "expected an IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("size mismatch"), std::string::npos) << e.what();
  }
}

TEST(Io, MissingFileAndNonFinitePayload) {
  const auto dir = scratch_dir("bad");
  EXPECT_THROW(io::load_volume(dir / "nope.mhd"), IoError);

  std::vector<float> vals(64, 1.0f);
  vals[10] = std::numeric_limits<float>::infinity();
  write_floats(dir / "n.raw", vals);
  write_header(dir / "n.mhd", "4 4 4", "n.raw");
  EXPECT_THROW(io::load_volume(dir / "n.mhd"), Error);

  std::ofstream(dir / "k.mhd") << "NDims = 3\nElementType = MET_FLOAT\nElementDataFile = n.raw\n";
  try {
    io::load_volume(dir / "k.mhd");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("DimSize"), std::string::npos);
  }
}

TEST(Io, VolumeRoundTripIsBitExact) {
  const auto dir = scratch_dir("rt");
  std::mt19937_64 rng(3);
  const Volume v = testing_support::random_volume(Dims{5, 6, 7}, rng, -3.0, 9.0);
  io::save_volume(v, dir / "a.mhd");
  const Volume w = io::load_volume(dir / "a.mhd");
  ASSERT_EQ(w.dims(), v.dims());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(w[i], static_cast<double>(static_cast<float>(v[i])));

  io::save_volume(w, dir / "b.mhd");
  EXPECT_EQ(read_bytes(dir / "a.raw"), read_bytes(dir / "b.raw"));
}

TEST(Io, ZeroFieldPayloadAndFieldRoundTrip) {
  const auto dir = scratch_dir("field");
  io::save_field(DisplacementField(cube(4)), dir / "z.mhd");
  const auto bytes = read_bytes(dir / "z.raw");
  ASSERT_EQ(bytes.size(), 192u * sizeof(float));
  for (char b : bytes) EXPECT_EQ(b, 0);

  std::mt19937_64 rng(4);
  const DisplacementField f = testing_support::random_field(Dims{4, 5, 3}, rng, 2.5);
  io::save_field(f, dir / "f.mhd");
  const DisplacementField g = io::load_field(dir / "f.mhd");
  ASSERT_EQ(g.dims(), f.dims());
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(g[i][c], static_cast<double>(static_cast<float>(f[i][c])));
  }
}

TEST(Io, LabelRoundTrip) {
  const auto dir = scratch_dir("labels");
  std::vector<LabelVolume::Label> l(60);
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = static_cast<LabelVolume::Label>(i * 1000 % 65536);
  const LabelVolume a(Dims{3, 4, 5}, l);
  io::save_labels(a, dir / "l.mhd");
  EXPECT_EQ(io::load_labels(dir / "l.mhd").labels(), a.labels());
}

TEST(Io, UnwritablePathFails) {
  const auto dir = scratch_dir("ro");
  std::ofstream(dir / "file") << "x";
  // A regular file used as a directory component cannot be written through.
  EXPECT_THROW(io::save_volume(Volume(cube(2)), dir / "file" / "v.mhd"), IoError);
}

TEST(Phantom, ZeroAmplitudeGivesPureRemap) {
  for (Remap r : {Remap::quadratic, Remap::inverted, Remap::sinus}) {
    PhantomSpec spec;
    spec.dims = cube(16);
    spec.deformation_amplitude = 0.0;
    spec.remap = r;
    const Phantom p = make_phantom(spec);
    for (const auto& v : p.truth.vectors()) EXPECT_EQ(v, (Vec3{0.0, 0.0, 0.0}));
    for (std::size_t i = 0; i < p.fixed.size(); ++i) {
      EXPECT_EQ(p.moving[i], apply_remap(r, p.fixed[i]));
    }
    EXPECT_EQ(p.labels_fixed.labels(), p.labels_moving.labels());
  }
}

TEST(Phantom, DeterministicInSeed) {
  PhantomSpec spec;
  spec.dims = Dims{20, 18, 16};
  spec.seed = 42;
  const Phantom a = make_phantom(spec);
  const Phantom b = make_phantom(spec);
  EXPECT_EQ(a.fixed.data(), b.fixed.data());
  EXPECT_EQ(a.moving.data(), b.moving.data());
  EXPECT_EQ(a.truth.vectors(), b.truth.vectors());
  EXPECT_EQ(a.labels_moving.labels(), b.labels_moving.labels());

  spec.seed = 43;
  EXPECT_NE(make_phantom(spec).fixed.data(), a.fixed.data());
}

TEST(Phantom, DefaultSpecProperties) {
  const Phantom p = make_phantom(PhantomSpec{});
  EXPECT_EQ(p.fixed.dims(), cube(48));
  EXPECT_GE(p.fixed.min(), 0.0);
  EXPECT_LE(p.fixed.max(), 1.0);

  const auto det = metrics::jacobian_det(p.truth);
  EXPECT_GT(*std::min_element(det.begin(), det.end()), 0.1);

  double max_norm = 0.0;
  for (const auto& v : p.truth.vectors()) {
    max_norm = std::max(max_norm, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  EXPECT_LE(max_norm, 3.0 + 1e-9);
  EXPECT_GT(max_norm, 3.0 * std::pow(0.8, 10));

  std::set<LabelVolume::Label> labels(p.labels_fixed.labels().begin(),
                                      p.labels_fixed.labels().end());
  labels.erase(0);
  EXPECT_GE(labels.size(), 3u);
}

TEST(Phantom, RejectsInvalidSpec) {
  PhantomSpec spec;
  spec.dims = cube(8);
  spec.deformation_amplitude = -1.0;
  EXPECT_THROW(make_phantom(spec), Error);
  spec.deformation_amplitude = 1.0;
  spec.deformation_smoothness = 0.0;
  EXPECT_THROW(make_phantom(spec), Error);
  EXPECT_THROW(parse_remap("cubic"), Error);
}
