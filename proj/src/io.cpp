#include "crreg/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace crreg::io {
namespace {

namespace fs = std::filesystem;

struct Header {
  Dims dims;
  Vec3 spacing{1.0, 1.0, 1.0};
  std::string element_type;
  std::size_t channels = 1;
  bool big_endian = false;
  fs::path data_file;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const fs::path& path, const std::string& what) {
  throw IoError(path.string() + ": " + what);
}

Header read_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open header");

  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto require = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) fail(path, "missing key " + key);
    return it->second;
  };

  Header h;
  if (require("NDims") != "3") fail(path, "NDims must be 3");

  {
    std::istringstream ss(require("DimSize"));
    long long n[3] = {0, 0, 0};
    if (!(ss >> n[0] >> n[1] >> n[2]) || n[0] < 2 || n[1] < 2 || n[2] < 2) {
      fail(path, "invalid DimSize '" + kv["DimSize"] + "'");
    }
    h.dims = {static_cast<std::size_t>(n[0]), static_cast<std::size_t>(n[1]),
              static_cast<std::size_t>(n[2])};
  }
  if (auto it = kv.find("ElementSpacing"); it != kv.end()) {
    std::istringstream ss(it->second);
    if (!(ss >> h.spacing[0] >> h.spacing[1] >> h.spacing[2])) {
      fail(path, "invalid ElementSpacing '" + it->second + "'");
    }
  }
  if (auto it = kv.find("ElementNumberOfChannels"); it != kv.end()) {
    h.channels = static_cast<std::size_t>(std::stoul(it->second));
  }
  for (const char* key : {"BinaryDataByteOrderMSB", "ElementByteOrderMSB"}) {
    if (auto it = kv.find(key); it != kv.end()) {
      h.big_endian = (it->second == "True" || it->second == "true");
    }
  }
  h.element_type = require("ElementType");

  const std::string& file = require("ElementDataFile");
  if (file == "LOCAL") fail(path, "ElementDataFile LOCAL is not supported");
  h.data_file = fs::path(file).is_absolute() ? fs::path(file) : path.parent_path() / file;
  return h;
}

template <typename T>
std::vector<T> read_payload(const fs::path& header, const Header& h, std::size_t expected) {
  std::ifstream in(h.data_file, std::ios::binary | std::ios::ate);
  if (!in) fail(header, "cannot open ElementDataFile " + h.data_file.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != expected * sizeof(T)) {
    fail(header, "payload size mismatch: DimSize implies " + std::to_string(expected) +
                     " elements, file holds " + std::to_string(bytes) + " bytes");
  }
  in.seekg(0);
  std::vector<T> out(expected);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
  if (!in) fail(header, "short read from " + h.data_file.string());

  const bool swap = h.big_endian != (std::endian::native == std::endian::big);
  if (swap) {
    for (auto& v : out) {
      auto* p = reinterpret_cast<unsigned char*>(&v);
      for (std::size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) std::swap(p[a], p[b]);
    }
  }
  return out;
}

template <typename T>
void write_pair(const fs::path& header, const Dims& dims, const Vec3& spacing,
                const char* element_type, std::size_t channels, std::vector<T> payload) {
  fs::path raw = header;
  raw.replace_extension(".raw");

  if constexpr (sizeof(T) > 1) {
    if (std::endian::native == std::endian::big) {
      for (auto& v : payload) {
        auto* p = reinterpret_cast<unsigned char*>(&v);
        for (std::size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) std::swap(p[a], p[b]);
      }
    }
  }

  std::ofstream hdr(header, std::ios::trunc);
  if (!hdr) fail(header, "cannot open for writing");
  std::ostringstream sp;
  sp.precision(17);
  sp << spacing[0] << ' ' << spacing[1] << ' ' << spacing[2];
  hdr << "ObjectType = Image\n"
      << "NDims = 3\n"
      << "BinaryData = True\n"
      << "BinaryDataByteOrderMSB = False\n"
      << "CompressedData = False\n"
      << "ElementSpacing = " << sp.str() << "\n"
      << "DimSize = " << dims.nx << ' ' << dims.ny << ' ' << dims.nz << "\n";
  if (channels != 1) hdr << "ElementNumberOfChannels = " << channels << "\n";
  hdr << "ElementType = " << element_type << "\n"
      << "ElementDataFile = " << raw.filename().string() << "\n";
  if (!hdr) fail(header, "write failed");

  std::ofstream out(raw, std::ios::binary | std::ios::trunc);
  if (!out) fail(raw, "cannot open for writing");
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(T)));
  if (!out) fail(raw, "write failed");
}

void require_type(const fs::path& path, const Header& h, const char* type, std::size_t channels) {
  if (h.element_type != type) {
    fail(path, "ElementType " + h.element_type + " not supported, expected " + type);
  }
  if (h.channels != channels) {
    fail(path, "ElementNumberOfChannels " + std::to_string(h.channels) + ", expected " +
                   std::to_string(channels));
  }
}

}  // namespace

Volume load_volume(const fs::path& header) {
  const Header h = read_header(header);
  require_type(header, h, "MET_FLOAT", 1);
  const auto raw = read_payload<float>(header, h, h.dims.count());
  std::vector<double> data(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) fail(header, "non-finite intensity at voxel " + std::to_string(i));
    data[i] = raw[i];
  }
  return Volume(h.dims, std::move(data), h.spacing);
}

void save_volume(const Volume& v, const fs::path& header) {
  std::vector<float> payload(v.data().begin(), v.data().end());
  write_pair(header, v.dims(), v.spacing(), "MET_FLOAT", 1, std::move(payload));
}

DisplacementField load_field(const fs::path& header) {
  const Header h = read_header(header);
  require_type(header, h, "MET_FLOAT", 3);
  const auto raw = read_payload<float>(header, h, 3 * h.dims.count());
  std::vector<Vec3> vectors(h.dims.count());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const float value = raw[3 * i + c];
      if (!std::isfinite(value)) {
        fail(header, "non-finite displacement at voxel " + std::to_string(i));
      }
      vectors[i][c] = value;
    }
  }
  return DisplacementField(h.dims, std::move(vectors));
}

void save_field(const DisplacementField& f, const fs::path& header) {
  std::vector<float> payload(3 * f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int c = 0; c < 3; ++c) payload[3 * i + c] = static_cast<float>(f[i][c]);
  }
  write_pair(header, f.dims(), {1.0, 1.0, 1.0}, "MET_FLOAT", 3, std::move(payload));
}

LabelVolume load_labels(const fs::path& header) {
  const Header h = read_header(header);
  require_type(header, h, "MET_USHORT", 1);
  auto raw = read_payload<std::uint16_t>(header, h, h.dims.count());
  return LabelVolume(h.dims, std::move(raw));
}

void save_labels(const LabelVolume& l, const fs::path& header) {
  write_pair(header, l.dims(), {1.0, 1.0, 1.0}, "MET_USHORT", 1,
             std::vector<std::uint16_t>(l.labels()));
}

}  // namespace crreg::io
