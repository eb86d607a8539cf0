#pragma once

#include <filesystem>

#include "crreg/volume.hpp"

namespace crreg::io {

// MetaImage (.mhd header + .raw payload), little-endian, x-fastest.
// Intensities and displacements are stored as MET_FLOAT, labels as MET_USHORT.
// Fields carry ElementNumberOfChannels = 3 with interleaved components.

Volume load_volume(const std::filesystem::path& header);
void save_volume(const Volume& v, const std::filesystem::path& header);

DisplacementField load_field(const std::filesystem::path& header);
void save_field(const DisplacementField& f, const std::filesystem::path& header);

LabelVolume load_labels(const std::filesystem::path& header);
void save_labels(const LabelVolume& l, const std::filesystem::path& header);

}  // namespace crreg::io
