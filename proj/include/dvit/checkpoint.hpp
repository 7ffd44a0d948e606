#pragma once

// Binary checkpoint layout, all integers little-endian:
//
//   "VGVT"                      4 bytes magic
//   version                     u16 (currently 1)
//   config length, config       u32 + UTF-8 `key=value` lines
//   tensor count                u32
//   per tensor:
//     name length, name         u32 + UTF-8
//     rank, extents             u32 + rank * u32
//     values                    numel * f32, row-major
//
// Values are stored as 32-bit floats. Models produced by VitModel::initialize
// and by training keep float-representable parameters, so a save/load
// round trip reproduces them bit for bit.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dvit/vit.hpp"

namespace dvit {

inline constexpr char kCheckpointMagic[4] = {'V', 'G', 'V', 'T'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const VitModel& model);
/// Throws FormatError (bad magic, truncation), VersionError, or
/// IntegrityError (tensor table does not match the stored config).
VitModel decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const VitModel& model, const std::filesystem::path& path);
VitModel load_checkpoint(const std::filesystem::path& path);

}  // namespace dvit
