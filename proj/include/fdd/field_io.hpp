#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fdd/field.hpp"

namespace fdd {

/// Writes `<stem>.f32` (little-endian float32, row-major, x fastest) and a
/// `<stem>.json` sidecar with nx, ny, dx and kind.
void write_field(const std::filesystem::path& stem, const RealField& field,
                 const std::string& kind);

/// Writes interleaved (re, im) float32 pairs in centred order, i.e. the first
/// sample is k = (-n/2, -n/2) * dk. The sidecar records layout "centered".
void write_spectrum(const std::filesystem::path& stem, const SpectralField& spectrum,
                    const std::string& kind);

/// Reads a field written by write_field.
RealField read_field(const std::filesystem::path& stem);

/// 16-bit binary PGM preview scaled to the field maximum (negatives clip to 0).
void write_pgm(const std::filesystem::path& path, const RealField& field);

/// FNV-1a 64-bit digest of a file's bytes as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace fdd
