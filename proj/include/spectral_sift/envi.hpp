#pragma once

#include "spectral_sift/specdata.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace spectral_sift {

/// ENVI numeric type codes this reader understands.
enum class EnviDataType : int {
    UInt8 = 1,
    Int16 = 2,
    Int32 = 3,
    Float32 = 4,
    Float64 = 5,
    UInt16 = 12,
    UInt32 = 13,
    Int64 = 14,
    UInt64 = 15,
};

std::size_t byte_size(EnviDataType type);

enum class ByteOrder { Little = 0, Big = 1 };

/**
 * Parsed ENVI header.
 *
 * Keys are matched case-insensitively with collapsed whitespace. Keys the
 * reader does not interpret are kept verbatim in `extra`, in file order, and
 * written back unchanged.
 */
struct EnviHeader {
    int samples = 0;
    int lines = 0;
    int bands = 0;
    EnviDataType data_type = EnviDataType::Float32;
    Interleave interleave = Interleave::BSQ;
    ByteOrder byte_order = ByteOrder::Little;
    std::size_t header_offset = 0;
    std::vector<double> wavelengths;
    std::vector<std::pair<std::string, std::string>> extra;

    std::size_t payload_bytes() const {
        return static_cast<std::size_t>(samples) * static_cast<std::size_t>(lines) *
               static_cast<std::size_t>(bands) * byte_size(data_type);
    }
    /// Raw value of an extra key (normalized name), or empty.
    std::string extra_value(const std::string& key) const;
};

EnviHeader parse_envi_header(const std::string& text);
std::string format_envi_header(const EnviHeader& header);

/// Splits a brace-enclosed, comma-separated ENVI list value.
std::vector<std::string> split_envi_list(const std::string& value);

/// Default payload path for a header: same stem, first existing of no
/// extension, .raw, .img, .dat, .bsq, .bil, .bip.
std::filesystem::path envi_data_path(const std::filesystem::path& header_path);

HyperCube read_envi(const std::filesystem::path& header_path, const std::filesystem::path& data_path);

/// Writes a cube. Only Float32 and Float64 payloads are supported for
/// writing; Float32 round-trips bit-exactly for float-representable values.
void write_envi(const HyperCube& cube, const std::filesystem::path& header_path,
                const std::filesystem::path& data_path, Interleave interleave = Interleave::BSQ,
                EnviDataType data_type = EnviDataType::Float32);

/// Single-band 8-bit ENVI label file; palette kept in `class names` /
/// `label values` header entries.
void write_mask_envi(const LabelMask& mask, const std::filesystem::path& header_path,
                     const std::filesystem::path& data_path);
LabelMask read_mask_envi(const std::filesystem::path& header_path,
                         const std::filesystem::path& data_path);

/// Binary PGM (P5, maxval 255). PGM carries no palette, so the default palette
/// is attached on read (plus a generic name for any other label).
void write_mask_pgm(const LabelMask& mask, const std::filesystem::path& path);
LabelMask read_mask_pgm(const std::filesystem::path& path);

/// Dispatches on extension: ".pgm" reads PGM, anything else an ENVI header.
LabelMask read_mask(const std::filesystem::path& path);

} // namespace spectral_sift
