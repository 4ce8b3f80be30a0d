#pragma once

#include "spectral_sift/linalg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace spectral_sift {

enum class Interleave { BSQ, BIL, BIP };

std::string to_string(Interleave interleave);
Interleave interleave_from_string(const std::string& text);

/**
 * Reflectance cube with (row, col, band) addressing.
 *
 * Values are held in double precision whatever the on-disk type was, stored
 * band-interleaved-by-pixel so that one pixel spectrum is contiguous. The
 * `interleave` field only records the layout the cube was read from (or
 * should be written as by default).
 *
 * Invariants, checked on construction: rows, cols, bands >= 1; one
 * wavelength per band, strictly increasing; every value finite.
 */
class HyperCube {
public:
    HyperCube(int rows, int cols, std::vector<double> wavelengths_nm,
              std::vector<double> data, Interleave interleave = Interleave::BSQ);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int bands() const { return bands_; }
    Interleave interleave() const { return interleave_; }
    const std::vector<double>& wavelengths_nm() const { return wavelengths_; }

    double at(int row, int col, int band) const {
        return data_[offset(row, col) + static_cast<std::size_t>(band)];
    }
    std::span<const double> pixel(int row, int col) const {
        return {data_.data() + offset(row, col), static_cast<std::size_t>(bands_)};
    }
    /// Raw BIP-ordered values.
    const std::vector<double>& values() const { return data_; }

    /// Cube restricted to the given bands (in the given order, which must keep
    /// wavelengths increasing).
    HyperCube select_bands(const BandList& bands) const;

    bool operator==(const HyperCube& other) const;

private:
    std::size_t offset(int row, int col) const {
        return (static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) +
                static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(bands_);
    }

    int rows_;
    int cols_;
    int bands_;
    std::vector<double> wavelengths_;
    std::vector<double> data_;
    Interleave interleave_;
};

/// Reserved label for pixels without ground truth.
inline constexpr std::uint8_t kUnlabeled = 255;

// Class labels used throughout the pipeline.
inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kBeeBody = 1;
inline constexpr std::uint8_t kBeeWing = 2;
inline constexpr std::uint8_t kMite = 3;

/// Per-pixel class labels. Every label other than kUnlabeled must have a
/// palette entry.
class LabelMask {
public:
    LabelMask(int rows, int cols, std::vector<std::uint8_t> labels,
              std::map<int, std::string> palette = default_palette());

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::uint8_t at(int row, int col) const {
        return labels_[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) +
                       static_cast<std::size_t>(col)];
    }
    const std::vector<std::uint8_t>& labels() const { return labels_; }
    const std::map<int, std::string>& palette() const { return palette_; }

    /// Number of pixels carrying `label`.
    std::size_t count(std::uint8_t label) const;

    static std::map<int, std::string> default_palette();

    bool operator==(const LabelMask& other) const = default;

private:
    int rows_;
    int cols_;
    std::vector<std::uint8_t> labels_;
    std::map<int, std::string> palette_;
};

struct PixelIndex {
    int row;
    int col;
    bool operator==(const PixelIndex&) const = default;
};

struct FlatPixels {
    SpectralMatrix spectra;
    std::vector<PixelIndex> index;
};

/**
 * Pixels as matrix rows in row-major scan order.
 *
 * With `keep_labels`, only pixels whose mask label is in the set are kept;
 * passing `keep_labels` without a mask is an error.
 */
FlatPixels flatten(const HyperCube& cube, const LabelMask* mask = nullptr,
                   const std::optional<std::set<std::uint8_t>>& keep_labels = std::nullopt);

/// Scatters rows back to their pixels. Every pixel of the rows x cols grid
/// must be covered exactly once.
HyperCube unflatten(const FlatPixels& flat, int rows, int cols,
                    std::vector<double> wavelengths_nm);

/// Mask labels for the pixels listed in `index`.
std::vector<std::uint8_t> labels_at(const LabelMask& mask, const std::vector<PixelIndex>& index);

/**
 * Index of the band whose center is nearest `target_nm`; ties go to the lower
 * index. Targets further than half a band spacing outside the grid are
 * rejected.
 */
int nm_to_band(const std::vector<double>& wavelengths_nm, double target_nm);
inline int nm_to_band(const HyperCube& cube, double target_nm) {
    return nm_to_band(cube.wavelengths_nm(), target_nm);
}

/// `count` band centers evenly spaced over [first_nm, last_nm].
std::vector<double> uniform_wavelengths(int count, double first_nm, double last_nm);

} // namespace spectral_sift
