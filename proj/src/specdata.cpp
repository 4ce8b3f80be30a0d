#include "spectral_sift/specdata.hpp"

#include "spectral_sift/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace spectral_sift {

std::string to_string(Interleave interleave) {
    switch (interleave) {
    case Interleave::BSQ: return "bsq";
    case Interleave::BIL: return "bil";
    case Interleave::BIP: return "bip";
    }
    return "bsq";
}

Interleave interleave_from_string(const std::string& text) {
    std::string lower;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (lower == "bsq") return Interleave::BSQ;
    if (lower == "bil") return Interleave::BIL;
    if (lower == "bip") return Interleave::BIP;
    throw FormatError("unknown interleave '" + text + "'");
}

HyperCube::HyperCube(int rows, int cols, std::vector<double> wavelengths_nm,
                     std::vector<double> data, Interleave interleave)
    : rows_(rows), cols_(cols), bands_(static_cast<int>(wavelengths_nm.size())),
      wavelengths_(std::move(wavelengths_nm)), data_(std::move(data)), interleave_(interleave) {
    if (rows_ < 1 || cols_ < 1 || bands_ < 1) {
        throw InvalidArgument("cube dimensions must be >= 1");
    }
    for (std::size_t b = 1; b < wavelengths_.size(); ++b) {
        if (!(wavelengths_[b] > wavelengths_[b - 1])) {
            throw InvalidArgument("wavelengths must be strictly increasing (band " +
                                  std::to_string(b) + ")");
        }
    }
    const std::size_t expected = static_cast<std::size_t>(rows_) *
                                 static_cast<std::size_t>(cols_) *
                                 static_cast<std::size_t>(bands_);
    if (data_.size() != expected) {
        throw InvalidArgument("cube payload has " + std::to_string(data_.size()) +
                              " values, expected " + std::to_string(expected));
    }
    for (double v : data_) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("cube contains non-finite values");
        }
    }
}

HyperCube HyperCube::select_bands(const BandList& bands) const {
    if (bands.empty()) {
        throw InvalidArgument("band subset is empty");
    }
    std::vector<double> wl;
    wl.reserve(bands.size());
    for (int b : bands) {
        if (b < 0 || b >= bands_) {
            throw InvalidArgument("band index " + std::to_string(b) + " out of range");
        }
        wl.push_back(wavelengths_[static_cast<std::size_t>(b)]);
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_) * bands.size());
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            const auto px = pixel(r, c);
            for (int b : bands) {
                out.push_back(px[static_cast<std::size_t>(b)]);
            }
        }
    }
    return HyperCube(rows_, cols_, std::move(wl), std::move(out), interleave_);
}

bool HyperCube::operator==(const HyperCube& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && wavelengths_ == other.wavelengths_ &&
           data_ == other.data_;
}

LabelMask::LabelMask(int rows, int cols, std::vector<std::uint8_t> labels,
                     std::map<int, std::string> palette)
    : rows_(rows), cols_(cols), labels_(std::move(labels)), palette_(std::move(palette)) {
    if (rows_ < 1 || cols_ < 1) {
        throw InvalidArgument("mask dimensions must be >= 1");
    }
    if (labels_.size() != static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_)) {
        throw InvalidArgument("mask has " + std::to_string(labels_.size()) +
                              " labels for a " + std::to_string(rows_) + "x" +
                              std::to_string(cols_) + " grid");
    }
    for (std::uint8_t label : labels_) {
        if (label != kUnlabeled && !palette_.contains(label)) {
            throw InvalidArgument("mask label " + std::to_string(label) + " has no palette entry");
        }
    }
}

std::size_t LabelMask::count(std::uint8_t label) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

std::map<int, std::string> LabelMask::default_palette() {
    return {{kBackground, "background"},
            {kBeeBody, "bee-body"},
            {kBeeWing, "bee-wing"},
            {kMite, "mite"}};
}

FlatPixels flatten(const HyperCube& cube, const LabelMask* mask,
                   const std::optional<std::set<std::uint8_t>>& keep_labels) {
    if (keep_labels && mask == nullptr) {
        throw InvalidArgument("keep_labels given without a mask");
    }
    if (mask != nullptr && (mask->rows() != cube.rows() || mask->cols() != cube.cols())) {
        throw InvalidArgument("mask dimensions do not match the cube");
    }
    std::vector<PixelIndex> index;
    for (int r = 0; r < cube.rows(); ++r) {
        for (int c = 0; c < cube.cols(); ++c) {
            if (keep_labels && !keep_labels->contains(mask->at(r, c))) {
                continue;
            }
            index.push_back({r, c});
        }
    }
    SpectralMatrix x(static_cast<Eigen::Index>(index.size()), cube.bands());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto px = cube.pixel(index[i].row, index[i].col);
        for (int b = 0; b < cube.bands(); ++b) {
            x(static_cast<Eigen::Index>(i), b) = px[static_cast<std::size_t>(b)];
        }
    }
    return {std::move(x), std::move(index)};
}

HyperCube unflatten(const FlatPixels& flat, int rows, int cols, std::vector<double> wavelengths_nm) {
    const std::size_t pixels = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (flat.index.size() != pixels || static_cast<std::size_t>(flat.spectra.rows()) != pixels) {
        throw InvalidArgument("unflatten needs exactly one row per pixel");
    }
    const auto bands = static_cast<std::size_t>(flat.spectra.cols());
    if (wavelengths_nm.size() != bands) {
        throw InvalidArgument("wavelength count does not match column count");
    }
    std::vector<double> data(pixels * bands);
    std::vector<bool> seen(pixels, false);
    for (std::size_t i = 0; i < flat.index.size(); ++i) {
        const auto [r, c] = flat.index[i];
        if (r < 0 || r >= rows || c < 0 || c >= cols) {
            throw InvalidArgument("pixel index out of range");
        }
        const std::size_t p = static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                              static_cast<std::size_t>(c);
        if (seen[p]) {
            throw InvalidArgument("pixel listed twice in index");
        }
        seen[p] = true;
        for (std::size_t b = 0; b < bands; ++b) {
            data[p * bands + b] = flat.spectra(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
        }
    }
    return HyperCube(rows, cols, std::move(wavelengths_nm), std::move(data));
}

std::vector<std::uint8_t> labels_at(const LabelMask& mask, const std::vector<PixelIndex>& index) {
    std::vector<std::uint8_t> out;
    out.reserve(index.size());
    for (const auto& [r, c] : index) {
        out.push_back(mask.at(r, c));
    }
    return out;
}

int nm_to_band(const std::vector<double>& wavelengths_nm, double target_nm) {
    if (wavelengths_nm.empty()) {
        throw InvalidArgument("empty wavelength grid");
    }
    const std::size_t n = wavelengths_nm.size();
    const double lo_half = n > 1 ? 0.5 * (wavelengths_nm[1] - wavelengths_nm[0]) : 0.0;
    const double hi_half = n > 1 ? 0.5 * (wavelengths_nm[n - 1] - wavelengths_nm[n - 2]) : 0.0;
    if (!std::isfinite(target_nm) || target_nm < wavelengths_nm.front() - lo_half ||
        target_nm > wavelengths_nm.back() + hi_half) {
        throw InvalidArgument("wavelength " + std::to_string(target_nm) + " nm outside the band grid");
    }
    // First center >= target; the nearest is it or its predecessor.
    const auto it = std::lower_bound(wavelengths_nm.begin(), wavelengths_nm.end(), target_nm);
    if (it == wavelengths_nm.begin()) return 0;
    if (it == wavelengths_nm.end()) return static_cast<int>(n - 1);
    const auto hi = static_cast<int>(it - wavelengths_nm.begin());
    const double d_hi = *it - target_nm;
    const double d_lo = target_nm - *(it - 1);
    return d_lo <= d_hi ? hi - 1 : hi;
}

std::vector<double> uniform_wavelengths(int count, double first_nm, double last_nm) {
    if (count < 1) {
        throw InvalidArgument("band count must be >= 1");
    }
    std::vector<double> wl(static_cast<std::size_t>(count));
    if (count == 1) {
        wl[0] = first_nm;
        return wl;
    }
    const double step = (last_nm - first_nm) / (count - 1);
    for (int i = 0; i < count; ++i) {
        wl[static_cast<std::size_t>(i)] = first_nm + step * i;
    }
    return wl;
}

} // namespace spectral_sift
