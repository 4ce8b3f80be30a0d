#pragma once

#include "spectral_sift/specdata.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spectral_sift {

/// One vertex of a piecewise-linear template spectrum.
struct Knot {
    double nm;
    double value;
};

/// A material with a smooth template spectrum and the mask label it carries.
struct Population {
    std::string name;
    std::uint8_t label = kBackground;
    std::vector<Knot> knots;

    /// Linear interpolation between knots, constant beyond the end knots.
    double reflectance(double nm) const;
};

enum class BlobShape { Disk, Rect };

struct Blob {
    std::string population;
    BlobShape shape = BlobShape::Disk;
    double center_row = 0.0;
    double center_col = 0.0;
    double radius = 1.0;       // Disk
    double half_height = 1.0;  // Rect
    double half_width = 1.0;   // Rect

    bool covers(int row, int col) const;
};

/// Multiplicative illumination falloff 1 - strength * t, where t runs from 0
/// at the first row/column to 1 at the last.
struct ShadowField {
    enum class Axis { Rows, Cols };
    Axis axis = Axis::Cols;
    double strength = 0.0;
};

struct SceneSpec {
    int rows = 32;
    int cols = 32;
    std::vector<double> wavelengths_nm;
    std::vector<Population> populations;
    /// Population that fills every pixel no blob covers.
    std::string background;
    std::vector<Blob> blobs;
    double noise_sigma = 0.0;
    /// Global brightness multiplier applied to every template.
    double gain = 1.0;
    std::optional<ShadowField> shadow;
    /// When false, blobs of different classes must not overlap. When true,
    /// blobs are painted in list order, later ones on top.
    bool layered = false;

    const Population& population(const std::string& name) const;
};

/**
 * Renders a scene: each pixel is its population's template times the
 * illumination (gain and optional shadow) plus i.i.d. Gaussian noise of
 * standard deviation `noise_sigma`. The mask carries population labels.
 * Output is a pure function of (spec, seed).
 */
std::pair<HyperCube, LabelMask> synth_scene(const SceneSpec& spec, std::uint64_t seed);

} // namespace spectral_sift
