#pragma once

#include "spectral_sift/linalg.hpp"

#include <vector>

namespace spectral_sift {

/**
 * Per-band autoscaling statistics: x' = (x - mean) / std.
 *
 * Standard deviations use the n-1 denominator. A band whose standard
 * deviation falls below `epsilon` is flagged degenerate and gets std = 1, so
 * it passes through centered but unscaled.
 */
struct ScaleModel {
    Vector means;
    Vector stds;
    std::vector<bool> degenerate;
    double epsilon = 1e-12;

    Eigen::Index bands() const { return means.size(); }

    /// Model that leaves data untouched (zero means, unit stds).
    static ScaleModel identity(Eigen::Index bands);
};

ScaleModel fit_scale(const SpectralMatrix& x, double epsilon = 1e-12);

/// Centers only: stds are all 1.
ScaleModel fit_center(const SpectralMatrix& x);

SpectralMatrix apply_scale(const ScaleModel& model, const SpectralMatrix& x);
SpectralMatrix invert_scale(const ScaleModel& model, const SpectralMatrix& x);

} // namespace spectral_sift
