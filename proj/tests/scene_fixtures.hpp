#pragma once

#include "spectral_sift/serialize.hpp"
#include "spectral_sift/synth.hpp"

#include <string>

namespace spectral_sift::testing {

/// Small three-population scene: floor, bees and mites, partly on the bees.
inline Json small_scene_json(double noise = 0.003) {
    Json j = Json::parse(R"({
        "rows": 24, "cols": 24,
        "wavelengths": {"count": 12, "first_nm": 450, "last_nm": 900},
        "populations": [
            {"name": "floor", "label": 0, "knots": [[450, 0.6], [700, 0.55], [900, 0.5]]},
            {"name": "bee", "label": 1, "knots": [[450, 0.2], [700, 0.3], [900, 0.45]]},
            {"name": "mite", "label": 3, "knots": [[450, 0.1], [600, 0.35], [700, 0.2], [900, 0.5]]}],
        "background": "floor",
        "blobs": [
            {"population": "bee", "shape": "disk", "center": [7, 7], "radius": 4},
            {"population": "bee", "shape": "disk", "center": [16, 15], "radius": 4},
            {"population": "mite", "shape": "disk", "center": [7, 8], "radius": 1.5},
            {"population": "mite", "shape": "disk", "center": [19, 5], "radius": 1.5},
            {"population": "mite", "shape": "rect", "center": [4, 19], "half_size": [1, 1]}],
        "layered": true
    })");
    j["noise_sigma"] = noise;
    return j;
}

/// Mites differ from everything else at a single band only.
inline Json single_band_scene_json() {
    return Json::parse(R"({
        "rows": 20, "cols": 20,
        "wavelengths": [400, 450, 500, 550, 600, 650, 700, 750, 800, 850],
        "populations": [
            {"name": "floor", "label": 0, "knots": [[400, 0.5], [850, 0.5]]},
            {"name": "bee", "label": 1, "knots": [[400, 0.5], [850, 0.5]]},
            {"name": "mite", "label": 3, "knots": [[400, 0.5], [550, 0.5], [600, 0.2], [650, 0.5], [850, 0.5]]}],
        "background": "floor",
        "blobs": [
            {"population": "bee", "shape": "disk", "center": [10, 10], "radius": 5},
            {"population": "mite", "shape": "disk", "center": [10, 11], "radius": 1.5},
            {"population": "mite", "shape": "disk", "center": [3, 16], "radius": 1.5}],
        "noise_sigma": 0.002,
        "layered": true
    })");
}

inline std::string data_path(const std::string& relative) {
    return std::string(SPECTRAL_SIFT_DATA_DIR) + "/" + relative;
}

} // namespace spectral_sift::testing
