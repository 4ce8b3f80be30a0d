#include "spectral_sift/synth.hpp"

#include "spectral_sift/error.hpp"

#include <algorithm>
#include <random>

namespace spectral_sift {

double Population::reflectance(double nm) const {
    if (knots.empty()) {
        throw InvalidArgument("population '" + name + "' has no knots");
    }
    if (nm <= knots.front().nm) return knots.front().value;
    if (nm >= knots.back().nm) return knots.back().value;
    const auto hi = std::upper_bound(knots.begin(), knots.end(), nm,
                                     [](double v, const Knot& k) { return v < k.nm; });
    const auto lo = hi - 1;
    const double t = (nm - lo->nm) / (hi->nm - lo->nm);
    return lo->value + t * (hi->value - lo->value);
}

bool Blob::covers(int row, int col) const {
    const double dr = row - center_row;
    const double dc = col - center_col;
    if (shape == BlobShape::Disk) {
        return dr * dr + dc * dc <= radius * radius;
    }
    return std::abs(dr) <= half_height && std::abs(dc) <= half_width;
}

const Population& SceneSpec::population(const std::string& name) const {
    for (const auto& p : populations) {
        if (p.name == name) return p;
    }
    throw InvalidArgument("scene references unknown population '" + name + "'");
}

std::pair<HyperCube, LabelMask> synth_scene(const SceneSpec& spec, std::uint64_t seed) {
    if (spec.rows < 1 || spec.cols < 1) {
        throw InvalidArgument("scene dimensions must be >= 1");
    }
    if (spec.wavelengths_nm.empty()) {
        throw InvalidArgument("scene has no wavelengths");
    }
    if (spec.noise_sigma < 0.0) {
        throw InvalidArgument("noise sigma must be >= 0");
    }
    for (const auto& p : spec.populations) {
        if (p.knots.empty()) {
            throw InvalidArgument("population '" + p.name + "' has no knots");
        }
        for (std::size_t i = 1; i < p.knots.size(); ++i) {
            if (!(p.knots[i].nm > p.knots[i - 1].nm)) {
                throw InvalidArgument("knots of population '" + p.name + "' must be increasing in nm");
            }
        }
    }

    // Resolve which population owns each pixel.
    std::vector<const Population*> pops;
    pops.reserve(spec.blobs.size());
    for (const auto& blob : spec.blobs) pops.push_back(&spec.population(blob.population));
    const Population& background = spec.population(spec.background);

    const std::size_t npix = static_cast<std::size_t>(spec.rows) * static_cast<std::size_t>(spec.cols);
    std::vector<const Population*> owner(npix, &background);
    std::vector<int> owner_blob(npix, -1);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const std::size_t p = static_cast<std::size_t>(r) * static_cast<std::size_t>(spec.cols) +
                                  static_cast<std::size_t>(c);
            for (std::size_t b = 0; b < spec.blobs.size(); ++b) {
                if (!spec.blobs[b].covers(r, c)) continue;
                if (owner_blob[p] >= 0 && !spec.layered && owner[p]->label != pops[b]->label) {
                    throw InvalidArgument("blobs " + std::to_string(owner_blob[p]) + " and " +
                                          std::to_string(b) +
                                          " of different classes overlap; set layered to paint in order");
                }
                owner[p] = pops[b];
                owner_blob[p] = static_cast<int>(b);
            }
        }
    }

    const auto bands = spec.wavelengths_nm.size();
    std::vector<std::vector<double>> templates;
    std::vector<const Population*> order;
    for (const auto& p : spec.populations) {
        std::vector<double> t(bands);
        for (std::size_t b = 0; b < bands; ++b) t[b] = p.reflectance(spec.wavelengths_nm[b]);
        templates.push_back(std::move(t));
        order.push_back(&p);
    }
    auto template_of = [&](const Population* p) -> const std::vector<double>& {
        const auto it = std::find(order.begin(), order.end(), p);
        return templates[static_cast<std::size_t>(it - order.begin())];
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> data(npix * bands);
    std::vector<std::uint8_t> labels(npix);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const std::size_t p = static_cast<std::size_t>(r) * static_cast<std::size_t>(spec.cols) +
                                  static_cast<std::size_t>(c);
            double light = spec.gain;
            if (spec.shadow) {
                const int extent = spec.shadow->axis == ShadowField::Axis::Rows ? spec.rows : spec.cols;
                const int pos = spec.shadow->axis == ShadowField::Axis::Rows ? r : c;
                const double t = extent > 1 ? static_cast<double>(pos) / (extent - 1) : 0.0;
                light *= 1.0 - spec.shadow->strength * t;
            }
            const auto& tmpl = template_of(owner[p]);
            for (std::size_t b = 0; b < bands; ++b) {
                double v = tmpl[b] * light;
                if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise(rng);
                data[p * bands + b] = v;
            }
            labels[p] = owner[p]->label;
        }
    }

    auto palette = LabelMask::default_palette();
    for (const auto& pop : spec.populations) {
        if (pop.label != kUnlabeled && !palette.contains(pop.label)) palette[pop.label] = pop.name;
    }
    return {HyperCube(spec.rows, spec.cols, spec.wavelengths_nm, std::move(data)),
            LabelMask(spec.rows, spec.cols, std::move(labels), std::move(palette))};
}

} // namespace spectral_sift
