#pragma once

#include "spectral_sift/linalg.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace spectral_sift {

/**
 * Principal component model X = T P' + E of an autoscaled matrix.
 *
 * Loadings have orthonormal columns; each column's largest-magnitude entry is
 * positive (first such entry on ties), so refits give identical models.
 */
struct PcaModel {
    Matrix loadings;                 // bands x k
    Vector singular_values;          // k
    Vector explained_variance;       // k, s^2 / (n - 1)
    Vector explained_variance_ratio; // k, share of total variance

    Eigen::Index components() const { return loadings.cols(); }
    Eigen::Index bands() const { return loadings.rows(); }
};

struct PcaFit {
    PcaModel model;
    Matrix scores;  // n x k
};

/// Default component count: min(rows - 1, bands, 20).
Eigen::Index default_components(Eigen::Index rows, Eigen::Index bands);

/// Thin-SVD PCA of a column-centered matrix. Rejects inputs whose column-mean
/// vector has norm >= 1e-6 and k outside [1, min(rows - 1, bands)].
PcaFit fit_pca(const SpectralMatrix& x, std::optional<Eigen::Index> k = std::nullopt);

/// Scores of new (already scaled) rows: X P.
Matrix project(const PcaModel& model, const SpectralMatrix& x);

/// |Pearson correlation| of every score column with a 0/1 class vector.
/// A constant score column gets 0. Fails when y holds only one class.
Vector correlate_scores(const Matrix& scores, const Vector& y);

struct TopN {
    int n = 2;
};
struct Threshold {
    double min_abs_correlation = 0.5;
};
using SelectionRule = std::variant<TopN, Threshold>;

std::string describe(const SelectionRule& rule);

/// Chosen components, 0-based, ordered by |rho| descending then index.
struct ComponentSelection {
    std::vector<int> selected;
    Vector correlations;
    SelectionRule rule;
};

/// Top-n is capped at the number of available components.
ComponentSelection select_components(const Vector& correlations, const SelectionRule& rule);

/// T[:, sel] P[:, sel]' (still in scaled units).
SpectralMatrix reconstruct(const PcaModel& model, const Matrix& scores,
                           const ComponentSelection& selection);

} // namespace spectral_sift
