#pragma once

#include "spectral_sift/linalg.hpp"

#include <string>
#include <vector>

namespace spectral_sift {

/// `Linear` (variance * a'b) has no lengthscale; it exists to check kernel
/// PLS against linear SIMPLS and is not offered to the optimizer.
enum class KernelFamily { Gaussian, Laplacian, Matern52, Cauchy, Linear };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/**
 * Stationary kernel k(a, b) = variance * f(r / lengthscale), r = |a - b|:
 *   Gaussian   exp(-r^2 / (2 l^2))
 *   Laplacian  exp(-r / l)
 *   Matern52   (1 + sqrt5 r/l + 5 r^2 / (3 l^2)) exp(-sqrt5 r / l)
 *   Cauchy     1 / (1 + r^2 / l^2)
 */
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double lengthscale = 1.0;
    double variance = 1.0;

    void validate() const;
    /// Kernel value at squared distance `r2` (stationary families only).
    double value_sq(double r2) const;
};

/// Pairwise squared Euclidean distances, computed per pair so identical rows
/// give exactly zero.
Matrix squared_distances(const Matrix& a, const Matrix& b);

/// Elementwise kernel of a squared-distance matrix.
Matrix kernel_from_sq_distances(const KernelSpec& spec, const Matrix& d2);

/// |A| x |B| Gram/cross matrix.
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& a, const Matrix& b);

/// Statistics of a training Gram matrix needed to center it and cross-kernels
/// against it in feature space.
struct KernelCentering {
    Vector column_means;
    double grand_mean = 0.0;
};

KernelCentering fit_centering(const Matrix& k_train);

/// K - 1K/n - K1/n + 1K1/n^2.
Matrix center_train(const Matrix& k_train, const KernelCentering& stats);

/// Cross-kernel (new rows x training rows) centered with training statistics.
Matrix center_cross(const Matrix& k_cross, const KernelCentering& stats);

/**
 * SIMPLS run in dual form on a centered Gram matrix.
 *
 * Every feature-space vector is carried as coefficients on the training
 * points, so predictions need only centered cross-kernels:
 * Y_hat = Kc_cross * dual + y_mean. With a linear kernel this reproduces
 * linear SIMPLS on centered, unscaled X.
 */
struct KernelSimplsFactors {
    Matrix dual;    // n x responses
    Matrix scores;  // n x a, orthonormal
    Vector r2;      // cumulative training R^2 after 1..a latent variables
};

KernelSimplsFactors kernel_simpls(const Matrix& k_centered, const Matrix& y_centered, int a);

struct KernelPlsModel {
    KernelSpec kernel;
    Matrix support;  // training spectra
    KernelCentering centering;
    Matrix dual;     // support rows x classes
    Vector y_mean;
    int components = 0;
    std::vector<int> classes;
    Vector r2;
};

/// Kernel PLS-DA on class labels. Throws DegenerateData when the centered
/// Gram matrix vanishes (all rows alike in feature space).
KernelPlsModel fit_kernel_pls(const Matrix& x, const std::vector<int>& labels,
                              const KernelSpec& spec, int a);

/// Indicator predictions for new rows.
Matrix predict_indicators(const KernelPlsModel& model, const Matrix& x);

struct Classification {
    std::vector<int> labels;
    Matrix scores;
};

/// Cross-kernel, centering, dual prediction, argmax decode (ties to the
/// lowest class).
Classification classify(const KernelPlsModel& model, const Matrix& x);

} // namespace spectral_sift
