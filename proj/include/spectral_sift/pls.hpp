#pragma once

#include "spectral_sift/linalg.hpp"
#include "spectral_sift/preprocess.hpp"

#include <vector>

namespace spectral_sift {

struct PlsOptions {
    /// Divide X columns by their standard deviation. X is always centered;
    /// callers that pre-scale can switch this off.
    bool autoscale_x = true;
};

/**
 * SIMPLS model fitted on centered (optionally scaled) X against centered Y.
 *
 * `weights` map scaled X straight to the orthonormal scores (T = Xs W), so
 * P'W is the identity up to rounding and the regression coefficients
 * b = W (P'W)^-1 Q' reduce to W Q'.
 */
struct PlsModel {
    ScaleModel x_scale;
    Vector y_mean;
    Matrix weights;     // vars x a
    Matrix x_loadings;  // vars x a
    Matrix y_loadings;  // responses x a
    Matrix scores;      // n x a, orthonormal columns
    Matrix coefficients;  // vars x responses, in scaled X units
    /// Training R^2 (share of centered Y sum of squares explained) after
    /// 1..a latent variables.
    Vector r2;

    int components() const { return static_cast<int>(weights.cols()); }
};

/// Fits `a` latent variables by SIMPLS (cross-product matrix deflation).
/// Throws InvalidArgument for bad shapes or a > min(rows - 1, vars), and
/// DegenerateData for zero-variance Y or when the data support fewer than
/// `a` latent variables.
PlsModel fit_simpls(const Matrix& x, const Matrix& y, int a, const PlsOptions& options = {});

/// b = W (P'W)^-1 Q' via a linear solve; DegenerateData when P'W has a
/// condition number above 1e12.
Matrix regression_coefficients(const PlsModel& model);

/// Scores of new rows: scaled X times W.
Matrix transform(const PlsModel& model, const Matrix& x);

/// Scaled X_new times b, plus the Y mean.
Matrix predict(const PlsModel& model, const Matrix& x);

/// Class-indicator coding for PLS-DA: one column per distinct label, sorted
/// ascending.
struct DaEncoding {
    std::vector<int> classes;
    Matrix indicators;
};

DaEncoding encode_da(const std::vector<int>& labels);

/// Indicator matrix of `labels` against a fixed class list.
Matrix indicator_matrix(const std::vector<int>& labels, const std::vector<int>& classes);

/// Row-wise argmax, ties to the lowest class index.
std::vector<int> decode_da(const Matrix& predicted, const std::vector<int>& classes);

} // namespace spectral_sift
