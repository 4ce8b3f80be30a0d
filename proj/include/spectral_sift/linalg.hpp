#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace spectral_sift {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Pixels as rows, bands as columns.
using SpectralMatrix = Eigen::MatrixXd;

/// Band (column) indices, 0-based.
using BandList = std::vector<int>;

/// Copies the listed columns of `x` in the listed order.
inline Matrix select_columns(const Matrix& x, const BandList& columns) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = x.col(columns[j]);
    }
    return out;
}

inline Matrix select_rows(const Matrix& x, const std::vector<int>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    }
    return out;
}

} // namespace spectral_sift
