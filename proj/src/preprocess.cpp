#include "spectral_sift/preprocess.hpp"

#include "spectral_sift/error.hpp"

#include <cmath>
#include <string>

namespace spectral_sift {

namespace {

void check_columns(const ScaleModel& model, const SpectralMatrix& x) {
    if (x.cols() != model.bands()) {
        throw InvalidArgument("matrix has " + std::to_string(x.cols()) + " columns, scale model has " +
                              std::to_string(model.bands()));
    }
}

} // namespace

ScaleModel ScaleModel::identity(Eigen::Index bands) {
    ScaleModel m;
    m.means = Vector::Zero(bands);
    m.stds = Vector::Ones(bands);
    m.degenerate.assign(static_cast<std::size_t>(bands), false);
    return m;
}

ScaleModel fit_scale(const SpectralMatrix& x, double epsilon) {
    if (x.rows() < 2) {
        throw InvalidArgument("autoscaling needs at least 2 rows");
    }
    ScaleModel m;
    m.epsilon = epsilon;
    m.means = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - m.means.transpose();
    m.stds = (centered.colwise().squaredNorm() / static_cast<double>(x.rows() - 1)).cwiseSqrt().transpose();
    m.degenerate.assign(static_cast<std::size_t>(x.cols()), false);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (!(m.stds(j) >= epsilon)) {
            m.stds(j) = 1.0;
            m.degenerate[static_cast<std::size_t>(j)] = true;
        }
    }
    return m;
}

ScaleModel fit_center(const SpectralMatrix& x) {
    if (x.rows() < 1) {
        throw InvalidArgument("centering needs at least 1 row");
    }
    ScaleModel m = ScaleModel::identity(x.cols());
    m.means = x.colwise().mean().transpose();
    return m;
}

SpectralMatrix apply_scale(const ScaleModel& model, const SpectralMatrix& x) {
    check_columns(model, x);
    return ((x.rowwise() - model.means.transpose()).array().rowwise() /
            model.stds.transpose().array())
        .matrix();
}

SpectralMatrix invert_scale(const ScaleModel& model, const SpectralMatrix& x) {
    check_columns(model, x);
    return ((x.array().rowwise() * model.stds.transpose().array()).matrix().rowwise() +
            model.means.transpose());
}

} // namespace spectral_sift
