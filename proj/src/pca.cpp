#include "spectral_sift/pca.hpp"

#include "spectral_sift/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace spectral_sift {

Eigen::Index default_components(Eigen::Index rows, Eigen::Index bands) {
    return std::max<Eigen::Index>(1, std::min({rows - 1, bands, Eigen::Index{20}}));
}

PcaFit fit_pca(const SpectralMatrix& x, std::optional<Eigen::Index> k_opt) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (n < 2 || p < 1) {
        throw InvalidArgument("PCA needs at least 2 rows and 1 column");
    }
    const double mean_norm = x.colwise().mean().norm();
    if (!(mean_norm < 1e-6)) {
        throw InvalidArgument("PCA input is not column-centered (mean norm " + std::to_string(mean_norm) + ")");
    }
    const Eigen::Index k = k_opt.value_or(default_components(n, p));
    if (k < 1 || k > std::min(n - 1, p)) {
        throw InvalidArgument("PCA component count " + std::to_string(k) + " outside [1, " +
                              std::to_string(std::min(n - 1, p)) + "]");
    }

    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinV);
    PcaFit fit;
    PcaModel& m = fit.model;
    m.loadings = svd.matrixV().leftCols(k);
    m.singular_values = svd.singularValues().head(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::Index arg = 0;
        m.loadings.col(j).cwiseAbs().maxCoeff(&arg);
        if (m.loadings(arg, j) < 0.0) m.loadings.col(j) *= -1.0;
    }
    const double dof = static_cast<double>(n - 1);
    const double total = x.squaredNorm();
    m.explained_variance = m.singular_values.array().square() / dof;
    m.explained_variance_ratio = total > 0.0 ? Vector(m.singular_values.array().square() / total)
                                             : Vector(Vector::Zero(k));
    fit.scores = x * m.loadings;
    return fit;
}

Matrix project(const PcaModel& model, const SpectralMatrix& x) {
    if (x.cols() != model.bands()) {
        throw InvalidArgument("matrix has " + std::to_string(x.cols()) + " bands, PCA model has " +
                              std::to_string(model.bands()));
    }
    return x * model.loadings;
}

Vector correlate_scores(const Matrix& scores, const Vector& y) {
    if (scores.rows() != y.size()) {
        throw InvalidArgument("score rows and response length differ");
    }
    if (y.size() < 2) {
        throw InvalidArgument("correlation needs at least 2 observations");
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) != 0.0 && y(i) != 1.0) {
            throw InvalidArgument("discriminant vector must contain only 0 and 1");
        }
    }
    const Vector yc = y.array() - y.mean();
    const double sy = yc.norm();
    if (sy == 0.0) {
        throw InvalidArgument("discriminant vector holds a single class");
    }
    Vector rho(scores.cols());
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        const Vector tc = scores.col(j).array() - scores.col(j).mean();
        const double st = tc.norm();
        rho(j) = st > 0.0 ? std::min(1.0, std::abs(tc.dot(yc)) / (st * sy)) : 0.0;
    }
    return rho;
}

std::string describe(const SelectionRule& rule) {
    std::ostringstream out;
    if (const auto* top = std::get_if<TopN>(&rule)) {
        out << "top-" << top->n;
    } else {
        out << "|rho| >= " << std::get<Threshold>(rule).min_abs_correlation;
    }
    return out.str();
}

ComponentSelection select_components(const Vector& correlations, const SelectionRule& rule) {
    const auto k = static_cast<int>(correlations.size());
    if (k < 1) {
        throw InvalidArgument("no correlations to select from");
    }
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return correlations(a) > correlations(b); });
    ComponentSelection sel{{}, correlations, rule};
    if (const auto* top = std::get_if<TopN>(&rule)) {
        if (top->n < 1) {
            throw InvalidArgument("top-n selection needs n >= 1");
        }
        sel.selected.assign(order.begin(), order.begin() + std::min(top->n, k));
    } else {
        const double t = std::get<Threshold>(rule).min_abs_correlation;
        if (!(t > 0.0 && t < 1.0)) {
            throw InvalidArgument("correlation threshold must lie in (0, 1)");
        }
        for (int j : order) {
            if (correlations(j) >= t) sel.selected.push_back(j);
        }
        if (sel.selected.empty()) {
            throw InvalidArgument("no component reaches |rho| >= " + std::to_string(t));
        }
    }
    return sel;
}

SpectralMatrix reconstruct(const PcaModel& model, const Matrix& scores,
                           const ComponentSelection& selection) {
    if (selection.selected.empty()) {
        throw InvalidArgument("empty component selection");
    }
    if (scores.cols() != model.components()) {
        throw InvalidArgument("score columns do not match the PCA model");
    }
    SpectralMatrix out = SpectralMatrix::Zero(scores.rows(), model.bands());
    for (int j : selection.selected) {
        if (j < 0 || j >= model.components()) {
            throw InvalidArgument("component index " + std::to_string(j) + " out of range");
        }
        out.noalias() += scores.col(j) * model.loadings.col(j).transpose();
    }
    return out;
}

} // namespace spectral_sift
