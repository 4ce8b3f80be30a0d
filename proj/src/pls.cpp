#include "spectral_sift/pls.hpp"

#include "spectral_sift/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace spectral_sift {

namespace {

// Dominant eigenvector of a small symmetric matrix, largest-|entry| positive.
Vector dominant_direction(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    Vector v = eig.eigenvectors().col(sym.cols() - 1);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    return v;
}

} // namespace

PlsModel fit_simpls(const Matrix& x, const Matrix& y, int a, const PlsOptions& options) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    const Eigen::Index m = y.cols();
    if (y.rows() != n) {
        throw InvalidArgument("X has " + std::to_string(n) + " rows, Y has " + std::to_string(y.rows()));
    }
    if (n < 2 || p < 1 || m < 1) {
        throw InvalidArgument("PLS needs at least 2 rows, 1 predictor and 1 response");
    }
    if (a < 1 || a > std::min(n - 1, p)) {
        throw InvalidArgument("latent variable count " + std::to_string(a) + " outside [1, " +
                              std::to_string(std::min(n - 1, p)) + "]");
    }

    PlsModel model;
    model.x_scale = options.autoscale_x ? fit_scale(x) : fit_center(x);
    const Matrix xs = apply_scale(model.x_scale, x);
    model.y_mean = y.colwise().mean().transpose();
    const Matrix yc = y.rowwise() - model.y_mean.transpose();
    const double tss = yc.squaredNorm();
    if (!(tss > 0.0)) {
        throw DegenerateData("response has zero variance");
    }

    model.weights.resize(p, a);
    model.x_loadings.resize(p, a);
    model.y_loadings.resize(m, a);
    model.scores.resize(n, a);
    model.r2.resize(a);
    Matrix basis(p, a);  // orthonormal basis of the loadings seen so far

    Matrix s = xs.transpose() * yc;
    const double s0 = s.norm();
    const double xnorm = xs.norm();
    double explained = 0.0;
    for (int i = 0; i < a; ++i) {
        Vector r = m == 1 ? Vector(s.col(0)) : Vector(s * dominant_direction(s.transpose() * s));
        const double rnorm = r.norm();
        if (!(rnorm > 1e-12 * s0)) {
            throw DegenerateData("cross-product matrix exhausted after " + std::to_string(i) +
                                 " latent variables");
        }
        Vector t = xs * r;
        const double tnorm = t.norm();
        if (!(tnorm > 1e-12 * xnorm * rnorm)) {
            throw DegenerateData("score vector collapsed at latent variable " + std::to_string(i + 1));
        }
        t /= tnorm;
        r /= tnorm;
        const Vector pl = xs.transpose() * t;
        const Vector q = yc.transpose() * t;

        Vector v = pl;
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < i; ++j) v -= basis.col(j) * basis.col(j).dot(v);
        }
        v.normalize();
        s -= v * (v.transpose() * s);

        model.weights.col(i) = r;
        model.x_loadings.col(i) = pl;
        model.y_loadings.col(i) = q;
        model.scores.col(i) = t;
        basis.col(i) = v;
        explained += q.squaredNorm();
        model.r2(i) = std::min(1.0, explained / tss);
    }
    model.coefficients = regression_coefficients(model);
    return model;
}

Matrix regression_coefficients(const PlsModel& model) {
    const Matrix ptw = model.x_loadings.transpose() * model.weights;
    Eigen::JacobiSVD<Matrix> svd(ptw);
    const Vector sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                  : std::numeric_limits<double>::infinity();
    if (!(cond <= 1e12)) {
        throw DegenerateData("P'W is singular (condition number " + std::to_string(cond) +
                             "); latent variables are redundant");
    }
    return model.weights * ptw.partialPivLu().solve(model.y_loadings.transpose());
}

Matrix transform(const PlsModel& model, const Matrix& x) {
    return apply_scale(model.x_scale, x) * model.weights;
}

Matrix predict(const PlsModel& model, const Matrix& x) {
    Matrix out = apply_scale(model.x_scale, x) * model.coefficients;
    out.rowwise() += model.y_mean.transpose();
    return out;
}

DaEncoding encode_da(const std::vector<int>& labels) {
    const std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) {
        throw InvalidArgument("discriminant analysis needs at least 2 classes");
    }
    DaEncoding enc;
    enc.classes.assign(distinct.begin(), distinct.end());
    enc.indicators = indicator_matrix(labels, enc.classes);
    return enc;
}

Matrix indicator_matrix(const std::vector<int>& labels, const std::vector<int>& classes) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()),
                            static_cast<Eigen::Index>(classes.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto it = std::find(classes.begin(), classes.end(), labels[i]);
        if (it == classes.end()) {
            throw InvalidArgument("label " + std::to_string(labels[i]) + " is not a known class");
        }
        y(static_cast<Eigen::Index>(i), it - classes.begin()) = 1.0;
    }
    return y;
}

std::vector<int> decode_da(const Matrix& predicted, const std::vector<int>& classes) {
    if (predicted.cols() != static_cast<Eigen::Index>(classes.size())) {
        throw InvalidArgument("prediction has " + std::to_string(predicted.cols()) +
                              " columns for " + std::to_string(classes.size()) + " classes");
    }
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(predicted.rows()));
    for (Eigen::Index i = 0; i < predicted.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < predicted.cols(); ++j) {
            if (predicted(i, j) > predicted(i, best)) best = j;
        }
        out.push_back(classes[static_cast<std::size_t>(best)]);
    }
    return out;
}

} // namespace spectral_sift
