#include "spectral_sift/kernel.hpp"

#include "spectral_sift/error.hpp"
#include "spectral_sift/pls.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace spectral_sift {

std::string to_string(KernelFamily family) {
    switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Laplacian: return "laplacian";
    case KernelFamily::Matern52: return "matern52";
    case KernelFamily::Cauchy: return "cauchy";
    case KernelFamily::Linear: return "linear";
    }
    return "gaussian";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    std::string lower;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (lower == "gaussian" || lower == "rbf") return KernelFamily::Gaussian;
    if (lower == "laplacian") return KernelFamily::Laplacian;
    if (lower == "matern52" || lower == "matern") return KernelFamily::Matern52;
    if (lower == "cauchy") return KernelFamily::Cauchy;
    if (lower == "linear") return KernelFamily::Linear;
    throw InvalidArgument("unknown kernel family '" + name + "'");
}

void KernelSpec::validate() const {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw InvalidArgument("kernel variance must be positive");
    }
    if (family != KernelFamily::Linear && (!(lengthscale > 0.0) || !std::isfinite(lengthscale))) {
        throw InvalidArgument("kernel lengthscale must be positive");
    }
}

double KernelSpec::value_sq(double r2) const {
    const double l2 = lengthscale * lengthscale;
    switch (family) {
    case KernelFamily::Gaussian: return variance * std::exp(-r2 / (2.0 * l2));
    case KernelFamily::Laplacian: return variance * std::exp(-std::sqrt(r2) / lengthscale);
    case KernelFamily::Matern52: {
        const double s = std::sqrt(5.0 * r2) / lengthscale;
        return variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    case KernelFamily::Cauchy: return variance / (1.0 + r2 / l2);
    case KernelFamily::Linear: break;
    }
    throw InvalidArgument("linear kernel has no distance form");
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw InvalidArgument("kernel inputs differ in column count");
    }
    Matrix d2(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        d2.col(j) = (a.rowwise() - b.row(j)).rowwise().squaredNorm();
    }
    return d2;
}

Matrix kernel_from_sq_distances(const KernelSpec& spec, const Matrix& d2) {
    spec.validate();
    return d2.unaryExpr([&](double r2) { return spec.value_sq(r2); });
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    spec.validate();
    if (a.cols() != b.cols()) {
        throw InvalidArgument("kernel inputs differ in column count");
    }
    if (spec.family == KernelFamily::Linear) {
        return spec.variance * a * b.transpose();
    }
    return kernel_from_sq_distances(spec, squared_distances(a, b));
}

KernelCentering fit_centering(const Matrix& k_train) {
    if (k_train.rows() != k_train.cols() || k_train.rows() < 1) {
        throw InvalidArgument("training kernel must be square and non-empty");
    }
    KernelCentering c;
    c.column_means = k_train.colwise().mean().transpose();
    c.grand_mean = c.column_means.mean();
    return c;
}

Matrix center_train(const Matrix& k_train, const KernelCentering& stats) {
    if (k_train.rows() != stats.column_means.size() || k_train.cols() != stats.column_means.size()) {
        throw InvalidArgument("training kernel does not match centering statistics");
    }
    // Row means equal column means for a symmetric Gram matrix; use the actual
    // row means so the identity holds for any square input.
    const Vector row_means = k_train.rowwise().mean();
    Matrix out = k_train;
    out.rowwise() -= stats.column_means.transpose();
    out.colwise() -= row_means;
    out.array() += stats.grand_mean;
    return out;
}

Matrix center_cross(const Matrix& k_cross, const KernelCentering& stats) {
    if (k_cross.cols() != stats.column_means.size()) {
        throw InvalidArgument("cross kernel has " + std::to_string(k_cross.cols()) +
                              " columns, training set has " + std::to_string(stats.column_means.size()));
    }
    const Vector row_means = k_cross.rowwise().mean();
    Matrix out = k_cross;
    out.rowwise() -= stats.column_means.transpose();
    out.colwise() -= row_means;
    out.array() += stats.grand_mean;
    return out;
}

namespace {

Vector dominant_direction(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    Vector v = eig.eigenvectors().col(sym.cols() - 1);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    return v;
}

} // namespace

KernelSimplsFactors kernel_simpls(const Matrix& kc, const Matrix& yc, int a) {
    const Eigen::Index n = kc.rows();
    const Eigen::Index m = yc.cols();
    if (kc.cols() != n || yc.rows() != n) {
        throw InvalidArgument("kernel and response sizes disagree");
    }
    if (a < 1 || a > n - 1) {
        throw InvalidArgument("latent variable count " + std::to_string(a) + " outside [1, " +
                              std::to_string(n - 1) + "]");
    }
    const double tss = yc.squaredNorm();
    if (!(tss > 0.0)) {
        throw DegenerateData("response has zero variance");
    }
    const double kscale = kc.norm();
    if (!(kscale > 0.0) || !std::isfinite(kscale)) {
        throw DegenerateData("centered kernel matrix vanishes");
    }

    Matrix cs = yc;     // dual coefficients of the cross-product matrix X'Y
    Matrix cr(n, a);    // dual weights
    Matrix q(m, a);
    Matrix cv(n, a);    // dual orthonormal loading basis
    Matrix kcv(n, a);   // K * cv, cached
    KernelSimplsFactors f;
    f.scores.resize(n, a);
    f.r2.resize(a);
    double explained = 0.0;
    double s0 = 0.0;
    for (int i = 0; i < a; ++i) {
        const Matrix kcs = kc * cs;
        const Matrix sts = cs.transpose() * kcs;  // S'S
        if (i == 0) s0 = std::sqrt(std::max(0.0, sts.trace()));
        const Vector dir = m == 1 ? Vector::Ones(1) : dominant_direction(sts);
        Vector r = cs * dir;
        Vector t = kcs * dir;  // K r
        const double rnorm = std::sqrt(std::max(0.0, r.dot(t)));
        if (!(rnorm > 1e-12 * s0)) {
            throw DegenerateData("cross-product exhausted after " + std::to_string(i) + " latent variables");
        }
        const double tnorm = t.norm();
        if (!(tnorm > 1e-12 * std::sqrt(kscale) * rnorm)) {
            throw DegenerateData("score vector collapsed at latent variable " + std::to_string(i + 1));
        }
        t /= tnorm;
        r /= tnorm;
        const Vector qi = yc.transpose() * t;

        // p = Phi' t has dual coefficients t; orthogonalize in the K inner product.
        Vector v = t;
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < i; ++j) v -= cv.col(j) * kcv.col(j).dot(v);
        }
        Vector kv = kc * v;
        const double vnorm = std::sqrt(std::max(0.0, v.dot(kv)));
        if (!(vnorm > 0.0)) {
            throw DegenerateData("loading collapsed at latent variable " + std::to_string(i + 1));
        }
        v /= vnorm;
        kv /= vnorm;
        cs -= v * (kv.transpose() * cs);

        cr.col(i) = r;
        q.col(i) = qi;
        cv.col(i) = v;
        kcv.col(i) = kv;
        f.scores.col(i) = t;
        explained += qi.squaredNorm();
        f.r2(i) = std::min(1.0, explained / tss);
    }
    f.dual = cr * q.transpose();
    return f;
}

KernelPlsModel fit_kernel_pls(const Matrix& x, const std::vector<int>& labels,
                              const KernelSpec& spec, int a) {
    if (x.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw InvalidArgument("label count does not match rows");
    }
    spec.validate();
    const DaEncoding enc = encode_da(labels);
    const Matrix k = kernel_matrix(spec, x, x);
    KernelPlsModel model;
    model.kernel = spec;
    model.support = x;
    model.centering = fit_centering(k);
    model.y_mean = enc.indicators.colwise().mean().transpose();
    model.components = a;
    model.classes = enc.classes;
    const Matrix kc = center_train(k, model.centering);
    if (!(kc.norm() > 1e-12 * std::max(1.0, k.norm()))) {
        throw DegenerateData("kernel matrix is degenerate: all rows alike in feature space");
    }
    const Matrix yc = enc.indicators.rowwise() - model.y_mean.transpose();
    KernelSimplsFactors f = kernel_simpls(kc, yc, a);
    model.dual = std::move(f.dual);
    model.r2 = std::move(f.r2);
    return model;
}

Matrix predict_indicators(const KernelPlsModel& model, const Matrix& x) {
    if (x.cols() != model.support.cols()) {
        throw InvalidArgument("input has " + std::to_string(x.cols()) + " bands, model expects " +
                              std::to_string(model.support.cols()));
    }
    Matrix out = center_cross(kernel_matrix(model.kernel, x, model.support), model.centering) * model.dual;
    out.rowwise() += model.y_mean.transpose();
    return out;
}

Classification classify(const KernelPlsModel& model, const Matrix& x) {
    Classification c;
    c.scores = predict_indicators(model, x);
    c.labels = decode_da(c.scores, model.classes);
    return c;
}

} // namespace spectral_sift
