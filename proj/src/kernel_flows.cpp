#include "spectral_sift/kernel_flows.hpp"

#include "spectral_sift/error.hpp"
#include "spectral_sift/pls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace spectral_sift {

namespace {

Matrix sub_block(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
        }
    }
    return out;
}

bool covers_all(const std::vector<int>& idx, const std::vector<int>& labels, std::size_t nclasses) {
    std::set<int> seen;
    for (int i : idx) seen.insert(labels[static_cast<std::size_t>(i)]);
    return seen.size() == nclasses;
}

} // namespace

void KfConfig::validate() const {
    if (!(batch_ratio > 0.0 && batch_ratio < 1.0)) {
        throw InvalidArgument("batch ratio must lie in (0, 1)");
    }
    if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
    if (subsamplings_per_iter < 1) throw InvalidArgument("sub-samplings per iteration must be >= 1");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0, 1)");
    if (!(fd_step > 0.0)) throw InvalidArgument("finite-difference step must be positive");
    if (flow_components < 0) throw InvalidArgument("flow components must be >= 0");
    if (!(max_log_step > 0.0)) throw InvalidArgument("maximum log-lengthscale step must be positive");
}

KfObjective::KfObjective(Matrix x, std::vector<int> labels)
    : x_(std::move(x)), labels_(std::move(labels)) {
    if (x_.rows() != static_cast<Eigen::Index>(labels_.size())) {
        throw InvalidArgument("label count does not match rows");
    }
    const DaEncoding enc = encode_da(labels_);
    classes_ = enc.classes;
    indicators_ = enc.indicators;
    d2_ = squared_distances(x_, x_);
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(x_.rows() * (x_.rows() - 1) / 2));
    for (Eigen::Index j = 0; j < x_.rows(); ++j) {
        for (Eigen::Index i = j + 1; i < x_.rows(); ++i) dist.push_back(std::sqrt(d2_(i, j)));
    }
    if (!dist.empty()) {
        const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
        std::nth_element(dist.begin(), mid, dist.end());
        median_distance_ = *mid;
    }
    if (!(median_distance_ > 0.0)) {
        throw DegenerateData("all training rows coincide");
    }
}

KfSample KfObjective::draw(std::mt19937_64& rng, double batch_ratio) const {
    const auto n = static_cast<int>(x_.rows());
    const int nb = std::max(2, static_cast<int>(std::lround(batch_ratio * n)));
    const int nh = nb / 2;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        KfSample s;
        s.batch.assign(perm.begin(), perm.begin() + nb);
        s.half.assign(s.batch.begin(), s.batch.begin() + nh);
        if (covers_all(s.half, labels_, classes_.size())) {
            std::sort(s.batch.begin(), s.batch.end());
            std::sort(s.half.begin(), s.half.end());
            return s;
        }
    }
    throw InvalidArgument("could not draw a half-batch containing every class; classes too unbalanced");
}

double KfObjective::loss(const KernelSpec& spec, int components, const KfSample& sample) const {
    const Matrix k_batch = kernel_from_sq_distances(spec, sub_block(d2_, sample.batch, sample.batch));
    const Matrix k_half = kernel_from_sq_distances(spec, sub_block(d2_, sample.half, sample.half));
    const Matrix k_cross = kernel_from_sq_distances(spec, sub_block(d2_, sample.batch, sample.half));
    const Matrix y_batch = select_rows(indicators_, sample.batch);
    const Matrix y_half = select_rows(indicators_, sample.half);

    auto fit_predict = [&](const Matrix& k_train, const Matrix& y, const Matrix& k_eval) {
        const KernelCentering stats = fit_centering(k_train);
        const Vector y_mean = y.colwise().mean().transpose();
        const Matrix yc = y.rowwise() - y_mean.transpose();
        const KernelSimplsFactors f = kernel_simpls(center_train(k_train, stats), yc, components);
        Matrix pred = center_cross(k_eval, stats) * f.dual;
        pred.rowwise() += y_mean.transpose();
        return pred;
    };
    const Matrix pred_full = fit_predict(k_batch, y_batch, k_batch);
    const Matrix pred_half = fit_predict(k_half, y_half, k_cross);
    const double denom = pred_full.squaredNorm();
    const double rho = (pred_full - pred_half).squaredNorm() / denom;
    if (!std::isfinite(rho)) {
        throw DegenerateData("non-finite Kernel Flows loss");
    }
    return rho;
}

double KfObjective::gradient(const KernelSpec& spec, int components, const KfSample& sample,
                             double step) const {
    KernelSpec up = spec;
    KernelSpec down = spec;
    up.lengthscale = spec.lengthscale * std::exp(step);
    down.lengthscale = spec.lengthscale * std::exp(-step);
    return (loss(up, components, sample) - loss(down, components, sample)) / (2.0 * step);
}

int pick_components(const std::vector<int>& grid, const std::vector<double>& r2) {
    if (grid.empty() || grid.size() != r2.size()) {
        throw InvalidArgument("latent-variable grid and R^2 list differ");
    }
    const double best = *std::max_element(r2.begin(), r2.end());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (r2[i] >= 0.99 * best) return grid[i];
    }
    return grid.back();
}

KfResult kf_optimize(const Matrix& x, const std::vector<int>& labels, const KernelSpec& initial,
                     const KfConfig& config, const std::vector<int>& component_grid) {
    config.validate();
    initial.validate();
    if (initial.family == KernelFamily::Linear) {
        throw InvalidArgument("the linear kernel has no parameter to learn");
    }
    std::vector<int> grid = component_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty() || grid.front() < 1) {
        throw InvalidArgument("latent-variable grid must hold positive counts");
    }

    const KfObjective objective(x, labels);
    const auto n = static_cast<int>(x.rows());
    const int nb = std::max(2, static_cast<int>(std::lround(config.batch_ratio * n)));
    const int nh = nb / 2;
    int flow_a = config.flow_components > 0 ? config.flow_components : grid.back();
    flow_a = std::min(flow_a, nh - 1);
    if (flow_a < 1) {
        throw InvalidArgument("half-batches of " + std::to_string(nh) + " rows are too small");
    }

    const double log_lo = std::log(1e-4 * objective.median_distance());
    const double log_hi = std::log(1e4 * objective.median_distance());
    double theta = std::clamp(std::log(initial.lengthscale), log_lo, log_hi);
    double velocity = 0.0;

    KfResult result;
    result.kernel = initial;
    result.clamped = theta != std::log(initial.lengthscale);
    std::mt19937_64 rng(config.seed);
    for (int it = 0; it < config.iterations; ++it) {
        KernelSpec spec = initial;
        spec.lengthscale = std::exp(theta);
        double grad_sum = 0.0;
        double loss_sum = 0.0;
        int used = 0;
        for (int s = 0; s < config.subsamplings_per_iter; ++s) {
            const KfSample sample = objective.draw(rng, config.batch_ratio);
            try {
                const double g = objective.gradient(spec, flow_a, sample, config.fd_step);
                const double l = objective.loss(spec, flow_a, sample);
                // Step on d log(rho) so the learning rate does not depend on
                // the magnitude of rho.
                grad_sum += g / l;
                loss_sum += l;
                ++used;
            } catch (const DegenerateData&) {
                ++result.skipped_evaluations;
            }
        }
        if (used == 0) {
            throw ModelQualityError("every Kernel Flows evaluation degenerated at iteration " +
                                    std::to_string(it) + " (lengthscale " +
                                    std::to_string(spec.lengthscale) + ")");
        }
        result.loss_trace.push_back(loss_sum / used);
        result.lengthscale_trace.push_back(spec.lengthscale);
        velocity = config.momentum * velocity - config.learning_rate * (grad_sum / used);
        velocity = std::clamp(velocity, -config.max_log_step, config.max_log_step);
        theta += velocity;
        if (theta < log_lo || theta > log_hi) {
            theta = std::clamp(theta, log_lo, log_hi);
            velocity = 0.0;
            result.clamped = true;
        }
    }
    result.kernel.lengthscale = std::exp(theta);

    // Latent-variable choice on the full data with the learned kernel.
    int a_max = std::min(grid.back(), n - 1);
    const Matrix k = kernel_matrix(result.kernel, x, x);
    const KernelCentering stats = fit_centering(k);
    const Matrix kc = center_train(k, stats);
    const DaEncoding enc = encode_da(labels);
    const Matrix yc = enc.indicators.rowwise() - enc.indicators.colwise().mean();
    KernelSimplsFactors f;
    for (;; --a_max) {
        try {
            f = kernel_simpls(kc, yc, a_max);
            break;
        } catch (const DegenerateData&) {
            if (a_max <= 1) throw;
        }
    }
    for (int a : grid) {
        if (a > a_max) break;
        result.grid.push_back(a);
        result.grid_r2.push_back(f.r2(a - 1));
    }
    result.components = pick_components(result.grid, result.grid_r2);
    return result;
}

} // namespace spectral_sift
