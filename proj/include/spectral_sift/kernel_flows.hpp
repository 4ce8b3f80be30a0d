#pragma once

#include "spectral_sift/kernel.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace spectral_sift {

/// Kernel Flows settings. Defaults: learning rate 0.1, Polyak momentum,
/// 150 iterations of 20 sub-samplings each, batches of 50% of the rows.
struct KfConfig {
    double learning_rate = 0.1;
    double momentum = 0.9;
    int iterations = 150;
    int subsamplings_per_iter = 20;
    double batch_ratio = 0.5;
    std::uint64_t seed = 0;
    /// Latent variables used while learning the kernel; 0 means the largest
    /// entry of the latent-variable grid.
    int flow_components = 0;
    /// Central finite-difference step in log-lengthscale.
    double fd_step = 1e-4;
    /// Largest change of log-lengthscale in one iteration. Guards against
    /// the occasional huge difference quotient where the fit changes rank.
    double max_log_step = 0.5;

    void validate() const;
};

/// Row indices of one Kernel Flows draw: a batch and a half of it.
struct KfSample {
    std::vector<int> batch;
    std::vector<int> half;
};

/**
 * The Kernel Flows objective on a fixed training set.
 *
 * For a batch B and a half H of it, kernel PLS models are fitted on B and on
 * H; both predict every row of B, and
 *     rho = |Y_B - Y_H|^2 / |Y_B|^2
 * where Y_B, Y_H are the two indicator prediction matrices. Pairwise squared
 * distances are computed once so each evaluation only re-applies the kernel.
 */
class KfObjective {
public:
    KfObjective(Matrix x, std::vector<int> labels);

    /// Draws a batch of round(ratio * n) rows and a half of it such that each
    /// class appears in both; redraws up to 100 times before failing.
    KfSample draw(std::mt19937_64& rng, double batch_ratio) const;

    double loss(const KernelSpec& spec, int components, const KfSample& sample) const;

    /// d rho / d log(lengthscale) by central differences with `step`.
    double gradient(const KernelSpec& spec, int components, const KfSample& sample, double step) const;

    double median_distance() const { return median_distance_; }
    const Matrix& x() const { return x_; }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<int>& classes() const { return classes_; }

private:
    Matrix x_;
    std::vector<int> labels_;
    std::vector<int> classes_;
    Matrix indicators_;
    Matrix d2_;
    double median_distance_ = 1.0;
};

struct KfResult {
    KernelSpec kernel;
    /// Chosen latent-variable count.
    int components = 0;
    /// Mean rho per iteration, evaluated at the lengthscale of that iteration.
    std::vector<double> loss_trace;
    std::vector<double> lengthscale_trace;
    /// Full-data training R^2 for each entry of the latent-variable grid.
    std::vector<int> grid;
    std::vector<double> grid_r2;
    int skipped_evaluations = 0;
    bool clamped = false;
};

/**
 * Learns log(lengthscale) by stochastic gradient descent with Polyak
 * momentum on the averaged finite-difference gradient of rho, clamping the
 * lengthscale to [1e-4, 1e4] x the median pairwise distance and each update
 * to `max_log_step`. Afterwards picks the smallest grid entry whose full-data
 * training R^2 is within 1% of the best one; entries beyond the number of
 * latent variables the full data supports are dropped.
 *
 * Sub-samplings whose fit degenerates are skipped and counted; an iteration
 * in which all of them fail raises ModelQualityError.
 */
KfResult kf_optimize(const Matrix& x, const std::vector<int>& labels, const KernelSpec& initial,
                     const KfConfig& config, const std::vector<int>& component_grid);

/// Smallest grid entry with r2 >= 0.99 * max(r2).
int pick_components(const std::vector<int>& grid, const std::vector<double>& r2);

} // namespace spectral_sift
