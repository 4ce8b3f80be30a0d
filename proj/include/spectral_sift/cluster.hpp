#pragma once

#include "spectral_sift/error.hpp"
#include "spectral_sift/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spectral_sift {

/// K-means++ seeding: first centroid a uniformly drawn row, each further one
/// drawn with probability proportional to its squared distance from the
/// nearest centroid chosen so far. Fails when k exceeds the number of
/// distinct rows.
Matrix kmeanspp_init(const Matrix& x, int k, std::uint64_t seed);

struct KMeansResult {
    Matrix centroids;
    std::vector<int> assignment;
    double inertia = 0.0;
    /// Inertia after every assignment step.
    std::vector<double> inertia_trace;
    int iterations = 0;
};

/// Lloyd iterations from the given centroids until no centroid moves by
/// `tol` or more, or `max_iter` is reached. An empty cluster is re-seeded
/// at the point farthest from its current centroid.
KMeansResult lloyd(const Matrix& x, Matrix centroids, int max_iter = 300, double tol = 1e-6);

KMeansResult kmeans_fit(const Matrix& x, int k, std::uint64_t seed, int max_iter = 300,
                        double tol = 1e-6);

/// Nearest centroid by squared Euclidean distance; ties to the lower index.
std::vector<int> nearest_centroid(const Matrix& centroids, const Matrix& x);

enum class ClusterClass { Mite, Bee, Other };

std::string to_string(ClusterClass c);
ClusterClass cluster_class_from_string(const std::string& name);

struct ClusterModel {
    Matrix centroids;  // k x bands, reconstructed-scaled space
    std::vector<ClusterClass> class_of_cluster;

    int k() const { return static_cast<int>(centroids.rows()); }
};

struct ClusterAttempt {
    int k = 0;
    int false_alarms = 0;
    int missed_mites = 0;
    double inertia = 0.0;
};

struct ClusterDiagnostics {
    std::vector<ClusterAttempt> attempts;
    int final_k = 0;
    double final_inertia = 0.0;
    bool success = false;
};

/// Raised when no k up to k_max meets the mite criterion.
class EscalationFailure : public ModelQualityError {
public:
    EscalationFailure(const std::string& what, ClusterDiagnostics diagnostics)
        : ModelQualityError(what), diagnostics_(std::move(diagnostics)) {}
    const ClusterDiagnostics& diagnostics() const { return diagnostics_; }

private:
    ClusterDiagnostics diagnostics_;
};

struct SupervisedOptions {
    int k0 = 2;
    int k_max = 12;
    std::uint64_t seed = 0;
    /// K-means++ restarts per k; the lowest-inertia run is kept.
    int restarts = 4;
    int max_iter = 300;
    double tol = 1e-6;
};

struct SupervisedFit {
    ClusterModel model;
    ClusterDiagnostics diagnostics;
};

/// Mite-level confusion counts of predicted classes against mask labels.
/// A false alarm is a labeled non-mite pixel predicted as mite; a missed
/// mite is a mite pixel predicted as anything else. Unlabeled pixels are
/// ignored.
struct MiteConfusion {
    int false_alarms = 0;
    int missed_mites = 0;
};

MiteConfusion mite_confusion(const std::vector<ClusterClass>& predicted,
                             const std::vector<std::uint8_t>& labels);

/// Cluster -> class mapping: clusters holding any labeled mite pixel are
/// 'mite'; of the rest, those whose labeled pixels are mostly bee body or
/// wing are 'bee'; everything else is 'other'.
std::vector<ClusterClass> map_clusters(const std::vector<int>& assignment, int k,
                                       const std::vector<std::uint8_t>& labels);

/**
 * Escalating K-means: for k = k0..k_max (seeded with seed + k), clusters the
 * reconstructed spectra, maps clusters to classes and accepts the first k
 * with no false alarm and no missed mite. Throws EscalationFailure with the
 * per-k diagnostics when none qualifies.
 */
SupervisedFit fit_supervised(const Matrix& x, const std::vector<std::uint8_t>& labels,
                             const SupervisedOptions& options = {});

struct Assignment {
    std::vector<int> cluster;
    std::vector<ClusterClass> cls;
};

Assignment assign(const ClusterModel& model, const Matrix& x);

} // namespace spectral_sift
