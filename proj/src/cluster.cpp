#include "spectral_sift/cluster.hpp"

#include "spectral_sift/specdata.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <random>

namespace spectral_sift {

namespace {

int count_distinct_rows(const Matrix& x) {
    std::vector<int> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](int a, int b) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
        }
        return false;
    };
    std::sort(order.begin(), order.end(), less);
    int distinct = order.empty() ? 0 : 1;
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (less(order[i - 1], order[i])) ++distinct;
    }
    return distinct;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

bool is_bee(std::uint8_t label) { return label == kBeeBody || label == kBeeWing; }

} // namespace

Matrix kmeanspp_init(const Matrix& x, int k, std::uint64_t seed) {
    if (k < 1) {
        throw InvalidArgument("k must be >= 1");
    }
    if (k > x.rows() || k > count_distinct_rows(x)) {
        throw InvalidArgument("k = " + std::to_string(k) + " exceeds the number of distinct rows");
    }
    std::mt19937_64 rng(seed);
    const Eigen::Index n = x.rows();
    Matrix centroids(k, x.cols());
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    centroids.row(0) = x.row(first(rng));
    Vector d2 = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        std::discrete_distribution<Eigen::Index> pick(d2.data(), d2.data() + n);
        const Eigen::Index chosen = pick(rng);
        centroids.row(c) = x.row(chosen);
        d2 = d2.cwiseMin((x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }
    return centroids;
}

std::vector<int> nearest_centroid(const Matrix& centroids, const Matrix& x) {
    if (x.cols() != centroids.cols()) {
        throw InvalidArgument("data has " + std::to_string(x.cols()) + " columns, centroids have " +
                              std::to_string(centroids.cols()));
    }
    std::vector<int> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
            const double d = (x.row(i) - centroids.row(c)).squaredNorm();
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        out[static_cast<std::size_t>(i)] = arg;
    }
    return out;
}

KMeansResult lloyd(const Matrix& x, Matrix centroids, int max_iter, double tol) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = centroids.rows();
    KMeansResult res;
    auto assign_step = [&]() {
        res.assignment = nearest_centroid(centroids, x);
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            inertia += (x.row(i) - centroids.row(res.assignment[static_cast<std::size_t>(i)])).squaredNorm();
        }
        res.inertia = inertia;
        res.inertia_trace.push_back(inertia);
    };
    for (int it = 0; it < max_iter; ++it) {
        assign_step();
        ++res.iterations;
        Matrix updated = Matrix::Zero(k, x.cols());
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int c = res.assignment[static_cast<std::size_t>(i)];
            updated.row(c) += x.row(i);
            ++counts[static_cast<std::size_t>(c)];
        }
        std::vector<bool> taken(static_cast<std::size_t>(n), false);
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                updated.row(c) /= counts[static_cast<std::size_t>(c)];
                continue;
            }
            // Empty: move to the point worst served by its current centroid.
            double worst = -1.0;
            Eigen::Index arg = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (taken[static_cast<std::size_t>(i)]) continue;
                const double d =
                    (x.row(i) - centroids.row(res.assignment[static_cast<std::size_t>(i)])).squaredNorm();
                if (d > worst) {
                    worst = d;
                    arg = i;
                }
            }
            taken[static_cast<std::size_t>(arg)] = true;
            updated.row(c) = x.row(arg);
        }
        const double shift = (updated - centroids).rowwise().norm().maxCoeff();
        centroids = std::move(updated);
        if (shift < tol) break;
    }
    assign_step();
    res.centroids = std::move(centroids);
    return res;
}

KMeansResult kmeans_fit(const Matrix& x, int k, std::uint64_t seed, int max_iter, double tol) {
    return lloyd(x, kmeanspp_init(x, k, seed), max_iter, tol);
}

std::string to_string(ClusterClass c) {
    switch (c) {
    case ClusterClass::Mite: return "mite";
    case ClusterClass::Bee: return "bee";
    case ClusterClass::Other: return "other";
    }
    return "other";
}

ClusterClass cluster_class_from_string(const std::string& name) {
    if (name == "mite") return ClusterClass::Mite;
    if (name == "bee") return ClusterClass::Bee;
    if (name == "other") return ClusterClass::Other;
    throw FormatError("unknown cluster class '" + name + "'");
}

MiteConfusion mite_confusion(const std::vector<ClusterClass>& predicted,
                             const std::vector<std::uint8_t>& labels) {
    if (predicted.size() != labels.size()) {
        throw InvalidArgument("prediction and label counts differ");
    }
    MiteConfusion out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kUnlabeled) continue;
        const bool says_mite = predicted[i] == ClusterClass::Mite;
        if (labels[i] == kMite && !says_mite) ++out.missed_mites;
        if (labels[i] != kMite && says_mite) ++out.false_alarms;
    }
    return out;
}

std::vector<ClusterClass> map_clusters(const std::vector<int>& assignment, int k,
                                       const std::vector<std::uint8_t>& labels) {
    if (assignment.size() != labels.size()) {
        throw InvalidArgument("assignment and label counts differ");
    }
    std::vector<int> mites(static_cast<std::size_t>(k), 0);
    std::vector<int> bees(static_cast<std::size_t>(k), 0);
    std::vector<int> labeled(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto c = static_cast<std::size_t>(assignment[i]);
        if (labels[i] == kUnlabeled) continue;
        ++labeled[c];
        if (labels[i] == kMite) ++mites[c];
        if (is_bee(labels[i])) ++bees[c];
    }
    std::vector<ClusterClass> out(static_cast<std::size_t>(k), ClusterClass::Other);
    for (std::size_t c = 0; c < out.size(); ++c) {
        if (mites[c] > 0) {
            out[c] = ClusterClass::Mite;
        } else if (bees[c] > 0 && 2 * bees[c] > labeled[c]) {
            out[c] = ClusterClass::Bee;
        }
    }
    return out;
}

SupervisedFit fit_supervised(const Matrix& x, const std::vector<std::uint8_t>& labels,
                             const SupervisedOptions& options) {
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
        throw InvalidArgument("label count does not match rows");
    }
    const bool has_mite = std::find(labels.begin(), labels.end(), kMite) != labels.end();
    const bool has_bee = std::any_of(labels.begin(), labels.end(), is_bee);
    if (!has_mite || !has_bee) {
        throw InvalidArgument("supervised clustering needs labeled mite and bee pixels");
    }
    if (options.k0 < 2 || options.k_max < options.k0) {
        throw InvalidArgument("cluster range must satisfy 2 <= k0 <= k_max");
    }
    if (options.restarts < 1) {
        throw InvalidArgument("restarts must be >= 1");
    }

    ClusterDiagnostics diag;
    for (int k = options.k0; k <= options.k_max; ++k) {
        if (k > x.rows()) break;
        KMeansResult best;
        bool have = false;
        const std::uint64_t k_seed = options.seed + static_cast<std::uint64_t>(k);
        for (int r = 0; r < options.restarts; ++r) {
            KMeansResult run;
            try {
                run = kmeans_fit(x, k, derive_seed(k_seed, static_cast<std::uint64_t>(r)),
                                 options.max_iter, options.tol);
            } catch (const InvalidArgument&) {
                break;  // fewer distinct rows than k
            }
            if (!have || run.inertia < best.inertia) {
                best = std::move(run);
                have = true;
            }
        }
        if (!have) break;
        const auto classes = map_clusters(best.assignment, k, labels);
        std::vector<ClusterClass> predicted;
        predicted.reserve(best.assignment.size());
        for (int c : best.assignment) predicted.push_back(classes[static_cast<std::size_t>(c)]);
        const MiteConfusion conf = mite_confusion(predicted, labels);
        diag.attempts.push_back({k, conf.false_alarms, conf.missed_mites, best.inertia});
        if (conf.false_alarms == 0 && conf.missed_mites == 0) {
            diag.final_k = k;
            diag.final_inertia = best.inertia;
            diag.success = true;
            return {ClusterModel{std::move(best.centroids), classes}, std::move(diag)};
        }
    }
    throw EscalationFailure("no cluster count in [" + std::to_string(options.k0) + ", " +
                                std::to_string(options.k_max) + "] separates mites without error",
                            std::move(diag));
}

Assignment assign(const ClusterModel& model, const Matrix& x) {
    Assignment out;
    out.cluster = nearest_centroid(model.centroids, x);
    out.cls.reserve(out.cluster.size());
    for (int c : out.cluster) out.cls.push_back(model.class_of_cluster[static_cast<std::size_t>(c)]);
    return out;
}

} // namespace spectral_sift
