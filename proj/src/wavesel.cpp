#include "spectral_sift/wavesel.hpp"

#include "spectral_sift/error.hpp"
#include "spectral_sift/pls.hpp"
#include "spectral_sift/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace spectral_sift {

namespace {

void check_response(const Matrix& x, const Vector& y) {
    if (x.rows() != y.size()) {
        throw InvalidArgument("X has " + std::to_string(x.rows()) + " rows, y has " +
                              std::to_string(y.size()));
    }
    if (x.rows() < 2) {
        throw InvalidArgument("band selection needs at least 2 rows");
    }
}

} // namespace

std::string to_string(SelectionMethod method) {
    return method == SelectionMethod::R2Forward ? "r2" : "covproc";
}

BandList exclude_tail(int bands, int n_tail) {
    if (n_tail < 0 || n_tail >= bands) {
        throw InvalidArgument("cannot exclude " + std::to_string(n_tail) + " of " +
                              std::to_string(bands) + " bands");
    }
    BandList out(static_cast<std::size_t>(n_tail));
    std::iota(out.begin(), out.end(), bands - n_tail);
    return out;
}

BandList usable_bands(int bands, const BandList& excluded) {
    const std::set<int> skip(excluded.begin(), excluded.end());
    BandList out;
    for (int b = 0; b < bands; ++b) {
        if (!skip.contains(b)) out.push_back(b);
    }
    return out;
}

Vector column_correlations(const Matrix& x, const Vector& y) {
    check_response(x, y);
    const Vector yc = y.array() - y.mean();
    const double sy = yc.norm();
    if (sy == 0.0) {
        throw InvalidArgument("response has a single value");
    }
    Vector rho(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const Vector xc = x.col(j).array() - x.col(j).mean();
        const double sx = xc.norm();
        rho(j) = sx > 0.0 ? std::min(1.0, std::abs(xc.dot(yc)) / (sx * sy)) : 0.0;
    }
    return rho;
}

BandList init_by_correlation(const Matrix& x, const Vector& y, int m, const BandList& excluded) {
    const BandList usable = usable_bands(static_cast<int>(x.cols()), excluded);
    if (m < 0 || m >= static_cast<int>(usable.size())) {
        throw InvalidArgument("cannot initialize with " + std::to_string(m) + " of " +
                              std::to_string(usable.size()) + " usable bands");
    }
    const Vector rho = column_correlations(x, y);
    BandList order = usable;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rho(a) > rho(b); });
    order.resize(static_cast<std::size_t>(m));
    return order;
}

double pls_r2(const Matrix& x, const Vector& y, const BandList& columns, int max_components) {
    const Matrix xs = select_columns(x, columns);
    const int a = std::min<int>({static_cast<int>(columns.size()), max_components,
                                 static_cast<int>(x.rows()) - 1});
    const double tss = (y.array() - y.mean()).square().sum();
    // When the X-y covariance is used up before `a` latent variables, the
    // extra ones cannot add anything: fall back to the largest count that fits.
    for (int lv = a;; --lv) {
        try {
            const PlsModel model = fit_simpls(xs, y, lv);
            const Vector yhat = predict(model, xs).col(0);
            return 1.0 - (y - yhat).squaredNorm() / tss;
        } catch (const DegenerateData&) {
            if (lv <= 1) throw;
        }
    }
}

SelectionReport r2_forward_select(const Matrix& x, const Vector& y, const R2ForwardOptions& options) {
    check_response(x, y);
    const auto bands = static_cast<int>(x.cols());
    const BandList usable = usable_bands(bands, options.excluded);
    if (options.target < 1 || options.target > static_cast<int>(usable.size())) {
        throw InvalidArgument("target band count " + std::to_string(options.target) + " outside [1, " +
                              std::to_string(usable.size()) + "]");
    }
    if (options.max_components < 1) {
        throw InvalidArgument("inner PLS needs at least one latent variable");
    }
    const std::set<int> usable_set(usable.begin(), usable.end());
    std::set<int> chosen;
    for (int b : options.initial) {
        if (!usable_set.contains(b)) {
            throw InvalidArgument("initial band " + std::to_string(b) + " is excluded or out of range");
        }
        if (!chosen.insert(b).second) {
            throw InvalidArgument("initial band " + std::to_string(b) + " listed twice");
        }
    }
    if (static_cast<int>(options.initial.size()) > options.target) {
        throw InvalidArgument("initial set is larger than the target");
    }
    if (!((y.array() - y.mean()).square().sum() > 0.0)) {
        throw InvalidArgument("response has zero variance");
    }

    std::vector<bool> constant(static_cast<std::size_t>(bands));
    for (int b = 0; b < bands; ++b) {
        constant[static_cast<std::size_t>(b)] = x.col(b).maxCoeff() == x.col(b).minCoeff();
    }

    SelectionReport report;
    report.method = SelectionMethod::R2Forward;
    report.excluded = options.excluded;
    std::sort(report.excluded.begin(), report.excluded.end());
    report.initial = options.initial;
    report.selected = options.initial;
    report.initial_r2 = std::numeric_limits<double>::quiet_NaN();
    if (!report.initial.empty()) {
        try {
            report.initial_r2 = pls_r2(x, y, report.initial, options.max_components);
        } catch (const DegenerateData& e) {
            report.warnings.push_back(std::string("initial set: ") + e.what());
        }
        if (options.stop && options.stop(report.selected)) {
            report.stopped_early = true;
            return report;
        }
    }

    while (static_cast<int>(report.selected.size()) < options.target) {
        double best = -std::numeric_limits<double>::infinity();
        int best_band = -1;
        BandList trial = report.selected;
        trial.push_back(-1);
        for (int b : usable) {
            if (chosen.contains(b)) continue;
            if (constant[static_cast<std::size_t>(b)]) {
                report.warnings.push_back("band " + std::to_string(b) + " skipped at step " +
                                          std::to_string(report.selected.size() + 1) + ": constant band");
                continue;
            }
            trial.back() = b;
            double r2 = std::numeric_limits<double>::quiet_NaN();
            try {
                r2 = pls_r2(x, y, trial, options.max_components);
            } catch (const DegenerateData&) {
            }
            if (!std::isfinite(r2)) {
                report.warnings.push_back("band " + std::to_string(b) + " skipped at step " +
                                          std::to_string(report.selected.size() + 1) +
                                          ": degenerate fit");
                continue;
            }
            if (r2 > best) {
                best = r2;
                best_band = b;
            }
        }
        if (best_band < 0) {
            report.warnings.push_back("no usable candidate left at step " +
                                      std::to_string(report.selected.size() + 1));
            break;
        }
        report.selected.push_back(best_band);
        chosen.insert(best_band);
        report.r2_trace.push_back(best);
        if (options.stop && options.stop(report.selected)) {
            report.stopped_early = static_cast<int>(report.selected.size()) < options.target;
            break;
        }
    }
    return report;
}

double covproc_alpha(const Vector& y, const Vector& t) {
    const double tt = t.squaredNorm();
    if (!(tt > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::abs(y.dot(t)) / tt;
}

CovprocState covproc_prepare(const Matrix& x, const Vector& y, const CovprocOptions& options) {
    check_response(x, y);
    const BandList usable = usable_bands(static_cast<int>(x.cols()), options.excluded);
    if (usable.empty()) {
        throw InvalidArgument("every band is excluded");
    }
    CovprocState s;
    s.x = select_columns(x, usable);
    s.y = y;
    if (options.standardize) {
        s.x = apply_scale(fit_scale(s.x), s.x);
        s.y = y.array() - y.mean();
    }
    return s;
}

CovprocStep covproc_step(CovprocState& state, const BandList& usable, int number) {
    Matrix& xw = state.x;
    const Vector& yw = state.y;
    const Eigen::Index nvars = xw.cols();
    if (static_cast<Eigen::Index>(usable.size()) != nvars) {
        throw InvalidArgument("band map does not match the working matrix");
    }
    const Vector w = xw.transpose() * yw;
    std::vector<int> ranking(static_cast<std::size_t>(nvars));
    std::iota(ranking.begin(), ranking.end(), 0);
    std::stable_sort(ranking.begin(), ranking.end(),
                     [&](int a, int b) { return std::abs(w(a)) > std::abs(w(b)); });

    CovprocStep step;
    step.round.number = number;
    Vector t = Vector::Zero(xw.rows());
    int best_len = 0;
    double best_alpha = -1.0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        const int ii = ranking[i];
        t += w(ii) * xw.col(ii);
        const double alpha = covproc_alpha(yw, t);
        step.round.alpha.push_back(alpha);
        if (std::isfinite(alpha) && alpha > best_alpha) {
            best_alpha = alpha;
            best_len = static_cast<int>(i) + 1;
        }
    }
    for (int ii : ranking) step.round.ranking.push_back(usable[static_cast<std::size_t>(ii)]);
    if (best_len == 0) return step;

    Vector chosen_w = Vector::Zero(nvars);
    for (int i = 0; i < best_len; ++i) {
        const int ii = ranking[static_cast<std::size_t>(i)];
        chosen_w(ii) = w(ii);
        step.round.bands.push_back(usable[static_cast<std::size_t>(ii)]);
    }
    step.score = xw * chosen_w;
    const Vector loading = xw.transpose() * step.score / step.score.squaredNorm();
    xw -= step.score * loading.transpose();
    return step;
}

SelectionReport covproc_select(const Matrix& x, const Vector& y, const CovprocOptions& options) {
    if (options.rounds < 1) {
        throw InvalidArgument("COVPROC needs at least one round");
    }
    const BandList usable = usable_bands(static_cast<int>(x.cols()), options.excluded);
    CovprocState state = covproc_prepare(x, y, options);

    SelectionReport report;
    report.method = SelectionMethod::Covproc;
    report.excluded = options.excluded;
    std::sort(report.excluded.begin(), report.excluded.end());
    std::set<int> seen;
    for (int r = 1; r <= options.rounds; ++r) {
        CovprocStep step = covproc_step(state, usable, r);
        if (step.round.bands.empty()) {
            report.warnings.push_back("round " + std::to_string(r) +
                                      ": no covariance left between X and y; stopping");
            break;
        }
        for (int b : step.round.bands) {
            if (seen.insert(b).second) report.selected.push_back(b);
        }
        report.rounds.push_back(std::move(step.round));
    }
    return report;
}

BandList reorder_rounds(const SelectionReport& report, const std::vector<int>& order) {
    BandList out;
    std::set<int> seen;
    for (int number : order) {
        const auto it = std::find_if(report.rounds.begin(), report.rounds.end(),
                                     [&](const CovprocRound& r) { return r.number == number; });
        if (it == report.rounds.end()) {
            throw InvalidArgument("report has no round " + std::to_string(number));
        }
        for (int b : it->bands) {
            if (seen.insert(b).second) out.push_back(b);
        }
    }
    return out;
}

} // namespace spectral_sift
