#pragma once

#include "spectral_sift/linalg.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spectral_sift {

enum class SelectionMethod { R2Forward, Covproc };

std::string to_string(SelectionMethod method);

/// One COVPROC round: the bands it contributed, in weight order, and the
/// evaluation metric for every prefix length (NaN where the prefix gives a
/// zero score vector).
struct CovprocRound {
    int number = 0;  // 1-based
    BandList bands;
    std::vector<double> alpha;
    /// Band order by |weight| that the prefixes follow.
    BandList ranking;
};

struct SelectionReport {
    SelectionMethod method = SelectionMethod::R2Forward;
    BandList excluded;
    /// Unique band indices in selection order.
    BandList selected;
    /// R2Forward: bands supplied by the initializer, and training R^2 of that
    /// set (NaN when empty).
    BandList initial;
    double initial_r2 = 0.0;
    /// R2Forward: training R^2 after each added band.
    std::vector<double> r2_trace;
    /// Covproc: every round, including ones a pipeline may later drop.
    std::vector<CovprocRound> rounds;
    /// Set when a stop callback ended the selection early.
    bool stopped_early = false;
    std::vector<std::string> warnings;
};

/// The last `n_tail` band indices; rejects n_tail >= bands.
BandList exclude_tail(int bands, int n_tail = 10);

/// Bands not in `excluded`, ascending.
BandList usable_bands(int bands, const BandList& excluded);

/// |Pearson correlation| of each column with y; constant columns get 0.
Vector column_correlations(const Matrix& x, const Vector& y);

/// Top-m usable bands by |rho(x_i, y)|, ties to the lower index. Rejects
/// m >= number of usable bands.
BandList init_by_correlation(const Matrix& x, const Vector& y, int m = 3, const BandList& excluded = {});

/// Returns true when selection should stop with the current band set.
using StopTest = std::function<bool(const BandList& selected)>;

struct R2ForwardOptions {
    int target = 12;       // V: total bands wanted, including the initial set
    BandList initial;      // s0
    BandList excluded;
    int max_components = 5;  // inner PLS uses min(|selection|, max_components)
    StopTest stop;           // checked after the initial set and each addition
};

/// Training R^2 of a PLS model on the given columns with
/// min(|columns|, max_components) latent variables, or fewer when the
/// covariance between the columns and y is used up earlier.
double pls_r2(const Matrix& x, const Vector& y, const BandList& columns, int max_components);

/**
 * Greedy forward selection: each step fits PLS on the current selection plus
 * every remaining candidate, and keeps the candidate with the highest
 * training R^2 = 1 - RSS/TSS (ties to the lower band). Candidates whose fit
 * degenerates are skipped with a warning.
 */
SelectionReport r2_forward_select(const Matrix& x, const Vector& y, const R2ForwardOptions& options);

struct CovprocOptions {
    int rounds = 4;
    BandList excluded;
    /// Autoscale X and center y before the first round.
    bool standardize = true;
};

/// Evaluation metric |y't| / (t't) for one score vector; NaN when t't == 0.
double covproc_alpha(const Vector& y, const Vector& t);

/**
 * COVPROC rounds. Each round takes the one-latent-variable PLS weight
 * direction X'y, ranks bands by |weight|, grows a sparse weight vector along
 * that ranking with entries y'x_i, scores every prefix with covproc_alpha,
 * keeps the best prefix (shortest on ties), and deflates X by the chosen
 * score vector.
 */
SelectionReport covproc_select(const Matrix& x, const Vector& y, const CovprocOptions& options);

/// The working matrix and response covproc_select starts from.
struct CovprocState {
    Matrix x;
    Vector y;
};
CovprocState covproc_prepare(const Matrix& x, const Vector& y, const CovprocOptions& options);

struct CovprocStep {
    CovprocRound round;  // empty `bands` when no covariance is left
    Vector score;        // t of the chosen prefix
};

/// One round on the working state: ranks columns by |X'y|, keeps the prefix
/// with the largest alpha and deflates `state.x` by its score. `usable` maps
/// working columns to band indices.
CovprocStep covproc_step(CovprocState& state, const BandList& usable, int number);

/// Concatenates the bands of the listed rounds (1-based numbers) in the given
/// order, keeping the first occurrence of each band.
BandList reorder_rounds(const SelectionReport& report, const std::vector<int>& order);

} // namespace spectral_sift
