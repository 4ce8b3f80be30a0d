#pragma once

#include "spectral_sift/cluster.hpp"
#include "spectral_sift/error.hpp"
#include "spectral_sift/kernel.hpp"
#include "spectral_sift/kernel_flows.hpp"
#include "spectral_sift/pca.hpp"
#include "spectral_sift/preprocess.hpp"
#include "spectral_sift/serialize.hpp"
#include "spectral_sift/specdata.hpp"
#include "spectral_sift/wavesel.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spectral_sift {

enum class Workflow { KMeans, KfPls };
enum class BandSelectionMode { None, R2, Covproc };

std::string to_string(Workflow workflow);
Workflow workflow_from_string(const std::string& name);
std::string to_string(BandSelectionMode mode);
BandSelectionMode band_selection_from_string(const std::string& name);

struct PcaSettings {
    std::optional<int> components;
    SelectionRule rule = TopN{2};
};

struct KfPlsSettings {
    KernelFamily family = KernelFamily::Gaussian;
    std::optional<double> lengthscale;  // unset: median pairwise distance of the sample
    double variance = 1.0;
    int samples_per_class = 300;
    KfConfig flow;
    std::vector<int> lv_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
};

struct SelectionSettings {
    int exclude_tail = 10;
    int target = 12;
    int initial = 3;
    int max_components = 5;
    int rounds = 4;
    std::vector<int> round_order;  // empty: ascending
    bool stop_by_clustering = true;
};

/**
 * Everything a command needs, validated before any computation.
 *
 * The JSON form mirrors the field names below (snake case, nested sections
 * `pca`, `clustering`, `kfpls`, `selection`); unknown keys are rejected.
 */
struct RunConfig {
    std::string cube;
    std::string mask;
    std::string model;
    std::string scene;
    std::string out = ".";
    Workflow workflow = Workflow::KMeans;
    BandSelectionMode band_selection = BandSelectionMode::None;
    BandList bands;
    std::uint64_t seed = 0;
    PcaSettings pca;
    SupervisedOptions clustering;
    KfPlsSettings kfpls;
    SelectionSettings selection;

    void validate() const;
};

RunConfig run_config_from_json(const Json& j);

inline constexpr int kModelFormatVersion = 1;

/// Fitted pipeline as stored in the model file.
struct PipelineModel {
    Workflow workflow = Workflow::KMeans;
    std::vector<double> wavelengths_nm;  // of the calibration cube
    BandList bands;                      // bands the model was fitted on
    std::map<int, std::string> class_names;
    ScaleModel scale;
    std::optional<PcaModel> pca;
    std::optional<ComponentSelection> components;
    std::optional<ClusterModel> cluster;
    std::optional<KernelPlsModel> kernel_pls;

    /// Throws FormatError when sub-models disagree on dimensions.
    void check() const;
};

Json to_json(const PipelineModel& model);
PipelineModel pipeline_from_json(const Json& j);
PipelineModel load_model(const std::string& path);

struct FitResult {
    PipelineModel model;
    Json diagnostics;
    std::optional<KfResult> flow;
};

/// Model-quality failure during fitting, with the diagnostics gathered so far.
class FitFailure : public ModelQualityError {
public:
    FitFailure(const std::string& what, Json diagnostics)
        : ModelQualityError(what), diagnostics_(std::move(diagnostics)) {}
    const Json& diagnostics() const { return diagnostics_; }

private:
    Json diagnostics_;
};

/// Fits on `bands` of the calibration cube (all bands when empty).
FitResult fit_pipeline(const HyperCube& cube, const LabelMask& mask, const RunConfig& config,
                       const BandList& bands = {});

struct ApplyResult {
    LabelMask classes;
    std::vector<int> clusters;  // per pixel, k-means workflow only
    std::map<std::string, std::size_t> counts;
};

ApplyResult apply_pipeline(const PipelineModel& model, const HyperCube& cube);

struct MiteScore {
    std::size_t mite_pixels = 0;
    std::size_t detected = 0;
    std::size_t false_alarms = 0;
    double recall() const {
        return mite_pixels == 0 ? 1.0 : static_cast<double>(detected) / static_cast<double>(mite_pixels);
    }
};

/// Compares predicted mite pixels against ground truth; unlabeled truth
/// pixels are ignored.
MiteScore score_mites(const LabelMask& predicted, const LabelMask& truth);

/// Whether k-means fitting on `bands` of the cube meets the escalation
/// criterion.
bool clustering_passes(const HyperCube& cube, const LabelMask& mask, const BandList& bands,
                       const RunConfig& config);

struct BandSelectionResult {
    SelectionReport report;
    BandList final_bands;
    bool stop_satisfied = false;
    int stop_evaluations = 0;
};

/// Runs the configured selector on bee and mite pixels (mite = 1). With
/// stop-by-clustering, `final_bands` is the shortest prefix on which
/// clustering passes.
BandSelectionResult run_band_selection(const HyperCube& cube, const LabelMask& mask,
                                       const RunConfig& config);

Json to_json(const BandSelectionResult& result, const std::vector<double>& wavelengths_nm);

} // namespace spectral_sift
