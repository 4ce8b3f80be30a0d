#include "spectral_sift/pipeline.hpp"

#include "spectral_sift/error.hpp"
#include "spectral_sift/pls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace spectral_sift {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) {
        throw InvalidArgument(where + " must be a JSON object");
    }
    for (const auto& item : j.items()) {
        if (!allowed.contains(item.key())) {
            throw InvalidArgument("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& target) {
    if (!j.contains(key)) return;
    try {
        target = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config field '") + key + "': " + e.what());
    }
}

bool is_bee_label(std::uint8_t label) {
    return label == kBeeBody || label == kBeeWing;
}

std::uint8_t label_of(ClusterClass c) {
    switch (c) {
    case ClusterClass::Mite: return kMite;
    case ClusterClass::Bee: return kBeeBody;
    case ClusterClass::Other: return kBackground;
    }
    return kBackground;
}

std::map<int, std::string> cluster_palette() {
    return {{kBackground, "other"}, {kBeeBody, "bee"}, {kMite, "mite"}};
}

BandList all_bands(int count) {
    BandList b(static_cast<std::size_t>(count));
    std::iota(b.begin(), b.end(), 0);
    return b;
}

// Model-space spectra for a cube: the fitted band subset, whatever the
// cube's own band count.
SpectralMatrix model_inputs(const PipelineModel& model, const HyperCube& cube) {
    const auto nb = static_cast<int>(model.bands.size());
    const auto source = static_cast<int>(model.wavelengths_nm.size());
    if (cube.bands() == source) {
        if (nb == source) return flatten(cube).spectra;
        return flatten(cube.select_bands(model.bands)).spectra;
    }
    if (cube.bands() == nb) {
        for (int i = 0; i < nb; ++i) {
            const double expect = model.wavelengths_nm[static_cast<std::size_t>(model.bands[static_cast<std::size_t>(i)])];
            if (std::abs(cube.wavelengths_nm()[static_cast<std::size_t>(i)] - expect) > 1e-6 * std::max(1.0, expect)) {
                throw InvalidArgument("cube band " + std::to_string(i) + " is at " +
                                      std::to_string(cube.wavelengths_nm()[static_cast<std::size_t>(i)]) +
                                      " nm, model expects " + std::to_string(expect) + " nm");
            }
        }
        return flatten(cube).spectra;
    }
    throw InvalidArgument("cube has " + std::to_string(cube.bands()) + " bands; model needs " +
                          std::to_string(source) + " (or its " + std::to_string(nb) + "-band subset)");
}

Json explained_variance_table(const PcaModel& pca) {
    Json rows = Json::array();
    double cumulative = 0.0;
    for (Eigen::Index c = 0; c < pca.components(); ++c) {
        cumulative += pca.explained_variance_ratio(c);
        rows.push_back({{"component", c + 1},
                        {"variance", pca.explained_variance(c)},
                        {"ratio", pca.explained_variance_ratio(c)},
                        {"cumulative", cumulative}});
    }
    return rows;
}

std::vector<int> one_based(const std::vector<int>& v) {
    std::vector<int> out;
    out.reserve(v.size());
    for (int i : v) out.push_back(i + 1);
    return out;
}

FitResult fit_kmeans(const SpectralMatrix& x, const std::vector<std::uint8_t>& labels,
                     const RunConfig& config) {
    FitResult out;
    PipelineModel& model = out.model;
    model.workflow = Workflow::KMeans;
    model.scale = fit_scale(x);
    const SpectralMatrix xs = apply_scale(model.scale, x);

    std::optional<Eigen::Index> k;
    if (config.pca.components) k = *config.pca.components;
    PcaFit pca = fit_pca(xs, k);

    // Score correlation against the mite indicator over bee and mite pixels.
    std::vector<int> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kMite || is_bee_label(labels[i])) rows.push_back(static_cast<int>(i));
    }
    Vector y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = labels[static_cast<std::size_t>(rows[i])] == kMite ? 1.0 : 0.0;
    }
    const Vector rho = correlate_scores(select_rows(pca.scores, rows), y);
    ComponentSelection selection = select_components(rho, config.pca.rule);
    const SpectralMatrix recon = reconstruct(pca.model, pca.scores, selection);

    out.diagnostics["workflow"] = to_string(Workflow::KMeans);
    out.diagnostics["pixels"] = x.rows();
    out.diagnostics["explained_variance"] = explained_variance_table(pca.model);
    Json corr = Json::array();
    for (Eigen::Index c = 0; c < rho.size(); ++c) corr.push_back(rho(c));
    out.diagnostics["score_correlations"] = corr;
    out.diagnostics["selected_components"] = one_based(selection.selected);
    out.diagnostics["selection_rule"] = describe(selection.rule);

    SupervisedOptions opts = config.clustering;
    opts.seed = config.seed;
    SupervisedFit fit;
    try {
        fit = fit_supervised(recon, labels, opts);
    } catch (const EscalationFailure& e) {
        out.diagnostics["clustering"] = to_json(e.diagnostics());
        out.diagnostics["error"] = e.what();
        throw FitFailure(e.what(), out.diagnostics);
    }
    out.diagnostics["clustering"] = to_json(fit.diagnostics);

    model.pca = std::move(pca.model);
    model.components = std::move(selection);
    model.cluster = std::move(fit.model);
    model.class_names = cluster_palette();
    return out;
}

FitResult fit_kfpls(const SpectralMatrix& x, const std::vector<std::uint8_t>& labels,
                    const std::map<int, std::string>& palette, const RunConfig& config) {
    FitResult out;
    PipelineModel& model = out.model;
    model.workflow = Workflow::KfPls;
    model.scale = fit_scale(x);
    const SpectralMatrix xs = apply_scale(model.scale, x);

    // Up to samples_per_class labeled pixels from each class, drawn with the run seed.
    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != kUnlabeled) by_class[labels[i]].push_back(static_cast<int>(i));
    }
    if (by_class.size() < 2) {
        throw InvalidArgument("calibration mask needs at least two labeled classes");
    }
    std::mt19937_64 rng(config.seed);
    std::vector<int> rows;
    std::vector<int> y;
    Json sampled = Json::object();
    for (auto& [label, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto take = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(config.kfpls.samples_per_class));
        std::vector<int> chosen(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
        std::sort(chosen.begin(), chosen.end());
        for (int r : chosen) {
            rows.push_back(r);
            y.push_back(label);
        }
        sampled[std::to_string(label)] = take;
    }
    const Matrix xt = select_rows(xs, rows);

    KernelSpec initial;
    initial.family = config.kfpls.family;
    initial.variance = config.kfpls.variance;
    if (config.kfpls.lengthscale) {
        initial.lengthscale = *config.kfpls.lengthscale;
    } else {
        const Matrix d2 = squared_distances(xt, xt);
        std::vector<double> d;
        for (Eigen::Index i = 0; i < d2.rows(); ++i) {
            for (Eigen::Index j = i + 1; j < d2.cols(); ++j) d.push_back(std::sqrt(d2(i, j)));
        }
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
        initial.lengthscale = d.empty() || d[d.size() / 2] <= 0.0 ? 1.0 : d[d.size() / 2];
    }

    KfConfig flow = config.kfpls.flow;
    flow.seed = config.seed;
    KfResult kf = kf_optimize(xt, y, initial, flow, config.kfpls.lv_grid);
    KernelPlsModel kpls = fit_kernel_pls(xt, y, kf.kernel, kf.components);

    out.diagnostics["workflow"] = to_string(Workflow::KfPls);
    out.diagnostics["sampled_per_class"] = sampled;
    out.diagnostics["initial_kernel"] = to_json(initial);
    out.diagnostics["kernel"] = to_json(kf.kernel);
    out.diagnostics["components"] = kf.components;
    out.diagnostics["component_grid"] = kf.grid;
    out.diagnostics["grid_r2"] = kf.grid_r2;
    out.diagnostics["final_loss"] = kf.loss_trace.back();
    out.diagnostics["skipped_evaluations"] = kf.skipped_evaluations;
    out.diagnostics["clamped"] = kf.clamped;

    for (const auto& [label, name] : palette) {
        if (by_class.contains(label)) model.class_names[label] = name;
    }
    model.kernel_pls = std::move(kpls);
    out.flow = std::move(kf);
    return out;
}

} // namespace

std::string to_string(Workflow workflow) {
    return workflow == Workflow::KMeans ? "kmeans" : "kfpls";
}

Workflow workflow_from_string(const std::string& name) {
    if (name == "kmeans") return Workflow::KMeans;
    if (name == "kfpls") return Workflow::KfPls;
    throw InvalidArgument("unknown workflow '" + name + "' (expected kmeans or kfpls)");
}

std::string to_string(BandSelectionMode mode) {
    switch (mode) {
    case BandSelectionMode::None: return "none";
    case BandSelectionMode::R2: return "r2";
    case BandSelectionMode::Covproc: return "covproc";
    }
    return "none";
}

BandSelectionMode band_selection_from_string(const std::string& name) {
    if (name == "none") return BandSelectionMode::None;
    if (name == "r2") return BandSelectionMode::R2;
    if (name == "covproc") return BandSelectionMode::Covproc;
    throw InvalidArgument("unknown band selection '" + name + "' (expected none, r2 or covproc)");
}

void RunConfig::validate() const {
    if (pca.components && *pca.components < 1) {
        throw InvalidArgument("pca.components must be >= 1");
    }
    if (const auto* top = std::get_if<TopN>(&pca.rule); top && top->n < 1) {
        throw InvalidArgument("pca.n must be >= 1");
    }
    if (const auto* th = std::get_if<Threshold>(&pca.rule);
        th && !(th->min_abs_correlation > 0.0 && th->min_abs_correlation < 1.0)) {
        throw InvalidArgument("pca.min_abs_correlation must lie in (0, 1)");
    }
    if (clustering.k0 < 2 || clustering.k_max < clustering.k0) {
        throw InvalidArgument("clustering needs 2 <= k0 <= k_max");
    }
    if (clustering.restarts < 1 || clustering.max_iter < 1 || !(clustering.tol > 0.0)) {
        throw InvalidArgument("clustering restarts and max_iter must be >= 1 and tol > 0");
    }
    if (kfpls.samples_per_class < 2) {
        throw InvalidArgument("kfpls.samples_per_class must be >= 2");
    }
    if (kfpls.lengthscale && !(*kfpls.lengthscale > 0.0)) {
        throw InvalidArgument("kfpls.lengthscale must be positive");
    }
    if (!(kfpls.variance > 0.0)) {
        throw InvalidArgument("kfpls.variance must be positive");
    }
    if (kfpls.family == KernelFamily::Linear) {
        throw InvalidArgument("kfpls.kernel must have a lengthscale (not linear)");
    }
    kfpls.flow.validate();
    if (kfpls.lv_grid.empty() ||
        std::any_of(kfpls.lv_grid.begin(), kfpls.lv_grid.end(), [](int a) { return a < 1; })) {
        throw InvalidArgument("kfpls.lv_grid must hold positive counts");
    }
    if (selection.exclude_tail < 0 || selection.target < 1 || selection.initial < 0 ||
        selection.max_components < 1 || selection.rounds < 1) {
        throw InvalidArgument("selection settings out of range");
    }
    for (int r : selection.round_order) {
        if (r < 1 || r > selection.rounds) {
            throw InvalidArgument("selection.round_order entry " + std::to_string(r) + " outside [1, " +
                                  std::to_string(selection.rounds) + "]");
        }
    }
    if (std::any_of(bands.begin(), bands.end(), [](int b) { return b < 0; })) {
        throw InvalidArgument("band indices must be >= 0");
    }
}

RunConfig run_config_from_json(const Json& j) {
    reject_unknown(j,
                   {"cube", "mask", "model", "scene", "out", "workflow", "band_selection", "bands", "seed",
                    "pca", "clustering", "kfpls", "selection"},
                   "config");
    RunConfig c;
    read_opt(j, "cube", c.cube);
    read_opt(j, "mask", c.mask);
    read_opt(j, "model", c.model);
    read_opt(j, "scene", c.scene);
    read_opt(j, "out", c.out);
    read_opt(j, "bands", c.bands);
    read_opt(j, "seed", c.seed);
    if (j.contains("workflow")) c.workflow = workflow_from_string(j.at("workflow").get<std::string>());
    if (j.contains("band_selection")) {
        c.band_selection = band_selection_from_string(j.at("band_selection").get<std::string>());
    }
    if (j.contains("pca")) {
        const Json& p = j.at("pca");
        reject_unknown(p, {"components", "rule", "n", "min_abs_correlation"}, "pca");
        if (p.contains("components") && !p.at("components").is_null()) {
            int k = 0;
            read_opt(p, "components", k);
            c.pca.components = k;
        }
        std::string rule = "top_n";
        read_opt(p, "rule", rule);
        if (rule == "top_n") {
            TopN t;
            read_opt(p, "n", t.n);
            c.pca.rule = t;
        } else if (rule == "threshold") {
            Threshold t;
            read_opt(p, "min_abs_correlation", t.min_abs_correlation);
            c.pca.rule = t;
        } else {
            throw InvalidArgument("pca.rule must be top_n or threshold");
        }
    }
    if (j.contains("clustering")) {
        const Json& k = j.at("clustering");
        reject_unknown(k, {"k0", "k_max", "restarts", "max_iter", "tol"}, "clustering");
        read_opt(k, "k0", c.clustering.k0);
        read_opt(k, "k_max", c.clustering.k_max);
        read_opt(k, "restarts", c.clustering.restarts);
        read_opt(k, "max_iter", c.clustering.max_iter);
        read_opt(k, "tol", c.clustering.tol);
    }
    if (j.contains("kfpls")) {
        const Json& k = j.at("kfpls");
        reject_unknown(k,
                       {"kernel", "lengthscale", "variance", "samples_per_class", "learning_rate", "momentum",
                        "iterations", "subsamplings", "batch_ratio", "flow_components", "fd_step", "max_log_step",
                        "lv_grid"},
                       "kfpls");
        if (k.contains("kernel")) c.kfpls.family = kernel_family_from_string(k.at("kernel").get<std::string>());
        if (k.contains("lengthscale") && !k.at("lengthscale").is_null()) {
            double l = 0.0;
            read_opt(k, "lengthscale", l);
            c.kfpls.lengthscale = l;
        }
        read_opt(k, "variance", c.kfpls.variance);
        read_opt(k, "samples_per_class", c.kfpls.samples_per_class);
        read_opt(k, "learning_rate", c.kfpls.flow.learning_rate);
        read_opt(k, "momentum", c.kfpls.flow.momentum);
        read_opt(k, "iterations", c.kfpls.flow.iterations);
        read_opt(k, "subsamplings", c.kfpls.flow.subsamplings_per_iter);
        read_opt(k, "batch_ratio", c.kfpls.flow.batch_ratio);
        read_opt(k, "flow_components", c.kfpls.flow.flow_components);
        read_opt(k, "fd_step", c.kfpls.flow.fd_step);
        read_opt(k, "max_log_step", c.kfpls.flow.max_log_step);
        read_opt(k, "lv_grid", c.kfpls.lv_grid);
    }
    if (j.contains("selection")) {
        const Json& s = j.at("selection");
        reject_unknown(s,
                       {"exclude_tail", "target", "initial", "max_components", "rounds", "round_order",
                        "stop_by_clustering"},
                       "selection");
        read_opt(s, "exclude_tail", c.selection.exclude_tail);
        read_opt(s, "target", c.selection.target);
        read_opt(s, "initial", c.selection.initial);
        read_opt(s, "max_components", c.selection.max_components);
        read_opt(s, "rounds", c.selection.rounds);
        read_opt(s, "round_order", c.selection.round_order);
        read_opt(s, "stop_by_clustering", c.selection.stop_by_clustering);
    }
    c.validate();
    return c;
}

void PipelineModel::check() const {
    const auto nb = static_cast<Eigen::Index>(bands.size());
    if (nb == 0) throw FormatError("model has no bands");
    for (int b : bands) {
        if (b < 0 || static_cast<std::size_t>(b) >= wavelengths_nm.size()) {
            throw FormatError("model band " + std::to_string(b) + " out of range");
        }
    }
    if (scale.bands() != nb) throw FormatError("scale model band count disagrees");
    if (workflow == Workflow::KMeans) {
        if (!pca || !components || !cluster) throw FormatError("k-means model is incomplete");
        if (pca->bands() != nb || cluster->centroids.cols() != nb) {
            throw FormatError("k-means model band counts disagree");
        }
        if (components->correlations.size() != pca->components()) {
            throw FormatError("component selection does not match the PCA model");
        }
    } else {
        if (!kernel_pls) throw FormatError("kernel PLS model is missing");
        if (kernel_pls->support.cols() != nb) throw FormatError("kernel PLS band count disagrees");
    }
}

Json to_json(const PipelineModel& model) {
    Json j;
    j["format"] = "spectral-sift-model";
    j["format_version"] = kModelFormatVersion;
    j["workflow"] = to_string(model.workflow);
    j["wavelengths_nm"] = model.wavelengths_nm;
    j["bands"] = model.bands;
    Json names = Json::object();
    for (const auto& [label, name] : model.class_names) names[std::to_string(label)] = name;
    j["class_names"] = names;
    j["scale"] = to_json(model.scale);
    if (model.pca) j["pca"] = to_json(*model.pca);
    if (model.components) j["component_selection"] = to_json(*model.components);
    if (model.cluster) j["cluster"] = to_json(*model.cluster);
    if (model.kernel_pls) j["kernel_pls"] = to_json(*model.kernel_pls);
    return j;
}

PipelineModel pipeline_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("format") || j.at("format") != "spectral-sift-model") {
        throw FormatError("not a spectral-sift model file");
    }
    const int version = field<int>(j, "format_version");
    if (version != kModelFormatVersion) {
        throw FormatError("unsupported model format version " + std::to_string(version));
    }
    PipelineModel m;
    try {
        m.workflow = workflow_from_string(field<std::string>(j, "workflow"));
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what());
    }
    m.wavelengths_nm = field<std::vector<double>>(j, "wavelengths_nm");
    m.bands = field<std::vector<int>>(j, "bands");
    const Json names = field<Json>(j, "class_names");
    for (const auto& item : names.items()) {
        int label = -1;
        try {
            label = std::stoi(item.key());
        } catch (const std::exception&) {
            throw FormatError("class label '" + item.key() + "' is not a number");
        }
        m.class_names[label] = item.value().get<std::string>();
    }
    m.scale = scale_from_json(field<Json>(j, "scale"));
    if (j.contains("pca")) m.pca = pca_from_json(j.at("pca"));
    if (j.contains("component_selection")) m.components = selection_from_json(j.at("component_selection"));
    if (j.contains("cluster")) m.cluster = cluster_from_json(j.at("cluster"));
    if (j.contains("kernel_pls")) m.kernel_pls = kernel_pls_from_json(j.at("kernel_pls"));
    m.check();
    return m;
}

PipelineModel load_model(const std::string& path) {
    return pipeline_from_json(read_json_file(path));
}

FitResult fit_pipeline(const HyperCube& cube, const LabelMask& mask, const RunConfig& config,
                       const BandList& bands) {
    config.validate();
    if (mask.rows() != cube.rows() || mask.cols() != cube.cols()) {
        throw InvalidArgument("mask is " + std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) +
                              ", cube is " + std::to_string(cube.rows()) + "x" + std::to_string(cube.cols()));
    }
    if (mask.count(kMite) == 0) {
        throw InvalidArgument("calibration mask has no mite pixels (label 3)");
    }
    if (mask.count(kBeeBody) + mask.count(kBeeWing) == 0) {
        throw InvalidArgument("calibration mask has no bee pixels (labels 1, 2)");
    }
    BandList used = bands.empty() ? all_bands(cube.bands()) : bands;
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    const FlatPixels flat = used.size() == static_cast<std::size_t>(cube.bands())
                                ? flatten(cube)
                                : flatten(cube.select_bands(used));
    const auto labels = labels_at(mask, flat.index);

    FitResult out = config.workflow == Workflow::KMeans
                        ? fit_kmeans(flat.spectra, labels, config)
                        : fit_kfpls(flat.spectra, labels, mask.palette(), config);
    out.model.wavelengths_nm = cube.wavelengths_nm();
    out.model.bands = used;
    out.model.check();
    Json nm = Json::array();
    for (int b : used) nm.push_back(cube.wavelengths_nm()[static_cast<std::size_t>(b)]);
    out.diagnostics["bands"] = used;
    out.diagnostics["bands_nm"] = nm;
    return out;
}

ApplyResult apply_pipeline(const PipelineModel& model, const HyperCube& cube) {
    model.check();
    const SpectralMatrix x = model_inputs(model, cube);
    const SpectralMatrix xs = apply_scale(model.scale, x);
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(x.rows()));
    ApplyResult out{LabelMask(1, 1, {kBackground}), {}, {}};
    std::map<int, std::string> palette;
    if (model.workflow == Workflow::KMeans) {
        const Matrix scores = project(*model.pca, xs);
        const SpectralMatrix recon = reconstruct(*model.pca, scores, *model.components);
        const Assignment a = assign(*model.cluster, recon);
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = label_of(a.cls[i]);
        out.clusters = a.cluster;
        palette = cluster_palette();
    } else {
        const Classification c = classify(*model.kernel_pls, xs);
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::uint8_t>(c.labels[i]);
        palette = model.class_names;
        for (int cls : model.kernel_pls->classes) {
            if (!palette.contains(cls)) palette[cls] = "class-" + std::to_string(cls);
        }
    }
    out.classes = LabelMask(cube.rows(), cube.cols(), std::move(labels), palette);
    for (const auto& [label, name] : palette) {
        out.counts[name] = out.classes.count(static_cast<std::uint8_t>(label));
    }
    return out;
}

MiteScore score_mites(const LabelMask& predicted, const LabelMask& truth) {
    if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
        throw InvalidArgument("prediction and ground truth differ in size");
    }
    MiteScore s;
    for (std::size_t i = 0; i < truth.labels().size(); ++i) {
        const auto t = truth.labels()[i];
        const bool hit = predicted.labels()[i] == kMite;
        if (t == kUnlabeled) continue;
        if (t == kMite) {
            ++s.mite_pixels;
            if (hit) ++s.detected;
        } else if (hit) {
            ++s.false_alarms;
        }
    }
    return s;
}

bool clustering_passes(const HyperCube& cube, const LabelMask& mask, const BandList& bands,
                       const RunConfig& config) {
    RunConfig c = config;
    c.workflow = Workflow::KMeans;
    try {
        fit_pipeline(cube, mask, c, bands);
        return true;
    } catch (const ModelQualityError&) {
        return false;
    } catch (const DegenerateData&) {
        return false;
    }
}

BandSelectionResult run_band_selection(const HyperCube& cube, const LabelMask& mask,
                                       const RunConfig& config) {
    config.validate();
    if (config.band_selection == BandSelectionMode::None) {
        throw InvalidArgument("no band selection method configured");
    }
    const FlatPixels flat = flatten(cube, &mask, std::set<std::uint8_t>{kBeeBody, kBeeWing, kMite});
    if (flat.spectra.rows() == 0) {
        throw InvalidArgument("mask has no bee or mite pixels");
    }
    const auto labels = labels_at(mask, flat.index);
    Vector y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = labels[i] == kMite ? 1.0 : 0.0;
    }
    if (y.sum() == 0.0 || y.sum() == static_cast<double>(y.size())) {
        throw InvalidArgument("band selection needs both bee and mite pixels");
    }
    const BandList excluded = exclude_tail(cube.bands(), config.selection.exclude_tail);
    const SelectionSettings& s = config.selection;

    BandSelectionResult out;
    bool last_pass = false;
    auto passes = [&](const BandList& bands) {
        ++out.stop_evaluations;
        last_pass = clustering_passes(cube, mask, bands, config);
        return last_pass;
    };

    if (config.band_selection == BandSelectionMode::R2) {
        R2ForwardOptions opts;
        opts.excluded = excluded;
        opts.target = std::min<int>(s.target, static_cast<int>(usable_bands(cube.bands(), excluded).size()));
        opts.max_components = s.max_components;
        if (s.initial > 0) {
            opts.initial = init_by_correlation(flat.spectra, y, std::min(s.initial, opts.target), excluded);
        }
        if (s.stop_by_clustering) {
            opts.stop = [&](const BandList& bands) { return passes(bands); };
        }
        out.report = r2_forward_select(flat.spectra, y, opts);
        out.final_bands = out.report.selected;
        out.stop_satisfied = s.stop_by_clustering && last_pass;
    } else {
        CovprocOptions opts;
        opts.excluded = excluded;
        opts.rounds = s.rounds;
        out.report = covproc_select(flat.spectra, y, opts);
        std::vector<int> order = s.round_order;
        if (order.empty()) {
            for (const auto& r : out.report.rounds) order.push_back(r.number);
        }
        const BandList candidates = reorder_rounds(out.report, order);
        out.final_bands = candidates;
        if (s.stop_by_clustering) {
            for (std::size_t m = 1; m <= candidates.size(); ++m) {
                const BandList prefix(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(m));
                if (passes(prefix)) {
                    out.final_bands = prefix;
                    out.stop_satisfied = true;
                    break;
                }
            }
        }
    }
    if (s.stop_by_clustering && !out.stop_satisfied) {
        out.report.warnings.push_back("clustering never met the escalation criterion on the selected bands");
    }
    return out;
}

Json to_json(const BandSelectionResult& result, const std::vector<double>& wavelengths_nm) {
    Json j = to_json(result.report, wavelengths_nm);
    Json nm = Json::array();
    for (int b : result.final_bands) nm.push_back(wavelengths_nm.at(static_cast<std::size_t>(b)));
    j["final_bands"] = result.final_bands;
    j["final_nm"] = nm;
    j["stop_satisfied"] = result.stop_satisfied;
    j["stop_evaluations"] = result.stop_evaluations;
    return j;
}

} // namespace spectral_sift
