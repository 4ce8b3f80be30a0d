#include "spectral_sift/commands.hpp"

#include "spectral_sift/envi.hpp"
#include "spectral_sift/error.hpp"
#include "spectral_sift/serialize.hpp"
#include "spectral_sift/synth.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace spectral_sift {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

void write_json(const fs::path& path, const Json& j) {
    write_text(path, j.dump(2) + "\n");
}

fs::path prepare_out(const RunConfig& config) {
    const fs::path out = config.out.empty() ? fs::path(".") : fs::path(config.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + out.string() + "': " + ec.message());
    }
    return out;
}

void require(const std::string& value, const std::string& what) {
    if (value.empty()) {
        throw InvalidArgument(what + " is required");
    }
}

HyperCube load_cube(const std::string& header) {
    return read_envi(header, envi_data_path(header));
}

Json legend_json(const LabelMask& mask) {
    Json j = Json::object();
    for (const auto& [label, name] : mask.palette()) j[std::to_string(label)] = name;
    return j;
}

void write_mask_set(const fs::path& dir, const std::string& stem, const LabelMask& mask) {
    write_mask_envi(mask, dir / (stem + ".hdr"), dir / (stem + ".raw"));
    write_mask_pgm(mask, dir / (stem + ".pgm"));
}

Json nm_list(const std::vector<double>& wl, const BandList& bands) {
    Json out = Json::array();
    for (int b : bands) out.push_back(wl.at(static_cast<std::size_t>(b)));
    return out;
}

std::string fixed(double v, int precision) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

} // namespace

Json cmd_fit(const RunConfig& config, std::ostream& log) {
    require(config.cube, "calibration cube (--cube)");
    require(config.mask, "calibration mask (--mask)");
    config.validate();
    const fs::path out = prepare_out(config);
    const HyperCube cube = load_cube(config.cube);
    const LabelMask mask = read_mask(config.mask);
    log << "fit: " << cube.rows() << "x" << cube.cols() << " pixels, " << cube.bands() << " bands, workflow "
        << to_string(config.workflow) << "\n";

    Json result;
    result["command"] = "fit";
    BandList bands = config.bands;
    if (config.band_selection != BandSelectionMode::None) {
        const BandSelectionResult sel = run_band_selection(cube, mask, config);
        write_json(out / "selection.json", to_json(sel, cube.wavelengths_nm()));
        log << "fit: " << to_string(config.band_selection) << " selection kept " << sel.final_bands.size()
            << " bands\n";
        bands = sel.final_bands;
    }

    FitResult fit;
    try {
        fit = fit_pipeline(cube, mask, config, bands);
    } catch (const FitFailure& e) {
        write_json(out / "diagnostics.json", e.diagnostics());
        log << "fit: " << e.what() << "\n";
        result["status"] = "failed";
        result["error"] = e.what();
        result["diagnostics"] = (out / "diagnostics.json").string();
        return result;
    }
    write_json(out / "model.json", to_json(fit.model));
    write_json(out / "diagnostics.json", fit.diagnostics);
    if (fit.flow) {
        write_text(out / "kf_trace.csv", kf_trace_csv(*fit.flow));
    }

    result["status"] = "ok";
    result["workflow"] = to_string(config.workflow);
    result["model"] = (out / "model.json").string();
    result["band_count"] = fit.model.bands.size();
    if (fit.model.bands.size() < static_cast<std::size_t>(cube.bands())) {
        result["bands"] = fit.model.bands;
        result["bands_nm"] = nm_list(cube.wavelengths_nm(), fit.model.bands);
    }
    if (fit.model.cluster) {
        result["k"] = fit.model.cluster->k();
        result["selected_components"] = fit.diagnostics["selected_components"];
        log << "fit: clustering succeeded with k = " << fit.model.cluster->k() << "\n";
    }
    if (fit.model.kernel_pls) {
        result["kernel"] = to_json(fit.model.kernel_pls->kernel);
        result["components"] = fit.model.kernel_pls->components;
        log << "fit: kernel " << to_string(fit.model.kernel_pls->kernel.family) << ", lengthscale "
            << fit.model.kernel_pls->kernel.lengthscale << ", " << fit.model.kernel_pls->components
            << " latent variables\n";
    }
    return result;
}

Json cmd_apply(const RunConfig& config, std::ostream& log) {
    require(config.model, "model file (--model)");
    require(config.cube, "cube (--cube)");
    const fs::path out = prepare_out(config);
    const PipelineModel model = load_model(config.model);
    const HyperCube cube = load_cube(config.cube);
    log << "apply: " << cube.rows() << "x" << cube.cols() << " pixels with a " << to_string(model.workflow)
        << " model\n";
    const ApplyResult applied = apply_pipeline(model, cube);

    write_mask_set(out, "classes", applied.classes);
    write_json(out / "legend.json", legend_json(applied.classes));
    if (!applied.clusters.empty()) {
        std::vector<std::uint8_t> ids(applied.clusters.begin(), applied.clusters.end());
        std::map<int, std::string> palette;
        for (int c = 0; c < model.cluster->k(); ++c) palette[c] = "cluster-" + std::to_string(c);
        write_mask_pgm(LabelMask(cube.rows(), cube.cols(), std::move(ids), palette), out / "clusters.pgm");
    }
    Json counts = Json::object();
    for (const auto& [name, n] : applied.counts) counts[name] = n;
    write_json(out / "counts.json", counts);

    Json result;
    result["command"] = "apply";
    result["status"] = "ok";
    result["mask"] = (out / "classes.hdr").string();
    result["counts"] = counts;
    if (!config.mask.empty()) {
        const MiteScore score = score_mites(applied.classes, read_mask(config.mask));
        result["evaluation"] = {{"mite_pixels", score.mite_pixels},
                                {"detected", score.detected},
                                {"false_alarms", score.false_alarms},
                                {"recall", score.recall()}};
        log << "apply: mite recall " << score.recall() << ", " << score.false_alarms << " false alarm pixels\n";
    }
    return result;
}

Json cmd_select_bands(const RunConfig& config, std::ostream& log) {
    require(config.cube, "calibration cube (--cube)");
    require(config.mask, "calibration mask (--mask)");
    const fs::path out = prepare_out(config);
    const HyperCube cube = load_cube(config.cube);
    const LabelMask mask = read_mask(config.mask);
    log << "select-bands: " << to_string(config.band_selection) << " on " << cube.bands() << " bands\n";
    const BandSelectionResult sel = run_band_selection(cube, mask, config);
    const Json report = to_json(sel, cube.wavelengths_nm());
    write_json(out / "selection.json", report);
    for (const auto& w : sel.report.warnings) log << "select-bands: " << w << "\n";

    Json result;
    result["command"] = "select-bands";
    const bool failed = config.selection.stop_by_clustering && !sel.stop_satisfied;
    result["status"] = failed ? "failed" : "ok";
    result["report"] = (out / "selection.json").string();
    result["method"] = to_string(sel.report.method);
    result["selected"] = sel.report.selected;
    result["final_bands"] = sel.final_bands;
    result["final_nm"] = nm_list(cube.wavelengths_nm(), sel.final_bands);
    result["stop_satisfied"] = sel.stop_satisfied;
    if (failed) result["error"] = "clustering never succeeded on the selected bands";
    return result;
}

Json cmd_synth(const RunConfig& config, const std::string& name, std::ostream& log) {
    require(config.scene, "scene spec (--spec)");
    require(name, "output name");
    const fs::path out = prepare_out(config);
    const SceneSpec spec = scene_from_json(read_json_file(config.scene));
    const auto [cube, mask] = synth_scene(spec, config.seed);
    write_envi(cube, out / (name + ".hdr"), out / (name + ".raw"), Interleave::BSQ, EnviDataType::Float64);
    write_mask_set(out, name + "_mask", mask);
    write_json(out / (name + "_legend.json"), legend_json(mask));
    log << "synth: " << cube.rows() << "x" << cube.cols() << "x" << cube.bands() << " scene written to "
        << out.string() << "\n";

    Json counts = Json::object();
    for (const auto& [label, pname] : mask.palette()) counts[pname] = mask.count(static_cast<std::uint8_t>(label));
    Json result;
    result["command"] = "synth";
    result["status"] = "ok";
    result["cube"] = (out / (name + ".hdr")).string();
    result["mask"] = (out / (name + "_mask.hdr")).string();
    result["label_counts"] = counts;
    return result;
}

Json inspect_model(const std::string& path) {
    require(path, "model file (--model)");
    const PipelineModel m = load_model(path);
    Json j;
    j["model"] = path;
    j["format_version"] = kModelFormatVersion;
    j["workflow"] = to_string(m.workflow);
    j["source_bands"] = m.wavelengths_nm.size();
    j["bands"] = m.bands;
    j["bands_nm"] = nm_list(m.wavelengths_nm, m.bands);
    if (m.pca) {
        Json rows = Json::array();
        double cumulative = 0.0;
        for (Eigen::Index c = 0; c < m.pca->components(); ++c) {
            cumulative += m.pca->explained_variance_ratio(c);
            rows.push_back({{"component", c + 1},
                            {"variance", m.pca->explained_variance(c)},
                            {"ratio", m.pca->explained_variance_ratio(c)},
                            {"cumulative", cumulative},
                            {"abs_correlation", m.components->correlations(c)}});
        }
        j["explained_variance"] = rows;
        std::vector<int> sel;
        for (int c : m.components->selected) sel.push_back(c + 1);
        j["selected_components"] = sel;
        j["selection_rule"] = describe(m.components->rule);
    }
    if (m.cluster) {
        j["k"] = m.cluster->k();
        Json cls = Json::array();
        for (auto c : m.cluster->class_of_cluster) cls.push_back(to_string(c));
        j["cluster_classes"] = cls;
    }
    if (m.kernel_pls) {
        j["kernel"] = to_json(m.kernel_pls->kernel);
        j["components"] = m.kernel_pls->components;
        j["classes"] = m.kernel_pls->classes;
        j["support_size"] = m.kernel_pls->support.rows();
    }
    return j;
}

std::string format_inspection(const Json& s) {
    std::ostringstream out;
    out << "model:          " << s.at("model").get<std::string>() << "\n";
    out << "format version: " << s.at("format_version").get<int>() << "\n";
    out << "workflow:       " << s.at("workflow").get<std::string>() << "\n";
    const auto bands = s.at("bands").get<std::vector<int>>();
    const auto nm = s.at("bands_nm").get<std::vector<double>>();
    out << "bands:          " << bands.size() << " of " << s.at("source_bands").get<std::size_t>() << "\n";
    if (bands.size() < s.at("source_bands").get<std::size_t>()) {
        out << "selected nm:   ";
        for (double v : nm) out << " " << fixed(v, 2);
        out << "\n";
    }
    if (s.contains("explained_variance")) {
        out << "\n  PC    variance     ratio  cumulative  |rho|\n";
        for (const auto& row : s.at("explained_variance")) {
            out << std::setw(4) << row.at("component").get<int>() << std::setw(12)
                << fixed(row.at("variance").get<double>(), 4) << std::setw(10)
                << fixed(row.at("ratio").get<double>(), 4) << std::setw(12)
                << fixed(row.at("cumulative").get<double>(), 4) << std::setw(7)
                << fixed(row.at("abs_correlation").get<double>(), 3) << "\n";
        }
        out << "\nselected PCs:   ";
        const auto sel = s.at("selected_components").get<std::vector<int>>();
        for (std::size_t i = 0; i < sel.size(); ++i) out << (i ? ", " : "") << sel[i];
        out << " (" << s.at("selection_rule").get<std::string>() << ")\n";
    }
    if (s.contains("k")) {
        out << "clusters:       k = " << s.at("k").get<int>() << " [";
        const auto cls = s.at("cluster_classes").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < cls.size(); ++i) out << (i ? ", " : "") << cls[i];
        out << "]\n";
    }
    if (s.contains("kernel")) {
        const Json& k = s.at("kernel");
        out << "kernel:         " << k.at("family").get<std::string>() << ", lengthscale "
            << k.at("lengthscale").get<double>() << ", variance " << k.at("variance").get<double>() << "\n";
        out << "latent vars:    " << s.at("components").get<int>() << "\n";
        out << "support:        " << s.at("support_size").get<int>() << " spectra\n";
    }
    return out.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hyperspectral mite detection: PCA clustering, kernel PLS and band selection",
                 "spectral-sift"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string cube;
    std::string mask;
    std::string model;
    std::string workflow;
    std::string selector;
    std::vector<int> round_order;
    std::string spec;
    std::string name = "scene";
    bool json_mode = false;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--out", out_dir, "output directory");
    };
    CLI::App* fit = app.add_subcommand("fit", "fit a model on a labeled calibration cube");
    common(fit);
    fit->add_option("--cube", cube, "calibration ENVI header");
    fit->add_option("--mask", mask, "calibration label mask (ENVI header or PGM)");
    fit->add_option("--workflow", workflow, "kmeans or kfpls");
    fit->add_option("--band-selection", selector, "none, r2 or covproc");

    CLI::App* apply = app.add_subcommand("apply", "classify a cube with a fitted model");
    common(apply);
    apply->add_option("--model", model, "model file written by fit");
    apply->add_option("--cube", cube, "ENVI header of the cube to classify");
    apply->add_option("--mask", mask, "optional ground-truth mask for scoring");

    CLI::App* select = app.add_subcommand("select-bands", "rank bands for mite discrimination");
    common(select);
    select->add_option("--cube", cube, "calibration ENVI header");
    select->add_option("--mask", mask, "calibration label mask");
    select->add_option("--method", selector, "r2 or covproc");
    select->add_option("--round-order", round_order, "COVPROC rounds to concatenate, e.g. 3,2")->delimiter(',');

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene from a JSON description");
    common(synth);
    synth->add_option("--spec", spec, "scene description");
    synth->add_option("--name", name, "file stem for the outputs");

    CLI::App* inspect = app.add_subcommand("inspect", "summarize a model file");
    common(inspect);
    inspect->add_option("--model", model, "model file");
    inspect->add_flag("--json", json_mode, "print the summary as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "spectral-sift: " << e.what() << "\n" << "run 'spectral-sift --help' for usage\n";
        return kExitInput;
    }
    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->get_help_ptr()->count() > 0) {
            out << sub->help();
            return kExitOk;
        }
    }

    try {
        RunConfig config;
        if (!config_path.empty()) {
            config = run_config_from_json(read_json_file(config_path));
        }
        if (seed) config.seed = *seed;
        if (!out_dir.empty()) config.out = out_dir;
        if (!cube.empty()) config.cube = cube;
        if (!mask.empty()) config.mask = mask;
        if (!model.empty()) config.model = model;
        if (!spec.empty()) config.scene = spec;
        if (!workflow.empty()) config.workflow = workflow_from_string(workflow);
        if (!selector.empty()) config.band_selection = band_selection_from_string(selector);
        if (!round_order.empty()) config.selection.round_order = round_order;
        config.validate();

        Json result;
        if (fit->parsed()) {
            result = cmd_fit(config, err);
        } else if (apply->parsed()) {
            result = cmd_apply(config, err);
        } else if (select->parsed()) {
            if (config.band_selection == BandSelectionMode::None) config.band_selection = BandSelectionMode::R2;
            result = cmd_select_bands(config, err);
        } else if (synth->parsed()) {
            result = cmd_synth(config, name, err);
        } else {
            const Json summary = inspect_model(config.model);
            if (json_mode) {
                out << summary.dump(2) << "\n";
            } else {
                out << format_inspection(summary);
            }
            return kExitOk;
        }
        out << result.dump(2) << "\n";
        if (result.value("status", "ok") != "ok") {
            err << "spectral-sift: " << result.value("error", "model-quality failure") << "\n";
            return kExitModelQuality;
        }
        return kExitOk;
    } catch (const ModelQualityError& e) {
        err << "spectral-sift: " << e.what() << "\n";
        return kExitModelQuality;
    } catch (const std::exception& e) {
        err << "spectral-sift: " << e.what() << "\n";
        return kExitInput;
    }
}

} // namespace spectral_sift
