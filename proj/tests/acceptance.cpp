// Acceptance checks: one PASS/FAIL line per criterion. Criteria 1-11 decide
// the exit status; 12 needs a real dataset and is skipped without one.

#include "spectral_sift/commands.hpp"
#include "spectral_sift/envi.hpp"
#include "spectral_sift/kernel_flows.hpp"
#include "spectral_sift/pca.hpp"
#include "spectral_sift/pipeline.hpp"
#include "spectral_sift/pls.hpp"
#include "spectral_sift/wavesel.hpp"

#include "test_util.hpp"
#include "wavesel_oracles.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

using namespace spectral_sift;
using namespace spectral_sift::testing;

namespace {

struct Outcome {
    enum Kind { Pass, Fail, Skip } kind = Fail;
    std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Skip, std::move(d)}; }

std::string num(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string data_file(const std::string& rel) { return std::string(SPECTRAL_SIFT_DATA_DIR) + "/" + rel; }

int cli(std::vector<std::string> args, std::string* stdout_text = nullptr) {
    args.insert(args.begin(), "spectral-sift");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (stdout_text) *stdout_text = out.str();
    return code;
}

std::pair<HyperCube, LabelMask> scene(const std::string& name, std::uint64_t seed) {
    return synth_scene(scene_from_json(read_json_file(data_file("scenes/" + name))), seed);
}

std::string band_list(const BandList& b) {
    std::string s = "[";
    for (std::size_t i = 0; i < b.size(); ++i) s += (i ? "," : "") + std::to_string(b[i]);
    return s + "]";
}

// 1
Outcome pca_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> cols_d(2, 20);
    double worst_var = 0.0, worst_rec = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const int cols = cols_d(rng);
        const int rows = std::uniform_int_distribution<int>(cols + 1, 50)(rng);
        Matrix x = random_matrix(rng, rows, cols);
        x = x.rowwise() - x.colwise().mean();
        const PcaFit fit = fit_pca(x, cols);
        worst_var = std::max(worst_var, (fit.model.explained_variance - covariance_eigenvalues(x)).cwiseAbs().maxCoeff());
        ComponentSelection all;
        for (int c = 0; c < cols; ++c) all.selected.push_back(c);
        worst_rec = std::max(worst_rec, (reconstruct(fit.model, fit.scores, all) - x).cwiseAbs().maxCoeff());
    }
    const double secs = seconds_since(t0);
    const std::string d = "max variance error " + num(worst_var) + ", max reconstruction error " + num(worst_rec) +
                          ", " + num(secs) + " s";
    return worst_var < 1e-8 && worst_rec < 1e-8 && secs < 5.0 ? pass(d) : fail(d);
}

// 2
Outcome simpls_vs_least_squares() {
    std::mt19937_64 rng(102);
    double worst = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const int p = std::uniform_int_distribution<int>(1, 10)(rng);
        const int n = std::uniform_int_distribution<int>(p + 5, 60)(rng);
        const int m = std::uniform_int_distribution<int>(1, 3)(rng);
        const Matrix x = random_matrix(rng, n, p);
        const Matrix y = x * random_matrix(rng, p, m) + 0.5 * random_matrix(rng, n, m);
        const PlsModel model = fit_simpls(x, y, p);
        const Matrix oracle = ols_coefficients(autoscale(x), y);
        worst = std::max(worst, (regression_coefficients(model) - oracle).cwiseAbs().maxCoeff());
    }
    const std::string d = "max coefficient difference " + num(worst);
    return worst < 1e-6 ? pass(d) : fail(d);
}

// 3
Outcome r2_forward_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(103);
    int mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = std::uniform_int_distribution<int>(15, 40)(rng);
        const Matrix x = random_matrix(rng, n, 12);
        const Vector latent = x.col(trial % 10) - 0.8 * x.col((trial * 7 + 3) % 10) + random_vector(rng, n);
        const Vector y = (latent.array() > 0.0).cast<double>();
        if (y.sum() < 2 || y.sum() > n - 2) continue;
        R2ForwardOptions o;
        o.excluded = exclude_tail(12, 2);
        o.initial = init_by_correlation(x, y, 3, o.excluded);
        o.target = 8;
        o.max_components = 5;
        const std::set<int> excluded(o.excluded.begin(), o.excluded.end());
        const auto init_oracle = correlation_oracle(x, y, 3, excluded);
        const SelectionReport r = r2_forward_select(x, y, o);
        if (o.initial != init_oracle || r.selected != greedy_oracle(x, y, init_oracle, 8, excluded, 5)) ++mismatches;
    }
    const double secs = seconds_since(t0);
    const std::string d = std::to_string(mismatches) + " of 50 instances differ, " + num(secs) + " s";
    return mismatches == 0 && secs < 30.0 ? pass(d) : fail(d);
}

// 4
Outcome covproc_oracle_check() {
    std::mt19937_64 rng(104);
    double worst_alpha = 0.0, worst_cov = 0.0;
    int argmax_errors = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = std::uniform_int_distribution<int>(12, 40)(rng);
        const Matrix x = random_matrix(rng, n, 10);
        Vector y(n);
        for (int i = 0; i < n; ++i) y(i) = i % 2;
        const CovprocOptions opt{4, {}, true};
        const BandList usable = usable_bands(10, {});
        CovprocState state = covproc_prepare(x, y, opt);
        for (int r = 1; r <= 4; ++r) {
            const Matrix before = state.x;
            const CovprocStep step = covproc_step(state, usable, r);
            if (step.round.bands.empty()) break;
            // direct alpha for every prefix of the ranking
            const Vector w = before.transpose() * state.y;
            Vector t = Vector::Zero(n);
            double best = -1.0;
            std::size_t best_len = 0;
            for (std::size_t i = 0; i < step.round.ranking.size(); ++i) {
                const int b = step.round.ranking[i];
                t += w(b) * before.col(b);
                const double alpha = std::abs(state.y.dot(t)) / t.dot(t);
                worst_alpha = std::max(worst_alpha, std::abs(alpha - step.round.alpha[i]));
                if (alpha > best) {
                    best = alpha;
                    best_len = i + 1;
                }
            }
            if (best_len != step.round.bands.size()) ++argmax_errors;
            worst_cov = std::max(worst_cov, (state.x.transpose() * step.score).cwiseAbs().maxCoeff());
        }
    }
    const std::string d = "max alpha error " + num(worst_alpha) + ", " + std::to_string(argmax_errors) +
                          " argmax mismatches, max |X't| after deflation " + num(worst_cov);
    return worst_alpha < 1e-10 && argmax_errors == 0 && worst_cov < 1e-8 ? pass(d) : fail(d);
}

// 5
Outcome kernel_properties() {
    std::mt19937_64 rng(105);
    const KernelFamily families[] = {KernelFamily::Gaussian, KernelFamily::Laplacian, KernelFamily::Matern52,
                                     KernelFamily::Cauchy};
    double min_eig = 0.0;
    int asym = 0, diag = 0;
    for (int set = 0; set < 100; ++set) {
        const int n = std::uniform_int_distribution<int>(2, 30)(rng);
        const int d = std::uniform_int_distribution<int>(1, 6)(rng);
        const Matrix x = random_matrix(rng, n, d);
        for (KernelFamily f : families) {
            const KernelSpec spec{f, std::exp(std::uniform_real_distribution<double>(-1.5, 1.5)(rng)),
                                  std::uniform_real_distribution<double>(0.1, 3.0)(rng)};
            const Matrix k = kernel_matrix(spec, x, x);
            if (k != k.transpose()) ++asym;
            for (int i = 0; i < n; ++i) diag += k(i, i) != spec.variance;
            min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix>(k).eigenvalues().minCoeff());
        }
    }
    const std::string d = "min eigenvalue " + num(min_eig) + ", " + std::to_string(asym) + " asymmetric, " +
                          std::to_string(diag) + " diagonal mismatches";
    return min_eig >= -1e-8 && asym == 0 && diag == 0 ? pass(d) : fail(d);
}

struct Labeled {
    Matrix x;
    std::vector<int> labels;
};

Labeled ring_benchmark() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    Labeled d;
    const int classes = 4, per = 40;
    d.x.resize(classes * per, 2);
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per; ++i) {
            const double th = 2.0 * M_PI * c / classes;
            d.x(c * per + i, 0) = 3.0 * std::cos(th) + 0.3 * g(rng);
            d.x(c * per + i, 1) = 3.0 * std::sin(th) + 0.3 * g(rng);
            d.labels.push_back(c);
        }
    return d;
}

// 6
Outcome kernel_flows() {
    std::vector<std::string> notes;
    bool ok = true;

    // Richardson consistency of the finite-difference gradient.
    std::mt19937_64 rng(106);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const int classes = 2 + inst % 3;
        Labeled d;
        d.x = random_matrix(rng, classes * 12, 3);
        for (int i = 0; i < d.x.rows(); ++i) {
            d.labels.push_back(i % classes);
            d.x(i, 0) += 1.5 * (i % classes);
        }
        const KfObjective obj(d.x, d.labels);
        const KfSample s = obj.draw(rng, 0.5);
        const KernelFamily fam = inst % 2 ? KernelFamily::Matern52 : KernelFamily::Gaussian;
        const KernelSpec spec{fam, obj.median_distance() * std::exp(std::uniform_real_distribution<double>(-1, 1)(rng)), 1.0};
        const double h = 1e-4;
        const double d1 = obj.gradient(spec, 2, s, h);
        const double d2 = obj.gradient(spec, 2, s, h / 2);
        const double rich = (4.0 * d2 - d1) / 3.0;
        worst = std::max(worst, std::abs(d1 - rich) / std::max(std::abs(rich), 1e-8));
    }
    notes.push_back("Richardson rel. error " + num(worst));
    ok = ok && worst < 1e-3;

    // Grid-search oracle for the best lengthscale on the ring benchmark.
    const Labeled ring = ring_benchmark();
    const KfObjective obj(ring.x, ring.labels);
    KfConfig cfg;
    const int flow_a = std::min(10, static_cast<int>(std::lround(cfg.batch_ratio * ring.x.rows())) / 2 - 1);
    std::mt19937_64 grid_rng(2024);
    std::vector<KfSample> samples;
    for (int i = 0; i < 200; ++i) samples.push_back(obj.draw(grid_rng, cfg.batch_ratio));
    double best_l = 0.0, best_rho = std::numeric_limits<double>::infinity();
    for (double ll = std::log(0.1); ll <= std::log(100.0); ll += 0.05) {
        double sum = 0.0;
        int used = 0;
        for (const auto& s : samples) {
            try {
                sum += obj.loss(KernelSpec{KernelFamily::Gaussian, std::exp(ll), 1.0}, flow_a, s);
                ++used;
            } catch (const DegenerateData&) {
            }
        }
        if (used > 0 && sum / used < best_rho) {
            best_rho = sum / used;
            best_l = std::exp(ll);
        }
    }

    cfg.seed = 3;
    const KfResult res = kf_optimize(ring.x, ring.labels, KernelSpec{KernelFamily::Gaussian, 10.0 * best_l, 1.0},
                                     cfg, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const double ratio = res.kernel.lengthscale / best_l;
    notes.push_back("grid optimum " + num(best_l) + ", learned " + num(res.kernel.lengthscale));
    ok = ok && ratio >= 0.5 && ratio <= 2.0;

    int increases = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 9; i < res.loss_trace.size(); ++i) {
        double ma = 0.0;
        for (std::size_t j = i - 9; j <= i; ++j) ma += res.loss_trace[j];
        ma /= 10.0;
        if (ma > prev) ++increases;
        prev = ma;
    }
    notes.push_back(std::to_string(increases) + " increases of the 10-iteration moving average");
    ok = ok && increases == 0;

    std::string d;
    for (std::size_t i = 0; i < notes.size(); ++i) d += (i ? "; " : "") + notes[i];
    return ok ? pass(d) : fail(d);
}

// 7
Outcome xor_nonlinearity() {
    // Blobs tight enough that the four clusters never touch, so perfect
    // training accuracy is attainable by a nonlinear boundary.
    std::mt19937_64 rng(107);
    std::normal_distribution<double> g(0.0, 0.3);
    const double cx[4] = {0, 3, 0, 3}, cy[4] = {0, 0, 3, 3};
    const int cls[4] = {0, 1, 1, 0};
    Labeled d;
    const int per = 50;
    d.x.resize(4 * per, 2);
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < per; ++i) {
            d.x(c * per + i, 0) = cx[c] + g(rng);
            d.x(c * per + i, 1) = cy[c] + g(rng);
            d.labels.push_back(cls[c]);
        }
    auto accuracy = [&](const std::vector<int>& pred) {
        int hit = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == d.labels[i];
        return static_cast<double>(hit) / static_cast<double>(pred.size());
    };
    const PlsModel lin = fit_simpls(d.x, encode_da(d.labels).indicators, 2);
    const double lin_acc = accuracy(decode_da(predict(lin, d.x), {0, 1}));

    const KfObjective obj(d.x, d.labels);
    KfConfig cfg;
    cfg.seed = 5;
    const KfResult kf = kf_optimize(d.x, d.labels, KernelSpec{KernelFamily::Gaussian, obj.median_distance(), 1.0}, cfg,
                                    {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const KernelPlsModel km = fit_kernel_pls(d.x, d.labels, kf.kernel, kf.components);
    const double k_acc = accuracy(classify(km, d.x).labels);
    const std::string detail = "linear PLS-DA " + num(100 * lin_acc) + "%, Gaussian kernel PLS-DA " +
                               num(100 * k_acc) + "% (lengthscale " + num(kf.kernel.lengthscale) + ", " +
                               std::to_string(kf.components) + " LVs)";
    return lin_acc <= 0.8 && k_acc == 1.0 ? pass(detail) : fail(detail);
}

// 8
Outcome escalation() {
    const auto [cube, mask] = scene("calibration.json", 1);
    RunConfig config;
    config.seed = 1;
    FitResult fit;
    try {
        fit = fit_pipeline(cube, mask, config);
    } catch (const Error& e) {
        return fail(std::string("fit failed: ") + e.what());
    }
    const Json& attempts = fit.diagnostics["clustering"]["attempts"];
    bool failed_at_3 = false;
    std::string trail;
    for (const auto& a : attempts) {
        const int k = a["k"];
        const int errors = a["false_alarms"].get<int>() + a["missed_mites"].get<int>();
        trail += (trail.empty() ? "" : ", ") + ("k=" + std::to_string(k) + ": " + std::to_string(errors) + " errors");
        if (k == 3 && errors > 0) failed_at_3 = true;
    }
    const int final_k = fit.diagnostics["clustering"]["final_k"];
    const Json& last = attempts.back();
    const bool clean = last["false_alarms"] == 0 && last["missed_mites"] == 0;
    const std::string d = trail + "; selected PCs " + fit.diagnostics["selected_components"].dump();
    return failed_at_3 && final_k == 4 && clean ? pass(d) : fail(d);
}

// 9
Outcome end_to_end(const TempDir& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string d = dir.str("e2e");
    int code = cli({"synth", "--spec", data_file("scenes/calibration.json"), "--seed", "1", "--out", d + "/cal",
                    "--name", "calibration"});
    code |= cli({"synth", "--spec", data_file("scenes/test.json"), "--seed", "101", "--out", d + "/test", "--name",
                 "test"});
    code |= cli({"fit", "--config", data_file("configs/demo_fit.json"), "--cube", d + "/cal/calibration.hdr",
                 "--mask", d + "/cal/calibration_mask.hdr", "--seed", "1", "--out", d + "/model"});
    std::string out;
    code |= cli({"apply", "--model", d + "/model/model.json", "--cube", d + "/test/test.hdr", "--mask",
                 d + "/test/test_mask.hdr", "--out", d + "/apply"},
                &out);
    const double secs = seconds_since(t0);
    if (code != 0) return fail("a command exited with a non-zero status");
    const Json ev = Json::parse(out)["evaluation"];
    const double recall = ev["recall"];
    const int fa = ev["false_alarms"];
    const std::string detail = "mite recall " + num(100 * recall) + "% (" + ev["detected"].dump() + "/" +
                               ev["mite_pixels"].dump() + "), " + std::to_string(fa) + " false-alarm pixels, " +
                               num(secs) + " s";
    return recall == 1.0 && fa <= 2 && secs < 60.0 ? pass(detail) : fail(detail);
}

// 10
Outcome band_minimality() {
    const auto [cube, mask] = scene("bands20.json", 1);
    RunConfig base = run_config_from_json(read_json_file(data_file("configs/bands20.json")));
    base.seed = 1;
    const std::set<int> informative{2, 6, 9, 13};
    auto covers = [&](const BandList& b) {
        const std::set<int> s(b.begin(), b.end());
        return std::includes(s.begin(), s.end(), informative.begin(), informative.end());
    };
    std::vector<std::string> notes;
    bool ok = true;
    for (BandSelectionMode mode : {BandSelectionMode::R2, BandSelectionMode::Covproc}) {
        RunConfig c = base;
        c.band_selection = mode;
        const BandSelectionResult r = run_band_selection(cube, mask, c);
        const bool good = r.stop_satisfied && covers(r.final_bands) && r.final_bands.size() <= 6;
        notes.push_back(to_string(mode) + " " + band_list(r.final_bands));
        ok = ok && good;
    }
    RunConfig c = base;
    c.band_selection = BandSelectionMode::Covproc;
    c.selection.round_order = {3, 2};
    const BandSelectionResult r = run_band_selection(cube, mask, c);
    notes.push_back("covproc rounds 3+2 " + band_list(r.final_bands));
    ok = ok && r.stop_satisfied && r.final_bands.size() == 4 && covers(r.final_bands);
    std::string d;
    for (std::size_t i = 0; i < notes.size(); ++i) d += (i ? "; " : "") + notes[i];
    return ok ? pass(d) : fail(d);
}

// 11
Outcome determinism(const TempDir& dir) {
    auto run_all = [&](const std::string& root) {
        int code = 0;
        code |= cli({"synth", "--spec", data_file("scenes/calibration.json"), "--seed", "4", "--out", root + "/synth"});
        const std::string cube = root + "/synth/scene.hdr", mask = root + "/synth/scene_mask.hdr";
        code |= cli({"fit", "--cube", cube, "--mask", mask, "--seed", "4", "--out", root + "/fit"});
        write_text(root + "/kf.json", R"({"workflow": "kfpls", "kfpls": {"samples_per_class": 30, "iterations": 10}})");
        code |= cli({"fit", "--config", root + "/kf.json", "--cube", cube, "--mask", mask, "--seed", "4", "--out",
                     root + "/fit_kf"});
        code |= cli({"fit", "--band-selection", "r2", "--cube", cube, "--mask", mask, "--seed", "4", "--out",
                     root + "/fit_sel"});
        code |= cli({"apply", "--model", root + "/fit/model.json", "--cube", cube, "--out", root + "/apply"});
        code |= cli({"apply", "--model", root + "/fit_kf/model.json", "--cube", cube, "--out", root + "/apply_kf"});
        code |= cli({"select-bands", "--method", "r2", "--cube", cube, "--mask", mask, "--seed", "4", "--out",
                     root + "/sel_r2"});
        code |= cli({"select-bands", "--method", "covproc", "--round-order", "3,2", "--cube", cube, "--mask", mask,
                     "--seed", "4", "--out", root + "/sel_cov"});
        std::string text;
        code |= cli({"inspect", "--model", root + "/fit/model.json", "--json"}, &text);
        write_text(root + "/inspect.json", text);
        std::filesystem::remove(root + "/kf.json");
        return code;
    };
    const std::string a = dir.str("det_a"), b = dir.str("det_b");
    std::filesystem::create_directories(a);
    std::filesystem::create_directories(b);
    if (run_all(a) != 0 || run_all(b) != 0) return fail("a command exited with a non-zero status");
    auto ha = tree_hashes(a), hb = tree_hashes(b);
    // inspect output embeds the model path, which differs between the two roots
    auto strip = [](auto& v) { std::erase_if(v, [](const auto& e) { return e.first == "inspect.json"; }); };
    const std::string ia = slurp(a + "/inspect.json"), ib = slurp(b + "/inspect.json");
    Json ja = Json::parse(ia), jb = Json::parse(ib);
    ja.erase("model");
    jb.erase("model");
    strip(ha);
    strip(hb);
    const bool same = ha == hb && ja == jb;
    const std::string d = std::to_string(ha.size() + 1) + " output files compared over 9 command runs";
    return same ? pass(d) : fail(d + ": outputs differ");
}

// 12
Outcome dataset_replication(const TempDir& dir) {
    const char* root = std::getenv("SPECTRAL_SIFT_DATASET");
    if (!root || !*root) return skip("set SPECTRAL_SIFT_DATASET to a directory with calibration.hdr and a mask");
    const std::filesystem::path base(root);
    const auto cube_path = base / "calibration.hdr";
    std::filesystem::path mask_path = base / "calibration_mask.hdr";
    if (!std::filesystem::exists(mask_path)) mask_path = base / "calibration_mask.pgm";
    if (!std::filesystem::exists(cube_path) || !std::filesystem::exists(mask_path))
        return skip("dataset directory lacks calibration.hdr or calibration_mask.{hdr,pgm}");
    try {
        const HyperCube cube = read_envi(cube_path, envi_data_path(cube_path));
        const LabelMask mask = read_mask(mask_path);
        std::vector<std::string> notes;
        bool ok = true;
        RunConfig config;
        const FitResult fit = fit_pipeline(cube, mask, config);
        const Json pcs = fit.diagnostics["selected_components"];
        const int k = fit.diagnostics["clustering"]["final_k"];
        notes.push_back("PCs " + pcs.dump() + ", k=" + std::to_string(k));
        std::vector<int> sel = pcs.get<std::vector<int>>();
        std::sort(sel.begin(), sel.end());
        ok = ok && sel == std::vector<int>{2, 3} && k == 4;

        RunConfig cov = config;
        cov.band_selection = BandSelectionMode::Covproc;
        cov.selection.round_order = {3, 2};
        const BandSelectionResult r = run_band_selection(cube, mask, cov);
        const double targets[] = {492.97, 498.8, 507.56, 796.74};
        int matched = 0;
        for (double t : targets)
            for (int b : r.final_bands)
                if (std::abs(cube.wavelengths_nm()[static_cast<std::size_t>(b)] - t) <= 5.0) {
                    ++matched;
                    break;
                }
        notes.push_back("covproc 3+2: " + std::to_string(r.final_bands.size()) + " bands, " +
                        std::to_string(matched) + "/4 near the reported wavelengths");
        ok = ok && r.final_bands.size() == 4 && matched == 4;

        RunConfig r2 = config;
        r2.band_selection = BandSelectionMode::R2;
        const BandSelectionResult rr = run_band_selection(cube, mask, r2);
        notes.push_back("r2 forward: " + std::to_string(rr.final_bands.size()) + " bands");
        ok = ok && rr.stop_satisfied && rr.final_bands.size() <= 12;
        (void)dir;
        std::string d;
        for (std::size_t i = 0; i < notes.size(); ++i) d += (i ? "; " : "") + notes[i];
        return ok ? pass(d) : fail(d);
    } catch (const std::exception& e) {
        return fail(std::string("error: ") + e.what());
    }
}

} // namespace

int main() {
    TempDir dir("acceptance");
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"PCA matches the covariance eigen-decomposition", pca_oracle},
        {"SIMPLS at full rank matches least squares", simpls_vs_least_squares},
        {"R2-forward selection matches the greedy oracle", r2_forward_oracle},
        {"COVPROC alphas, prefixes and deflation", covproc_oracle_check},
        {"kernel Gram matrices are symmetric PSD", kernel_properties},
        {"Kernel Flows gradient, loss trace and lengthscale recovery", kernel_flows},
        {"kernel PLS-DA separates XOR classes", xor_nonlinearity},
        {"supervised K-means fails at k=3 and succeeds at k=4", escalation},
        {"end-to-end mite detection on a differently lit scene", [&] { return end_to_end(dir); }},
        {"band selection stops at a small superset", band_minimality},
        {"every command is deterministic", [&] { return determinism(dir); }},
        {"dataset replication (optional)", [&] { return dataset_replication(dir); }},
    };
    int blocking_failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const char* tag = o.kind == Outcome::Pass ? "PASS" : o.kind == Outcome::Skip ? "SKIP" : "FAIL";
        std::cout << tag << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail << std::endl;
        if (o.kind == Outcome::Fail && i < 11) ++blocking_failures;
    }
    std::cout << (blocking_failures == 0 ? "all blocking criteria passed"
                                         : std::to_string(blocking_failures) + " blocking criteria failed")
              << std::endl;
    return blocking_failures == 0 ? 0 : 1;
}
