#include "spectral_sift/serialize.hpp"

#include "spectral_sift/error.hpp"

#include <sodium.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace spectral_sift {

static_assert(std::endian::native == std::endian::little,
              "model files store little-endian doubles; big-endian hosts need a swap here");

namespace {

constexpr int kB64 = sodium_base64_VARIANT_ORIGINAL;

template <typename T>
std::vector<T> list_field(const Json& j, const char* key) {
    return field<std::vector<T>>(j, key);
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& item : j.items()) {
        if (!allowed.contains(item.key())) {
            throw FormatError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

} // namespace

std::string base64_encode(const std::vector<unsigned char>& bytes) {
    std::string out(sodium_base64_encoded_len(bytes.size(), kB64), '\0');
    sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), kB64);
    out.resize(std::strlen(out.c_str()));
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    std::vector<unsigned char> out(text.size() / 4 * 3 + 3);
    std::size_t len = 0;
    const char* end = nullptr;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end,
                          kB64) != 0 ||
        end != text.data() + text.size()) {
        throw FormatError("invalid base64 payload");
    }
    out.resize(len);
    return out;
}

Json matrix_to_json(const Matrix& m) {
    std::vector<unsigned char> bytes(static_cast<std::size_t>(m.size()) * sizeof(double));
    std::size_t pos = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            std::memcpy(bytes.data() + pos, &v, sizeof(double));
            pos += sizeof(double);
        }
    }
    Json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = base64_encode(bytes);
    return j;
}

Matrix matrix_from_json(const Json& j) {
    const auto rows = field<std::int64_t>(j, "rows");
    const auto cols = field<std::int64_t>(j, "cols");
    if (rows < 0 || cols < 0) {
        throw FormatError("negative matrix dimension");
    }
    const auto bytes = base64_decode(field<std::string>(j, "data"));
    if (bytes.size() != static_cast<std::size_t>(rows * cols) * sizeof(double)) {
        throw FormatError("matrix payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(rows * cols * 8));
    }
    Matrix m(rows, cols);
    std::size_t pos = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            double v = 0.0;
            std::memcpy(&v, bytes.data() + pos, sizeof(double));
            m(r, c) = v;
            pos += sizeof(double);
        }
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    return matrix_to_json(Matrix(v));
}

Vector vector_from_json(const Json& j) {
    const Matrix m = matrix_from_json(j);
    if (m.cols() != 1) {
        throw FormatError("expected a column vector");
    }
    return m.col(0);
}

Json number_or_null(double value) {
    return std::isfinite(value) ? Json(value) : Json(nullptr);
}

double number_from_json(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number()) throw FormatError("expected a number or null");
    return j.get<double>();
}

Json to_json(const ScaleModel& model) {
    Json j;
    j["means"] = vector_to_json(model.means);
    j["stds"] = vector_to_json(model.stds);
    std::vector<int> degenerate;
    for (std::size_t b = 0; b < model.degenerate.size(); ++b) {
        if (model.degenerate[b]) degenerate.push_back(static_cast<int>(b));
    }
    j["degenerate_bands"] = degenerate;
    j["epsilon"] = model.epsilon;
    return j;
}

ScaleModel scale_from_json(const Json& j) {
    ScaleModel m;
    m.means = vector_from_json(field<Json>(j, "means"));
    m.stds = vector_from_json(field<Json>(j, "stds"));
    if (m.means.size() != m.stds.size()) {
        throw FormatError("scale means and stds differ in length");
    }
    m.degenerate.assign(static_cast<std::size_t>(m.means.size()), false);
    for (int b : list_field<int>(j, "degenerate_bands")) {
        if (b < 0 || b >= m.means.size()) throw FormatError("degenerate band out of range");
        m.degenerate[static_cast<std::size_t>(b)] = true;
    }
    m.epsilon = field<double>(j, "epsilon");
    for (Eigen::Index b = 0; b < m.stds.size(); ++b) {
        if (!(m.stds(b) > 0.0)) throw FormatError("scale std must be positive");
    }
    return m;
}

Json to_json(const PcaModel& model) {
    Json j;
    j["loadings"] = matrix_to_json(model.loadings);
    j["singular_values"] = vector_to_json(model.singular_values);
    j["explained_variance"] = vector_to_json(model.explained_variance);
    j["explained_variance_ratio"] = vector_to_json(model.explained_variance_ratio);
    return j;
}

PcaModel pca_from_json(const Json& j) {
    PcaModel m;
    m.loadings = matrix_from_json(field<Json>(j, "loadings"));
    m.singular_values = vector_from_json(field<Json>(j, "singular_values"));
    m.explained_variance = vector_from_json(field<Json>(j, "explained_variance"));
    m.explained_variance_ratio = vector_from_json(field<Json>(j, "explained_variance_ratio"));
    const auto k = m.loadings.cols();
    if (m.singular_values.size() != k || m.explained_variance.size() != k ||
        m.explained_variance_ratio.size() != k) {
        throw FormatError("PCA component counts disagree");
    }
    return m;
}

Json to_json(const ComponentSelection& selection) {
    Json j;
    j["selected"] = selection.selected;
    j["correlations"] = vector_to_json(selection.correlations);
    if (const auto* top = std::get_if<TopN>(&selection.rule)) {
        j["rule"] = {{"kind", "top_n"}, {"n", top->n}};
    } else {
        j["rule"] = {{"kind", "threshold"},
                     {"min_abs_correlation", std::get<Threshold>(selection.rule).min_abs_correlation}};
    }
    return j;
}

ComponentSelection selection_from_json(const Json& j) {
    ComponentSelection s;
    s.selected = list_field<int>(j, "selected");
    s.correlations = vector_from_json(field<Json>(j, "correlations"));
    const Json rule = field<Json>(j, "rule");
    const auto kind = field<std::string>(rule, "kind");
    if (kind == "top_n") {
        s.rule = TopN{field<int>(rule, "n")};
    } else if (kind == "threshold") {
        s.rule = Threshold{field<double>(rule, "min_abs_correlation")};
    } else {
        throw FormatError("unknown selection rule '" + kind + "'");
    }
    for (int c : s.selected) {
        if (c < 0 || c >= s.correlations.size()) throw FormatError("selected component out of range");
    }
    return s;
}

Json to_json(const KernelSpec& spec) {
    return {{"family", to_string(spec.family)},
            {"lengthscale", spec.lengthscale},
            {"variance", spec.variance}};
}

KernelSpec kernel_spec_from_json(const Json& j) {
    KernelSpec s;
    try {
        s.family = kernel_family_from_string(field<std::string>(j, "family"));
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what());
    }
    s.lengthscale = field<double>(j, "lengthscale");
    s.variance = field<double>(j, "variance");
    try {
        s.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what());
    }
    return s;
}

Json to_json(const ClusterModel& model) {
    Json j;
    j["k"] = model.k();
    j["centroids"] = matrix_to_json(model.centroids);
    Json classes = Json::array();
    for (auto c : model.class_of_cluster) classes.push_back(to_string(c));
    j["class_of_cluster"] = classes;
    return j;
}

ClusterModel cluster_from_json(const Json& j) {
    ClusterModel m;
    m.centroids = matrix_from_json(field<Json>(j, "centroids"));
    for (const auto& name : list_field<std::string>(j, "class_of_cluster")) {
        m.class_of_cluster.push_back(cluster_class_from_string(name));
    }
    if (field<int>(j, "k") != m.k() || static_cast<int>(m.class_of_cluster.size()) != m.k()) {
        throw FormatError("cluster count disagrees with centroids");
    }
    if (m.k() < 2) throw FormatError("cluster model needs k >= 2");
    return m;
}

Json to_json(const ClusterDiagnostics& diagnostics) {
    Json attempts = Json::array();
    for (const auto& a : diagnostics.attempts) {
        attempts.push_back({{"k", a.k},
                            {"false_alarms", a.false_alarms},
                            {"missed_mites", a.missed_mites},
                            {"inertia", a.inertia}});
    }
    return {{"attempts", attempts},
            {"final_k", diagnostics.final_k},
            {"final_inertia", diagnostics.final_inertia},
            {"success", diagnostics.success}};
}

Json to_json(const KernelPlsModel& model) {
    Json j;
    j["kernel"] = to_json(model.kernel);
    j["components"] = model.components;
    j["classes"] = model.classes;
    j["support"] = matrix_to_json(model.support);
    j["centering_column_means"] = vector_to_json(model.centering.column_means);
    j["centering_grand_mean"] = model.centering.grand_mean;
    j["dual"] = matrix_to_json(model.dual);
    j["y_mean"] = vector_to_json(model.y_mean);
    j["r2"] = vector_to_json(model.r2);
    return j;
}

KernelPlsModel kernel_pls_from_json(const Json& j) {
    KernelPlsModel m;
    m.kernel = kernel_spec_from_json(field<Json>(j, "kernel"));
    m.components = field<int>(j, "components");
    m.classes = list_field<int>(j, "classes");
    m.support = matrix_from_json(field<Json>(j, "support"));
    m.centering.column_means = vector_from_json(field<Json>(j, "centering_column_means"));
    m.centering.grand_mean = field<double>(j, "centering_grand_mean");
    m.dual = matrix_from_json(field<Json>(j, "dual"));
    m.y_mean = vector_from_json(field<Json>(j, "y_mean"));
    m.r2 = vector_from_json(field<Json>(j, "r2"));
    const auto n = m.support.rows();
    const auto c = static_cast<Eigen::Index>(m.classes.size());
    if (m.centering.column_means.size() != n || m.dual.rows() != n || m.dual.cols() != c ||
        m.y_mean.size() != c) {
        throw FormatError("kernel PLS model dimensions disagree");
    }
    return m;
}

Json to_json(const SelectionReport& report, const std::vector<double>& wavelengths_nm) {
    auto nm_of = [&](const BandList& bands) {
        Json out = Json::array();
        for (int b : bands) {
            out.push_back(b >= 0 && static_cast<std::size_t>(b) < wavelengths_nm.size()
                              ? Json(wavelengths_nm[static_cast<std::size_t>(b)])
                              : Json(nullptr));
        }
        return out;
    };
    Json j;
    j["method"] = to_string(report.method);
    j["excluded"] = report.excluded;
    j["selected"] = report.selected;
    j["selected_nm"] = nm_of(report.selected);
    if (report.method == SelectionMethod::R2Forward) {
        j["initial"] = report.initial;
        j["initial_r2"] = number_or_null(report.initial_r2);
        Json trace = Json::array();
        for (double v : report.r2_trace) trace.push_back(number_or_null(v));
        j["trace"] = trace;
    } else {
        Json rounds = Json::array();
        for (const auto& r : report.rounds) {
            Json alpha = Json::array();
            for (double v : r.alpha) alpha.push_back(number_or_null(v));
            rounds.push_back({{"round", r.number},
                              {"bands", r.bands},
                              {"nm", nm_of(r.bands)},
                              {"chosen", r.bands.size()},
                              {"alpha", alpha},
                              {"ranking", r.ranking}});
        }
        j["rounds"] = rounds;
    }
    j["stopped_early"] = report.stopped_early;
    j["warnings"] = report.warnings;
    return j;
}

SceneSpec scene_from_json(const Json& j) {
    if (!j.is_object()) throw FormatError("scene must be a JSON object");
    reject_unknown(j,
                   {"rows", "cols", "wavelengths", "populations", "background", "blobs", "noise_sigma",
                    "gain", "shadow", "layered", "description"},
                   "scene");
    SceneSpec s;
    s.rows = field<int>(j, "rows");
    s.cols = field<int>(j, "cols");
    const Json wl = field<Json>(j, "wavelengths");
    if (wl.is_array()) {
        s.wavelengths_nm = wl.get<std::vector<double>>();
    } else {
        reject_unknown(wl, {"count", "first_nm", "last_nm"}, "wavelengths");
        s.wavelengths_nm = uniform_wavelengths(field<int>(wl, "count"), field<double>(wl, "first_nm"),
                                               field<double>(wl, "last_nm"));
    }
    for (const auto& pj : field<Json>(j, "populations")) {
        reject_unknown(pj, {"name", "label", "knots"}, "population");
        Population p;
        p.name = field<std::string>(pj, "name");
        const int label = field<int>(pj, "label");
        if (label < 0 || label > 255) throw FormatError("population label must be 0..255");
        p.label = static_cast<std::uint8_t>(label);
        for (const auto& k : field<std::vector<std::vector<double>>>(pj, "knots")) {
            if (k.size() != 2) throw FormatError("knot must be [nm, value]");
            p.knots.push_back({k[0], k[1]});
        }
        s.populations.push_back(std::move(p));
    }
    s.background = field<std::string>(j, "background");
    if (j.contains("blobs")) {
        for (const auto& bj : j.at("blobs")) {
            reject_unknown(bj, {"population", "shape", "center", "radius", "half_size"}, "blob");
            Blob b;
            b.population = field<std::string>(bj, "population");
            const auto shape = field<std::string>(bj, "shape");
            const auto center = field<std::vector<double>>(bj, "center");
            if (center.size() != 2) throw FormatError("blob center must be [row, col]");
            b.center_row = center[0];
            b.center_col = center[1];
            if (shape == "disk") {
                b.shape = BlobShape::Disk;
                b.radius = field<double>(bj, "radius");
            } else if (shape == "rect") {
                b.shape = BlobShape::Rect;
                const auto half = field<std::vector<double>>(bj, "half_size");
                if (half.size() != 2) throw FormatError("half_size must be [rows, cols]");
                b.half_height = half[0];
                b.half_width = half[1];
            } else {
                throw FormatError("unknown blob shape '" + shape + "'");
            }
            s.blobs.push_back(std::move(b));
        }
    }
    if (j.contains("noise_sigma")) s.noise_sigma = field<double>(j, "noise_sigma");
    if (j.contains("gain")) s.gain = field<double>(j, "gain");
    if (j.contains("layered")) s.layered = field<bool>(j, "layered");
    if (j.contains("shadow")) {
        const Json sh = j.at("shadow");
        reject_unknown(sh, {"axis", "strength"}, "shadow");
        ShadowField f;
        const auto axis = field<std::string>(sh, "axis");
        if (axis == "rows") {
            f.axis = ShadowField::Axis::Rows;
        } else if (axis == "cols") {
            f.axis = ShadowField::Axis::Cols;
        } else {
            throw FormatError("shadow axis must be 'rows' or 'cols'");
        }
        f.strength = field<double>(sh, "strength");
        s.shadow = f;
    }
    return s;
}

std::string kf_trace_csv(const KfResult& result) {
    std::ostringstream out;
    out.precision(17);
    out << "iteration,mean_rho,lengthscale\n";
    for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
        out << i << ',' << result.loss_trace[i] << ',' << result.lengthscale_trace[i] << '\n';
    }
    return out.str();
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("'" + path + "' is not valid JSON: " + e.what());
    }
}

} // namespace spectral_sift
