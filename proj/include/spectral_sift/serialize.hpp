#pragma once

#include "spectral_sift/cluster.hpp"
#include "spectral_sift/kernel.hpp"
#include "spectral_sift/kernel_flows.hpp"
#include "spectral_sift/pca.hpp"
#include "spectral_sift/preprocess.hpp"
#include "spectral_sift/synth.hpp"
#include "spectral_sift/wavesel.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace spectral_sift {

using Json = nlohmann::ordered_json;

/// Matrices travel as {"rows", "cols", "data"} where data is base64 of the
/// row-major little-endian float64 values.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

std::string base64_encode(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

/// Non-finite doubles become null.
Json number_or_null(double value);
double number_from_json(const Json& j);

Json to_json(const ScaleModel& model);
ScaleModel scale_from_json(const Json& j);

Json to_json(const PcaModel& model);
PcaModel pca_from_json(const Json& j);

Json to_json(const ComponentSelection& selection);
ComponentSelection selection_from_json(const Json& j);

Json to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const Json& j);

Json to_json(const ClusterModel& model);
ClusterModel cluster_from_json(const Json& j);

Json to_json(const ClusterDiagnostics& diagnostics);

Json to_json(const KernelPlsModel& model);
KernelPlsModel kernel_pls_from_json(const Json& j);

/// Report with band indices and their centers in nm.
Json to_json(const SelectionReport& report, const std::vector<double>& wavelengths_nm);

/// Scene description; see the bundled scenes under data/scenes for the format.
SceneSpec scene_from_json(const Json& j);

/// Loss trace as CSV with header `iteration,mean_rho,lengthscale`.
std::string kf_trace_csv(const KfResult& result);

/// Reads and parses a JSON file; parse failures become FormatError.
Json read_json_file(const std::string& path);

/// Typed field access that reports the key path on failure.
template <typename T>
T field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw FormatError(std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("field '") + key + "': " + e.what());
    }
}

} // namespace spectral_sift
