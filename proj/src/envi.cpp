#include "spectral_sift/envi.hpp"

#include "spectral_sift/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace spectral_sift {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string normalize_key(const std::string& key) {
    std::string out;
    bool pending_space = false;
    for (char c : trim(key)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

int parse_int(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw FormatError("header key '" + key + "' expects an integer, got '" + value + "'");
    }
    return out;
}

double parse_double(const std::string& text) {
    const std::string v = trim(text);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw FormatError("expected a number, got '" + text + "'");
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    write_bytes(path, text.data(), text.size());
}

template <typename T>
T load_scalar(const unsigned char* p, bool swap) {
    unsigned char tmp[sizeof(T)];
    std::memcpy(tmp, p, sizeof(T));
    if (swap) std::reverse(tmp, tmp + sizeof(T));
    T v;
    std::memcpy(&v, tmp, sizeof(T));
    return v;
}

double load_value(const unsigned char* p, EnviDataType type, bool swap) {
    switch (type) {
    case EnviDataType::UInt8: return *p;
    case EnviDataType::Int16: return load_scalar<std::int16_t>(p, swap);
    case EnviDataType::Int32: return load_scalar<std::int32_t>(p, swap);
    case EnviDataType::Float32: return load_scalar<float>(p, swap);
    case EnviDataType::Float64: return load_scalar<double>(p, swap);
    case EnviDataType::UInt16: return load_scalar<std::uint16_t>(p, swap);
    case EnviDataType::UInt32: return load_scalar<std::uint32_t>(p, swap);
    case EnviDataType::Int64: return static_cast<double>(load_scalar<std::int64_t>(p, swap));
    case EnviDataType::UInt64: return static_cast<double>(load_scalar<std::uint64_t>(p, swap));
    }
    throw FormatError("unsupported data type");
}

template <typename T>
void store_scalar(unsigned char* p, T v) {
    std::memcpy(p, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(p, p + sizeof(T));
    }
}

// Position of element (row, col, band) in an on-disk layout.
std::size_t disk_index(Interleave il, std::size_t r, std::size_t c, std::size_t b,
                       std::size_t lines, std::size_t samples, std::size_t bands) {
    switch (il) {
    case Interleave::BSQ: return (b * lines + r) * samples + c;
    case Interleave::BIL: return (r * bands + b) * samples + c;
    case Interleave::BIP: return (r * samples + c) * bands + b;
    }
    return 0;
}

struct Payload {
    EnviHeader header;
    std::vector<double> bip;  // row, col, band
};

Payload read_payload(const fs::path& header_path, const fs::path& data_path) {
    Payload out;
    out.header = parse_envi_header(read_text(header_path));
    const EnviHeader& h = out.header;
    const auto bytes = read_bytes(data_path);
    const std::size_t need = h.payload_bytes();
    if (bytes.size() != h.header_offset + need) {
        throw FormatError("payload " + data_path.string() + " has " + std::to_string(bytes.size()) +
                          " bytes, header implies " + std::to_string(h.header_offset + need));
    }
    const bool swap = (h.byte_order == ByteOrder::Big) != (std::endian::native == std::endian::big);
    const std::size_t lines = static_cast<std::size_t>(h.lines);
    const std::size_t samples = static_cast<std::size_t>(h.samples);
    const std::size_t bands = static_cast<std::size_t>(h.bands);
    const std::size_t width = byte_size(h.data_type);
    out.bip.resize(lines * samples * bands);
    const unsigned char* base = bytes.data() + h.header_offset;
    std::size_t k = 0;
    for (std::size_t r = 0; r < lines; ++r) {
        for (std::size_t c = 0; c < samples; ++c) {
            for (std::size_t b = 0; b < bands; ++b) {
                const std::size_t i = disk_index(h.interleave, r, c, b, lines, samples, bands);
                const double v = load_value(base + i * width, h.data_type, swap);
                if (!std::isfinite(v)) {
                    throw FormatError("non-finite value in payload at line " + std::to_string(r) +
                                      ", sample " + std::to_string(c) + ", band " + std::to_string(b));
                }
                out.bip[k++] = v;
            }
        }
    }
    return out;
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out = "{";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out + "}";
}

} // namespace

std::size_t byte_size(EnviDataType type) {
    switch (type) {
    case EnviDataType::UInt8: return 1;
    case EnviDataType::Int16:
    case EnviDataType::UInt16: return 2;
    case EnviDataType::Int32:
    case EnviDataType::UInt32:
    case EnviDataType::Float32: return 4;
    case EnviDataType::Float64:
    case EnviDataType::Int64:
    case EnviDataType::UInt64: return 8;
    }
    throw FormatError("unsupported data type");
}

std::string EnviHeader::extra_value(const std::string& key) const {
    const std::string wanted = normalize_key(key);
    for (const auto& [k, v] : extra) {
        if (normalize_key(k) == wanted) return v;
    }
    return {};
}

std::vector<std::string> split_envi_list(const std::string& value) {
    std::string v = trim(value);
    if (v.size() < 2 || v.front() != '{' || v.back() != '}') {
        throw FormatError("expected a {...} list, got '" + value + "'");
    }
    v = v.substr(1, v.size() - 2);
    std::vector<std::string> items;
    if (trim(v).empty()) return items;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = v.find(',', start);
        items.push_back(trim(v.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

EnviHeader parse_envi_header(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || normalize_key(line) != "envi") {
        throw FormatError("header does not start with 'ENVI'");
    }
    EnviHeader h;
    bool have_samples = false;
    bool have_lines = false;
    bool have_bands = false;
    bool have_type = false;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("malformed header line " + std::to_string(line_no) + ": '" + line + "'");
        }
        const std::string raw_key = trim(line.substr(0, eq));
        const std::string key = normalize_key(raw_key);
        if (key.empty()) {
            throw FormatError("empty key on header line " + std::to_string(line_no));
        }
        std::string value = trim(line.substr(eq + 1));
        if (!value.empty() && value.front() == '{') {
            while (value.find('}') == std::string::npos) {
                std::string more;
                if (!std::getline(in, more)) {
                    throw FormatError("unterminated list for header key '" + raw_key + "'");
                }
                ++line_no;
                value += "\n" + more;
            }
            value = trim(value);
            if (value.back() != '}') {
                throw FormatError("trailing text after list for header key '" + raw_key + "'");
            }
        }

        if (key == "samples") {
            h.samples = parse_int(key, value);
            have_samples = true;
        } else if (key == "lines") {
            h.lines = parse_int(key, value);
            have_lines = true;
        } else if (key == "bands") {
            h.bands = parse_int(key, value);
            have_bands = true;
        } else if (key == "data type") {
            const int code = parse_int(key, value);
            switch (code) {
            case 1: case 2: case 3: case 4: case 5: case 12: case 13: case 14: case 15:
                h.data_type = static_cast<EnviDataType>(code);
                break;
            default:
                throw FormatError("unsupported ENVI data type code " + std::to_string(code));
            }
            have_type = true;
        } else if (key == "interleave") {
            h.interleave = interleave_from_string(value);
        } else if (key == "byte order") {
            const int order = parse_int(key, value);
            if (order != 0 && order != 1) {
                throw FormatError("byte order must be 0 or 1");
            }
            h.byte_order = static_cast<ByteOrder>(order);
        } else if (key == "header offset") {
            const int offset = parse_int(key, value);
            if (offset < 0) throw FormatError("negative header offset");
            h.header_offset = static_cast<std::size_t>(offset);
        } else if (key == "wavelength") {
            h.wavelengths.clear();
            for (const auto& item : split_envi_list(value)) {
                h.wavelengths.push_back(parse_double(item));
            }
        } else {
            h.extra.emplace_back(raw_key, value);
        }
    }
    if (!have_samples || !have_lines || !have_bands || !have_type) {
        throw FormatError("header lacks one of samples/lines/bands/data type");
    }
    if (h.samples < 1 || h.lines < 1 || h.bands < 1) {
        throw FormatError("header dimensions must be >= 1");
    }
    if (!h.wavelengths.empty() && h.wavelengths.size() != static_cast<std::size_t>(h.bands)) {
        throw FormatError("header lists " + std::to_string(h.wavelengths.size()) +
                          " wavelengths for " + std::to_string(h.bands) + " bands");
    }
    return h;
}

std::string format_envi_header(const EnviHeader& h) {
    std::ostringstream out;
    out << "ENVI\n";
    out << "samples = " << h.samples << "\n";
    out << "lines = " << h.lines << "\n";
    out << "bands = " << h.bands << "\n";
    out << "header offset = " << h.header_offset << "\n";
    out << "data type = " << static_cast<int>(h.data_type) << "\n";
    out << "interleave = " << to_string(h.interleave) << "\n";
    out << "byte order = " << static_cast<int>(h.byte_order) << "\n";
    for (const auto& [k, v] : h.extra) {
        out << k << " = " << v << "\n";
    }
    if (!h.wavelengths.empty()) {
        std::vector<std::string> items;
        items.reserve(h.wavelengths.size());
        for (double w : h.wavelengths) items.push_back(format_double(w));
        out << "wavelength = " << join_list(items) << "\n";
    }
    return out.str();
}

fs::path envi_data_path(const fs::path& header_path) {
    fs::path stem = header_path;
    stem.replace_extension();
    for (const char* ext : {"", ".raw", ".img", ".dat", ".bsq", ".bil", ".bip"}) {
        fs::path candidate = stem;
        candidate += ext;
        if (candidate != header_path && fs::exists(candidate)) return candidate;
    }
    fs::path fallback = stem;
    fallback += ".raw";
    return fallback;
}

HyperCube read_envi(const fs::path& header_path, const fs::path& data_path) {
    Payload p = read_payload(header_path, data_path);
    if (p.header.wavelengths.empty()) {
        throw FormatError(header_path.string() + " has no wavelength list");
    }
    for (std::size_t b = 1; b < p.header.wavelengths.size(); ++b) {
        if (!(p.header.wavelengths[b] > p.header.wavelengths[b - 1])) {
            throw FormatError("wavelengths in " + header_path.string() + " are not strictly increasing");
        }
    }
    return HyperCube(p.header.lines, p.header.samples, std::move(p.header.wavelengths),
                     std::move(p.bip), p.header.interleave);
}

void write_envi(const HyperCube& cube, const fs::path& header_path, const fs::path& data_path,
                Interleave interleave, EnviDataType data_type) {
    if (data_type != EnviDataType::Float32 && data_type != EnviDataType::Float64) {
        throw InvalidArgument("cubes are written as float32 or float64 only");
    }
    EnviHeader h;
    h.samples = cube.cols();
    h.lines = cube.rows();
    h.bands = cube.bands();
    h.data_type = data_type;
    h.interleave = interleave;
    h.byte_order = ByteOrder::Little;
    h.wavelengths = cube.wavelengths_nm();
    h.extra = {{"file type", "ENVI Standard"}, {"wavelength units", "Nanometers"}};

    const std::size_t lines = static_cast<std::size_t>(h.lines);
    const std::size_t samples = static_cast<std::size_t>(h.samples);
    const std::size_t bands = static_cast<std::size_t>(h.bands);
    const std::size_t width = byte_size(data_type);
    std::vector<unsigned char> bytes(h.payload_bytes());
    for (std::size_t r = 0; r < lines; ++r) {
        for (std::size_t c = 0; c < samples; ++c) {
            for (std::size_t b = 0; b < bands; ++b) {
                const std::size_t i = disk_index(interleave, r, c, b, lines, samples, bands);
                const double v = cube.at(static_cast<int>(r), static_cast<int>(c), static_cast<int>(b));
                if (data_type == EnviDataType::Float32) {
                    store_scalar(bytes.data() + i * width, static_cast<float>(v));
                } else {
                    store_scalar(bytes.data() + i * width, v);
                }
            }
        }
    }
    write_bytes(data_path, bytes.data(), bytes.size());
    write_text(header_path, format_envi_header(h));
}

void write_mask_envi(const LabelMask& mask, const fs::path& header_path, const fs::path& data_path) {
    EnviHeader h;
    h.samples = mask.cols();
    h.lines = mask.rows();
    h.bands = 1;
    h.data_type = EnviDataType::UInt8;
    h.interleave = Interleave::BSQ;
    std::vector<std::string> values;
    std::vector<std::string> names;
    for (const auto& [label, name] : mask.palette()) {
        values.push_back(std::to_string(label));
        names.push_back(name);
    }
    h.extra = {{"file type", "ENVI Standard"},
               {"label values", join_list(values)},
               {"class names", join_list(names)},
               {"unlabeled value", std::to_string(kUnlabeled)}};
    write_bytes(data_path, mask.labels().data(), mask.labels().size());
    write_text(header_path, format_envi_header(h));
}

LabelMask read_mask_envi(const fs::path& header_path, const fs::path& data_path) {
    Payload p = read_payload(header_path, data_path);
    if (p.header.bands != 1) {
        throw FormatError("label file must have exactly one band");
    }
    std::vector<std::uint8_t> labels;
    labels.reserve(p.bip.size());
    for (double v : p.bip) {
        if (v < 0 || v > 255 || v != std::floor(v)) {
            throw FormatError("label values must be integers in [0, 255]");
        }
        labels.push_back(static_cast<std::uint8_t>(v));
    }
    std::map<int, std::string> palette;
    const std::string names_raw = p.header.extra_value("class names");
    const std::string values_raw = p.header.extra_value("label values");
    if (!names_raw.empty()) {
        const auto names = split_envi_list(names_raw);
        std::vector<int> values;
        if (!values_raw.empty()) {
            for (const auto& item : split_envi_list(values_raw)) {
                values.push_back(parse_int("label values", item));
            }
        } else {
            for (std::size_t i = 0; i < names.size(); ++i) values.push_back(static_cast<int>(i));
        }
        if (values.size() != names.size()) {
            throw FormatError("'label values' and 'class names' differ in length");
        }
        for (std::size_t i = 0; i < names.size(); ++i) palette[values[i]] = names[i];
    } else {
        palette = LabelMask::default_palette();
    }
    for (std::uint8_t label : labels) {
        if (label != kUnlabeled && !palette.contains(label)) {
            palette[label] = "class " + std::to_string(label);
        }
    }
    return LabelMask(p.header.lines, p.header.samples, std::move(labels), std::move(palette));
}

void write_mask_pgm(const LabelMask& mask, const fs::path& path) {
    std::string head = "P5\n" + std::to_string(mask.cols()) + " " + std::to_string(mask.rows()) + "\n255\n";
    std::string bytes = head;
    bytes.append(reinterpret_cast<const char*>(mask.labels().data()), mask.labels().size());
    write_text(path, bytes);
}

LabelMask read_mask_pgm(const fs::path& path) {
    const auto bytes = read_bytes(path);
    std::size_t pos = 0;
    // Reads the next whitespace-delimited header token, skipping comments.
    auto token = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
        return t;
    };
    if (token() != "P5") {
        throw FormatError(path.string() + " is not a binary PGM (P5)");
    }
    const int cols = parse_int("width", token());
    const int rows = parse_int("height", token());
    const int maxval = parse_int("maxval", token());
    if (maxval != 255) {
        throw FormatError("PGM label files must have maxval 255");
    }
    ++pos;  // single whitespace before raster
    const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (rows < 1 || cols < 1 || bytes.size() != pos + n) {
        throw FormatError("PGM raster size does not match its header");
    }
    std::vector<std::uint8_t> labels(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    auto palette = LabelMask::default_palette();
    for (std::uint8_t label : labels) {
        if (label != kUnlabeled && !palette.contains(label)) {
            palette[label] = "class " + std::to_string(label);
        }
    }
    return LabelMask(rows, cols, std::move(labels), std::move(palette));
}

LabelMask read_mask(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") return read_mask_pgm(path);
    return read_mask_envi(path, envi_data_path(path));
}

} // namespace spectral_sift
