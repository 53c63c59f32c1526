#ifndef MAXSTABLE_IO_HPP
#define MAXSTABLE_IO_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "maxstable/extract.hpp"
#include "maxstable/grid.hpp"
#include "maxstable/shape.hpp"
#include "maxstable/variogram.hpp"

namespace maxstable {

inline constexpr const char* library_version = "0.1.0";

/// Grammar/usage error carrying the offending position in the input string.
class UsageError : public std::runtime_error {
public:
    UsageError(const std::string& message, std::size_t position)
        : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Shortest decimal string that round-trips the 64-bit float exactly.
inline std::string format_double(double v) {
    char buffer[40];
    auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
    return std::string(buffer, result.ptr);
}

inline double parse_double(std::string_view s, std::size_t position_hint = 0) {
    double value = 0.0;
    auto result = std::from_chars(s.data(), s.data() + s.size(), value);
    if (result.ec != std::errc() || result.ptr != s.data() + s.size())
        throw UsageError("invalid number '" + std::string(s) + "'", position_hint);
    return value;
}

// ---------------------------------------------------------------------------
// Field CSV: "# grid: <d> <min...> <max...> <step...>", "# kind: field|profile",
// then one row per lattice point in row-major order, coordinates then value.
// ---------------------------------------------------------------------------

inline void write_field_csv(const std::filesystem::path& path, const Field& field,
                            const std::string& kind = "field") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    const Grid& g = field.grid;
    out << "# grid: " << g.dim;
    for (int d = 0; d < g.dim; ++d) out << ' ' << format_double(g.origin[d]);
    for (int d = 0; d < g.dim; ++d) out << ' ' << format_double(g.max_coord(d));
    for (int d = 0; d < g.dim; ++d) out << ' ' << format_double(g.step[d]);
    out << '\n';
    out << "# kind: " << kind << '\n';
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        Point p = g.coord(g.unflatten(i));
        for (int d = 0; d < g.dim; ++d) out << format_double(p[d]) << ',';
        out << format_double(field.values[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline Field read_field_csv(const std::filesystem::path& path, std::string* kind_out = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("# grid: ", 0) != 0)
        throw std::runtime_error("missing grid header in " + path.string());
    std::istringstream header(line.substr(8));
    int dim = 0;
    header >> dim;
    if (dim != 1 && dim != 2) throw std::runtime_error("bad grid dimension in " + path.string());
    std::vector<std::string> tokens;
    std::string token;
    while (header >> token) tokens.push_back(token);
    if (tokens.size() != static_cast<std::size_t>(3 * dim))
        throw std::runtime_error("bad grid header in " + path.string());
    Grid grid;
    grid.dim = dim;
    for (int d = 0; d < dim; ++d) {
        double lo = parse_double(tokens[d]);
        double hi = parse_double(tokens[dim + d]);
        double st = parse_double(tokens[2 * dim + d]);
        grid.origin[d] = lo;
        grid.step[d] = st;
        grid.npts[d] = static_cast<int>(std::lround((hi - lo) / st)) + 1;
    }
    if (dim == 1) grid.npts[1] = 1;

    if (!std::getline(in, line) || line.rfind("# kind: ", 0) != 0)
        throw std::runtime_error("missing kind header in " + path.string());
    if (kind_out) *kind_out = line.substr(8);

    Field field(grid);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= field.values.size()) throw std::runtime_error("too many rows in " + path.string());
        std::size_t last_comma = line.rfind(',');
        if (last_comma == std::string::npos) throw std::runtime_error("bad row in " + path.string());
        field.values[row] = parse_double(std::string_view(line).substr(last_comma + 1));
        ++row;
    }
    if (row != field.values.size()) throw std::runtime_error("missing rows in " + path.string());
    return field;
}

// ---------------------------------------------------------------------------
// Grid spec grammar: "min:max:step" per dimension, dimensions joined by ';'.
// ---------------------------------------------------------------------------

inline Grid parse_grid_spec(const std::string& spec) {
    std::vector<std::array<double, 3>> dims;
    std::size_t start = 0;
    while (start <= spec.size()) {
        std::size_t end = spec.find(';', start);
        std::string part = spec.substr(start, end == std::string::npos ? std::string::npos : end - start);
        std::size_t c1 = part.find(':');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos : part.find(':', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw UsageError("grid spec needs min:max:step", start);
        dims.push_back({parse_double(part.substr(0, c1), start),
                        parse_double(part.substr(c1 + 1, c2 - c1 - 1), start + c1 + 1),
                        parse_double(part.substr(c2 + 1), start + c2 + 1)});
        if (end == std::string::npos) break;
        start = end + 1;
    }
    if (dims.empty() || dims.size() > 2)
        throw UsageError("grid spec must have 1 or 2 dimensions", 0);
    try {
        if (dims.size() == 1) return Grid::line(dims[0][0], dims[0][1], dims[0][2]);
        return Grid::plane(dims[0][0], dims[0][1], dims[0][2], dims[1][0], dims[1][1], dims[1][2]);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what(), 0);
    }
}

inline std::string grid_spec_string(const Grid& g) {
    std::string s;
    for (int d = 0; d < g.dim; ++d) {
        if (d) s += ';';
        s += format_double(g.origin[d]) + ":" + format_double(g.max_coord(d)) + ":" +
             format_double(g.step[d]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Model grammar: family:key=value,key=value with sigma matrices as
// [[a]] or [[a,b],[c,d]]. Examples: "gaussian:beta=1.0",
// "smith:sigma=[[1,0],[0,1]]", "fbm:alpha=1.0,scale=1.0".
// ---------------------------------------------------------------------------

namespace detail {

inline std::map<std::string, std::string> parse_key_values(const std::string& body,
                                                           std::size_t offset) {
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    while (pos < body.size()) {
        int depth = 0;
        std::size_t end = pos;
        while (end < body.size() && (depth > 0 || body[end] != ',')) {
            if (body[end] == '[') ++depth;
            if (body[end] == ']') --depth;
            ++end;
        }
        std::string item = body.substr(pos, end - pos);
        std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("expected key=value", offset + pos);
        kv[item.substr(0, eq)] = item.substr(eq + 1);
        pos = end + (end < body.size() ? 1 : 0);
    }
    return kv;
}

inline SpdMatrix parse_sigma(const std::string& text, std::size_t offset) {
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    auto expect = [&](char c) {
        if (pos >= text.size() || text[pos] != c)
            throw UsageError(std::string("expected '") + c + "' in sigma matrix", offset + pos);
        ++pos;
    };
    expect('[');
    while (pos < text.size() && text[pos] == '[') {
        ++pos;
        std::vector<double> row;
        for (;;) {
            std::size_t end = pos;
            while (end < text.size() && text[end] != ',' && text[end] != ']') ++end;
            row.push_back(parse_double(std::string_view(text).substr(pos, end - pos), offset + pos));
            pos = end;
            if (pos < text.size() && text[pos] == ',') { ++pos; continue; }
            break;
        }
        expect(']');
        rows.push_back(std::move(row));
        if (pos < text.size() && text[pos] == ',') ++pos;
    }
    expect(']');
    if (pos != text.size()) throw UsageError("trailing characters after sigma matrix", offset + pos);
    if (rows.size() == 1 && rows[0].size() == 1)
        return SpdMatrix::from_rows(1, {{{rows[0][0], 0.0}, {0.0, 1.0}}});
    if (rows.size() == 2 && rows[0].size() == 2 && rows[1].size() == 2)
        return SpdMatrix::from_rows(2, {{{rows[0][0], rows[0][1]}, {rows[1][0], rows[1][1]}}});
    throw UsageError("sigma must be a 1x1 or 2x2 matrix", offset);
}

inline double require_number(const std::map<std::string, std::string>& kv, const std::string& key,
                             const std::string& what) {
    auto it = kv.find(key);
    if (it == kv.end()) throw UsageError(what + " requires " + key + "=...", 0);
    return parse_double(it->second);
}

} // namespace detail

inline VariogramModel parse_variogram_model(const std::string& spec) {
    std::size_t colon = spec.find(':');
    if (colon == std::string::npos) throw UsageError("variogram spec needs family:params", 0);
    std::string family = spec.substr(0, colon);
    auto kv = detail::parse_key_values(spec.substr(colon + 1), colon + 1);
    try {
        if (family == "fbm") {
            double alpha = detail::require_number(kv, "alpha", "fbm");
            double scale = kv.count("scale") ? parse_double(kv.at("scale")) : 1.0;
            return VariogramModel::fbm(scale, alpha);
        }
        if (family == "smith") {
            auto it = kv.find("sigma");
            if (it == kv.end()) throw UsageError("smith requires sigma=[[...]]", colon + 1);
            return VariogramModel::smith(detail::parse_sigma(it->second, colon + 1));
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what(), 0);
    }
    throw UsageError("unknown variogram family '" + family + "'", 0);
}

inline ShapeModel parse_shape_model(const std::string& spec) {
    std::size_t colon = spec.find(':');
    if (colon == std::string::npos) throw UsageError("shape spec needs family:params", 0);
    std::string family = spec.substr(0, colon);
    auto kv = detail::parse_key_values(spec.substr(colon + 1), colon + 1);
    try {
        if (family == "gaussian") {
            if (kv.count("sigma")) return ShapeModel::gaussian_sigma(detail::parse_sigma(kv.at("sigma"), colon + 1));
            return ShapeModel::gaussian(detail::require_number(kv, "beta", "gaussian"));
        }
        if (family == "exponential")
            return ShapeModel::exponential(detail::require_number(kv, "beta", "exponential"));
        if (family == "student")
            return ShapeModel::student(detail::require_number(kv, "beta", "student"),
                                       detail::require_number(kv, "nu", "student"));
        if (family == "tabulated") {
            auto it = kv.find("file");
            if (it == kv.end()) throw UsageError("tabulated requires file=...", colon + 1);
            return ShapeModel::tabulated(read_field_csv(it->second));
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what(), 0);
    }
    throw UsageError("unknown shape family '" + family + "'", 0);
}

// ---------------------------------------------------------------------------
// Run manifests and event-set directories.
// ---------------------------------------------------------------------------

struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string version = library_version;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::map<std::string, double> counters;
    double wall_time_seconds = 0.0;
};

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["config"] = manifest.config;
    j["seed"] = manifest.seed;
    j["library_version"] = manifest.version;
    j["inputs"] = manifest.inputs;
    j["outputs"] = manifest.outputs;
    j["counters"] = manifest.counters;
    j["wall_time_seconds"] = manifest.wall_time_seconds;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << j.dump(2) << '\n';
}

inline nlohmann::json read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::runtime_error("no manifest.json in " + dir.string());
    nlohmann::json j;
    in >> j;
    return j;
}

namespace detail {
inline std::string sample_file_name(std::size_t i) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "sample-%06zu.csv", i);
    return buffer;
}
} // namespace detail

inline void write_event_set(const std::filesystem::path& dir, const ExtremeEventSet& set) {
    std::filesystem::create_directories(dir / "samples");
    nlohmann::json j;
    j["kind"] = set.kind == ExtremeEventSet::Kind::increments ? "increments" : "shapes";
    j["threshold"] = set.threshold;
    j["anchor"] = {set.anchor[0], set.anchor[1]};
    j["inner_region"] = {{"lo", {set.inner_region.lo[0], set.inner_region.lo[1]}},
                         {"hi", {set.inner_region.hi[0], set.inner_region.hi[1]}}};
    j["dilation"] = {{"lo", {set.dilation.lo[0], set.dilation.lo[1]}},
                     {"hi", {set.dilation.hi[0], set.dilation.hi[1]}}};
    j["output_window"] = {{"lo", {set.output_window.lo[0], set.output_window.lo[1]}},
                          {"hi", {set.output_window.hi[0], set.output_window.hi[1]}}};
    j["selection"] = set.selection;
    j["exceedances"] = set.exceedances;
    j["dropped_boundary"] = set.dropped_boundary;
    j["excluded_zero"] = set.excluded_zero;
    std::ofstream out(dir / "events.json");
    if (!out) throw std::runtime_error("cannot write events.json in " + dir.string());
    out << j.dump(2) << '\n';
    const std::string kind = set.kind == ExtremeEventSet::Kind::increments ? "field" : "profile";
    for (std::size_t i = 0; i < set.samples.size(); ++i)
        write_field_csv(dir / "samples" / detail::sample_file_name(i), set.samples[i], kind);
}

inline ExtremeEventSet read_event_set(const std::filesystem::path& dir) {
    std::ifstream in(dir / "events.json");
    if (!in) throw std::runtime_error("no events.json in " + dir.string());
    nlohmann::json j;
    in >> j;
    ExtremeEventSet set;
    set.kind = j.at("kind") == "increments" ? ExtremeEventSet::Kind::increments
                                            : ExtremeEventSet::Kind::shapes;
    set.threshold = j.at("threshold").get<double>();
    set.anchor = {j.at("anchor")[0].get<int>(), j.at("anchor")[1].get<int>()};
    auto box = [&](const char* name) {
        IndexBox b;
        b.lo = {j.at(name).at("lo")[0].get<int>(), j.at(name).at("lo")[1].get<int>()};
        b.hi = {j.at(name).at("hi")[0].get<int>(), j.at(name).at("hi")[1].get<int>()};
        return b;
    };
    set.inner_region = box("inner_region");
    set.dilation = box("dilation");
    set.output_window = box("output_window");
    set.selection = j.at("selection").get<std::vector<std::size_t>>();
    set.exceedances = j.at("exceedances").get<std::vector<double>>();
    set.dropped_boundary = j.at("dropped_boundary").get<std::size_t>();
    set.excluded_zero = j.at("excluded_zero").get<std::size_t>();
    for (std::size_t i = 0; i < set.selection.size(); ++i)
        set.samples.push_back(read_field_csv(dir / "samples" / detail::sample_file_name(i)));
    return set;
}

} // namespace maxstable

#endif
