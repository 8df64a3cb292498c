#include "lensdepth/io.hpp"

#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "lensdepth/error.hpp"

namespace lensdepth::io {

Shape parse_shape(std::string_view text) {
    const auto x = text.find_first_of("xX");
    Shape s;
    auto num = [&](std::string_view part, std::size_t& out) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        return !part.empty() && ec == std::errc() && ptr == part.data() + part.size() && out > 0;
    };
    if (x == std::string_view::npos || !num(text.substr(0, x), s.rows) || !num(text.substr(x + 1), s.cols))
        throw DomainError("shape must look like 3x2, got '" + std::string(text) + "'");
    if (s.cols > s.rows) throw DomainError("shape: columns cannot exceed rows");
    return s;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    for (;;) {
        const auto comma = line.find(',');
        out.push_back(trim(line.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return out;
}

bool parse_double(std::string_view s, double& v) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

// Frame shape from header names m<row><col> (single digits).
std::optional<Shape> shape_from_header(const std::vector<std::string_view>& header) {
    Shape s;
    for (std::string_view h : header) {
        if (h.size() != 3 || (h[0] != 'm' && h[0] != 'M') || h[1] < '1' || h[1] > '9' || h[2] < '1' || h[2] > '9')
            return std::nullopt;
        s.rows = std::max<std::size_t>(s.rows, static_cast<std::size_t>(h[1] - '0'));
        s.cols = std::max<std::size_t>(s.cols, static_cast<std::size_t>(h[2] - '0'));
    }
    if (s.rows * s.cols != header.size()) return std::nullopt;
    return s;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, std::size_t offset, const std::string& what) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what, offset);
}

LoadedPoints read_csv_points(const std::filesystem::path& path, MetricKind kind, std::optional<Shape> shape) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    LoadedPoints out;
    std::string line;
    std::size_t line_no = 0, offset = 0, width = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t line_offset = offset;
        offset += line.size() + 1;
        const std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto fields = split_fields(body);
        if (!have_header) {
            double probe = 0.0;
            for (std::string_view f : fields)
                if (parse_double(f, probe)) fail(path, line_no, line_offset, "expected a header row, found numbers");
            width = fields.size();
            have_header = true;
            switch (kind) {
                case MetricKind::euclidean:
                    out.space = MetricSpace::euclidean(width);
                    break;
                case MetricKind::sphere:
                    out.space = MetricSpace::sphere(width);
                    break;
                case MetricKind::stiefel_chordal:
                case MetricKind::stiefel_procrustes: {
                    if (!shape) shape = shape_from_header(fields);
                    if (!shape) fail(path, line_no, line_offset, "frame shape unknown; pass --shape RxC");
                    if (shape->rows * shape->cols != width)
                        fail(path, line_no, line_offset,
                             "header has " + std::to_string(width) + " columns but the shape needs " +
                                 std::to_string(shape->rows * shape->cols));
                    out.space = MetricSpace::stiefel(shape->rows, shape->cols,
                                                     kind == MetricKind::stiefel_chordal ? StiefelMode::chordal
                                                                                         : StiefelMode::procrustes);
                    break;
                }
                case MetricKind::bhv:
                    break;
            }
            continue;
        }
        if (fields.size() != width)
            fail(path, line_no, line_offset,
                 "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
        std::vector<double> values(width);
        for (std::size_t k = 0; k < width; ++k)
            if (!parse_double(fields[k], values[k]) || !std::isfinite(values[k]))
                fail(path, line_no, line_offset + static_cast<std::size_t>(fields[k].data() - line.data()),
                     "malformed number '" + std::string(fields[k]) + "'");
        try {
            switch (kind) {
                case MetricKind::euclidean:
                    out.points.push_back(RealVector{std::move(values)});
                    break;
                case MetricKind::sphere:
                    out.points.push_back(make_unit_vector(std::move(values)));
                    break;
                default:
                    out.points.push_back(make_frame(shape->rows, shape->cols, std::move(values)));
                    break;
            }
        } catch (const ValidationError& e) {
            fail(path, line_no, line_offset, e.what());
        }
        out.lines.push_back(line_no);
    }
    if (!have_header) throw ParseError(path.string() + ": empty file (no header row)", 0);
    return out;
}

}  // namespace

LoadedPoints read_points(const std::filesystem::path& path, MetricKind kind, std::optional<Shape> shape,
                         std::optional<std::span<const std::string>> universe) {
    if (kind != MetricKind::bhv) return read_csv_points(path, kind, shape);
    LoadedPoints out;
    for (auto& rec : tree::read_newick_file(path, universe)) {
        out.lines.push_back(rec.line);
        out.points.push_back(make_tree_point(std::move(rec.tree)));
    }
    if (out.points.empty()) throw ParseError(path.string() + ": no trees", 0);
    out.space = MetricSpace::bhv(std::get<TreePoint>(out.points.front()).tree->leaf_count());
    return out;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, ptr);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return format_number(*d);
    if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return csv_escape(std::get<std::string>(c));
}

nlohmann::json cell_json(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return format_number(*d);
        return *d;
    }
    if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) return *i;
    return std::get<std::string>(c);
}

}  // namespace

std::string render_csv(const Table& table, const Provenance& prov) {
    std::ostringstream os;
    os << "# lensdepth " << kVersion << "\n";
    os << "# command: " << prov.command << "\n";
    os << "# seed: " << prov.seed << "\n";
    os << "# config-hash: " << hex(prov.config_hash) << "\n";
    if (!prov.timestamp.empty()) os << "# generated: " << prov.timestamp << "\n";
    for (std::size_t k = 0; k < table.columns.size(); ++k) os << (k ? "," : "") << csv_escape(table.columns[k]);
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << cell_text(row[k]);
        os << "\n";
    }
    return os.str();
}

std::string render_json(const Table& table, const Provenance& prov) {
    nlohmann::json j;
    j["provenance"] = {{"version", kVersion}, {"command", prov.command}, {"seed", prov.seed},
                       {"config_hash", hex(prov.config_hash)}};
    if (!prov.timestamp.empty()) j["provenance"]["generated"] = prov.timestamp;
    j["columns"] = table.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const Cell& c : row) r.push_back(cell_json(c));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::string render(const Table& table, const Provenance& prov, std::string_view format) {
    if (format == "json") return render_json(table, prov);
    if (format == "csv") return render_csv(table, prov);
    throw DomainError("unknown output format '" + std::string(format) + "'");
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot move output into place at " + path.string());
    }
}

}  // namespace lensdepth::io
