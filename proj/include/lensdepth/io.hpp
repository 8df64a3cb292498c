#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lensdepth/metrics.hpp"

namespace lensdepth::io {

inline constexpr std::string_view kVersion = "0.1.0";

struct Shape {
    std::size_t rows = 0;
    std::size_t cols = 0;
};

// "3x2" -> {3, 2}. Throws DomainError on bad input.
Shape parse_shape(std::string_view text);

struct LoadedPoints {
    std::vector<Point> points;
    MetricSpace space;
    // 1-based source line of each point.
    std::vector<std::size_t> lines;
};

// Points of one metric space from a file. Vector spaces read CSV with a
// header row (x1,...,xd; frames m11,m12,... flattened row-major, the shape
// from `shape` or the header names). Trees read Newick, one per line, with
// the leaf universe from `universe` or the first tree. Errors carry
// "path:line".
LoadedPoints read_points(const std::filesystem::path& path, MetricKind kind, std::optional<Shape> shape = std::nullopt,
                         std::optional<std::span<const std::string>> universe = std::nullopt);

// Shortest text that still carries 17 significant digits ("%.17g").
std::string format_number(double v);

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct Provenance {
    std::string command;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    // Empty when timestamps are disabled.
    std::string timestamp;
};

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);
// Current UTC time as ISO 8601.
std::string utc_timestamp();

// '#' comment header (version, command, seed, config hash, timestamp)
// followed by a header row and one line per row.
std::string render_csv(const Table& table, const Provenance& prov);
// {"provenance": {...}, "columns": [...], "rows": [[...], ...]}
std::string render_json(const Table& table, const Provenance& prov);
std::string render(const Table& table, const Provenance& prov, std::string_view format);

// Writes through a temporary sibling file and renames it into place.
void atomic_write(const std::filesystem::path& path, std::string_view content);

}  // namespace lensdepth::io
