#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sbneuro {

/// Shortest round-trip decimal representation of a double ('.' decimal,
/// locale independent). All text output goes through this so that repeated
/// runs are byte identical.
std::string format_double(double value);

double parse_double(std::string_view text, const std::string& context);

/// A parsed CSV table: header names plus numeric rows.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(std::string_view name) const; // -1 if absent
};

/// Reads a comma-separated file with a header row and numeric cells.
/// Malformed cells raise InputError carrying the 1-based line number.
CsvTable read_csv(const std::filesystem::path& path);

/// Reads a CSV whose last column may be a string label (e.g. a class name).
CsvTable read_csv_numeric_columns(const std::filesystem::path& path,
                                  std::vector<std::string>* last_column_labels);

/// Writes text with LF endings regardless of platform.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::string read_text_file(const std::filesystem::path& path);

/// FNV-1a 64-bit digest, used to fingerprint input files in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

std::string fnv1a64_hex(std::string_view bytes);

std::string file_digest_hex(const std::filesystem::path& path);

} // namespace sbneuro
