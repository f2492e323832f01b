#include "sbneuro/io.hpp"

#include "sbneuro/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace sbneuro {

std::string format_double(double value)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context)
{
    // Trim surrounding whitespace; from_chars accepts none.
    size_t b = text.find_first_not_of(" \t\r");
    size_t e = text.find_last_not_of(" \t\r");
    if (b == std::string_view::npos) {
        throw InputError("empty numeric field (" + context + ")");
    }
    text = text.substr(b, e - b + 1);
    double value = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw InputError("malformed numeric field '" + std::string(text) + "' (" + context + ")");
    }
    return value;
}

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

CsvTable read_csv_impl(const std::filesystem::path& path,
                       std::vector<std::string>* last_column_labels)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    CsvTable table;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) {
            continue;
        }
        auto fields = split_fields(line);
        if (table.columns.empty()) {
            table.columns = fields;
            continue;
        }
        if (fields.size() != table.columns.size()) {
            throw InputError(path.string() + ":" + std::to_string(line_no) +
                             ": expected " + std::to_string(table.columns.size()) +
                             " fields, got " + std::to_string(fields.size()));
        }
        size_t numeric = fields.size() - (last_column_labels ? 1 : 0);
        std::vector<double> row(numeric);
        for (size_t i = 0; i < numeric; ++i) {
            row[i] = parse_double(fields[i],
                                  path.string() + ":" + std::to_string(line_no));
        }
        if (last_column_labels) {
            last_column_labels->push_back(fields.back());
        }
        table.rows.push_back(std::move(row));
    }
    if (table.columns.empty()) {
        throw InputError(path.string() + ": missing header row");
    }
    return table;
}

} // namespace

int CsvTable::column_index(std::string_view name) const
{
    for (size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

CsvTable read_csv(const std::filesystem::path& path)
{
    return read_csv_impl(path, nullptr);
}

CsvTable read_csv_numeric_columns(const std::filesystem::path& path,
                                  std::vector<std::string>* last_column_labels)
{
    return read_csv_impl(path, last_column_labels);
}

void write_text_file(const std::filesystem::path& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw InputError("short write to '" + path.string() + "'");
    }
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes)
{
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string file_digest_hex(const std::filesystem::path& path)
{
    return fnv1a64_hex(read_text_file(path));
}

} // namespace sbneuro
