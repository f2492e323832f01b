#include "sbneuro/iv_curve.hpp"

#include "sbneuro/errors.hpp"
#include "sbneuro/io.hpp"

#include <cmath>
#include <sstream>

namespace sbneuro {

std::string iv_curve_to_csv(const IVCurve& curve)
{
    std::string out = "v_tg,v_bg,v_ds,i_d\n";
    for (const auto& rec : curve.records) {
        out += format_double(rec.bias.v_tg);
        out += ',';
        out += format_double(rec.bias.v_bg);
        out += ',';
        out += format_double(rec.bias.v_ds);
        out += ',';
        out += format_double(rec.i_d);
        out += '\n';
    }
    return out;
}

IVCurve iv_curve_from_csv_text(const std::string& text, const std::string& context)
{
    std::istringstream in(text);
    std::string line;
    IVCurve curve;
    long line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!header_seen) {
            if (line != "v_tg,v_bg,v_ds,i_d") {
                throw InputError(context + ":" + std::to_string(line_no) +
                                 ": expected header 'v_tg,v_bg,v_ds,i_d'");
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        if (fields.size() != 4) {
            throw InputError(context + ":" + std::to_string(line_no) +
                             ": expected 4 fields, got " + std::to_string(fields.size()));
        }
        IVRecord rec;
        const std::string where = context + ":" + std::to_string(line_no);
        rec.bias.v_tg = parse_double(fields[0], where);
        rec.bias.v_bg = parse_double(fields[1], where);
        rec.bias.v_ds = parse_double(fields[2], where);
        rec.i_d = parse_double(fields[3], where);
        if (!std::isfinite(rec.i_d)) {
            throw InputError(where + ": non-finite current");
        }
        curve.records.push_back(rec);
    }
    if (!header_seen) {
        throw InputError(context + ": missing header row");
    }
    return curve;
}

IVCurve load_iv_curve(const std::filesystem::path& path)
{
    return iv_curve_from_csv_text(read_text_file(path), path.string());
}

void save_iv_curve(const IVCurve& curve, const std::filesystem::path& path)
{
    write_text_file(path, iv_curve_to_csv(curve));
}

} // namespace sbneuro
