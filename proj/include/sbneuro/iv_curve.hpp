#pragma once

#include "sbneuro/device.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sbneuro {

struct IVRecord {
    BiasPoint bias;
    double i_d = 0.0; // A
};

/// A measured or simulated I-V sweep; the interchange unit between the model,
/// the extraction routines and the CLI.
struct IVCurve {
    std::vector<IVRecord> records;
    std::map<std::string, std::string> meta; // device id, sweep variable, ...

    size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

/// CSV with header `v_tg,v_bg,v_ds,i_d`, volts/amperes, '.' decimal,
/// LF line endings.
std::string iv_curve_to_csv(const IVCurve& curve);
IVCurve iv_curve_from_csv_text(const std::string& text, const std::string& context);
IVCurve load_iv_curve(const std::filesystem::path& path);
void save_iv_curve(const IVCurve& curve, const std::filesystem::path& path);

} // namespace sbneuro
