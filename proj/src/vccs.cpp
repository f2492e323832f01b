#include "sbneuro/vccs.hpp"

#include "sbneuro/errors.hpp"
#include "sbneuro/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace sbneuro {

namespace {
constexpr const char* k_schema = "vccs-v1";
}

void VccsModel::validate() const
{
    if (knots.size() < 2) {
        throw InvalidParams("VccsModel: needs at least 2 knots");
    }
    for (size_t i = 0; i < knots.size(); ++i) {
        if (!std::isfinite(knots[i].v_tg) || !std::isfinite(knots[i].i_in)) {
            throw InvalidParams("VccsModel: non-finite knot");
        }
        if (knots[i].i_in < 0.0) {
            throw InvalidParams("VccsModel: negative current knot");
        }
        if (i > 0) {
            if (!(knots[i].v_tg > knots[i - 1].v_tg)) {
                throw InvalidParams("VccsModel: knot voltages must be strictly increasing");
            }
            if (knots[i].i_in < knots[i - 1].i_in) {
                throw InvalidParams("VccsModel: knot currents must be non-decreasing");
            }
        }
    }
}

double VccsModel::eval(double v_tg) const
{
    // Clamp-to-endpoint extrapolation outside the valid range.
    if (v_tg <= knots.front().v_tg) {
        return knots.front().i_in;
    }
    if (v_tg >= knots.back().v_tg) {
        return knots.back().i_in;
    }
    auto it = std::upper_bound(knots.begin(), knots.end(), v_tg,
                               [](double v, const VccsKnot& k) { return v < k.v_tg; });
    const VccsKnot& right = *it;
    const VccsKnot& left = *(it - 1);
    double t = (v_tg - left.v_tg) / (right.v_tg - left.v_tg);
    return left.i_in + t * (right.i_in - left.i_in);
}

VccsModel constant_current_source(double i_in)
{
    if (i_in < 0.0) {
        throw InvalidParams("constant_current_source: current must be >= 0");
    }
    return VccsModel{{{0.0, i_in}, {1.0, i_in}}};
}

std::string vccs_to_json(const VccsModel& model)
{
    model.validate();
    nlohmann::json j;
    j["schema"] = k_schema;
    auto& arr = j["knots"] = nlohmann::json::array();
    for (const auto& k : model.knots) {
        arr.push_back({k.v_tg, k.i_in});
    }
    j["valid_range"] = {model.v_min(), model.v_max()};
    j["extrapolation"] = "clamp";
    return j.dump(2) + "\n";
}

VccsModel vccs_from_json(const std::string& json_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("vccs JSON parse error: ") + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != k_schema) {
        throw InputError("vccs JSON: expected \"schema\": \"" + std::string(k_schema) + "\"");
    }
    VccsModel model;
    try {
        for (const auto& pair : j.at("knots")) {
            model.knots.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("vccs JSON: ") + e.what());
    }
    model.validate();
    return model;
}

VccsModel load_vccs(const std::filesystem::path& path)
{
    return vccs_from_json(read_text_file(path));
}

void save_vccs(const VccsModel& model, const std::filesystem::path& path)
{
    write_text_file(path, vccs_to_json(model));
}

} // namespace sbneuro
