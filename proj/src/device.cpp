#include "sbneuro/device.hpp"

#include "sbneuro/errors.hpp"
#include "sbneuro/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace sbneuro {

namespace {
constexpr const char* k_schema = "sbmodel-params-v1";
}

void DeviceParams::validate() const
{
    auto fail = [](const std::string& msg) { throw InvalidParams("DeviceParams: " + msg); };
    if (!(phi_min >= 0.0)) fail("phi_min must be >= 0");
    if (!(phi_b0 >= phi_min)) fail("phi_b0 must be >= phi_min");
    if (!(gamma_tg > 0.0)) fail("gamma_tg must be > 0");
    if (!(n_ideality >= 1.0)) fail("n_ideality must be >= 1");
    if (!(temperature > 0.0)) fail("temperature must be > 0");
    if (!(a_star > 0.0) || !(a_eff > 0.0)) fail("a_star and a_eff must be > 0");
    if (!(rho_sheet >= 0.0)) fail("rho_sheet must be >= 0");
    if (!(r_sd_ext >= 0.0)) fail("r_sd_ext must be >= 0");
    if (!(l_g > 0.0) || !(w > 0.0)) fail("l_g and w must be > 0");
    if (!(t_ox > 0.0) || !(eps_ox_rel > 0.0)) fail("t_ox and eps_ox_rel must be > 0");
    if (!(i_gate_leak >= 0.0)) fail("i_gate_leak must be >= 0");
    if (!std::isfinite(gamma_bg)) fail("gamma_bg must be finite");
    if (!std::isfinite(v_t0)) fail("v_t0 must be finite");
}

DeviceParams default_device(double l_g)
{
    DeviceParams p;
    p.l_g = l_g;
    p.validate();
    return p;
}

std::string device_params_to_json(const DeviceParams& p)
{
    nlohmann::json j;
    j["schema"] = k_schema;
    j["phi_b0"] = p.phi_b0;
    j["gamma_tg"] = p.gamma_tg;
    j["gamma_bg"] = p.gamma_bg;
    j["phi_min"] = p.phi_min;
    j["v_t0"] = p.v_t0;
    j["n_ideality"] = p.n_ideality;
    j["temperature"] = p.temperature;
    j["a_star"] = p.a_star;
    j["a_eff"] = p.a_eff;
    j["rho_sheet"] = p.rho_sheet;
    j["r_sd_ext"] = p.r_sd_ext;
    j["l_g"] = p.l_g;
    j["w"] = p.w;
    j["t_ox"] = p.t_ox;
    j["eps_ox_rel"] = p.eps_ox_rel;
    j["i_gate_leak"] = p.i_gate_leak;
    return j.dump(2) + "\n";
}

DeviceParams device_params_from_json(const std::string& json_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("device params JSON parse error: ") + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != k_schema) {
        throw InputError("device params JSON: expected \"schema\": \"" +
                         std::string(k_schema) + "\"");
    }
    DeviceParams p;
    try {
        p.phi_b0 = j.at("phi_b0").get<double>();
        p.gamma_tg = j.at("gamma_tg").get<double>();
        p.gamma_bg = j.at("gamma_bg").get<double>();
        p.phi_min = j.at("phi_min").get<double>();
        p.v_t0 = j.at("v_t0").get<double>();
        p.n_ideality = j.at("n_ideality").get<double>();
        p.temperature = j.at("temperature").get<double>();
        p.a_star = j.at("a_star").get<double>();
        p.a_eff = j.at("a_eff").get<double>();
        p.rho_sheet = j.at("rho_sheet").get<double>();
        p.r_sd_ext = j.at("r_sd_ext").get<double>();
        p.l_g = j.at("l_g").get<double>();
        p.w = j.at("w").get<double>();
        p.t_ox = j.at("t_ox").get<double>();
        p.eps_ox_rel = j.at("eps_ox_rel").get<double>();
        p.i_gate_leak = j.at("i_gate_leak").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("device params JSON: ") + e.what());
    }
    p.validate();
    return p;
}

DeviceParams load_device_params(const std::filesystem::path& path)
{
    return device_params_from_json(read_text_file(path));
}

void save_device_params(const DeviceParams& params, const std::filesystem::path& path)
{
    write_text_file(path, device_params_to_json(params));
}

} // namespace sbneuro
