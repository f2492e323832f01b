#include "sbneuro/neuron.hpp"

#include "sbneuro/errors.hpp"
#include "sbneuro/io.hpp"
#include "sbneuro/sb_model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace sbneuro {

double NeuronConfig::source_current(double v_tg, double v_mem) const
{
    if (const auto* vccs = std::get_if<VccsModel>(&source)) {
        return vccs->eval(v_tg);
    }
    const auto& params = std::get<DeviceParams>(source);
    return drain_current(params, BiasPoint{v_tg, v_bg, v_d - v_mem});
}

void NeuronConfig::validate() const
{
    if (!(c_ext > 0.0)) {
        throw InvalidParams("NeuronConfig: c_ext must be > 0");
    }
    if (!(c_par >= 0.0)) {
        throw InvalidParams("NeuronConfig: c_par must be >= 0");
    }
    if (!(v_th > v_reset)) {
        throw InvalidParams("NeuronConfig: v_th must exceed v_reset");
    }
    if (!(t_refractory >= 0.0)) {
        throw InvalidParams("NeuronConfig: t_refractory must be >= 0");
    }
    if (!(g_leak >= 0.0)) {
        throw InvalidParams("NeuronConfig: g_leak must be >= 0");
    }
    if (const auto* vccs = std::get_if<VccsModel>(&source)) {
        vccs->validate();
    } else {
        std::get<DeviceParams>(source).validate();
    }
}

NeuronState initial_state(const NeuronConfig& config)
{
    NeuronState state;
    state.v_mem = config.v_reset;
    return state;
}

namespace {

// One RK4 advance over h from (state.t, state.v_mem), with threshold
// handling. May consume the interval in pieces when a spike or the
// refractory hold splits it.
void advance(NeuronState& state, const NeuronConfig& config, double v_tg, double h)
{
    const double c_total = config.c_total();
    while (h > 0.0) {
        // Hold at reset while refractory.
        if (state.t < state.refractory_until) {
            double hold = std::min(h, state.refractory_until - state.t);
            state.v_mem = config.v_reset;
            state.t += hold;
            h -= hold;
            continue;
        }

        auto slope = [&](double v) {
            return (config.source_current(v_tg, v) - config.g_leak * v) / c_total;
        };
        double v = state.v_mem;
        double k1 = slope(v);
        double k2 = slope(v + 0.5 * h * k1);
        double k3 = slope(v + 0.5 * h * k2);
        double k4 = slope(v + h * k3);
        double v_next = v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(v_next)) {
            throw NonFiniteState("neuron step diverged; decrease dt");
        }

        if (v < config.v_th && v_next >= config.v_th) {
            // Locate the crossing by linear interpolation inside the step.
            double theta = (config.v_th - v) / (v_next - v);
            double t_cross = state.t + theta * h;
            if (!(t_cross > state.t)) {
                // The crossing time underflowed the time resolution: the
                // step produced an astronomically steep rise.
                throw NonFiniteState("neuron step cannot resolve spike times; decrease dt");
            }
            state.spike_times.push_back(t_cross);
            state.refractory_until = t_cross + config.t_refractory;
            h -= t_cross - state.t;
            state.t = t_cross;
            state.v_mem = config.v_reset;
            continue; // integrate the remainder from the reset level
        }

        state.v_mem = v_next;
        state.t += h;
        h = 0.0;
    }
}

} // namespace

void step(NeuronState& state, const NeuronConfig& config, double v_tg, double dt)
{
    if (!(dt > 0.0)) {
        throw InvalidParams("step: dt must be > 0");
    }
    advance(state, config, v_tg, dt);
}

RunResult run(const NeuronConfig& config, double v_tg, double duration, double dt,
              int trace_decimation, bool record_trace)
{
    config.validate();
    if (!(duration > 0.0)) {
        throw InvalidParams("run: duration must be > 0");
    }
    if (!(dt > 0.0)) {
        throw InvalidParams("run: dt must be > 0");
    }
    if (trace_decimation < 1) {
        throw InvalidParams("run: trace_decimation must be >= 1");
    }

    NeuronState state = initial_state(config);
    RunResult result;
    if (record_trace) {
        result.trace.push_back({state.t, state.v_mem});
    }
    long step_index = 0;
    while (state.t < duration) {
        double h = std::min(dt, duration - state.t);
        advance(state, config, v_tg, h);
        ++step_index;
        if (record_trace &&
            (step_index % trace_decimation == 0 || state.t >= duration)) {
            result.trace.push_back({state.t, state.v_mem});
        }
    }
    result.spike_times = std::move(state.spike_times);
    return result;
}

double ideal_frequency(double i_const, const NeuronConfig& config)
{
    config.validate();
    if (!(i_const > 0.0)) {
        throw NonPositiveCurrent("ideal_frequency: current must be > 0");
    }
    double period = config.c_total() * (config.v_th - config.v_reset) / i_const +
                    config.t_refractory;
    return 1.0 / period;
}

FrequencyMeasurement measure_frequency(const NeuronConfig& config, double v_tg,
                                       const MeasureOptions& options)
{
    config.validate();
    if (options.required_spikes < 2) {
        throw InvalidParams("measure_frequency: need at least 2 spikes");
    }

    // The membrane cannot leave the reset level if the source cannot beat
    // the leak there.
    double i0 = config.source_current(v_tg, config.v_reset);
    if (i0 - config.g_leak * config.v_reset <= 0.0) {
        return {0.0, true};
    }

    double period_estimate =
        config.c_total() * (config.v_th - config.v_reset) / i0 + config.t_refractory;
    double dt = options.dt.value_or(period_estimate / 1000.0);
    double max_time =
        options.max_time.value_or(100.0 * (period_estimate + config.t_refractory));
    if (!(dt > 0.0) || !(max_time > 0.0)) {
        throw InvalidParams("measure_frequency: dt and max_time must be > 0");
    }

    NeuronState state = initial_state(config);
    while (state.spike_times.size() < static_cast<size_t>(options.required_spikes) &&
           state.t < max_time) {
        advance(state, config, v_tg, dt);
    }
    if (state.spike_times.size() < static_cast<size_t>(options.required_spikes)) {
        return {0.0, true};
    }
    size_t n = state.spike_times.size();
    double interval = state.spike_times[n - 1] - state.spike_times[n - 2];
    return {1.0 / interval, false};
}

FrequencyCurve frequency_sweep(const NeuronConfig& config, std::span<const double> v_tg_list,
                               const MeasureOptions& options)
{
    FrequencyCurve curve;
    curve.config = config;
    curve.points.reserve(v_tg_list.size());
    for (double v_tg : v_tg_list) {
        FrequencyMeasurement m = measure_frequency(config, v_tg, options);
        curve.points.push_back({v_tg, m.f_hz, m.timed_out});
    }
    return curve;
}

double fit_parasitic(double f_ratio, double c_small, double c_large)
{
    if (!(f_ratio > 1.0)) {
        throw InvalidParams("fit_parasitic: f_ratio must exceed 1");
    }
    if (!(c_large > c_small) || !(c_small > 0.0)) {
        throw InvalidParams("fit_parasitic: need c_large > c_small > 0");
    }
    double c_par = (c_large - f_ratio * c_small) / (f_ratio - 1.0);
    if (c_par < 0.0) {
        throw InconsistentRatio("fit_parasitic: ratio " + format_double(f_ratio) +
                                " exceeds c_large/c_small; implied c_par is negative");
    }
    return c_par;
}

std::string trace_to_csv(std::span<const TracePoint> trace)
{
    std::string out = "t,v_mem\n";
    for (const auto& p : trace) {
        out += format_double(p.t);
        out += ',';
        out += format_double(p.v_mem);
        out += '\n';
    }
    return out;
}

std::string spikes_to_csv(std::span<const double> spike_times)
{
    std::string out = "t_spike\n";
    for (double t : spike_times) {
        out += format_double(t);
        out += '\n';
    }
    return out;
}

std::string frequency_curve_to_csv(const FrequencyCurve& curve)
{
    std::string out = "v_tg,f_hz\n";
    for (const auto& p : curve.points) {
        out += format_double(p.v_tg);
        out += ',';
        out += format_double(p.f_hz);
        out += '\n';
    }
    return out;
}

// =============================================================================
// JSON configuration
// =============================================================================

namespace {
constexpr const char* k_schema = "neuron-v1";
}

std::string neuron_config_to_json(const NeuronConfig& config)
{
    nlohmann::json j;
    j["schema"] = k_schema;
    j["c_ext"] = config.c_ext;
    j["c_par"] = config.c_par;
    j["v_th"] = config.v_th;
    j["v_reset"] = config.v_reset;
    j["t_refractory"] = config.t_refractory;
    j["g_leak"] = config.g_leak;
    j["v_d"] = config.v_d;
    j["v_bg"] = config.v_bg;
    if (const auto* vccs = std::get_if<VccsModel>(&config.source)) {
        nlohmann::json src;
        src["type"] = "vccs";
        src["model"] = nlohmann::json::parse(vccs_to_json(*vccs));
        j["source"] = src;
    } else {
        nlohmann::json src;
        src["type"] = "device";
        src["params"] =
            nlohmann::json::parse(device_params_to_json(std::get<DeviceParams>(config.source)));
        j["source"] = src;
    }
    return j.dump(2) + "\n";
}

NeuronConfig neuron_config_from_json(const std::string& json_text,
                                     const std::filesystem::path& base_dir)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("neuron config JSON parse error: ") + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != k_schema) {
        throw InputError("neuron config JSON: expected \"schema\": \"" +
                         std::string(k_schema) + "\"");
    }
    NeuronConfig config;
    try {
        config.c_ext = j.at("c_ext").get<double>();
        config.c_par = j.value("c_par", 0.0);
        config.v_th = j.value("v_th", 0.6);
        config.v_reset = j.value("v_reset", 0.0);
        config.t_refractory = j.value("t_refractory", 0.0);
        config.g_leak = j.value("g_leak", 0.0);
        config.v_d = j.at("v_d").get<double>();
        config.v_bg = j.value("v_bg", 0.0);
        const auto& src = j.at("source");
        std::string type = src.at("type").get<std::string>();
        if (type == "vccs") {
            config.source = vccs_from_json(src.at("model").dump());
        } else if (type == "device") {
            if (src.contains("params")) {
                config.source = device_params_from_json(src.at("params").dump());
            } else {
                std::filesystem::path p = src.at("params_file").get<std::string>();
                if (p.is_relative()) {
                    p = base_dir / p;
                }
                config.source = load_device_params(p);
            }
        } else {
            throw InputError("neuron config JSON: source type must be 'vccs' or 'device'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("neuron config JSON: ") + e.what());
    }
    config.validate();
    return config;
}

NeuronConfig load_neuron_config(const std::filesystem::path& path)
{
    return neuron_config_from_json(read_text_file(path), path.parent_path());
}

} // namespace sbneuro
