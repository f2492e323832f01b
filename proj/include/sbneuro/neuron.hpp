#pragma once

#include "sbneuro/device.hpp"
#include "sbneuro/vccs.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sbneuro {

// =============================================================================
// Capacitor integrate-and-fire neuron driven by the SB-MOSFET current source
// =============================================================================

/// The transistor feeding the membrane capacitor: either a calibrated
/// VccsModel (current set by v_tg alone) or a full DeviceParams (current =
/// drain_current at v_ds = v_d - v_mem, so the source unloads as the
/// capacitor charges).
using CurrentSource = std::variant<VccsModel, DeviceParams>;

struct NeuronConfig {
    double c_ext = 4.7e-9;      // F, the discrete capacitor
    double c_par = 0.0;         // F, lumped parasitic capacitance in parallel
    double v_th = 0.6;          // V, comparator threshold
    double v_reset = 0.0;       // V, post-spike reset level
    double t_refractory = 0.0;  // s, dead time after a spike
    double g_leak = 0.0;        // S, parallel leak conductance
    double v_d = 2.5;           // V, drain supply
    double v_bg = 0.0;          // V, back-gate bias (device-backed source only)
    CurrentSource source = constant_current_source(0.0);

    double c_total() const { return c_ext + c_par; }

    /// Charging current at the given gate voltage and membrane voltage.
    double source_current(double v_tg, double v_mem) const;

    void validate() const;
};

struct NeuronState {
    double v_mem = 0.0;            // V
    double t = 0.0;                // s
    double refractory_until = 0.0; // s
    std::vector<double> spike_times;
};

NeuronState initial_state(const NeuronConfig& config);

/// Advances the membrane by one step of classical RK4 under
///   (c_ext + c_par) dv/dt = I_source(v_tg, v_d - v_mem) - g_leak * v_mem.
/// A threshold crossing inside the step is located by linear interpolation;
/// the membrane resets and is held at v_reset while refractory, and the
/// remainder of the step is integrated from the reset level. Guidance:
/// dt <= (c_ext + c_par) * v_th / (10 * I_max). Throws NonFiniteState when
/// the state blows up (dt too large for the configuration).
void step(NeuronState& state, const NeuronConfig& config, double v_tg, double dt);

struct TracePoint {
    double t = 0.0;     // s
    double v_mem = 0.0; // V
};

struct RunResult {
    std::vector<double> spike_times;
    std::vector<TracePoint> trace; // empty when record_trace is off
};

/// Repeated step over [0, duration]; the trace keeps every
/// trace_decimation-th sample plus the endpoints.
RunResult run(const NeuronConfig& config, double v_tg, double duration, double dt,
              int trace_decimation = 1, bool record_trace = true);

/// Constant-current LIF closed form:
///   f = 1 / ((c_ext + c_par) * (v_th - v_reset) / i_const + t_refractory).
double ideal_frequency(double i_const, const NeuronConfig& config);

struct MeasureOptions {
    std::optional<double> dt;       // default: estimated period / 1000
    std::optional<double> max_time; // default: 100 * (estimated period + t_refractory)
    int required_spikes = 3;
};

struct FrequencyMeasurement {
    double f_hz = 0.0;
    bool timed_out = false;
};

/// Simulates until required_spikes spikes (default 3) and reports the
/// steady-state interspike interval 1/(t3 - t2); 0 Hz with the timed_out
/// flag when the neuron never gets there.
FrequencyMeasurement measure_frequency(const NeuronConfig& config, double v_tg,
                                       const MeasureOptions& options = {});

struct FrequencyPoint {
    double v_tg = 0.0; // V
    double f_hz = 0.0; // Hz
    bool timed_out = false;
};

struct FrequencyCurve {
    std::vector<FrequencyPoint> points;
    NeuronConfig config; // snapshot of the swept configuration
};

FrequencyCurve frequency_sweep(const NeuronConfig& config, std::span<const double> v_tg_list,
                               const MeasureOptions& options = {});

/// Parasitic capacitance explaining a measured frequency ratio between two
/// capacitor fits: solves (c_large + c_par) = f_ratio * (c_small + c_par).
/// Throws InconsistentRatio when the implied c_par is negative.
double fit_parasitic(double f_ratio, double c_small, double c_large);

// CSV emission: traces as `t,v_mem`, spike trains as `t_spike`,
// frequency curves as `v_tg,f_hz`.
std::string trace_to_csv(std::span<const TracePoint> trace);
std::string spikes_to_csv(std::span<const double> spike_times);
std::string frequency_curve_to_csv(const FrequencyCurve& curve);

// JSON document, "schema": "neuron-v1". The source is either an inline
// VccsModel or a DeviceParams file referenced by path (resolved relative to
// the config file's directory).
std::string neuron_config_to_json(const NeuronConfig& config);
NeuronConfig neuron_config_from_json(const std::string& json_text,
                                     const std::filesystem::path& base_dir);
NeuronConfig load_neuron_config(const std::filesystem::path& path);

} // namespace sbneuro
