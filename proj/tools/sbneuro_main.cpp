// Command-line front end: experiment presets, sweep/fit/neuron/freq/snn
// drivers and plot-ready emission. Every run resolves its full configuration
// into a JSON snapshot first, executes only from that snapshot, and writes a
// manifest next to its outputs so `sbneuro rerun` can reproduce them byte for
// byte.

#include "sbneuro/device.hpp"
#include "sbneuro/errors.hpp"
#include "sbneuro/extract.hpp"
#include "sbneuro/io.hpp"
#include "sbneuro/iris.hpp"
#include "sbneuro/iv_curve.hpp"
#include "sbneuro/neuron.hpp"
#include "sbneuro/sb_model.hpp"
#include "sbneuro/snn.hpp"
#include "sbneuro/vccs.hpp"
#include "sbneuro/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sbneuro;

namespace {

constexpr int k_exit_ok = 0;
constexpr int k_exit_input = 2;
constexpr int k_exit_numeric = 3;

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct RunContext {
    fs::path out_dir;
    json inputs = json::array();   // {path, fnv1a64}
    json outputs = json::array();  // file names inside out_dir
    std::uint64_t seed = 0;

    void note_input(const fs::path& path)
    {
        inputs.push_back({{"path", path.string()}, {"fnv1a64", file_digest_hex(path)}});
    }

    void write_output(const std::string& name, const std::string& content)
    {
        write_text_file(out_dir / name, content);
        outputs.push_back(name);
    }
};

std::string utc_timestamp()
{
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&tt, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_manifest(const RunContext& ctx, const json& resolved)
{
    json manifest;
    manifest["schema"] = "sbneuro-manifest-v1";
    manifest["command"] = resolved.at("command");
    manifest["resolved"] = resolved;
    manifest["inputs"] = ctx.inputs;
    manifest["outputs"] = ctx.outputs;
    manifest["seed"] = ctx.seed;
    manifest["version"] = k_version;
    manifest["wall_clock_utc"] = utc_timestamp();
    write_text_file(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

std::vector<double> parse_number_list(const std::string& text, const std::string& what)
{
    std::vector<double> values;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',') {
            if (!cur.empty()) {
                values.push_back(parse_double(cur, what));
                cur.clear();
            }
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (values.empty()) {
        throw InputError(what + ": empty number list");
    }
    return values;
}

std::vector<double> linspace(double from, double to, int points)
{
    if (points < 1) {
        throw InputError("sweep needs at least one point");
    }
    std::vector<double> values;
    values.reserve(static_cast<size_t>(points));
    if (points == 1) {
        values.push_back(from);
        return values;
    }
    for (int i = 0; i < points; ++i) {
        values.push_back(from + (to - from) * static_cast<double>(i) /
                                    static_cast<double>(points - 1));
    }
    return values;
}

json numbers_to_json(const std::vector<double>& values)
{
    json arr = json::array();
    for (double v : values) {
        arr.push_back(v);
    }
    return arr;
}

std::vector<double> numbers_from_json(const json& arr)
{
    std::vector<double> values;
    for (const auto& v : arr) {
        values.push_back(v.get<double>());
    }
    return values;
}

json device_json(const DeviceParams& p)
{
    return json::parse(device_params_to_json(p));
}

json neuron_json(const NeuronConfig& c)
{
    return json::parse(neuron_config_to_json(c));
}

std::string iv_curve_to_json_text(const IVCurve& curve)
{
    json j;
    j["schema"] = "ivcurve-v1";
    auto& records = j["records"] = json::array();
    for (const auto& rec : curve.records) {
        records.push_back({{"v_tg", rec.bias.v_tg},
                           {"v_bg", rec.bias.v_bg},
                           {"v_ds", rec.bias.v_ds},
                           {"i_d", rec.i_d}});
    }
    j["meta"] = curve.meta;
    return j.dump(2) + "\n";
}

// The reference VCCS calibration used by the fig7c preset and the SNN:
// the default device's transfer curve at v_ds = 0.2 V, fitted on 33 knots.
VccsModel reference_vccs()
{
    DeviceParams device = default_device(20e-6);
    std::vector<double> sweep;
    for (int i = 0; i <= 80; ++i) {
        sweep.push_back(i * 0.05);
    }
    return fit_vccs(transfer_curve(device, sweep, 0.0, 0.2), 33);
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

json sweep_job(const std::string& name, const std::string& variable,
               const std::vector<double>& values, double v_tg, double v_bg, double v_ds)
{
    json j;
    j["type"] = "iv";
    j["name"] = name;
    j["variable"] = variable;
    j["values"] = numbers_to_json(values);
    j["v_tg"] = v_tg;
    j["v_bg"] = v_bg;
    j["v_ds"] = v_ds;
    return j;
}

json resolve_sweep_preset(const std::string& preset)
{
    json resolved;
    resolved["command"] = "sweep";
    resolved["preset"] = preset;
    resolved["format"] = "csv";
    json jobs = json::array();
    if (preset == "fig4a") {
        resolved["params"] = device_json(default_device(20e-6));
        jobs.push_back(sweep_job("fig4a_id_vbg", "v_bg", linspace(-20.0, 20.0, 81), 1.5, 0.0, 1.0));
    } else if (preset == "fig4b") {
        resolved["params"] = device_json(default_device(20e-6));
        for (double v_bg : {-10.0, 0.0, 10.0, 20.0}) {
            jobs.push_back(sweep_job("fig4b_id_vd_vbg_" + format_double(v_bg), "v_ds",
                                     linspace(0.0, 2.5, 51), 1.5, v_bg, 0.0));
        }
    } else if (preset == "fig5a") {
        resolved["params"] = device_json(default_device(10e-6));
        for (double v_ds : {0.1, 0.5, 1.0}) {
            jobs.push_back(sweep_job("fig5a_transfer_vds_" + format_double(v_ds), "v_tg",
                                     linspace(0.0, 4.0, 81), 0.0, 0.0, v_ds));
        }
    } else if (preset == "fig5b") {
        resolved["params"] = device_json(default_device(10e-6));
        for (double v_tg : {1.0, 2.0, 3.0, 4.0}) {
            jobs.push_back(sweep_job("fig5b_output_vtg_" + format_double(v_tg), "v_ds",
                                     linspace(0.0, 2.5, 51), v_tg, 0.0, 0.0));
        }
    } else if (preset == "fig6a") {
        resolved["params"] = device_json(default_device(20e-6));
        jobs.push_back(sweep_job("fig6a_id_vbg", "v_bg", linspace(-20.0, 20.0, 81), 1.5, 0.0, 0.5));
    } else if (preset == "fig6c") {
        resolved["params"] = device_json(default_device(20e-6));
        json job;
        job["type"] = "ion_scaling";
        job["name"] = "fig6c_ion_scaling";
        job["lengths"] = {10e-6, 20e-6, 25e-6, 75e-6};
        BiasPoint bias = channel_limited_bias();
        job["v_tg"] = bias.v_tg;
        job["v_bg"] = bias.v_bg;
        job["v_ds"] = bias.v_ds;
        jobs.push_back(job);
    } else {
        throw InputError("unknown sweep preset '" + preset + "'");
    }
    resolved["jobs"] = jobs;
    return resolved;
}

void execute_sweep(const json& resolved, RunContext& ctx)
{
    DeviceParams params = device_params_from_json(resolved.at("params").dump());
    std::string format = resolved.value("format", "csv");
    for (const auto& job : resolved.at("jobs")) {
        std::string type = job.value("type", "iv");
        std::string name = job.at("name").get<std::string>();
        if (type == "ion_scaling") {
            BiasPoint bias{job.at("v_tg").get<double>(), job.at("v_bg").get<double>(),
                           job.at("v_ds").get<double>()};
            std::vector<double> lengths = numbers_from_json(job.at("lengths"));
            auto points = ion_vs_inverse_length(params, lengths, bias);
            std::string csv = "l_g,inv_l_g,i_on\n";
            for (size_t i = 0; i < points.size(); ++i) {
                csv += format_double(lengths[i]);
                csv += ',';
                csv += format_double(points[i].inv_l_g);
                csv += ',';
                csv += format_double(points[i].i_on);
                csv += '\n';
            }
            ctx.write_output(name + ".csv", csv);
            continue;
        }
        std::string variable = job.at("variable").get<std::string>();
        std::vector<double> values = numbers_from_json(job.at("values"));
        double v_tg = job.at("v_tg").get<double>();
        double v_bg = job.at("v_bg").get<double>();
        double v_ds = job.at("v_ds").get<double>();
        IVCurve curve;
        if (variable == "v_tg") {
            curve = transfer_curve(params, values, v_bg, v_ds);
        } else if (variable == "v_ds") {
            curve = output_curve(params, values, v_tg, v_bg);
        } else if (variable == "v_bg") {
            curve.meta["sweep"] = "v_bg";
            for (double v : values) {
                BiasPoint bias{v_tg, v, v_ds};
                curve.records.push_back({bias, drain_current(params, bias)});
            }
        } else {
            throw InputError("sweep: unknown variable '" + variable + "'");
        }
        if (format == "json") {
            ctx.write_output(name + ".json", iv_curve_to_json_text(curve));
        } else {
            ctx.write_output(name + ".csv", iv_curve_to_csv(curve));
        }
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

void execute_fit(const json& resolved, RunContext& ctx)
{
    std::vector<IVCurve> curves;
    for (const auto& file : resolved.at("data_files")) {
        fs::path path = file.get<std::string>();
        ctx.note_input(path);
        curves.push_back(load_iv_curve(path));
    }
    DeviceParams initial = device_params_from_json(resolved.at("initial").dump());
    std::set<std::string> free_names;
    for (const auto& name : resolved.at("free")) {
        free_names.insert(name.get<std::string>());
    }
    FitReport report = fit_device(curves, initial, free_names);

    json j;
    j["schema"] = "fit-report-v1";
    j["converged"] = report.converged;
    j["iterations"] = report.iterations;
    j["residual_rms_log"] = report.residual_rms_log;
    j["fitted"] = device_json(report.fitted);
    j["residuals"] = numbers_to_json(report.residuals);
    j["residual_history"] = numbers_to_json(report.residual_history);
    ctx.write_output("fit_report.json", j.dump(2) + "\n");
    ctx.write_output("fitted_params.json", device_params_to_json(report.fitted));
    std::cout << "fit: converged=" << (report.converged ? "true" : "false")
              << " iterations=" << report.iterations
              << " residual_rms_log=" << format_double(report.residual_rms_log) << "\n";
}

// ---------------------------------------------------------------------------
// neuron
// ---------------------------------------------------------------------------

json resolve_neuron_preset(const std::string& preset)
{
    if (preset != "fig7b") {
        throw InputError("unknown neuron preset '" + preset + "'");
    }
    NeuronConfig config;
    config.c_ext = 4.7e-9;
    config.v_th = 0.6;
    config.v_d = 1.5;
    config.source = default_device(20e-6);
    json resolved;
    resolved["command"] = "neuron";
    resolved["preset"] = preset;
    resolved["config"] = neuron_json(config);
    resolved["v_tg_list"] = {1.0, 2.0, 3.0, 4.0};
    resolved["duration"] = 0.02;
    resolved["dt"] = 2e-6;
    resolved["trace_decimation"] = 20;
    return resolved;
}

void execute_neuron(const json& resolved, RunContext& ctx)
{
    NeuronConfig config = neuron_config_from_json(resolved.at("config").dump(), ctx.out_dir);
    double duration = resolved.at("duration").get<double>();
    double dt = resolved.at("dt").get<double>();
    int decimation = resolved.value("trace_decimation", 1);
    for (const auto& v : resolved.at("v_tg_list")) {
        double v_tg = v.get<double>();
        RunResult result = run(config, v_tg, duration, dt, decimation, true);
        std::string tag = "vtg_" + format_double(v_tg);
        ctx.write_output("trace_" + tag + ".csv", trace_to_csv(result.trace));
        ctx.write_output("spikes_" + tag + ".csv", spikes_to_csv(result.spike_times));
    }
}

// ---------------------------------------------------------------------------
// freq
// ---------------------------------------------------------------------------

json resolve_freq_preset(const std::string& preset)
{
    if (preset != "fig7c") {
        throw InputError("unknown freq preset '" + preset + "'");
    }
    json resolved;
    resolved["command"] = "freq";
    resolved["preset"] = preset;
    json jobs = json::array();
    std::vector<double> v_tg_values = linspace(0.0, 4.0, 17);

    auto make_job = [&](const std::string& name, double c_ext, double v_d) {
        NeuronConfig config;
        config.c_ext = c_ext;
        config.v_th = 0.6;
        config.v_d = v_d;
        config.source = default_device(20e-6);
        json job;
        job["name"] = name;
        job["config"] = neuron_json(config);
        job["v_tg_values"] = numbers_to_json(v_tg_values);
        return job;
    };
    // Supply-voltage family at fixed C, then capacitor family at fixed V_D.
    jobs.push_back(make_job("fig7c_c4p7n_vd1p5", 4.7e-9, 1.5));
    jobs.push_back(make_job("fig7c_c4p7n_vd2p5", 4.7e-9, 2.5));
    jobs.push_back(make_job("fig7c_c10p_vd2p5", 10e-12, 2.5));
    resolved["jobs"] = jobs;
    return resolved;
}

void execute_freq(const json& resolved, RunContext& ctx)
{
    if (resolved.contains("fit_parasitic")) {
        const auto& fp = resolved.at("fit_parasitic");
        double c_par = fit_parasitic(fp.at("f_ratio").get<double>(),
                                     fp.at("c_small").get<double>(),
                                     fp.at("c_large").get<double>());
        std::cout << "c_par = " << format_double(c_par) << " F\n";
        json j;
        j["schema"] = "parasitic-fit-v1";
        j["f_ratio"] = fp.at("f_ratio");
        j["c_small"] = fp.at("c_small");
        j["c_large"] = fp.at("c_large");
        j["c_par"] = c_par;
        ctx.write_output("parasitic_fit.json", j.dump(2) + "\n");
    }
    if (!resolved.contains("jobs")) {
        return;
    }
    for (const auto& job : resolved.at("jobs")) {
        NeuronConfig config = neuron_config_from_json(job.at("config").dump(), ctx.out_dir);
        std::vector<double> v_tg_values = numbers_from_json(job.at("v_tg_values"));
        MeasureOptions options;
        if (job.contains("dt")) {
            options.dt = job.at("dt").get<double>();
        }
        FrequencyCurve curve = frequency_sweep(config, v_tg_values, options);
        ctx.write_output(job.at("name").get<std::string>() + ".csv",
                         frequency_curve_to_csv(curve));
    }
}

// ---------------------------------------------------------------------------
// snn
// ---------------------------------------------------------------------------

void execute_snn(const json& resolved, RunContext& ctx)
{
    fs::path dataset_path = resolved.at("dataset_path").get<std::string>();
    ctx.note_input(dataset_path);
    IrisDataset dataset = load_iris(dataset_path);
    TrainConfig cfg = train_config_from_json(resolved.at("train_config").dump());
    ctx.seed = cfg.seed;
    EncoderConfig encoder = EncoderConfig::from_samples(dataset.samples);
    NeuronConfig neuron = default_snn_neuron();

    std::string mode = resolved.at("mode").get<std::string>();
    if (mode == "train") {
        TrainResult result = train(dataset, encoder, neuron, cfg);
        ctx.write_output("weights.json", weights_to_json(result.weights));
        ctx.write_output("accuracy.csv", history_to_csv(result.history));
        json summary;
        summary["schema"] = "snn-summary-v1";
        summary["final_train_accuracy"] = result.final_train_accuracy;
        summary["test_accuracy"] = result.test_accuracy;
        summary["peak_test_accuracy"] = result.peak_test_accuracy;
        summary["n_test"] = result.test_indices.size();
        summary["software_equivalent_96_7"] = (result.peak_test_accuracy >= 29.0 / 30.0);
        ctx.write_output("summary.json", summary.dump(2) + "\n");
        std::cout << "train accuracy (final epoch): "
                  << format_double(result.final_train_accuracy) << "\n"
                  << "test accuracy:  " << format_double(result.test_accuracy) << "\n"
                  << "peak test accuracy: " << format_double(result.peak_test_accuracy)
                  << "\n"
                  << "reaches 96.7% (29/30): "
                  << ((result.peak_test_accuracy >= 29.0 / 30.0) ? "yes" : "no") << "\n";
    } else if (mode == "eval") {
        SynapseMatrix w = weights_from_json(resolved.at("weights").dump());
        std::vector<int> all(dataset.samples.size());
        for (size_t i = 0; i < all.size(); ++i) {
            all[i] = static_cast<int>(i);
        }
        double acc = evaluate(dataset.samples, all, w, encoder, neuron, cfg);
        json summary;
        summary["schema"] = "snn-summary-v1";
        summary["accuracy"] = acc;
        summary["n_samples"] = all.size();
        ctx.write_output("eval.json", summary.dump(2) + "\n");
        std::cout << "accuracy: " << format_double(acc) << "\n";
    } else {
        throw InputError("snn: mode must be 'train' or 'eval'");
    }
}

// ---------------------------------------------------------------------------
// plotdata
// ---------------------------------------------------------------------------

void execute_plotdata(const json& resolved, RunContext& ctx)
{
    fs::path input = resolved.at("input").get<std::string>();
    ctx.note_input(input);
    CsvTable table = read_csv(input);
    bool use_log10 = resolved.value("log10", false);

    std::string x_name = resolved.value("x", "");
    if (x_name.empty()) {
        x_name = table.columns.front();
    }
    int x_idx = table.column_index(x_name);
    if (x_idx < 0) {
        throw InputError("plotdata: no column '" + x_name + "' in " + input.string());
    }
    std::vector<std::string> y_names;
    if (resolved.contains("y") && !resolved.at("y").empty()) {
        for (const auto& y : resolved.at("y")) {
            y_names.push_back(y.get<std::string>());
        }
    } else {
        for (const auto& col : table.columns) {
            if (col != x_name) {
                y_names.push_back(col);
            }
        }
    }

    std::string stem = input.stem().string();
    for (const auto& y_name : y_names) {
        int y_idx = table.column_index(y_name);
        if (y_idx < 0) {
            throw InputError("plotdata: no column '" + y_name + "' in " + input.string());
        }
        std::string out;
        for (const auto& row : table.rows) {
            double y = row[static_cast<size_t>(y_idx)];
            if (use_log10) {
                y = std::log10(y);
            }
            out += format_double(row[static_cast<size_t>(x_idx)]);
            out += ' ';
            out += format_double(y);
            out += '\n';
        }
        ctx.write_output(stem + "_" + y_name + ".dat", out);
    }
}

// ---------------------------------------------------------------------------
// dispatch + rerun
// ---------------------------------------------------------------------------

void execute_resolved(const json& resolved, RunContext& ctx)
{
    fs::create_directories(ctx.out_dir);
    std::string command = resolved.at("command").get<std::string>();
    if (command == "sweep") {
        execute_sweep(resolved, ctx);
    } else if (command == "fit") {
        execute_fit(resolved, ctx);
    } else if (command == "neuron") {
        execute_neuron(resolved, ctx);
    } else if (command == "freq") {
        execute_freq(resolved, ctx);
    } else if (command == "snn") {
        execute_snn(resolved, ctx);
    } else if (command == "plotdata") {
        execute_plotdata(resolved, ctx);
    } else {
        throw InputError("unknown command '" + command + "' in manifest");
    }
    write_manifest(ctx, resolved);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"SB-MOSFET ultra-low-current neuron toolkit"};
    app.set_version_flag("--version", std::string("sbneuro ") + k_version);
    app.require_subcommand(1);

    std::string out_dir = ".";
    app.add_option("--out-dir", out_dir, "Directory for outputs and the run manifest")
        ->capture_default_str();

    // --- sweep ---------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "Simulate I-V sweeps of the compact model");
    std::string sweep_params_file, sweep_preset, sweep_variable = "v_tg", sweep_values;
    std::string sweep_format = "csv";
    double sweep_from = 0.0, sweep_to = 1.0;
    int sweep_points = 2;
    double sweep_v_tg = 0.0, sweep_v_bg = 0.0, sweep_v_ds = 0.1;
    sweep_cmd->add_option("--params", sweep_params_file, "DeviceParams JSON file");
    sweep_cmd->add_option("--preset", sweep_preset, "fig4a|fig4b|fig5a|fig5b|fig6a|fig6c");
    sweep_cmd->add_option("--variable", sweep_variable, "v_tg|v_ds|v_bg")
        ->capture_default_str();
    sweep_cmd->add_option("--from", sweep_from, "Sweep start")->capture_default_str();
    sweep_cmd->add_option("--to", sweep_to, "Sweep end")->capture_default_str();
    sweep_cmd->add_option("--points", sweep_points, "Sweep point count")
        ->capture_default_str();
    sweep_cmd->add_option("--values", sweep_values, "Explicit comma-separated sweep values");
    sweep_cmd->add_option("--v-tg", sweep_v_tg, "Fixed top-gate bias")->capture_default_str();
    sweep_cmd->add_option("--v-bg", sweep_v_bg, "Fixed back-gate bias")->capture_default_str();
    sweep_cmd->add_option("--v-ds", sweep_v_ds, "Fixed drain bias")->capture_default_str();
    sweep_cmd->add_option("--format", sweep_format, "csv|json")->capture_default_str();

    // --- fit -----------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "Calibrate the compact model to measured CSVs");
    std::vector<std::string> fit_data_files;
    std::string fit_initial_file, fit_free = "phi_b0,rho_sheet";
    fit_cmd->add_option("--data", fit_data_files, "Measured IVCurve CSV file(s)")->required();
    fit_cmd->add_option("--initial", fit_initial_file, "Initial DeviceParams JSON")->required();
    fit_cmd->add_option("--free", fit_free, "Comma-separated free parameter names")
        ->capture_default_str();

    // --- neuron ----------------------------------------------------------------
    auto* neuron_cmd = app.add_subcommand("neuron", "Simulate membrane traces and spikes");
    std::string neuron_config_file, neuron_preset, neuron_vtg = "1.0";
    double neuron_duration = 0.02, neuron_dt = 2e-6;
    int neuron_decim = 1;
    neuron_cmd->add_option("--config", neuron_config_file, "NeuronConfig JSON file");
    neuron_cmd->add_option("--preset", neuron_preset, "fig7b");
    neuron_cmd->add_option("--v-tg", neuron_vtg, "Comma-separated gate voltages")
        ->capture_default_str();
    neuron_cmd->add_option("--duration", neuron_duration, "Simulated time, s")
        ->capture_default_str();
    neuron_cmd->add_option("--dt", neuron_dt, "Step size, s")->capture_default_str();
    neuron_cmd->add_option("--trace-decim", neuron_decim, "Trace decimation factor")
        ->capture_default_str();

    // --- freq ------------------------------------------------------------------
    auto* freq_cmd = app.add_subcommand("freq", "Frequency versus gate voltage sweeps");
    std::string freq_config_file, freq_preset, freq_vtg_list;
    double freq_dt = 0.0;
    double freq_fit_parasitic = 0.0, freq_c_small = 10e-12, freq_c_large = 4.7e-9;
    freq_cmd->add_option("--config", freq_config_file, "NeuronConfig JSON file");
    freq_cmd->add_option("--preset", freq_preset, "fig7c");
    freq_cmd->add_option("--v-tg-list", freq_vtg_list, "Comma-separated gate voltages");
    freq_cmd->add_option("--dt", freq_dt, "Fixed step size, s (default: auto per point)");
    freq_cmd->add_option("--fit-parasitic", freq_fit_parasitic,
                         "Solve for c_par from a measured frequency ratio");
    freq_cmd->add_option("--c-small", freq_c_small, "Small capacitor, F")->capture_default_str();
    freq_cmd->add_option("--c-large", freq_c_large, "Large capacitor, F")->capture_default_str();

    // --- snn -------------------------------------------------------------------
    auto* snn_cmd = app.add_subcommand("snn", "Train or evaluate the 16x3 spiking network");
    std::string snn_mode, snn_dataset, snn_train_config, snn_weights;
    std::int64_t snn_seed = -1;
    snn_cmd->add_option("mode", snn_mode, "train|eval")->required();
    snn_cmd->add_option("--dataset", snn_dataset, "Iris CSV path (default: bundled copy)");
    snn_cmd->add_option("--train-config", snn_train_config, "TrainConfig JSON file");
    snn_cmd->add_option("--weights", snn_weights, "Weights JSON (eval mode)");
    snn_cmd->add_option("--seed", snn_seed, "Override the training seed");

    // --- plotdata ----------------------------------------------------------------
    auto* plot_cmd = app.add_subcommand("plotdata", "Convert result CSVs to plot-ready columns");
    std::string plot_input, plot_x;
    std::vector<std::string> plot_y;
    bool plot_log10 = false;
    plot_cmd->add_option("input", plot_input, "Result CSV file")->required();
    plot_cmd->add_option("--x", plot_x, "X column (default: first)");
    plot_cmd->add_option("--y", plot_y, "Y column(s) (default: all others)");
    plot_cmd->add_flag("--log10", plot_log10, "Emit log10 of the y column");

    // --- rerun -------------------------------------------------------------------
    auto* rerun_cmd = app.add_subcommand("rerun", "Re-execute a run from its manifest");
    std::string rerun_manifest;
    rerun_cmd->add_option("manifest", rerun_manifest, "manifest.json of a previous run")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? k_exit_ok : k_exit_input;
    }

    try {
        RunContext ctx;
        ctx.out_dir = out_dir;
        json resolved;

        if (sweep_cmd->parsed()) {
            if (!sweep_preset.empty()) {
                resolved = resolve_sweep_preset(sweep_preset);
            } else {
                DeviceParams params = default_device();
                if (!sweep_params_file.empty()) {
                    ctx.note_input(sweep_params_file);
                    params = load_device_params(sweep_params_file);
                }
                std::vector<double> values =
                    sweep_values.empty() ? linspace(sweep_from, sweep_to, sweep_points)
                                         : parse_number_list(sweep_values, "--values");
                resolved["command"] = "sweep";
                resolved["preset"] = "";
                resolved["params"] = device_json(params);
                resolved["format"] = sweep_format;
                resolved["jobs"] = json::array({sweep_job("sweep", sweep_variable, values,
                                                          sweep_v_tg, sweep_v_bg, sweep_v_ds)});
            }
        } else if (fit_cmd->parsed()) {
            ctx.note_input(fit_initial_file);
            DeviceParams initial = load_device_params(fit_initial_file);
            resolved["command"] = "fit";
            resolved["data_files"] = fit_data_files;
            resolved["initial"] = device_json(initial);
            json free_arr = json::array();
            if (!fit_free.empty()) {
                std::string cur;
                for (char c : fit_free + ",") {
                    if (c == ',') {
                        if (!cur.empty()) {
                            free_arr.push_back(cur);
                            cur.clear();
                        }
                    } else if (!std::isspace(static_cast<unsigned char>(c))) {
                        cur.push_back(c);
                    }
                }
            }
            resolved["free"] = free_arr;
        } else if (neuron_cmd->parsed()) {
            if (!neuron_preset.empty()) {
                resolved = resolve_neuron_preset(neuron_preset);
            } else {
                if (neuron_config_file.empty()) {
                    throw InputError("neuron: need --config or --preset");
                }
                ctx.note_input(neuron_config_file);
                NeuronConfig config = load_neuron_config(neuron_config_file);
                resolved["command"] = "neuron";
                resolved["preset"] = "";
                resolved["config"] = neuron_json(config);
                resolved["v_tg_list"] =
                    numbers_to_json(parse_number_list(neuron_vtg, "--v-tg"));
                resolved["duration"] = neuron_duration;
                resolved["dt"] = neuron_dt;
                resolved["trace_decimation"] = neuron_decim;
            }
        } else if (freq_cmd->parsed()) {
            if (!freq_preset.empty()) {
                resolved = resolve_freq_preset(freq_preset);
            } else {
                resolved["command"] = "freq";
                resolved["preset"] = "";
                if (!freq_config_file.empty()) {
                    ctx.note_input(freq_config_file);
                    NeuronConfig config = load_neuron_config(freq_config_file);
                    if (freq_vtg_list.empty()) {
                        throw InputError("freq: need --v-tg-list with --config");
                    }
                    json job;
                    job["name"] = "freq";
                    job["config"] = neuron_json(config);
                    job["v_tg_values"] =
                        numbers_to_json(parse_number_list(freq_vtg_list, "--v-tg-list"));
                    if (freq_dt > 0.0) {
                        job["dt"] = freq_dt;
                    }
                    resolved["jobs"] = json::array({job});
                }
            }
            if (freq_fit_parasitic != 0.0) {
                resolved["fit_parasitic"] = {{"f_ratio", freq_fit_parasitic},
                                             {"c_small", freq_c_small},
                                             {"c_large", freq_c_large}};
            }
            if (!resolved.contains("jobs") && !resolved.contains("fit_parasitic")) {
                throw InputError("freq: need --config, --preset or --fit-parasitic");
            }
        } else if (snn_cmd->parsed()) {
            TrainConfig cfg;
            if (!snn_train_config.empty()) {
                ctx.note_input(snn_train_config);
                cfg = train_config_from_json(read_text_file(snn_train_config));
            }
            if (snn_seed >= 0) {
                cfg.seed = static_cast<std::uint64_t>(snn_seed);
            }
            fs::path dataset_path = resolve_iris_path(
                snn_dataset.empty() ? std::nullopt
                                    : std::optional<fs::path>(snn_dataset));
            resolved["command"] = "snn";
            resolved["mode"] = snn_mode;
            resolved["dataset_path"] = dataset_path.string();
            resolved["train_config"] = json::parse(train_config_to_json(cfg));
            if (snn_mode == "eval") {
                if (snn_weights.empty()) {
                    throw InputError("snn eval: need --weights");
                }
                ctx.note_input(snn_weights);
                resolved["weights"] = json::parse(weights_to_json(load_weights(snn_weights)));
            }
        } else if (plot_cmd->parsed()) {
            resolved["command"] = "plotdata";
            resolved["input"] = plot_input;
            resolved["x"] = plot_x;
            resolved["y"] = plot_y;
            resolved["log10"] = plot_log10;
        } else if (rerun_cmd->parsed()) {
            json manifest = json::parse(read_text_file(rerun_manifest));
            if (manifest.value("schema", "") != "sbneuro-manifest-v1") {
                throw InputError("rerun: not a sbneuro manifest");
            }
            resolved = manifest.at("resolved");
        }

        execute_resolved(resolved, ctx);
        return k_exit_ok;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return k_exit_numeric;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return k_exit_input;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return k_exit_input;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return k_exit_input;
    }
}
