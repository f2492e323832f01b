#include "sbneuro/snn.hpp"

#include "sbneuro/errors.hpp"
#include "sbneuro/extract.hpp"
#include "sbneuro/io.hpp"
#include "sbneuro/sb_model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sbneuro {

void EncoderConfig::validate() const
{
    if (fields_per_feature < 1) {
        throw InvalidParams("EncoderConfig: fields_per_feature must be >= 1");
    }
    if (input_size() != SynapseMatrix::n_inputs) {
        throw InvalidParams("EncoderConfig: input size must be 16 (4 features x 4 fields)");
    }
    if (!(r_max > 0.0)) {
        throw InvalidParams("EncoderConfig: r_max must be > 0");
    }
    for (size_t f = 0; f < 4; ++f) {
        if (static_cast<int>(centers[f].size()) != fields_per_feature) {
            throw InvalidParams("EncoderConfig: centers not initialized");
        }
        if (!(sigma[f] > 0.0)) {
            throw InvalidParams("EncoderConfig: sigma must be > 0");
        }
    }
}

EncoderConfig EncoderConfig::from_samples(std::span<const IrisSample> samples,
                                          int fields_per_feature, double r_max,
                                          double width_factor)
{
    if (samples.empty()) {
        throw InputError("EncoderConfig::from_samples: no samples");
    }
    EncoderConfig enc;
    enc.fields_per_feature = fields_per_feature;
    enc.r_max = r_max;
    for (size_t f = 0; f < 4; ++f) {
        double lo = samples[0].features[f];
        double hi = lo;
        for (const auto& s : samples) {
            lo = std::min(lo, s.features[f]);
            hi = std::max(hi, s.features[f]);
        }
        if (!(hi > lo)) {
            hi = lo + 1.0; // degenerate feature: give the fields unit spread
        }
        double spacing = (hi - lo) / (fields_per_feature - 1);
        for (int k = 0; k < fields_per_feature; ++k) {
            enc.centers[f].push_back(lo + k * spacing);
        }
        enc.sigma[f] = spacing * width_factor;
    }
    enc.validate();
    return enc;
}

std::vector<double> encode(const IrisSample& sample, const EncoderConfig& encoder)
{
    encoder.validate();
    std::vector<double> rates;
    rates.reserve(static_cast<size_t>(encoder.input_size()));
    for (size_t f = 0; f < 4; ++f) {
        for (double center : encoder.centers[f]) {
            double d = sample.features[f] - center;
            double s = encoder.sigma[f];
            rates.push_back(encoder.r_max * std::exp(-d * d / (2.0 * s * s)));
        }
    }
    return rates;
}

void SynapseMatrix::clip()
{
    for (auto& row : w) {
        for (double& value : row) {
            value = std::clamp(value, w_min, w_max);
        }
    }
}

void TrainConfig::validate() const
{
    if (!(eta > 0.0)) {
        throw InvalidParams("TrainConfig: eta must be > 0");
    }
    if (epochs < 0) {
        throw InvalidParams("TrainConfig: epochs must be >= 0");
    }
    if (!(split > 0.0) || !(split < 1.0)) {
        throw InvalidParams("TrainConfig: split must lie in (0, 1)");
    }
    if (!(sim_window > 0.0) || !(dt > 0.0)) {
        throw InvalidParams("TrainConfig: sim_window and dt must be > 0");
    }
}

std::array<long, 3> forward(std::span<const double> rates, const SynapseMatrix& w,
                            const NeuronConfig& neuron, const TrainConfig& cfg,
                            double r_max)
{
    if (rates.size() != SynapseMatrix::n_inputs) {
        throw InputError("forward: expected 16 input rates");
    }
    std::array<long, 3> counts{};
    for (int i = 0; i < SynapseMatrix::n_outputs; ++i) {
        double drive = 0.0;
        for (int j = 0; j < SynapseMatrix::n_inputs; ++j) {
            drive += w.w[static_cast<size_t>(j)][static_cast<size_t>(i)] *
                     (rates[static_cast<size_t>(j)] / r_max);
        }
        double v_eff = cfg.v_bias + cfg.v_scale * drive;
        RunResult r = run(neuron, v_eff, cfg.sim_window, cfg.dt, 1, false);
        counts[static_cast<size_t>(i)] = static_cast<long>(r.spike_times.size());
    }
    return counts;
}

Prediction predict(const std::array<long, 3>& counts)
{
    Prediction p;
    long best = counts[0];
    for (int i = 1; i < 3; ++i) {
        if (counts[static_cast<size_t>(i)] > best) {
            best = counts[static_cast<size_t>(i)];
            p.cls = i;
        }
    }
    p.any_spike = (counts[0] > 0 || counts[1] > 0 || counts[2] > 0);
    return p;
}

void train_epoch(std::span<const IrisSample> samples, std::span<const int> indices,
                 SynapseMatrix& w, const EncoderConfig& encoder, const NeuronConfig& neuron,
                 const TrainConfig& cfg, std::mt19937_64& rng)
{
    cfg.validate();
    std::vector<int> order(indices.begin(), indices.end());
    std::shuffle(order.begin(), order.end(), rng);
    for (int idx : order) {
        const IrisSample& sample = samples[static_cast<size_t>(idx)];
        std::vector<double> rates = encode(sample, encoder);
        std::array<long, 3> counts = forward(rates, w, neuron, cfg, encoder.r_max);
        for (int i = 0; i < SynapseMatrix::n_outputs; ++i) {
            double r_out = static_cast<double>(counts[static_cast<size_t>(i)]) / cfg.sim_window;
            double r_target = (i == sample.label) ? cfg.r_target_hi : cfg.r_target_lo;
            double error = r_target - r_out;
            for (int j = 0; j < SynapseMatrix::n_inputs; ++j) {
                w.w[static_cast<size_t>(j)][static_cast<size_t>(i)] +=
                    cfg.eta * error * (rates[static_cast<size_t>(j)] / encoder.r_max);
            }
        }
        w.clip();
    }
}

double evaluate(std::span<const IrisSample> samples, std::span<const int> indices,
                const SynapseMatrix& w, const EncoderConfig& encoder,
                const NeuronConfig& neuron, const TrainConfig& cfg)
{
    if (indices.empty()) {
        throw EmptyPartition("evaluate: empty partition");
    }
    long correct = 0;
    for (int idx : indices) {
        const IrisSample& sample = samples[static_cast<size_t>(idx)];
        std::vector<double> rates = encode(sample, encoder);
        Prediction p = predict(forward(rates, w, neuron, cfg, encoder.r_max));
        if (p.cls == sample.label) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(indices.size());
}

TrainResult train(const IrisDataset& dataset, const EncoderConfig& encoder,
                  const NeuronConfig& neuron, const TrainConfig& cfg)
{
    dataset.validate();
    neuron.validate();
    cfg.validate();

    std::mt19937_64 rng(cfg.seed);

    // Stratified split: shuffle each class and take the first split-fraction
    // for training.
    TrainResult result;
    for (int cls = 0; cls < 3; ++cls) {
        std::vector<int> members;
        for (size_t i = 0; i < dataset.samples.size(); ++i) {
            if (dataset.samples[i].label == cls) {
                members.push_back(static_cast<int>(i));
            }
        }
        std::shuffle(members.begin(), members.end(), rng);
        size_t n_train = static_cast<size_t>(
            std::lround(cfg.split * static_cast<double>(members.size())));
        n_train = std::clamp<size_t>(n_train, 1, members.size() - 1);
        result.train_indices.insert(result.train_indices.end(), members.begin(),
                                    members.begin() + static_cast<long>(n_train));
        result.test_indices.insert(result.test_indices.end(),
                                   members.begin() + static_cast<long>(n_train),
                                   members.end());
    }

    SynapseMatrix w;
    std::uniform_real_distribution<double> init(
        w.w_min + 0.25 * (w.w_max - w.w_min), w.w_min + 0.75 * (w.w_max - w.w_min));
    for (auto& row : w.w) {
        for (double& value : row) {
            value = init(rng);
        }
    }

    result.history.reserve(static_cast<size_t>(cfg.epochs));
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        train_epoch(dataset.samples, result.train_indices, w, encoder, neuron, cfg, rng);
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_acc =
            evaluate(dataset.samples, result.train_indices, w, encoder, neuron, cfg);
        stats.test_acc =
            evaluate(dataset.samples, result.test_indices, w, encoder, neuron, cfg);
        result.history.push_back(stats);
        result.peak_test_accuracy = std::max(result.peak_test_accuracy, stats.test_acc);
    }

    result.weights = w;
    result.final_train_accuracy =
        evaluate(dataset.samples, result.train_indices, w, encoder, neuron, cfg);
    result.test_accuracy =
        evaluate(dataset.samples, result.test_indices, w, encoder, neuron, cfg);
    result.peak_test_accuracy = std::max(result.peak_test_accuracy, result.test_accuracy);
    return result;
}

NeuronConfig default_snn_neuron()
{
    // Calibrate the reference device into a VCCS over the gate range the
    // encoder drives, at a drain probe low enough to span pA..100 nA.
    DeviceParams device = default_device(20e-6);
    std::vector<double> sweep;
    for (int i = 0; i <= 80; ++i) {
        sweep.push_back(i * 0.05);
    }
    IVCurve curve = transfer_curve(device, sweep, 0.0, 0.2);
    NeuronConfig neuron;
    neuron.c_ext = 4.7e-9;
    neuron.v_th = 0.6;
    neuron.v_d = 2.5;
    neuron.source = fit_vccs(curve, 33);
    return neuron;
}

// =============================================================================
// Serialization
// =============================================================================

namespace {
constexpr const char* k_weights_schema = "snn-weights-v1";
constexpr const char* k_train_schema = "snn-train-v1";
}

std::string weights_to_json(const SynapseMatrix& w)
{
    nlohmann::json j;
    j["schema"] = k_weights_schema;
    j["rows"] = SynapseMatrix::n_inputs;
    j["cols"] = SynapseMatrix::n_outputs;
    j["w_min"] = w.w_min;
    j["w_max"] = w.w_max;
    auto& arr = j["w"] = nlohmann::json::array();
    for (const auto& row : w.w) {
        for (double value : row) {
            arr.push_back(value);
        }
    }
    return j.dump(2) + "\n";
}

SynapseMatrix weights_from_json(const std::string& json_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("weights JSON parse error: ") + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != k_weights_schema) {
        throw InputError("weights JSON: expected \"schema\": \"" +
                         std::string(k_weights_schema) + "\"");
    }
    SynapseMatrix w;
    try {
        if (j.at("rows").get<int>() != SynapseMatrix::n_inputs ||
            j.at("cols").get<int>() != SynapseMatrix::n_outputs) {
            throw InputError("weights JSON: expected a 16x3 matrix");
        }
        w.w_min = j.value("w_min", 0.0);
        w.w_max = j.value("w_max", 1.0);
        const auto& arr = j.at("w");
        if (arr.size() != SynapseMatrix::n_inputs * SynapseMatrix::n_outputs) {
            throw InputError("weights JSON: expected 48 entries");
        }
        size_t k = 0;
        for (auto& row : w.w) {
            for (double& value : row) {
                value = arr.at(k++).get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("weights JSON: ") + e.what());
    }
    for (const auto& row : w.w) {
        for (double value : row) {
            if (value < w.w_min || value > w.w_max) {
                throw InputError("weights JSON: weight outside [w_min, w_max]");
            }
        }
    }
    return w;
}

SynapseMatrix load_weights(const std::filesystem::path& path)
{
    return weights_from_json(read_text_file(path));
}

void save_weights(const SynapseMatrix& w, const std::filesystem::path& path)
{
    write_text_file(path, weights_to_json(w));
}

std::string history_to_csv(std::span<const EpochStats> history)
{
    std::string out = "epoch,train_acc,test_acc\n";
    for (const auto& row : history) {
        out += std::to_string(row.epoch);
        out += ',';
        out += format_double(row.train_acc);
        out += ',';
        out += format_double(row.test_acc);
        out += '\n';
    }
    return out;
}

std::string train_config_to_json(const TrainConfig& cfg)
{
    nlohmann::json j;
    j["schema"] = k_train_schema;
    j["eta"] = cfg.eta;
    j["epochs"] = cfg.epochs;
    j["seed"] = cfg.seed;
    j["split"] = cfg.split;
    j["sim_window"] = cfg.sim_window;
    j["r_target_hi"] = cfg.r_target_hi;
    j["r_target_lo"] = cfg.r_target_lo;
    j["dt"] = cfg.dt;
    j["v_bias"] = cfg.v_bias;
    j["v_scale"] = cfg.v_scale;
    return j.dump(2) + "\n";
}

TrainConfig train_config_from_json(const std::string& json_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("train config JSON parse error: ") + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != k_train_schema) {
        throw InputError("train config JSON: expected \"schema\": \"" +
                         std::string(k_train_schema) + "\"");
    }
    TrainConfig cfg;
    try {
        cfg.eta = j.value("eta", cfg.eta);
        cfg.epochs = j.value("epochs", cfg.epochs);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.split = j.value("split", cfg.split);
        cfg.sim_window = j.value("sim_window", cfg.sim_window);
        cfg.r_target_hi = j.value("r_target_hi", cfg.r_target_hi);
        cfg.r_target_lo = j.value("r_target_lo", cfg.r_target_lo);
        cfg.dt = j.value("dt", cfg.dt);
        cfg.v_bias = j.value("v_bias", cfg.v_bias);
        cfg.v_scale = j.value("v_scale", cfg.v_scale);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("train config JSON: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

} // namespace sbneuro
