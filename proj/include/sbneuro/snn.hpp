#pragma once

#include "sbneuro/iris.hpp"
#include "sbneuro/neuron.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sbneuro {

// =============================================================================
// Two-layer feedforward 16x3 spiking network over the hardware-derived neuron
// =============================================================================

/// Gaussian receptive-field population coding: each of the 4 features drives
/// fields_per_feature input channels with rate
///   r_max * exp(-(x - center)^2 / (2 sigma^2)).
struct EncoderConfig {
    int fields_per_feature = 4;
    double r_max = 200.0; // Hz, peak input rate
    std::array<std::vector<double>, 4> centers;
    std::array<double, 4> sigma{};

    int input_size() const { return 4 * fields_per_feature; }
    void validate() const;

    /// Centers span each feature's [min, max] over the dataset; sigma is
    /// width_factor times the center spacing.
    static EncoderConfig from_samples(std::span<const IrisSample> samples,
                                      int fields_per_feature = 4, double r_max = 200.0,
                                      double width_factor = 0.8);
};

std::vector<double> encode(const IrisSample& sample, const EncoderConfig& encoder);

struct SynapseMatrix {
    static constexpr int n_inputs = 16;
    static constexpr int n_outputs = 3;

    std::array<std::array<double, n_outputs>, n_inputs> w{}; // w[input][output]
    double w_min = 0.0;
    double w_max = 1.0;

    void clip();
};

struct TrainConfig {
    double eta = 2e-4;         // learning rate
    int epochs = 40;
    std::uint64_t seed = 42;
    double split = 0.8;        // train fraction of each class
    double sim_window = 1.0;   // s per sample
    double r_target_hi = 50.0; // Hz, target rate for the true class
    double r_target_lo = 2.0;  // Hz, target rate for the other classes
    double dt = 1e-3;          // s
    double v_bias = 0.0;       // V, gate bias at zero synaptic drive
    double v_scale = 0.7;      // V per unit of normalized synaptic drive

    void validate() const;
};

/// Spike counts of the three output neurons over one sim window. Each output
/// neuron sees the gate voltage
///   v_eff_i = v_bias + v_scale * sum_j w[j][i] * rate_j / r_max
/// held constant over the window (rate-coded steady state) and is simulated
/// independently.
std::array<long, 3> forward(std::span<const double> rates, const SynapseMatrix& w,
                            const NeuronConfig& neuron, const TrainConfig& cfg,
                            double r_max);

struct Prediction {
    int cls = 0;
    bool any_spike = false; // degenerate all-zero readouts keep cls = 0
};

/// Argmax of the spike counts; ties break to the lowest index.
Prediction predict(const std::array<long, 3>& counts);

/// One pass of the supervised rate-based delta rule over the partition in
/// seeded-shuffled order:
///   dw_ij = eta * (r_target_i - r_i) * rate_j / r_max,   then clip.
void train_epoch(std::span<const IrisSample> samples, std::span<const int> indices,
                 SynapseMatrix& w, const EncoderConfig& encoder, const NeuronConfig& neuron,
                 const TrainConfig& cfg, std::mt19937_64& rng);

/// Fraction of correct predictions over a partition. Throws EmptyPartition.
double evaluate(std::span<const IrisSample> samples, std::span<const int> indices,
                const SynapseMatrix& w, const EncoderConfig& encoder,
                const NeuronConfig& neuron, const TrainConfig& cfg);

struct EpochStats {
    int epoch = 0;
    double train_acc = 0.0;
    double test_acc = 0.0;
};

struct TrainResult {
    SynapseMatrix weights;
    std::vector<EpochStats> history;
    std::vector<int> train_indices;
    std::vector<int> test_indices;
    double final_train_accuracy = 0.0;
    double test_accuracy = 0.0;      // held-out accuracy of the final weights
    double peak_test_accuracy = 0.0; // best held-out accuracy over the epochs
};

/// Stratified seeded split, train_epoch per epoch, per-epoch accuracies
/// recorded. Fully reproducible from cfg.seed.
TrainResult train(const IrisDataset& dataset, const EncoderConfig& encoder,
                  const NeuronConfig& neuron, const TrainConfig& cfg);

/// The toolkit's reference network: the default 20 um device calibrated into
/// a VccsModel feeding a 4.7 nF neuron at v_d = 2.5 V, v_th = 0.6 V.
NeuronConfig default_snn_neuron();

// Serialization: weights as JSON ("schema": "snn-weights-v1", row-major
// 16x3), training history as CSV `epoch,train_acc,test_acc`.
std::string weights_to_json(const SynapseMatrix& w);
SynapseMatrix weights_from_json(const std::string& json_text);
SynapseMatrix load_weights(const std::filesystem::path& path);
void save_weights(const SynapseMatrix& w, const std::filesystem::path& path);
std::string history_to_csv(std::span<const EpochStats> history);

// TrainConfig JSON ("schema": "snn-train-v1"); all fields optional with the
// defaults above.
TrainConfig train_config_from_json(const std::string& json_text);
std::string train_config_to_json(const TrainConfig& cfg);

} // namespace sbneuro
