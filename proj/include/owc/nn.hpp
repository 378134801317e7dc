#pragma once

// Compact convolutional pilot-to-channel estimator.
//
// Input: the LS pilot observations (n_pilots x n_symbols complex). The two real
// planes are scaled by norm_scale and linearly interpolated along the tone axis
// onto the first-half tones 0..n_f/2 (pilot p sits on tone first + p * spacing,
// band edges hold the nearest pilot). Three same-padded 3x3 convolutions
// (widths w0 -> w1 -> w2 -> w3, ReLU on the hidden layers) follow and their
// output is added to the interpolated input planes. The sum is averaged across
// the symbol axis, divided by norm_scale and mirrored (conjugate) onto tones
// above n_f/2.

#include "owc/dft.hpp"
#include "owc/estimators.hpp"
#include "owc/tensor_file.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace owc::nn {

struct NetArch {
    int n_f = 324;
    int first_tone = 1;
    int tone_spacing = 5;
    int n_pilots = 33;
    int n_symbols = 4;
    std::array<int, 4> widths{2, 32, 30, 2};

    static NetArch standard(const PilotPattern& pattern, const ModemConfig& cfg);

    int rows() const { return n_f / 2 + 1; }
    std::size_t param_count() const;
    std::string tag() const;
    static NetArch from_tag(const std::string& tag);

    bool operator==(const NetArch&) const = default;
};

template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(numel(shape)) {}

    static std::size_t numel(const std::vector<int>& s)
    {
        std::size_t n = 1;
        for (int d : s)
            n *= static_cast<std::size_t>(d);
        return n;
    }
    bool operator==(const Tensor&) const = default;
};

template <typename T>
struct NamedTensor {
    std::string name;
    Tensor<T> tensor;
    bool operator==(const NamedTensor&) const = default;
};

template <typename T>
struct Weights {
    std::vector<NamedTensor<T>> tensors;
    double norm_scale = 1e4;
    std::string arch_tag;

    Tensor<T>& get(const std::string& name);
    const Tensor<T>& get(const std::string& name) const;
    std::size_t param_count() const;
    /// Same names and shapes, all zeros.
    Weights zeros_like() const;
    bool operator==(const Weights&) const = default;
};

using ModelWeights = Weights<float>;

template <typename To, typename From>
Weights<To> cast_weights(const Weights<From>& w);

struct TrainConfig {
    double lr0 = 2e-4;
    double lr_decay = 0.3;
    int decay_every = 10;
    int epochs = 100;
    int batch = 64;
    double l2 = 1e-9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 1;

    void validate() const;
};

/// lr0 * lr_decay^floor(epoch / decay_every), epoch 0-based.
double learning_rate(const TrainConfig& cfg, int epoch);

/// One training pair in the stored precision.
struct TrainPair {
    std::vector<float> pilot_ls; // n_pilots x n_symbols, interleaved re/im, row-major
    std::vector<float> true_h;   // n_f interleaved re/im
};

TrainPair make_pair(const PilotLs& ls, std::span<const cd> true_h);

template <typename T>
Weights<T> init_weights(const NetArch& arch, std::uint64_t seed, double norm_scale = 1e4);

template <typename T>
CVec forward(const Weights<T>& w, const PilotLs& pilot_ls);

template <typename T>
struct LossGrad {
    double loss = 0.0;
    double mse = 0.0;
    Weights<T> grads;
    /// d loss / d pilot_ls for each batch element (same layout as TrainPair::pilot_ls),
    /// filled only on request.
    std::vector<std::vector<double>> input_grads;
};

/// Mean squared error in normalized units over the first-half output planes,
/// plus l2 * ||w||^2, with exact gradients by reverse accumulation.
template <typename T>
LossGrad<T> loss_and_grads(const Weights<T>& w, std::span<const TrainPair> batch, double l2,
                           bool want_input_grads = false);

template <typename T>
struct AdamState {
    Weights<T> m;
    Weights<T> v;
    long step = 0;
};

template <typename T>
AdamState<T> adam_init(const Weights<T>& w);

/// One bias-corrected Adam update; step_index is 1-based.
template <typename T>
void adam_step(AdamState<T>& state, Weights<T>& w, const Weights<T>& grads, long step_index,
               double lr, const TrainConfig& cfg);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    ModelWeights weights;
    std::vector<EpochRecord> history;
};

/// Mini-batch Adam with seeded per-epoch shuffling. Deterministic given cfg.seed.
TrainResult train(std::span<const TrainPair> train_set, std::span<const TrainPair> val_set,
                  const NetArch& arch, const TrainConfig& cfg, double norm_scale = 1e4,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Mean MSE (normalized units, no regularizer) over a set.
double evaluate_mse(const ModelWeights& w, std::span<const TrainPair> set);

using FormatError = io::FormatError;

void save_weights(const ModelWeights& w, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);
/// Load and reject files whose architecture differs from `expected`.
ModelWeights load_weights(const std::filesystem::path& path, const NetArch& expected);

} // namespace owc::nn
