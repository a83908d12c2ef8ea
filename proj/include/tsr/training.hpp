#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

#include "tsr/network.hpp"
#include "tsr/tensor.hpp"

namespace tsr {

/// Training hyperparameters. Defaults reproduce the reference run:
/// Adam at 0.001, batches of 32, up to 100 epochs, early stopping after 10
/// epochs without a validation-accuracy improvement.
struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 100;
    std::size_t early_stop_patience = 10;
    double lr_factor = 0.5;
    std::size_t lr_patience = 5;
    double min_lr = 1e-5;
    std::uint64_t seed = 42;
    double val_fraction = 0.2;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// -sum_c target_c * ln(max(probs_c, 1e-12)). `target` must be one-hot.
template <typename T>
double cross_entropy_loss(const BasicTensor<T>& probs, const BasicTensor<T>& target);

/// Gradient of cross_entropy_loss(softmax(z)) w.r.t. the logits z: probs - target.
template <typename T>
BasicTensor<T> softmax_xent_gradient(const BasicTensor<T>& probs, const BasicTensor<T>& target);

template <typename T>
struct AdamState {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

    ParamSet<T> m;
    ParamSet<T> v;
    std::uint64_t step = 0;

    static AdamState zeros_like(const ParamSet<T>& params);
    friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update; increments `state.step` first.
template <typename T>
void adam_step(ParamSet<T>& params, const ParamSet<T>& grads, AdamState<T>& state, double lr);

/// Incremental reduce-on-plateau bookkeeping over validation accuracy.
/// An epoch improves only if it is strictly above the best seen so far.
struct PlateauTracker {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t wait = 0;

    /// Records one epoch; true when the learning rate should be reduced now
    /// (the wait counter is reset in that case).
    bool observe(double value, std::size_t patience);

    friend bool operator==(const PlateauTracker&, const PlateauTracker&) = default;
};

/// Learning rate for the next epoch given the full validation history.
double reduce_lr_on_plateau(std::span<const double> history, double current_lr,
                            const TrainConfig& cfg);

struct EarlyStopDecision {
    bool stop = false;
    std::size_t best_epoch = 0;  // index of the maximum, earliest on ties
};

/// Stop once none of the last `patience` epochs beats the best value seen
/// before them.
EarlyStopDecision early_stopping_check(std::span<const double> history, std::size_t patience);

}  // namespace tsr
