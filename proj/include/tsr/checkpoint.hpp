#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsr/network.hpp"
#include "tsr/rng.hpp"
#include "tsr/training.hpp"

namespace tsr {

enum class CheckpointErrorKind { io, not_a_checkpoint, unsupported_version, truncated, corrupt };

class CheckpointError : public std::runtime_error {
public:
    CheckpointError(CheckpointErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    CheckpointErrorKind kind() const noexcept { return kind_; }

private:
    CheckpointErrorKind kind_;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything needed to resume or evaluate a run.
///
/// On-disk layout (all integers little-endian):
///   "TSRN" | u32 version
///   u32 input rank | u32 dims...
///   u32 layer count | per layer: u32 tag, u32 n, n x u32 hyperparameters
///     (conv 1: filters, kernel; relu 2; maxpool 3: window, stride, padding;
///      dropout 4: IEEE-754 bits of the float32 rate; flatten 5; dense 6: units;
///      softmax 7)
///   u32 tensor count | per tensor: u32 rank, u32 dims..., f32 values
///   u64 adam step | u32 moment count | m tensors' f32 values | v tensors' f32 values
///   f64 learning rate | f64 plateau best | u32 plateau wait
///   u64 seed | u64 shuffle key | u64 shuffle counter
///   u32 epoch | f64 best monitored value
struct Checkpoint {
    NetworkSpec spec;
    ParamSet<float> params;
    AdamState<float> optimizer;
    double learning_rate = 0.0;
    PlateauTracker plateau;
    std::uint64_t seed = 0;
    CounterRng shuffle_rng;
    std::uint32_t epoch = 0;
    double best_value = 0.0;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tsr
