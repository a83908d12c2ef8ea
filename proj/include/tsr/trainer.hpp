#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "tsr/checkpoint.hpp"
#include "tsr/dataset.hpp"
#include "tsr/metrics.hpp"
#include "tsr/network.hpp"
#include "tsr/training.hpp"

namespace tsr {

struct FitOptions {
    NetworkSpec spec = canonical_network();
    std::size_t lanes = 1;
    /// Starting parameters; drawn from the init stream when absent.
    std::optional<ParamSet<float>> initial_params;
    /// Called after every epoch with the point just appended.
    std::function<void(const CurvePoint&)> on_epoch;
};

struct FitResult {
    ParamSet<float> params;  // from the best-validation-accuracy epoch
    ParamSet<float> final_params;
    std::vector<CurvePoint> curves;
    Checkpoint best_checkpoint;
    std::size_t best_epoch = 0;  // 1-based; 0 when no epoch ran
    bool stopped_early = false;
};

/// Loss and accuracy of `params` in eval mode, summed in example order.
struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<int> predictions;
};

Evaluation evaluate(const NetworkSpec& spec, const ParamSet<float>& params,
                    const std::vector<LabeledExample>& examples, std::size_t lanes = 1);

/// Mini-batch Adam over `split.train`, monitored on `split.validation`.
/// Output is identical for any lane count.
FitResult fit(const DatasetSplit& split, const TrainConfig& cfg, const FitOptions& options = {});

}  // namespace tsr
