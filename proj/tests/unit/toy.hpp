#pragma once

// Shared toy dataset and one long training run, built once per process.

#include <filesystem>

#include "tsr/dataset.hpp"
#include "tsr/trainer.hpp"

namespace toy {

/// Scratch directory unique to this test process.
const std::filesystem::path& scratch();

/// 5 classes x 20 images written under scratch()/data.
const std::filesystem::path& data_root();

/// The default 0.2 / 0.2 split of data_root() with seed 42.
const tsr::DatasetSplit& split();

/// 40 epochs with early stopping effectively disabled.
const tsr::FitResult& long_fit();

}  // namespace toy
