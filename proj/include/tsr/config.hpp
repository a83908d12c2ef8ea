#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsr/training.hpp"

namespace tsr {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { train, eval, predict, report };

/// TrainConfig plus the paths and switches of one CLI invocation.
struct RunConfig {
    TrainConfig train;
    double test_fraction = 0.2;
    std::size_t threads = 0;  // 0 = TSR_THREADS or hardware concurrency
    std::filesystem::path data_root;
    std::filesystem::path out_dir;
    std::filesystem::path checkpoint;
};

/// Every key accepted in a config file, in documentation order.
const std::vector<std::string>& config_keys();

/// Applies `key = value` text (blank lines and `#` comments allowed) on top
/// of `cfg`. `origin` names the source in error messages ("<origin>:<line>").
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin);

/// Loads defaults, then `file` (if any), then `overrides` (CLI flags, keyed
/// by config key), and checks the paths `command` needs. A train run
/// without an explicit checkpoint writes `<out_dir>/model.tsrn`.
RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::map<std::string, std::string>& overrides, Command command);

}  // namespace tsr
