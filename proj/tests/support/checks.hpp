#pragma once

// Measurements behind the acceptance criteria. Each returns raw numbers;
// the caller decides pass/fail against the pinned tolerances.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tsr/network.hpp"

namespace tsr::checks {

/// 6x6x3 input, every layer type of the canonical network, 5 classes.
NetworkSpec reduced_network();

/// (name, max relative error) for every analytic gradient of every layer op.
std::vector<std::pair<std::string, double>> layer_gradient_errors(std::uint64_t seed);

/// Max relative error over every parameter of reduced_network().
double network_gradient_error(std::uint64_t seed);

struct OracleTally {
    std::string op;
    std::size_t instances = 0;
    std::size_t integer_mismatches = 0;  // integer-valued inputs, bitwise comparison
    std::size_t real_mismatches = 0;     // real-valued inputs, bitwise comparison
};

std::vector<OracleTally> oracle_equivalence(std::size_t instances, std::uint64_t seed);

struct DropoutMonteCarlo {
    std::size_t instances = 0;
    double worst_z_mean = 0.0;      // |mean estimate - sum p w I| / SE
    double worst_z_variance = 0.0;  // |variance estimate - sum p(1-p) w^2 I^2| / SE
    double worst_z_response = 0.0;  // E_R rebuilt from the estimates vs the formula
};

DropoutMonteCarlo dropout_monte_carlo(std::size_t instances, std::size_t samples, std::uint64_t seed);

struct AdamComparison {
    double max_trajectory_diff = 0.0;  // 100 steps on theta^2 vs the scalar oracle
    double max_first_step_dev = 0.0;   // | |delta theta| - lr | over several |g| >> eps
};

AdamComparison adam_comparison();

struct MetricsIdentities {
    bool trace_is_accuracy = false;
    bool recall_is_per_class = false;
    bool csv_round_trip = false;
    std::string detail;
};

MetricsIdentities metrics_identities(std::size_t pairs, std::uint64_t seed,
                                     const std::filesystem::path& scratch);

}  // namespace tsr::checks
