// Line-oriented `key = value` experiment configuration with [section] headers.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rhflow/flow.hpp"

namespace rhflow {

enum class ExperimentKind { Flow, Kernel, Entropy, Sobolev, Gaussian, VerifyAll };

std::string kind_name(ExperimentKind k);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::VerifyAll;  // set by the CLI subcommand
    FlowConfig flow;

    // heat parameters
    double T = 0.1;            // kernel terminal time
    double t_stop = 0.01;      // conjugate solve stops here
    double delta_width = 0.0;  // 0: default 4 h max(a) at time T
    double heat_dt = 0.0;      // 0: 0.2 h^2

    // check parameters
    double c1 = 0.0625;  // 1/16
    std::vector<double> eps_list = {0.5, 1.0};
    std::vector<double> delta_list = {0.5, 1.0, 2.0};
    int family_size = 20;
    std::uint64_t seed = 24243;
    double tau_offset = 0.15;   // tau(t) = tau_offset + (T - t)
    bool s_override_zero = false;  // hypothetical S == 0 background for flag-path checks

    std::string out_dir = "out";
    bool quiet = false;
};

// Parses the documented format; throws std::runtime_error naming the first
// offending line on unknown keys, type mismatches, or invariant violations.
ExperimentConfig parse_config(const std::string& text);

// Inverse of parse_config for the documented keys (used by print-config).
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace rhflow
