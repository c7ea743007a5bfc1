// Experiment orchestration: runs the named suites, writes reports, and
// aggregates pass/flag/fail into the exit-code contract.
#pragma once

#include <string>
#include <vector>

#include "rhflow/config.hpp"

namespace rhflow {

enum class CheckStatus { Pass, Flag, Fail };

struct CheckOutcome {
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    std::string detail;
};

struct RunManifest {
    std::string version;
    std::string config_echo;
    double wall_seconds = 0.0;
    std::vector<CheckOutcome> checks;
    std::vector<std::pair<std::string, std::string>> files;  // path, fnv1a hash

    // 0 = all pass, 2 = flags present, 1 = any failure.
    int exit_code() const;
};

// Runs the experiment described by cfg.kind, emitting files into cfg.out_dir
// (created if missing) and `manifest.json`. Deterministic for a fixed config.
RunManifest run_experiment(const ExperimentConfig& cfg);

}  // namespace rhflow
