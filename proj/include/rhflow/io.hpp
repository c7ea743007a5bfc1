// Serialization: MetricState and FlowHistory CSV round-trips, HeatSolution and
// EntropyReport exports, JSON report documents, and FNV-1a content hashes.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "rhflow/inequalities.hpp"

namespace rhflow {

// Shortest decimal that round-trips a double (17 significant digits).
std::string format_double(double x);

// One CSV block: `# t=<t> N=<N>`, header `x,a,f,phi`, one row per node.
void write_metric_csv(std::ostream& os, const MetricState& m);
MetricState read_metric_csv(std::istream& is);

void save_metric(const std::string& path, const MetricState& m);
MetricState load_metric(const std::string& path);

// Manifest line `# flow N=<N> K=<K> scheme=<scheme> cfl=<cfl>` followed by K
// MetricState blocks; loading rejects files whose grids differ between blocks.
void save_history(const std::string& path, const FlowHistory& hist);
FlowHistory load_history(const std::string& path);

// Long-format CSV `t,x,u` with a comment line recording direction and width.
void save_heat_csv(const std::string& path, const Grid& g, const HeatSolution& sol);

// CSV `t,tau,F,dFdt,prodF,W,dWdt,prodW,res_F,res_W`, one row per slice.
void save_entropy_csv(const std::string& path, const EntropyReport& rep);

// JSON documents with the stable schema {kind, inputs, margins, witness?, resolution}.
nlohmann::json to_json(const SobolevReport& rep, int grid_n);
nlohmann::json to_json(const CheckReport& rep, int grid_n);
nlohmann::json to_json(const GaussianReport& rep);
nlohmann::json to_json(const EntropyReport& rep, int grid_n);

void save_json(const std::string& path, const nlohmann::json& doc);

// FNV-1a 64-bit hash of a byte string / of a file's contents (hex).
std::uint64_t fnv1a(const std::string& bytes);
std::string file_hash_hex(const std::string& path);

}  // namespace rhflow
