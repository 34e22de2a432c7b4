#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svsim/core_model.hpp"
#include "svsim/simulation.hpp"

namespace svsim {

// A replication failure; the message names the method and run index.
class ReplicationError : public Error {
 public:
  ReplicationError(std::string method, int replication, const std::string& what);
  const std::string& method() const { return method_; }
  int replication() const { return replication_; }

 private:
  std::string method_;
  int replication_;
};

struct MethodSummary {
  std::string method;
  AssetVariant variant = AssetVariant::kSingleRate;
  int width = 0;
  int height = 0;
  MethodMetrics mean;
  MethodMetrics stddev;  // sample standard deviation, 0 for a single run
  std::vector<double> mean_psnr_per_frame;
  std::vector<double> mean_throughput_bps;  // per bin
};

struct RunReport {
  std::string scenario;
  std::uint64_t base_seed = 0;
  int replications = 0;
  std::string fingerprint;  // 16 hex digits
  double throughput_bin_s = 1.0;
  std::optional<int> diff_map_frame;
  double psnr_cap_db = kDefaultPsnrCap;

  std::vector<MethodSummary> methods;      // in scenario asset order
  std::vector<std::vector<RunResult>> runs;  // [method][replication]
};

struct ReplicationOptions {
  unsigned threads = 0;  // 0 picks the hardware concurrency
  bool trace = false;
};

// FNV-1a 64 over a canonical rendering of the validated config and seed.
std::string scenario_fingerprint(const ScenarioConfig& config, std::uint64_t base_seed);

// Sample mean and standard deviation of each metric.
MethodMetrics metrics_mean(const std::vector<MethodMetrics>& runs);
MethodMetrics metrics_stddev(const std::vector<MethodMetrics>& runs);

// Runs every asset of `config` n times with seeds base_seed + 0..n-1.
// Results do not depend on the thread count.
RunReport run_replications(const ScenarioConfig& config, int n, std::uint64_t base_seed,
                           ReplicationOptions options = {});

}  // namespace svsim
