#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "svsim/core_model.hpp"
#include "svsim/endpoints.hpp"
#include "svsim/flow_table.hpp"
#include "svsim/kernel.hpp"
#include "svsim/network.hpp"
#include "svsim/quality.hpp"

namespace svsim {

// Server-to-client media flow and the client-to-server control flow.
inline constexpr FlowId kMediaFlow = 1;
inline constexpr FlowId kControlFlow = 2;

struct FlowEvent {
  TimeNs time = 0;
  std::string flow;
  std::string event;
  std::string detail;
};

struct MethodMetrics {
  double mean_psnr_db = 0.0;
  double mean_throughput_bps = 0.0;
  double mean_delay_s = 0.0;
  double sent = 0.0;
  double received = 0.0;
  double lost = 0.0;
  double loss_pct = 0.0;
};

struct RunResult {
  std::string method;  // asset name
  AssetVariant variant = AssetVariant::kSingleRate;
  int replication = 0;
  std::uint64_t seed = 0;
  TimeNs start_time = 0;
  TimeNs end_time = 0;
  KernelStats kernel;

  std::vector<NodeId> route;  // server -> client
  std::vector<FlowRule> rules;
  std::vector<PacketRecord> packets;  // every packet of the run, all flows
  std::vector<DropRecord> drops;
  std::map<FlowId, FlowAccounting> accounting;

  QualityLedger ledger;
  std::vector<double> throughput_bps;  // media flow, per bin
  std::vector<FlowEvent> events;       // sorted by time, stable
  std::vector<std::string> trace;      // kernel trace lines, if requested

  // DASH only
  std::vector<DashClient::RequestRecord> dash_requests;
  // SVC only: layers emitted per frame and when each frame was sent
  std::vector<int> svc_layers;
  std::vector<TimeNs> frame_send_times;

  MethodMetrics metrics;

  // Media-flow packet records only.
  std::vector<PacketRecord> media_packets() const;
};

struct SimulationOptions {
  bool trace = false;
};

// Start time of the media session for one replication: start_s plus a
// uniform offset in [-start_jitter_s, +start_jitter_s] drawn from `seed`.
TimeNs jittered_start(const RunOptions& run, std::uint64_t seed);

// Runs one delivery method (the asset's variant decides which) over a
// validated scenario. Methods never share the network within a run.
RunResult simulate(const ScenarioConfig& scenario, const VideoAsset& asset, int replication,
                   std::uint64_t seed, SimulationOptions options = {});

}  // namespace svsim
