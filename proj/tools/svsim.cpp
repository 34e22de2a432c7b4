// svsim command line: run, validate, topo.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "svsim/report.hpp"
#include "svsim/runner.hpp"
#include "svsim/scenario_file.hpp"
#include "svsim/topo_file.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;

// Loads and validates; prints problems and returns nullopt on failure.
std::optional<svsim::ScenarioConfig> load_valid(const std::string& path) {
  svsim::ScenarioConfig raw;
  try {
    raw = svsim::load_scenario(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return std::nullopt;
  }
  auto result = svsim::validate_scenario(raw);
  if (!result.ok()) {
    std::cerr << path << ": invalid scenario\n" << result.describe();
    return std::nullopt;
  }
  return std::move(*result.scenario);
}

std::string default_out_dir() {
  const char* env = std::getenv("SVSIM_OUT");
  return env && *env ? env : "out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packet-level simulator for adaptive video delivery over an SDN"};
  app.require_subcommand(1);

  std::string scenario;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::string out_dir = default_out_dir();
  std::string format = "csv";
  bool trace = false;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Run replications and write reports");
  run->add_option("--scenario", scenario, "Scenario file")->required();
  run->add_option("--runs", runs, "Replications (default: from the scenario)")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Base seed (default: from the scenario)");
  run->add_option("--out", out_dir, "Output directory (default: $SVSIM_OUT or ./out)");
  run->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_flag("--trace", trace, "Also write kernel traces, delivery logs and flow rules");
  run->add_option("--threads", threads, "Worker threads (default: all cores)");

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario", scenario, "Scenario file")->required();

  bool dump = false;
  auto* topo = app.add_subcommand("topo", "Bundled topology");
  topo->add_flag("--dump", dump, "Print the bundled NSFNET-14 edge list")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (*topo) {
    std::cout << svsim::bundled_nsfnet14_topo();
    return kExitOk;
  }

  auto config = load_valid(scenario);
  if (!config) return kExitInvalid;

  if (*validate) {
    std::cout << scenario << ": ok (" << config->topology.nodes.size() << " nodes, "
              << config->topology.links.size() << " links, " << config->assets.size()
              << " methods)\n";
    return kExitOk;
  }

  try {
    const int n = runs.value_or(config->run.replications);
    const std::uint64_t base = seed.value_or(config->run.seed);
    const auto report =
        svsim::run_replications(*config, n, base, svsim::ReplicationOptions{threads, trace});
    auto files = svsim::emit_report(report, out_dir, svsim::parse_report_format(format));
    if (trace) {
      const auto extra = svsim::emit_traces(report, out_dir);
      files.insert(files.end(), extra.begin(), extra.end());
    }
    std::printf("scenario %s, %d run(s), base seed %llu, fingerprint %s\n",
                report.scenario.c_str(), n, static_cast<unsigned long long>(base),
                report.fingerprint.c_str());
    std::printf("%-8s %12s %16s %12s %10s %10s %8s %8s\n", "method", "psnr_db", "throughput_bps",
                "delay_s", "sent", "received", "lost", "loss_%");
    for (const auto& s : report.methods) {
      const auto& m = s.mean;
      std::printf("%-8s %12.3f %16.1f %12.4f %10.1f %10.1f %8.1f %8.2f\n", s.method.c_str(),
                  m.mean_psnr_db, m.mean_throughput_bps, m.mean_delay_s, m.sent, m.received,
                  m.lost, m.loss_pct);
    }
    for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
