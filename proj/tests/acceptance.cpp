// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "svsim/controller.hpp"
#include "svsim/kernel.hpp"
#include "svsim/quality.hpp"
#include "svsim/report.hpp"
#include "svsim/runner.hpp"
#include "svsim/scenario_file.hpp"
#include "svsim/topo_file.hpp"

namespace {

using namespace svsim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      if (pass) detail.clear();
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += why;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const std::string kScenarioPath = std::string(SVSIM_SOURCE_DIR) + "/scenarios/nsfnet14_stepped.scn";

ScenarioConfig stepped_scenario() {
  auto r = validate_scenario(load_scenario(kScenarioPath));
  if (!r.ok()) throw Error(r.describe());
  return *r.scenario;
}

// The stepped-scenario report is shared by criteria 4, 5, 6 and 10.
const RunReport& stepped_report(double* elapsed = nullptr) {
  static double took = 0;
  static const RunReport report = [] {
    const auto t0 = Clock::now();
    const auto cfg = stepped_scenario();
    auto r = run_replications(cfg, cfg.run.replications, cfg.run.seed);
    took = seconds_since(t0);
    return r;
  }();
  if (elapsed) *elapsed = took;
  return report;
}

const MethodSummary& method(const RunReport& r, const std::string& name) {
  for (const auto& m : r.methods) {
    if (m.method == name) return m;
  }
  throw Error("no method " + name);
}

std::size_t method_index(const RunReport& r, const std::string& name) {
  for (std::size_t i = 0; i < r.methods.size(); ++i) {
    if (r.methods[i].method == name) return i;
  }
  throw Error("no method " + name);
}

// ---------------------------------------------------------------- 1

double oracle_mse(const FrameBuffer& a, const FrameBuffer& b) {
  double sum = 0.0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      const double d = static_cast<double>(a.at(x, y)) - static_cast<double>(b.at(x, y));
      sum += d * d;
    }
  }
  return sum / (static_cast<double>(a.width) * static_cast<double>(a.height));
}

double oracle_psnr(double m) {
  return m == 0.0 ? 99.0 : 20.0 * std::log10(255.0) - 10.0 * std::log10(m);
}

Verdict psnr_oracle() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937 rng(20240611);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_int_distribution<int> px(0, 255);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int w = dim(rng), h = dim(rng);
    FrameBuffer a = FrameBuffer::filled(w, h, 0), b = a;
    for (auto& s : a.samples) s = static_cast<std::uint8_t>(px(rng));
    // Mix of identical, lightly and heavily perturbed pairs.
    for (std::size_t k = 0; k < b.samples.size(); ++k) {
      b.samples[k] = i % 10 == 0 ? a.samples[k] : static_cast<std::uint8_t>(px(rng) % (1 + i % 256));
    }
    const double got_mse = mse(a, b);
    const double want_mse = oracle_mse(a, b);
    worst = std::max(worst, std::abs(psnr(got_mse) - oracle_psnr(want_mse)));
    v.require(std::abs(got_mse - want_mse) <= 1e-9, "mse mismatch on pair " + std::to_string(i));
  }
  const double took = seconds_since(t0);
  v.require(worst <= 1e-9, "max psnr deviation " + fmt("%.3g", worst));
  v.require(took < 5.0, "runtime " + fmt("%.2f", took) + " s");
  if (v.pass) {
    v.detail = "1000 pairs, max |psnr - oracle| = " + fmt("%.3g", worst) + " dB, " +
               fmt("%.3f", took) + " s";
  }
  return v;
}

// ---------------------------------------------------------------- 2

Verdict psnr_anchors() {
  Verdict v;
  const auto black = FrameBuffer::filled(16, 16, 0);
  const auto white = FrameBuffer::filled(16, 16, 255);
  const double p0 = psnr(mse(black, white));
  const double cap = psnr(mse(white, white));
  const double p25 = psnr(25.0);
  v.require(p0 == 0.0, "all-0 vs all-255 gave " + fmt("%.17g", p0));
  v.require(cap == 99.0, "identical frames gave " + fmt("%.17g", cap));
  v.require(std::abs(p25 - 34.151) <= 1e-3, "mse 25 gave " + fmt("%.6f", p25));
  if (v.pass) v.detail = "0 dB, 99 dB cap, mse 25 -> " + fmt("%.4f", p25) + " dB";
  return v;
}

// ---------------------------------------------------------------- 3

Verdict table_arithmetic() {
  Verdict v;
  struct Row {
    const char* name;
    double sent, lost, lo, hi, printed;
  };
  const Row rows[] = {{"H.265", 6421.6, 92.9, 1.44, 1.45, 1.44},
                      {"SHVC", 1155, 12.8, 1.10, 1.11, 1.1},
                      {"DASH", 1718.2, 15, 0.87, 0.88, 0.87}};
  std::string got;
  for (const auto& r : rows) {
    const double pct = loss_percentage(r.sent, r.lost);
    v.require(pct >= r.lo - 1e-12 && pct <= r.hi + 1e-12,
              std::string(r.name) + " " + fmt("%.2f", pct) + " outside range");
    v.require(std::abs(pct - r.printed) <= 0.02 + 1e-12,
              std::string(r.name) + " " + fmt("%.2f", pct) + " not within 0.02 of printed");
    got += std::string(got.empty() ? "" : ", ") + r.name + " " + fmt("%.2f", pct) + "%";
  }
  if (v.pass) v.detail = got;
  return v;
}

// ---------------------------------------------------------------- 4

// Integral of the client-link capacity over [a, b).
double capacity_integral(const ScenarioConfig& cfg, LinkId link, TimeNs a, TimeNs b) {
  std::vector<std::pair<TimeNs, double>> steps{{std::numeric_limits<TimeNs>::min(),
                                                cfg.topology.find_link(link)->capacity_bps}};
  for (const auto& s : cfg.schedules) {
    if (s.link != link) continue;
    for (const auto& e : s.events) steps.emplace_back(from_seconds(e.time_s), e.capacity_bps);
  }
  double bits = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const TimeNs lo = std::max(a, steps[i].first);
    const TimeNs hi = std::min(b, i + 1 < steps.size() ? steps[i + 1].first : b);
    if (hi > lo) bits += steps[i].second * to_seconds(hi - lo);
  }
  return bits;
}

Verdict regime() {
  Verdict v;
  double took = 0;
  const auto& report = stepped_report(&took);
  const auto cfg = stepped_scenario();
  const auto& h = method(report, "H.265").mean;
  const auto& s = method(report, "SHVC").mean;
  const auto& d = method(report, "DASH").mean;

  // (a) delay
  const double ratio = h.mean_delay_s / std::max(s.mean_delay_s, d.mean_delay_s);
  v.require(h.mean_delay_s > s.mean_delay_s && h.mean_delay_s > d.mean_delay_s,
            "delay ordering violated");
  v.require(ratio >= 5.0, "delay ratio " + fmt("%.2f", ratio) + " < 5");
  // (b) loss
  v.require(d.loss_pct <= s.loss_pct && s.loss_pct < h.loss_pct,
            "loss ordering " + fmt("%.2f", d.loss_pct) + " / " + fmt("%.2f", s.loss_pct) + " / " +
                fmt("%.2f", h.loss_pct));
  // (c) psnr
  v.require(h.mean_psnr_db < s.mean_psnr_db && s.mean_psnr_db < d.mean_psnr_db,
            "psnr ordering " + fmt("%.2f", h.mean_psnr_db) + " / " + fmt("%.2f", s.mean_psnr_db) +
                " / " + fmt("%.2f", d.mean_psnr_db));
  // (d) adaptive throughput bound and H.265 overload
  const LinkId client_link = cfg.schedules.at(0).link;
  const Link* cl = cfg.topology.find_link(client_link);
  const TimeNs prop = from_seconds(cl->propagation_s);
  const TimeNs bin = from_seconds(cfg.run.throughput_bin_s);
  const double slack = 1500 * 8.0;
  double worst_margin = -1e300;
  for (const char* name : {"SHVC", "DASH"}) {
    for (const auto& run : report.runs[method_index(report, name)]) {
      for (std::size_t i = 0; i < run.throughput_bps.size(); ++i) {
        const TimeNs t1 = static_cast<TimeNs>(i) * bin;
        // Receptions in [t1, t1 + bin) left the client link one propagation delay earlier.
        const double budget = capacity_integral(cfg, client_link, t1 - prop, t1 + bin - prop) + slack;
        const double bits = run.throughput_bps[i] * to_seconds(bin);
        worst_margin = std::max(worst_margin, bits - budget);
        v.require(bits <= budget, std::string(name) + "#" + std::to_string(run.replication) +
                                      " bin " + std::to_string(i) + " exceeds capacity");
      }
    }
  }
  double min_offered = 1e300;
  for (const auto& run : report.runs[method_index(report, "H.265")]) {
    double bits = 0;
    TimeNs first = kNever;
    for (const auto& p : run.packets) {
      if (p.flow != kMediaFlow) continue;
      first = std::min(first, p.send_time);
      if (p.send_time < 3 * kNsPerSecond) bits += p.size * 8.0;
    }
    const double offered = bits / to_seconds(3 * kNsPerSecond - first);
    min_offered = std::min(min_offered, offered);
  }
  v.require(min_offered > 400'000, "H.265 offered load " + fmt("%.0f", min_offered));
  v.require(took < 30.0, "runtime " + fmt("%.2f", took) + " s");
  if (v.pass) {
    v.detail = "delay " + fmt("%.4f", h.mean_delay_s) + " vs " + fmt("%.4f", s.mean_delay_s) + "/" +
               fmt("%.4f", d.mean_delay_s) + " s (x" + fmt("%.1f", ratio) + "), loss " +
               fmt("%.2f", d.loss_pct) + " <= " + fmt("%.2f", s.loss_pct) + " < " +
               fmt("%.2f", h.loss_pct) + " %, psnr " + fmt("%.2f", h.mean_psnr_db) + " < " +
               fmt("%.2f", s.mean_psnr_db) + " < " + fmt("%.2f", d.mean_psnr_db) +
               " dB, max bin excess over capacity " + fmt("%.0f", worst_margin + slack) +
               " bits (slack 12000), H.265 offered " + fmt("%.0f", min_offered) + " bps, " +
               fmt("%.2f", took) + " s";
  }
  return v;
}

// ---------------------------------------------------------------- 5

std::map<std::string, std::string> fields(const std::string& detail) {
  std::map<std::string, std::string> out;
  std::istringstream in(detail);
  std::string kv;
  while (in >> kv) {
    const auto eq = kv.find('=');
    if (eq != std::string::npos) out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

Verdict adaptation() {
  Verdict v;
  const auto& report = stepped_report();
  const auto cfg = stepped_scenario();
  const auto& sched = cfg.schedules.at(0).events;
  const double low_end = sched.at(0).time_s;     // 400 Kbps until here
  const double top_begin = sched.at(1).time_s;   // 2000 Kbps from here
  const double top_end = sched.at(2).time_s;     // until here
  const double lag = 2 * cfg.abr.feedback_interval_s;
  const std::string top_rep = cfg.find_asset("DASH")->representations.back().id;
  const std::string low_rep = cfg.find_asset("DASH")->representations.front().id;

  std::string first_top;
  for (const auto& run : report.runs[method_index(report, "DASH")]) {
    const std::string tag = "DASH#" + std::to_string(run.replication);
    bool reached_top = false;
    for (const auto& e : run.events) {
      if (e.event != "segment_request") continue;
      const double t = to_seconds(e.time);
      auto f = fields(e.detail);
      if (t < low_end) v.require(f["rep"] == low_rep, tag + " requested " + f["rep"] + " at 400 Kbps");
      if (f["rep"] == top_rep && t >= top_begin && t < top_end + lag) {
        if (!reached_top && first_top.empty()) first_top = fmt("%.2f", t);
        reached_top = true;
      }
    }
    v.require(reached_top, tag + " never requested " + top_rep + " in the 2000 Kbps phase");
  }

  for (const auto& run : report.runs[method_index(report, "SHVC")]) {
    const std::string tag = "SHVC#" + std::to_string(run.replication);
    // Layer count over time from the event log.
    std::vector<std::pair<double, int>> timeline;
    for (const auto& e : run.events) {
      if (e.event == "layer_change") timeline.emplace_back(to_seconds(e.time), std::stoi(fields(e.detail)["layers"]));
    }
    if (timeline.empty()) {
      v.require(false, tag + " has no layer log");
      continue;
    }
    const double start = timeline.front().first;
    auto layers_at = [&](double t) {
      int k = 0;
      for (const auto& [at, n] : timeline) {
        if (at <= t) k = n;
      }
      return k;
    };
    bool both_in_top = false;
    for (std::size_t i = 0; i < timeline.size(); ++i) {
      const auto [at, n] = timeline[i];
      const double until = i + 1 < timeline.size() ? timeline[i + 1].first : 1e300;
      if (n >= 2) {
        // Enhancement only inside the 2000 Kbps window plus estimator lag.
        v.require(at >= top_begin && until <= top_end + lag,
                  tag + " sent both layers over [" + fmt("%.2f", at) + ", " + fmt("%.2f", until) + ")");
        if (at < top_end) both_in_top = true;
      }
    }
    for (double t = start + lag; t < low_end; t += 0.05) {
      v.require(layers_at(t) == 1, tag + " not base-only at " + fmt("%.2f", t) + " s");
    }
    v.require(both_in_top, tag + " never sent both layers in the 2000 Kbps phase");
  }
  if (v.pass) {
    v.detail = "DASH lowest tier while 400 Kbps, top tier from " + first_top +
               " s; SHVC base-only while 400 Kbps, both layers only within [" +
               fmt("%.0f", top_begin) + ", " + fmt("%.0f", top_end) + "+" + fmt("%.0f", lag) +
               ") s, all 5 runs";
  }
  return v;
}

// ---------------------------------------------------------------- 6

Verdict conservation() {
  Verdict v;
  const auto& report = stepped_report();
  int checked = 0;
  for (const auto& runs : report.runs) {
    for (const auto& r : runs) {
      for (const auto& [flow, a] : r.accounting) {
        ++checked;
        v.require(a.sent == a.received + a.dropped + a.queued + a.in_flight,
                  r.method + "#" + std::to_string(r.replication) + " flow " + std::to_string(flow));
      }
    }
  }
  if (v.pass) v.detail = std::to_string(checked) + " flow-runs balanced exactly";
  return v;
}

// ---------------------------------------------------------------- 7

Verdict routing() {
  Verdict v;
  const Topology t = nsfnet14();
  int pairs = 0;
  for (NodeId s : t.nodes) {
    std::map<NodeId, int> dist{{s, 0}};
    std::deque<NodeId> q{s};
    while (!q.empty()) {
      const NodeId u = q.front();
      q.pop_front();
      for (const auto& l : t.links) {
        const NodeId w = l.a == u ? l.b : l.b == u ? l.a : -1;
        if (w >= 0 && !dist.count(w)) {
          dist[w] = dist[u] + 1;
          q.push_back(w);
        }
      }
    }
    for (NodeId d : t.nodes) {
      if (s == d) continue;
      ++pairs;
      const auto path = compute_route(t, s, d);
      v.require(static_cast<int>(path.size()) - 1 == dist.at(d),
                std::to_string(s) + "->" + std::to_string(d));
    }
  }
  v.require(pairs == 182, "pair count " + std::to_string(pairs));
  if (v.pass) v.detail = std::to_string(pairs) + " ordered pairs equal BFS hop distance";
  return v;
}

// ---------------------------------------------------------------- 8

std::uint64_t fnv1a(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" SVSIM_CLI "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict determinism() {
  Verdict v;
  const auto root = fs::temp_directory_path() / "svsim_acceptance_determinism";
  fs::remove_all(root);
  std::map<std::string, std::uint64_t> hashes[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = root / std::to_string(i);
    const int code = run_cli("run --scenario \"" + kScenarioPath + "\" --seed 42 --trace --out \"" +
                             out.string() + "\"");
    v.require(code == 0, "invocation " + std::to_string(i) + " exited " + std::to_string(code));
    for (const auto& e : fs::recursive_directory_iterator(out)) {
      if (e.is_regular_file()) hashes[i][fs::relative(e.path(), out).string()] = fnv1a(e.path());
    }
  }
  v.require(!hashes[0].empty(), "no files written");
  v.require(hashes[0] == hashes[1], "output hashes differ");
  fs::remove_all(root);
  if (v.pass) v.detail = std::to_string(hashes[0].size()) + " files hash-identical across two CLI runs";
  return v;
}

// ---------------------------------------------------------------- 9

Verdict kernel_order() {
  Verdict v;
  Kernel k;
  std::vector<Event> log;
  const HandlerId id = k.add_handler("p", [&](const Event& e) { log.push_back(e); });
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<TimeNs> when(0, 2'000);  // dense: many ties
  for (int i = 0; i < 10'000; ++i) k.schedule(when(rng), id, 0, static_cast<std::uint64_t>(i));
  k.run_until(10'000);
  v.require(log.size() == 10'000, "fired " + std::to_string(log.size()));
  std::size_t ties = 0;
  for (std::size_t i = 1; i < log.size(); ++i) {
    const auto& a = log[i - 1];
    const auto& b = log[i];
    ties += a.time == b.time;
    if (!(a.time < b.time || (a.time == b.time && a.seq < b.seq))) {
      v.require(false, "out of order at " + std::to_string(i));
      break;
    }
  }
  if (v.pass) v.detail = "10000 events sorted by (time, seq), " + std::to_string(ties) + " ties";
  return v;
}

// ---------------------------------------------------------------- 10

Verdict dash_segments() {
  Verdict v;
  const auto& report = stepped_report();
  for (const auto& run : report.runs[method_index(report, "DASH")]) {
    std::vector<int> idx;
    for (const auto& e : run.events) {
      if (e.event == "segment_request") idx.push_back(std::stoi(fields(e.detail)["index"]));
    }
    v.require(idx == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7},
              "DASH#" + std::to_string(run.replication) + " requested " + std::to_string(idx.size()) +
                  " segments");
  }
  if (v.pass) v.detail = "each of 5 runs requested segments 0..7 exactly once";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"PSNR oracle equivalence", psnr_oracle},
      {"PSNR anchors", psnr_anchors},
      {"loss-percentage arithmetic", table_arithmetic},
      {"stepped-scenario regime", regime},
      {"adaptation traces", adaptation},
      {"packet conservation", conservation},
      {"routing oracle", routing},
      {"output determinism", determinism},
      {"kernel ordering", kernel_order},
      {"DASH segment accounting", dash_segments},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    std::printf("%s criterion %zu: %s -- %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
              criteria.size());
  return failed == 0 ? 0 : 1;
}
