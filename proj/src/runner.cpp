#include "svsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

namespace svsim {

ReplicationError::ReplicationError(std::string method, int replication, const std::string& what)
    : Error("method " + method + ", run " + std::to_string(replication) + ": " + what),
      method_(std::move(method)),
      replication_(replication) {}

namespace {

class Canon {
 public:
  void key(const char* k) { out_ += k; out_ += '='; }
  void num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g;", v);
    out_ += buf;
  }
  void integer(std::int64_t v) { out_ += std::to_string(v) + ';'; }
  void str(const std::string& s) { out_ += std::to_string(s.size()) + ':' + s + ';'; }
  void field(const char* k, double v) { key(k); num(v); }
  void field(const char* k, std::int64_t v) { key(k); integer(v); }
  void field(const char* k, const std::string& s) { key(k); str(s); }
  const std::string& text() const { return out_; }

 private:
  std::string out_;
};

std::string canonical(const ScenarioConfig& c, std::uint64_t seed) {
  Canon w;
  w.field("name", c.name);
  w.field("client", c.topology.client);
  w.field("server", c.topology.server);
  for (NodeId n : c.topology.nodes) w.field("node", n);
  for (const auto& l : c.topology.links) {
    w.field("link", l.id);
    w.field("a", l.a);
    w.field("b", l.b);
    w.field("cap", l.capacity_bps);
    w.field("prop", l.propagation_s);
    w.field("queue", static_cast<std::int64_t>(l.queue_capacity));
  }
  for (const auto& s : c.schedules) {
    w.field("schedule", s.link);
    for (const auto& e : s.events) {
      w.field("t", e.time_s);
      w.field("cap", e.capacity_bps);
    }
  }
  for (const auto& a : c.assets) {
    w.field("asset", a.name);
    w.field("variant", std::string(to_string(a.variant)));
    w.field("frames", static_cast<std::int64_t>(a.frame_count));
    w.field("fps", a.frame_rate);
    w.field("w", static_cast<std::int64_t>(a.width));
    w.field("h", static_cast<std::int64_t>(a.height));
    w.field("bitrate", a.bitrate_bps);
    w.field("quality", a.quality);
    for (const auto& r : a.representations) {
      w.field("rep", r.id);
      w.field("bps", r.bitrate_bps);
      w.field("quality", r.quality);
    }
    w.field("segdur", a.segment_duration_s);
    w.field("segs", static_cast<std::int64_t>(a.segment_count));
    for (const auto& l : a.layers) {
      w.field("layer", l.id);
      w.field("bps", l.cumulative_bps);
      w.field("quality", l.quality);
    }
  }
  const auto& t = c.transport;
  w.field("mtu", static_cast<std::int64_t>(t.mtu_bytes));
  w.field("rto", t.rto_s);
  w.field("startup", t.startup_buffer_s);
  w.field("window", static_cast<std::int64_t>(t.window_packets));
  w.field("alpha", c.abr.ewma_alpha);
  w.field("safety", c.abr.safety_factor);
  w.field("feedback", c.abr.feedback_interval_s);
  for (const auto& [q, db] : c.rd_table.nominal_db) {
    w.field("rd", q);
    w.field("db", db);
  }
  w.field("floor", c.rd_table.floor_db);
  w.field("cap", c.rd_table.cap_db);
  const auto& r = c.run;
  w.field("duration", r.duration_s);
  w.field("replications", static_cast<std::int64_t>(r.replications));
  w.field("start", r.start_s);
  w.field("jitter", r.start_jitter_s);
  w.field("bin", r.throughput_bin_s);
  w.field("diffmap", static_cast<std::int64_t>(r.diff_map_frame.value_or(-1)));
  w.field("seed", std::to_string(seed));
  return w.text();
}

std::vector<double> column(const std::vector<MethodMetrics>& runs, double MethodMetrics::*field) {
  std::vector<double> v;
  v.reserve(runs.size());
  for (const auto& m : runs) v.push_back(m.*field);
  return v;
}

constexpr double MethodMetrics::*kFields[] = {
    &MethodMetrics::mean_psnr_db, &MethodMetrics::mean_throughput_bps,
    &MethodMetrics::mean_delay_s, &MethodMetrics::sent,
    &MethodMetrics::received,     &MethodMetrics::lost,
    &MethodMetrics::loss_pct,
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Element-wise mean of equally indexed series; shorter series count as 0.
std::vector<double> series_mean(const std::vector<const std::vector<double>*>& series) {
  std::size_t len = 0;
  for (const auto* s : series) len = std::max(len, s->size());
  std::vector<double> out(len, 0.0);
  for (const auto* s : series) {
    for (std::size_t i = 0; i < s->size(); ++i) out[i] += (*s)[i];
  }
  for (auto& x : out) x /= static_cast<double>(series.size());
  return out;
}

}  // namespace

std::string scenario_fingerprint(const ScenarioConfig& config, std::uint64_t base_seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical(config, base_seed)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MethodMetrics metrics_mean(const std::vector<MethodMetrics>& runs) {
  MethodMetrics m;
  for (auto f : kFields) m.*f = mean_of(column(runs, f));
  return m;
}

MethodMetrics metrics_stddev(const std::vector<MethodMetrics>& runs) {
  MethodMetrics m;
  if (runs.size() < 2) return m;
  for (auto f : kFields) {
    const auto v = column(runs, f);
    const double mu = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    m.*f = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

RunReport run_replications(const ScenarioConfig& config, int n, std::uint64_t base_seed,
                           ReplicationOptions options) {
  if (n < 1) throw Error("replication count must be at least 1");

  ScenarioConfig effective = config;
  effective.run.replications = n;
  effective.run.seed = base_seed;

  RunReport report;
  report.scenario = config.name;
  report.base_seed = base_seed;
  report.replications = n;
  report.fingerprint = scenario_fingerprint(effective, base_seed);
  report.throughput_bin_s = config.run.throughput_bin_s;
  report.diff_map_frame = config.run.diff_map_frame;
  report.psnr_cap_db = config.rd_table.cap_db;

  const std::size_t methods = config.assets.size();
  report.runs.assign(methods, std::vector<RunResult>(static_cast<std::size_t>(n)));
  const std::size_t jobs = methods * static_cast<std::size_t>(n);
  std::vector<std::exception_ptr> errors(jobs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const std::size_t m = j / static_cast<std::size_t>(n);
      const int rep = static_cast<int>(j % static_cast<std::size_t>(n));
      try {
        report.runs[m][static_cast<std::size_t>(rep)] =
            simulate(config, config.assets[m], rep, base_seed + static_cast<std::uint64_t>(rep),
                     SimulationOptions{options.trace});
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(jobs, 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t j = 0; j < jobs; ++j) {
    if (!errors[j]) continue;
    const auto& method = config.assets[j / static_cast<std::size_t>(n)].name;
    const int rep = static_cast<int>(j % static_cast<std::size_t>(n));
    try {
      std::rethrow_exception(errors[j]);
    } catch (const std::exception& e) {
      throw ReplicationError(method, rep, e.what());
    }
  }

  for (std::size_t m = 0; m < methods; ++m) {
    const auto& runs = report.runs[m];
    MethodSummary s;
    s.method = config.assets[m].name;
    s.variant = config.assets[m].variant;
    s.width = config.assets[m].width;
    s.height = config.assets[m].height;
    std::vector<MethodMetrics> metrics;
    std::vector<const std::vector<double>*> psnr;
    std::vector<const std::vector<double>*> thr;
    for (const auto& r : runs) {
      metrics.push_back(r.metrics);
      psnr.push_back(&r.ledger.psnr_db);
      thr.push_back(&r.throughput_bps);
    }
    s.mean = metrics_mean(metrics);
    s.stddev = metrics_stddev(metrics);
    s.mean_psnr_per_frame = series_mean(psnr);
    s.mean_throughput_bps = series_mean(thr);
    report.methods.push_back(std::move(s));
  }
  return report;
}

}  // namespace svsim
