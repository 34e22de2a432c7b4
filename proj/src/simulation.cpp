#include "svsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "svsim/controller.hpp"

namespace svsim {

std::vector<PacketRecord> RunResult::media_packets() const {
  std::vector<PacketRecord> out;
  for (const auto& p : packets) {
    if (p.flow == kMediaFlow) out.push_back(p);
  }
  return out;
}

TimeNs jittered_start(const RunOptions& run, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // 53-bit uniform in [0, 1); avoids library-specific distributions so the
  // draw is identical on every platform.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return from_seconds(run.start_s + (2.0 * u - 1.0) * run.start_jitter_s);
}

namespace {

enum AppAction : std::uint32_t { kStart, kFrame, kTimer, kReport, kPlayout };

class Session {
 public:
  Session(const ScenarioConfig& sc, const VideoAsset& asset, int replication, std::uint64_t seed,
          SimulationOptions options)
      : sc_(sc),
        asset_(asset),
        net_(kernel_, sc.topology, sc.transport.mtu_bytes),
        playout_(asset.frame_count, asset.frame_rate, sc.transport.startup_buffer_s) {
    result_.method = asset.name;
    result_.variant = asset.variant;
    result_.replication = replication;
    result_.seed = seed;
    result_.start_time = jittered_start(sc.run, seed);
    result_.end_time = from_seconds(sc.run.duration_s);
    if (options.trace) {
      kernel_.set_observer([this](const Event& e) { result_.trace.push_back(kernel_.trace_line(e)); });
    }
    app_ = kernel_.add_handler(
        "app", [this](const Event& e) { on_app_event(e); },
        {"start", "frame", "timer", "report", "playout"});
  }

  RunResult run() {
    const Topology& topo = sc_.topology;
    Controller controller(topo);
    result_.route = controller.route(topo.server, topo.client);
    result_.rules = controller.connect(topo.server, topo.client, kMediaFlow, kControlFlow,
                                       net_.flow_table());
    for (const auto& s : sc_.schedules) {
      for (const auto& e : s.events) {
        net_.schedule_bandwidth_event(s.link, from_seconds(e.time_s), e.capacity_bps);
      }
    }
    net_.register_flow(kMediaFlow, topo.server, topo.client,
                       [this](const Packet& p) { at_client(p); });
    net_.register_flow(kControlFlow, topo.client, topo.server,
                       [this](const Packet& p) { at_server(p); });

    setup_method();
    kernel_.schedule(result_.start_time, app_, kStart);
    result_.kernel = kernel_.run_until(result_.end_time);
    collect();
    return std::move(result_);
  }

 private:
  void setup_method() {
    const int payload = sc_.transport.mtu_payload();
    switch (asset_.variant) {
      case AssetVariant::kSingleRate:
        cbr_ = std::make_unique<CbrSender>(asset_, payload);
        assembler_ = std::make_unique<FrameAssembler>(asset_.frame_count, 1);
        qualities_ = {asset_.quality};
        break;
      case AssetVariant::kLayered:
        svc_ = std::make_unique<SvcSender>(asset_, sc_.abr.ewma_alpha, payload);
        assembler_ = std::make_unique<FrameAssembler>(asset_.frame_count,
                                                      static_cast<int>(asset_.layers.size()));
        for (const auto& l : asset_.layers) qualities_.push_back(l.quality);
        break;
      case AssetVariant::kSegmented:
        manifest_ = make_manifest(asset_);
        dash_server_ =
            std::make_unique<DashServer>(manifest_, payload, sc_.transport.window_packets);
        dash_client_ = std::make_unique<DashClient>(DashClientOptions{
            sc_.abr.ewma_alpha, sc_.abr.safety_factor, from_seconds(sc_.transport.rto_s)});
        break;
    }
  }

  TimeNs frame_time(int frame) const {
    return result_.start_time +
           static_cast<TimeNs>(std::llround(frame * 1e9 / asset_.frame_rate));
  }

  void on_app_event(const Event& e) {
    const TimeNs now = kernel_.now();
    switch (e.action) {
      case kStart:
        log(now, "stream_start", std::string("variant=") + to_string(asset_.variant));
        if (dash_client_) {
          apply(dash_client_->step(DashClient::Start{}, now));
        } else {
          kernel_.schedule(now, app_, kFrame, 0);
          if (svc_) {
            log(now, "layer_change", "layers=1 from_frame=0 estimate=0");
            kernel_.schedule(now + from_seconds(sc_.abr.feedback_interval_s), app_, kReport);
          }
        }
        break;
      case kFrame: {
        const int frame = static_cast<int>(e.arg0);
        result_.frame_send_times.push_back(now);
        if (cbr_) {
          for (auto& p : cbr_->frame_packets(frame)) send_media(std::move(p));
        } else {
          auto out = svc_->step(SvcSender::Tick{frame}, now);
          for (auto& p : out.send) send_media(std::move(p));
          for (auto& l : out.log) log(l.time, l.event, l.detail);
        }
        if (frame + 1 < asset_.frame_count) kernel_.schedule(frame_time(frame + 1), app_, kFrame, frame + 1);
        break;
      }
      case kTimer:
        apply(dash_client_->step(DashClient::Timer{}, now));
        break;
      case kReport: {
        if (auto sample = meter_.take_sample()) {
          Packet r;
          r.kind = PacketKind::kReport;
          r.size = kHeaderBytes + kReportPayload;
          r.value = *sample;
          r.flow = kControlFlow;
          net_.send(std::move(r));
        }
        kernel_.schedule(now + from_seconds(sc_.abr.feedback_interval_s), app_, kReport);
        break;
      }
      case kPlayout:
        play(now);
        break;
      default:
        throw Error("app: unknown action");
    }
  }

  void send_media(Packet p) {
    p.flow = kMediaFlow;
    net_.send(std::move(p));
  }

  void apply(DashClient::Actions out) {
    for (auto& p : out.send) {
      p.flow = kControlFlow;
      net_.send(std::move(p));
    }
    if (out.timer) kernel_.schedule(*out.timer, app_, kTimer);
    for (auto& l : out.log) log(l.time, l.event, l.detail);
    if (out.completed) segment_ready(*out.completed);
  }

  void segment_ready(const DashClient::Completed& c) {
    const TimeNs now = kernel_.now();
    const int frames_per_segment =
        static_cast<int>(std::llround(manifest_.segment_duration_s * asset_.frame_rate));
    const int first = c.segment * frames_per_segment;
    const int last = std::min(asset_.frame_count, first + frames_per_segment) - 1;
    const auto& rep = manifest_.representations[c.rep];
    for (int f = first; f <= last; ++f) {
      playout_.on_ready(f, now, static_cast<int>(c.rep), rep.quality);
    }
    note_data(last, now);
  }

  void at_client(const Packet& p) {
    const TimeNs now = kernel_.now();
    if (dash_client_) {
      if (p.kind == PacketKind::kManifest) {
        apply(dash_client_->step(DashClient::ManifestArrived{&manifest_}, now));
      } else {
        apply(dash_client_->step(DashClient::Data{p}, now));
      }
      return;
    }
    meter_.on_packet(p, now);
    for (const auto& ready : assembler_->on_packet(p)) {
      playout_.on_ready(ready.frame, now, ready.rank,
                        qualities_[static_cast<std::size_t>(ready.rank)]);
    }
    note_data(p.index, now);
  }

  void at_server(const Packet& p) {
    const TimeNs now = kernel_.now();
    if (dash_server_) {
      for (auto& out : dash_server_->on_packet(p)) send_media(std::move(out));
    } else if (svc_ && p.kind == PacketKind::kReport) {
      auto out = svc_->step(SvcSender::Report{p.value}, now);
      for (auto& l : out.log) log(l.time, l.event, l.detail);
    }
  }

  void note_data(int frame, TimeNs now) {
    if (playout_.on_data(frame, now)) {
      log(now, "playback_start", "buffered_s=" + std::to_string(playout_.buffered_s()));
      kernel_.schedule(playout_.next_deadline(), app_, kPlayout);
    }
  }

  void play(TimeNs now) {
    const auto before = playout_.state();
    const auto step = playout_.step(now);
    if (step == PlayoutBuffer::Step::kStall && before != PlayoutBuffer::State::kStalled) {
      log(now, "stall", "frame=" + std::to_string(playout_.playhead() - 1));
    } else if (step == PlayoutBuffer::Step::kAdvance && before == PlayoutBuffer::State::kStalled) {
      log(now, "resume", "frame=" + std::to_string(playout_.playhead() - 1));
    }
    if (step == PlayoutBuffer::Step::kFinish) return;
    if (playout_.playhead() < asset_.frame_count) {
      kernel_.schedule(playout_.next_deadline(), app_, kPlayout);
    } else {
      log(now, "playback_end", "stalls=" + std::to_string(playout_.stalls()));
    }
  }

  void log(TimeNs t, std::string event, std::string detail) {
    result_.events.push_back({t, asset_.name, std::move(event), std::move(detail)});
  }

  void collect() {
    result_.packets = net_.records();
    result_.drops = net_.drops();
    for (FlowId f : net_.flows()) result_.accounting[f] = net_.accounting(f);
    result_.ledger = build_ledger(playout_.finish(result_.end_time), sc_.rd_table);
    if (dash_client_) result_.dash_requests = dash_client_->requests();
    if (svc_) result_.svc_layers = svc_->layers_sent();
    std::stable_sort(result_.events.begin(), result_.events.end(),
                     [](const FlowEvent& a, const FlowEvent& b) { return a.time < b.time; });

    const auto media = result_.media_packets();
    result_.throughput_bps =
        throughput_series(media, from_seconds(sc_.run.throughput_bin_s), result_.end_time);

    MethodMetrics& m = result_.metrics;
    m.mean_psnr_db = sequence_average_psnr(result_.ledger.psnr_db);
    const FlowAccounting& acc = result_.accounting.at(kMediaFlow);
    m.sent = static_cast<double>(acc.sent);
    m.received = static_cast<double>(acc.received);
    m.lost = static_cast<double>(acc.dropped);
    m.loss_pct = acc.sent > 0 ? loss_percentage(m.sent, m.lost) : 0.0;
    if (acc.received > 0) {
      m.mean_delay_s = mean_delay(media);
      TimeNs first = kNever;
      TimeNs last = 0;
      double bits = 0.0;
      for (const auto& r : media) {
        first = std::min(first, r.send_time);
        if (r.recv_time >= 0) {
          last = std::max(last, r.recv_time);
          bits += r.size * 8.0;
        }
      }
      if (last > first) m.mean_throughput_bps = bits / to_seconds(last - first);
    }
  }

  const ScenarioConfig& sc_;
  const VideoAsset& asset_;
  Kernel kernel_;
  Network net_;
  HandlerId app_ = 0;
  PlayoutBuffer playout_;
  RunResult result_;

  std::unique_ptr<CbrSender> cbr_;
  std::unique_ptr<SvcSender> svc_;
  std::unique_ptr<FrameAssembler> assembler_;
  std::vector<std::string> qualities_;
  DispersionMeter meter_;

  Manifest manifest_;
  std::unique_ptr<DashServer> dash_server_;
  std::unique_ptr<DashClient> dash_client_;
};

}  // namespace

RunResult simulate(const ScenarioConfig& scenario, const VideoAsset& asset, int replication,
                   std::uint64_t seed, SimulationOptions options) {
  Session session(scenario, asset, replication, seed, options);
  return session.run();
}

}  // namespace svsim
