#include "svsim/endpoints.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace svsim {

namespace {

Packet control_packet(PacketKind kind, int payload) {
  Packet p;
  p.kind = kind;
  p.size = kHeaderBytes + payload;
  return p;
}

std::string format_bps(double bps) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(0);
  s << bps;
  return s.str();
}

std::vector<Packet> layer_packets(const std::vector<int>& sizes, int frame, int layer) {
  std::vector<Packet> out;
  out.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    Packet p;
    p.kind = PacketKind::kData;
    p.size = kHeaderBytes + sizes[i];
    p.index = frame;
    p.unit = layer;
    p.seq = static_cast<std::int32_t>(i);
    p.count = static_cast<std::int32_t>(sizes.size());
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::int64_t frame_bytes(double rate_bps, double frame_rate) {
  return static_cast<std::int64_t>(std::ceil(rate_bps / frame_rate / 8.0 - 1e-9));
}

// ---------------------------------------------------------------- DashClient

DashClient::DashClient(DashClientOptions options)
    : opt_(options), estimator_(options.ewma_alpha) {}

DashClient::Actions DashClient::step(const Input& input, TimeNs now) {
  Actions out;
  std::visit(
      [&](const auto& in) {
        using T = std::decay_t<decltype(in)>;
        if constexpr (std::is_same_v<T, Start>) {
          if (phase_ != Phase::kIdle) return;
          phase_ = Phase::kFetchManifest;
          out.send.push_back(control_packet(PacketKind::kManifestRequest, kManifestRequestPayload));
          out.log.push_back({now, "manifest_request", ""});
          last_progress_ = now;
          arm(now + opt_.rto, out);
        } else if constexpr (std::is_same_v<T, ManifestArrived>) {
          if (phase_ != Phase::kFetchManifest) return;
          manifest_ = in.manifest;
          out.log.push_back({now, "manifest_received",
                             "representations=" + std::to_string(manifest_->representations.size()) +
                                 " segments=" + std::to_string(manifest_->segment_count)});
          phase_ = Phase::kDownloading;
          if (manifest_->segment_count == 0) {
            phase_ = Phase::kDone;
            return;
          }
          request_segment(0, now, out);
        } else if constexpr (std::is_same_v<T, Data>) {
          on_data(in.packet, now, out);
        } else {
          on_timer(now, out);
        }
      },
      input);
  return out;
}

void DashClient::arm(TimeNs at, Actions& out) {
  if (timer_armed_) return;
  timer_armed_ = true;
  out.timer = at;
}

void DashClient::request_segment(int segment, TimeNs now, Actions& out) {
  if (segment < 0 || segment >= manifest_->segment_count) {
    throw Error("segment request for index " + std::to_string(segment) + " outside [0, " +
                std::to_string(manifest_->segment_count) + ")");
  }
  rep_ = estimator_.has_estimate()
             ? select_representation(estimator_.estimate(), manifest_->representations,
                                     opt_.safety_factor)
             : 0;  // cold start at the lowest representation
  segment_ = segment;
  request_time_ = now;
  received_.clear();
  received_count_ = 0;
  received_bytes_ = 0;

  const auto& rep = manifest_->representations[rep_];
  requests_.push_back({now, segment, rep_, rep.bitrate_bps});

  Packet req = control_packet(PacketKind::kSegmentRequest, kSegmentRequestPayload);
  req.index = segment;
  req.unit = static_cast<std::int32_t>(rep_);
  out.send.push_back(std::move(req));

  if (last_rep_ && *last_rep_ != rep_) {
    out.log.push_back({now, "representation_switch",
                       "from=" + manifest_->representations[*last_rep_].id + " to=" + rep.id});
  }
  last_rep_ = rep_;
  out.log.push_back({now, "segment_request",
                     "index=" + std::to_string(segment) + " rep=" + rep.id +
                         " bitrate=" + format_bps(rep.bitrate_bps) + " estimate=" +
                         format_bps(estimator_.estimate())});
  last_progress_ = now;
  arm(now + opt_.rto, out);
}

void DashClient::on_data(const Packet& p, TimeNs now, Actions& out) {
  if (p.kind != PacketKind::kData) return;
  Packet ack = control_packet(PacketKind::kAck, kAckPayload);
  ack.index = p.index;
  ack.unit = p.unit;
  ack.seq = p.seq;
  out.send.push_back(std::move(ack));

  if (phase_ != Phase::kDownloading || p.index != segment_ ||
      p.unit != static_cast<std::int32_t>(rep_)) {
    return;
  }
  if (received_.empty()) received_.assign(static_cast<std::size_t>(p.count), false);
  const auto seq = static_cast<std::size_t>(p.seq);
  if (seq >= received_.size() || received_[seq]) return;
  received_[seq] = true;
  ++received_count_;
  received_bytes_ += p.size - kHeaderBytes;
  last_progress_ = now;
  if (received_count_ < received_.size()) return;

  const double seconds = to_seconds(now - request_time_);
  const double sample = static_cast<double>(received_bytes_) * 8.0 / seconds;
  estimator_.update(sample);
  completed_reps_.push_back(rep_);
  out.completed = Completed{segment_, rep_};
  out.log.push_back({now, "segment_complete",
                     "index=" + std::to_string(segment_) + " bytes=" +
                         std::to_string(received_bytes_) + " sample=" + format_bps(sample) +
                         " estimate=" + format_bps(estimator_.estimate())});
  if (segment_ + 1 < manifest_->segment_count) {
    request_segment(segment_ + 1, now, out);
  } else {
    phase_ = Phase::kDone;
    out.log.push_back({now, "download_done", ""});
  }
}

void DashClient::on_timer(TimeNs now, Actions& out) {
  timer_armed_ = false;
  if (phase_ != Phase::kFetchManifest && phase_ != Phase::kDownloading) return;
  if (now < last_progress_ + opt_.rto) {
    arm(last_progress_ + opt_.rto, out);
    return;
  }
  ++rerequests_;
  if (phase_ == Phase::kFetchManifest) {
    Packet req = control_packet(PacketKind::kManifestRequest, kManifestRequestPayload);
    req.retransmission = true;
    out.send.push_back(std::move(req));
    out.log.push_back({now, "manifest_rerequest", ""});
  } else {
    // With nothing received the request itself may have been lost, so it
    // is resent in full (no missing list).
    std::shared_ptr<std::vector<std::uint32_t>> missing;
    if (!received_.empty()) {
      missing = std::make_shared<std::vector<std::uint32_t>>();
      for (std::size_t i = 0; i < received_.size(); ++i) {
        if (!received_[i]) missing->push_back(static_cast<std::uint32_t>(i));
      }
    }
    const int bitmap = static_cast<int>((received_.size() + 7) / 8);
    Packet req = control_packet(PacketKind::kSegmentRequest, kSegmentRequestPayload + bitmap);
    req.index = segment_;
    req.unit = static_cast<std::int32_t>(rep_);
    req.retransmission = true;
    req.list = missing;
    out.send.push_back(std::move(req));
    out.log.push_back({now, "segment_rerequest",
                       "index=" + std::to_string(segment_) + " missing=" +
                           (missing ? std::to_string(missing->size()) : std::string("all"))});
  }
  last_progress_ = now;
  arm(now + opt_.rto, out);
}

// ---------------------------------------------------------------- DashServer

DashServer::DashServer(const Manifest& manifest, int mtu_payload, int window_packets)
    : manifest_(manifest),
      mtu_payload_(mtu_payload),
      window_(static_cast<std::size_t>(window_packets)) {}

void DashServer::start(int segment, std::size_t rep) {
  segment_ = segment;
  rep_ = rep;
  sizes_ = packetize(manifest_.bytes(rep, segment), mtu_payload_);
  pending_.clear();
  queued_.clear();
  outstanding_.clear();
  for (int i = 0; i < static_cast<int>(sizes_.size()); ++i) {
    pending_.push_back({i, false});
    queued_.insert(i);
  }
}

std::vector<Packet> DashServer::on_packet(const Packet& in) {
  std::vector<Packet> out;
  switch (in.kind) {
    case PacketKind::kManifestRequest: {
      // Rough size of a textual manifest: fixed part plus one line per
      // representation.
      const int payload = 64 + 48 * static_cast<int>(manifest_.representations.size());
      Packet m = control_packet(PacketKind::kManifest, std::min(payload, mtu_payload_));
      m.retransmission = in.retransmission;
      out.push_back(std::move(m));
      break;
    }
    case PacketKind::kSegmentRequest: {
      const auto rep = static_cast<std::size_t>(in.unit);
      if (in.index != segment_ || rep != rep_) {
        start(in.index, rep);
      } else if (in.list) {
        // The list is the complete set of packets the client still lacks:
        // anything outstanding and not listed has arrived.
        const std::set<int> missing(in.list->begin(), in.list->end());
        for (auto it = outstanding_.begin(); it != outstanding_.end();) {
          it = missing.count(*it) ? std::next(it) : outstanding_.erase(it);
        }
        std::deque<Pending> resend;
        for (int seq : missing) {
          outstanding_.erase(seq);
          if (!queued_.count(seq)) {
            resend.push_back({seq, true});
            queued_.insert(seq);
          }
        }
        pending_.insert(pending_.begin(), resend.begin(), resend.end());
      } else {
        // Full re-request with nothing received yet: start over.
        start(in.index, rep);
        for (auto& p : pending_) p.retransmission = true;
      }
      fill(out);
      break;
    }
    case PacketKind::kAck:
      if (in.index == segment_ && in.unit == static_cast<std::int32_t>(rep_)) {
        outstanding_.erase(in.seq);
        fill(out);
      }
      break;
    default:
      break;
  }
  return out;
}

void DashServer::fill(std::vector<Packet>& out) {
  while (outstanding_.size() < window_ && !pending_.empty()) {
    const Pending next = pending_.front();
    pending_.pop_front();
    queued_.erase(next.seq);
    outstanding_.insert(next.seq);
    Packet p;
    p.kind = PacketKind::kData;
    p.size = kHeaderBytes + sizes_[static_cast<std::size_t>(next.seq)];
    p.index = segment_;
    p.unit = static_cast<std::int32_t>(rep_);
    p.seq = next.seq;
    p.count = static_cast<std::int32_t>(sizes_.size());
    p.retransmission = next.retransmission;
    out.push_back(std::move(p));
  }
}

// ---------------------------------------------------------------- SvcSender

SvcSender::SvcSender(const VideoAsset& asset, double ewma_alpha, int mtu_payload)
    : asset_(asset), estimator_(ewma_alpha) {
  double below = 0.0;
  for (const auto& l : asset.layers) {
    cumulative_.push_back(l.cumulative_bps);
    layer_packets_.push_back(
        packetize(frame_bytes(l.cumulative_bps - below, asset.frame_rate), mtu_payload));
    below = l.cumulative_bps;
  }
}

SvcSender::Actions SvcSender::step(const Input& input, TimeNs now) {
  Actions out;
  if (const auto* tick = std::get_if<Tick>(&input)) {
    for (int l = 0; l < layers_; ++l) {
      auto pkts = layer_packets(layer_packets_[static_cast<std::size_t>(l)], tick->frame, l);
      for (auto& p : pkts) out.send.push_back(std::move(p));
    }
    layers_sent_.push_back(layers_);
    return out;
  }
  const auto& report = std::get<Report>(input);
  const double est = estimator_.update(report.throughput_bps);
  const int next = select_layers(est, cumulative_);
  if (next != layers_) {
    out.log.push_back({now, "layer_change",
                       "layers=" + std::to_string(next) + " from_frame=" +
                           std::to_string(layers_sent_.size()) + " estimate=" + format_bps(est)});
    layers_ = next;
  }
  return out;
}

// ---------------------------------------------------------------- DispersionMeter

void DispersionMeter::on_packet(const Packet& p, TimeNs now) {
  if (p.kind != PacketKind::kData) return;
  if (p.index == last_frame_ && now > last_time_) {
    bits_ += p.size * 8.0;
    span_ += now - last_time_;
  }
  last_frame_ = p.index;
  last_time_ = now;
}

std::optional<double> DispersionMeter::take_sample() {
  if (span_ <= 0) return std::nullopt;
  const double sample = bits_ / to_seconds(span_);
  bits_ = 0.0;
  span_ = 0;
  return sample;
}

// ---------------------------------------------------------------- CbrSender

CbrSender::CbrSender(const VideoAsset& asset, int mtu_payload)
    : packets_(packetize(frame_bytes(asset.bitrate_bps, asset.frame_rate), mtu_payload)) {}

std::vector<Packet> CbrSender::frame_packets(int frame) const {
  return layer_packets(packets_, frame, 0);
}

// ---------------------------------------------------------------- FrameAssembler

FrameAssembler::FrameAssembler(int frame_count, int layer_count)
    : layer_count_(layer_count),
      received_(static_cast<std::size_t>(frame_count),
                std::vector<Unit>(static_cast<std::size_t>(layer_count))),
      complete_rank_(static_cast<std::size_t>(frame_count), -1) {}

std::vector<FrameAssembler::Ready> FrameAssembler::on_packet(const Packet& p) {
  std::vector<Ready> out;
  if (p.kind != PacketKind::kData || p.index < 0 ||
      p.index >= static_cast<std::int32_t>(received_.size()) || p.unit < 0 ||
      p.unit >= layer_count_) {
    return out;
  }
  auto& layers = received_[static_cast<std::size_t>(p.index)];
  Unit& unit = layers[static_cast<std::size_t>(p.unit)];
  unit.expected = p.count;
  unit.seen.insert(p.seq);
  int& rank = complete_rank_[static_cast<std::size_t>(p.index)];
  // Packet counts are learned from the tags, so a layer with nothing
  // received yet counts as incomplete.
  while (rank + 1 < layer_count_) {
    const Unit& next = layers[static_cast<std::size_t>(rank + 1)];
    if (next.expected == 0 || static_cast<int>(next.seen.size()) < next.expected) break;
    ++rank;
    out.push_back({p.index, rank});
  }
  return out;
}

}  // namespace svsim
