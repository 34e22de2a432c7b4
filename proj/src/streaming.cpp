#include "svsim/streaming.hpp"

#include <algorithm>
#include <cmath>

namespace svsim {

std::vector<int> packetize(std::int64_t byte_length, int mtu_payload) {
  if (byte_length < 0) throw Error("packetize: negative byte length");
  if (mtu_payload <= 0) throw Error("packetize: mtu payload must be positive");
  std::vector<int> out(static_cast<std::size_t>(byte_length / mtu_payload), mtu_payload);
  if (const auto rest = byte_length % mtu_payload; rest > 0) out.push_back(static_cast<int>(rest));
  return out;
}

double ewma_update(double prev, double sample, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("ewma: alpha must lie in [0, 1]");
  if (prev < 0.0 || sample < 0.0) throw Error("ewma: inputs must be non-negative");
  return alpha * sample + (1.0 - alpha) * prev;
}

std::size_t select_representation(double estimate_bps,
                                  std::span<const Representation> representations,
                                  double safety_factor) {
  if (representations.empty()) throw Error("select_representation: no representations");
  const double budget = safety_factor * estimate_bps;
  std::size_t chosen = 0;
  for (std::size_t i = 0; i < representations.size(); ++i) {
    if (representations[i].bitrate_bps <= budget) chosen = i;
  }
  return chosen;
}

int select_layers(double estimate_bps, std::span<const double> cumulative_bps) {
  if (cumulative_bps.empty()) throw Error("select_layers: no layers");
  int k = 1;
  for (std::size_t i = 1; i < cumulative_bps.size(); ++i) {
    if (cumulative_bps[i] <= estimate_bps) k = static_cast<int>(i) + 1;
  }
  return k;
}

ThroughputEstimator::ThroughputEstimator(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("estimator: alpha must lie in [0, 1]");
}

double ThroughputEstimator::update(double sample_bps) {
  last_sample_ = sample_bps;
  estimate_ = has_estimate_ ? ewma_update(estimate_, sample_bps, alpha_) : sample_bps;
  has_estimate_ = true;
  return estimate_;
}

const char* to_string(FrameStatus s) {
  switch (s) {
    case FrameStatus::kOnTime: return "on-time";
    case FrameStatus::kLate: return "late";
    case FrameStatus::kLost: return "lost";
  }
  return "?";
}

PlayoutBuffer::PlayoutBuffer(int frame_count, double frame_rate, double startup_threshold_s)
    : frame_count_(frame_count),
      frame_rate_(frame_rate),
      threshold_s_(startup_threshold_s),
      frames_(static_cast<std::size_t>(frame_count)) {}

double PlayoutBuffer::buffered_s() const {
  return std::max(0, highest_with_data_ + 1 - playhead_) / frame_rate_;
}

bool PlayoutBuffer::on_data(int frame, TimeNs now) {
  highest_with_data_ = std::max(highest_with_data_, frame);
  // Short clips may never reach the threshold; the last frame starts them.
  const bool enough = buffered_s() + 1e-9 >= threshold_s_ || highest_with_data_ == frame_count_ - 1;
  if (state_ == State::kFilling && enough) {
    state_ = State::kPlaying;
    start_ = now;
    return true;
  }
  return false;
}

void PlayoutBuffer::on_ready(int frame, TimeNs now, int rank, const std::string& quality) {
  frames_.at(static_cast<std::size_t>(frame)).ready.push_back({now, rank, quality});
}

const PlayoutBuffer::Ready* PlayoutBuffer::best_ready_by(const Frame& f, TimeNs t) const {
  const Ready* best = nullptr;
  for (const auto& r : f.ready) {
    if (r.time <= t && (!best || r.rank > best->rank)) best = &r;
  }
  return best;
}

TimeNs PlayoutBuffer::deadline(int frame) const {
  if (!start_) return kNever;
  return *start_ + static_cast<TimeNs>(std::llround(frame * 1e9 / frame_rate_));
}

PlayoutBuffer::Step PlayoutBuffer::step(TimeNs now) {
  if (playhead_ >= frame_count_) {
    state_ = State::kFinished;
    return Step::kFinish;
  }
  Frame& f = frames_[static_cast<std::size_t>(playhead_)];
  ++playhead_;
  if (const Ready* r = best_ready_by(f, now)) {
    f.played = r->quality;
    state_ = State::kPlaying;
    return Step::kAdvance;
  }
  f.missed = true;
  if (state_ != State::kStalled) ++stalls_;
  state_ = State::kStalled;
  return Step::kStall;
}

std::vector<FrameOutcome> PlayoutBuffer::finish(TimeNs end) const {
  std::vector<FrameOutcome> out;
  out.reserve(frames_.size());
  for (int i = 0; i < frame_count_; ++i) {
    const Frame& f = frames_[static_cast<std::size_t>(i)];
    FrameOutcome o;
    o.frame = i;
    if (f.played) {
      o.quality = f.played;
      o.status = FrameStatus::kOnTime;
    } else {
      o.status = best_ready_by(f, end) ? FrameStatus::kLate : FrameStatus::kLost;
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace svsim
