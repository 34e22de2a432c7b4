#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svsim/core_model.hpp"
#include "svsim/time.hpp"

namespace svsim {

// Splits byte_length into MTU-payload-sized chunks; only the last chunk may
// be shorter. Zero bytes yields no packets.
std::vector<int> packetize(std::int64_t byte_length, int mtu_payload);

// alpha * sample + (1 - alpha) * prev. Throws Error if alpha is outside
// [0, 1] or an input is negative.
double ewma_update(double prev, double sample, double alpha);

// Index of the highest representation whose bitrate fits within
// safety_factor * estimate, or of the lowest one when none fits.
// `representations` must be sorted by ascending bitrate.
std::size_t select_representation(double estimate_bps,
                                  std::span<const Representation> representations,
                                  double safety_factor);

// Largest k with cumulative_bps[k-1] <= estimate, never less than 1.
int select_layers(double estimate_bps, std::span<const double> cumulative_bps);

class ThroughputEstimator {
 public:
  explicit ThroughputEstimator(double alpha);

  // The first sample seeds the estimate; later samples are blended.
  double update(double sample_bps);

  bool has_estimate() const { return has_estimate_; }
  double estimate() const { return estimate_; }
  double last_sample() const { return last_sample_; }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
  double estimate_ = 0.0;
  double last_sample_ = 0.0;
  bool has_estimate_ = false;
};

enum class FrameStatus { kOnTime, kLate, kLost };

const char* to_string(FrameStatus s);

struct FrameOutcome {
  int frame = 0;
  std::optional<std::string> quality;  // set only for on-time frames
  FrameStatus status = FrameStatus::kLost;
};

// Client playout model. Playback starts once the buffered media reaches
// the startup threshold; frame i is due at start + i / frame_rate. A frame
// that is not decodable at its deadline is skipped (recorded missing) and
// playback freezes until the next frame that is ready on time; deadlines
// never shift.
class PlayoutBuffer {
 public:
  enum class State { kFilling, kPlaying, kStalled, kFinished };
  enum class Step { kAdvance, kStall, kFinish };

  PlayoutBuffer(int frame_count, double frame_rate, double startup_threshold_s);

  // Some data of `frame` has arrived. Returns true if this started playback.
  bool on_data(int frame, TimeNs now);

  // `frame` became decodable at `quality`. Higher rank means better
  // quality; the best rank ready by the deadline is played.
  void on_ready(int frame, TimeNs now, int rank, const std::string& quality);

  // Plays the frame under the playhead. Call at next_deadline().
  Step step(TimeNs now);

  // Final outcomes once the run has ended at `end`.
  std::vector<FrameOutcome> finish(TimeNs end) const;

  double buffered_s() const;
  State state() const { return state_; }
  int playhead() const { return playhead_; }
  std::optional<TimeNs> playback_start() const { return start_; }
  TimeNs deadline(int frame) const;
  TimeNs next_deadline() const { return deadline(playhead_); }
  int stalls() const { return stalls_; }

 private:
  struct Ready {
    TimeNs time;
    int rank;
    std::string quality;
  };
  struct Frame {
    std::vector<Ready> ready;
    std::optional<std::string> played;
    bool missed = false;
  };

  const Ready* best_ready_by(const Frame& f, TimeNs t) const;

  int frame_count_;
  double frame_rate_;
  double threshold_s_;
  std::vector<Frame> frames_;
  int highest_with_data_ = -1;
  int playhead_ = 0;
  int stalls_ = 0;
  State state_ = State::kFilling;
  std::optional<TimeNs> start_;
};

}  // namespace svsim
