#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svsim/core_model.hpp"
#include "svsim/network.hpp"
#include "svsim/streaming.hpp"

namespace svsim {

// One luma plane, row-major.
struct FrameBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  static FrameBuffer filled(int width, int height, std::uint8_t value);

  std::uint8_t at(int x, int y) const {
    return samples[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(x)];
  }
};

inline constexpr double kDefaultPsnrCap = 99.0;

// Mean squared error over all pixels. Throws Error on a size mismatch.
double mse(const FrameBuffer& original, const FrameBuffer& received);

// 10 log10(255^2 / mse); mse == 0 maps to `cap_db`. Throws on mse < 0.
double psnr(double mse_value, double cap_db = kDefaultPsnrCap);

struct DiffMap {
  int width = 0;
  int height = 0;
  std::vector<double> squared_error;  // row-major

  double mean() const;
};

DiffMap frame_diff_map(const FrameBuffer& original, const FrameBuffer& received);

// Nominal PSNR of the delivered quality for on-time frames, the floor for
// late or lost ones. Throws Error for a quality id missing from the table.
double ledger_psnr(const FrameOutcome& outcome, const RateDistortionTable& rd);

struct QualityLedger {
  std::vector<FrameOutcome> outcomes;
  std::vector<double> psnr_db;
};

QualityLedger build_ledger(std::vector<FrameOutcome> outcomes, const RateDistortionTable& rd);

// Arithmetic mean of per-frame PSNR. Throws Error when empty.
double sequence_average_psnr(std::span<const double> psnr_db);

// Bits received per bin divided by the bin width, over [0, horizon).
// Records that were never received are ignored.
std::vector<double> throughput_series(std::span<const PacketRecord> log, TimeNs bin,
                                      TimeNs horizon);

// Mean (recv - send) in seconds over received packets. Throws Error when
// nothing was received.
double mean_delay(std::span<const PacketRecord> log);

// 100 * lost / sent rounded to two decimals. Throws Error for sent <= 0
// or lost outside [0, sent].
double loss_percentage(double sent, double lost);

// Deterministic textured test frame used for the diff-map dump.
FrameBuffer synthetic_frame(int width, int height);

// Adds seeded uniform noise sized so the result lands near target_db.
// Returns `original` unchanged when target_db >= cap.
FrameBuffer degrade_to_psnr(const FrameBuffer& original, double target_db, std::uint64_t seed,
                            double cap_db = kDefaultPsnrCap);

}  // namespace svsim
