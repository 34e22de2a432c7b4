#include "svsim/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace svsim {

namespace {

void check_same_size(const FrameBuffer& a, const FrameBuffer& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error("frame size mismatch: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  }
  const auto n = static_cast<std::size_t>(a.width) * static_cast<std::size_t>(a.height);
  if (a.samples.size() != n || b.samples.size() != n) {
    throw Error("frame sample count does not match width x height");
  }
}

// splitmix64
std::uint64_t mix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

FrameBuffer FrameBuffer::filled(int width, int height, std::uint8_t value) {
  return {width, height,
          std::vector<std::uint8_t>(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                                    value)};
}

double mse(const FrameBuffer& original, const FrameBuffer& received) {
  check_same_size(original, received);
  if (original.samples.empty()) throw Error("mse of an empty frame");
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < original.samples.size(); ++i) {
    const std::int64_t d = static_cast<std::int64_t>(original.samples[i]) - received.samples[i];
    sum += d * d;
  }
  return static_cast<double>(sum) / static_cast<double>(original.samples.size());
}

double psnr(double mse_value, double cap_db) {
  if (mse_value < 0.0) throw Error("psnr: negative mse");
  if (mse_value == 0.0) return cap_db;
  return 10.0 * std::log10(255.0 * 255.0 / mse_value);
}

double DiffMap::mean() const {
  if (squared_error.empty()) return 0.0;
  return std::accumulate(squared_error.begin(), squared_error.end(), 0.0) /
         static_cast<double>(squared_error.size());
}

DiffMap frame_diff_map(const FrameBuffer& original, const FrameBuffer& received) {
  check_same_size(original, received);
  DiffMap m{original.width, original.height, {}};
  m.squared_error.reserve(original.samples.size());
  for (std::size_t i = 0; i < original.samples.size(); ++i) {
    const double d = static_cast<double>(original.samples[i]) - received.samples[i];
    m.squared_error.push_back(d * d);
  }
  return m;
}

double ledger_psnr(const FrameOutcome& outcome, const RateDistortionTable& rd) {
  if (outcome.status != FrameStatus::kOnTime || !outcome.quality) return rd.floor_db;
  auto it = rd.nominal_db.find(*outcome.quality);
  if (it == rd.nominal_db.end()) {
    throw Error("unknown quality id '" + *outcome.quality + "'");
  }
  return it->second;
}

QualityLedger build_ledger(std::vector<FrameOutcome> outcomes, const RateDistortionTable& rd) {
  QualityLedger ledger;
  ledger.psnr_db.reserve(outcomes.size());
  for (const auto& o : outcomes) ledger.psnr_db.push_back(ledger_psnr(o, rd));
  ledger.outcomes = std::move(outcomes);
  return ledger;
}

double sequence_average_psnr(std::span<const double> psnr_db) {
  if (psnr_db.empty()) throw Error("average psnr of an empty ledger");
  return std::accumulate(psnr_db.begin(), psnr_db.end(), 0.0) / static_cast<double>(psnr_db.size());
}

std::vector<double> throughput_series(std::span<const PacketRecord> log, TimeNs bin,
                                      TimeNs horizon) {
  if (bin <= 0) throw Error("throughput bin must be positive");
  const auto bins = static_cast<std::size_t>((std::max<TimeNs>(horizon, 0) + bin - 1) / bin);
  std::vector<double> bits(bins, 0.0);
  for (const auto& r : log) {
    if (r.recv_time < 0 || r.recv_time >= horizon) continue;
    bits[static_cast<std::size_t>(r.recv_time / bin)] += r.size * 8.0;
  }
  const double width = to_seconds(bin);
  for (auto& b : bits) b /= width;
  return bits;
}

double mean_delay(std::span<const PacketRecord> log) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& r : log) {
    if (r.recv_time < 0) continue;
    total += to_seconds(r.recv_time - r.send_time);
    ++n;
  }
  if (n == 0) throw Error("mean delay of a log with no received packets");
  return total / static_cast<double>(n);
}

double loss_percentage(double sent, double lost) {
  if (!(sent > 0.0)) throw Error("loss percentage with nothing sent");
  if (lost < 0.0 || lost > sent) throw Error("lost packets must lie in [0, sent]");
  return std::round(100.0 * lost / sent * 100.0) / 100.0;
}

FrameBuffer synthetic_frame(int width, int height) {
  FrameBuffer f = FrameBuffer::filled(width, height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      // Diagonal gradient with a checker overlay.
      const int base = (x * 160) / std::max(1, width - 1) + (y * 60) / std::max(1, height - 1);
      const int checker = ((x / 16) + (y / 16)) % 2 ? 20 : 0;
      f.samples[static_cast<std::size_t>(y * width + x)] =
          static_cast<std::uint8_t>(std::clamp(base + checker + 10, 0, 255));
    }
  }
  return f;
}

FrameBuffer degrade_to_psnr(const FrameBuffer& original, double target_db, std::uint64_t seed,
                            double cap_db) {
  if (target_db >= cap_db) return original;
  const double target_mse = 255.0 * 255.0 / std::pow(10.0, target_db / 10.0);
  // Uniform integers on [-a, a] have variance a(a+1)/3.
  const int a = std::max(
      1, static_cast<int>(std::lround((-1.0 + std::sqrt(1.0 + 12.0 * target_mse)) / 2.0)));
  FrameBuffer out = original;
  std::uint64_t state = seed;
  for (auto& s : out.samples) {
    const int noise = static_cast<int>(mix(state) % static_cast<std::uint64_t>(2 * a + 1)) - a;
    s = static_cast<std::uint8_t>(std::clamp(static_cast<int>(s) + noise, 0, 255));
  }
  return out;
}

}  // namespace svsim
