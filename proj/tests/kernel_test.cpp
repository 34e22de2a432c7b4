#include <gtest/gtest.h>

#include <random>

#include "svsim/kernel.hpp"

namespace svsim {
namespace {

struct Recorder {
  Kernel kernel;
  std::vector<Event> fired;
  HandlerId id = kernel.add_handler("rec", [this](const Event& e) { fired.push_back(e); }, {"a"});
};

TEST(Kernel, EarlierEventFiresFirst) {
  Recorder r;
  r.kernel.schedule(5, r.id, 0, 'A');
  r.kernel.schedule(3, r.id, 0, 'B');
  r.kernel.run_until(10);
  ASSERT_EQ(r.fired.size(), 2u);
  EXPECT_EQ(r.fired[0].arg0, 'B');
  EXPECT_EQ(r.fired[1].arg0, 'A');
}

TEST(Kernel, TiesFireInSchedulingOrder) {
  Recorder r;
  for (int i = 0; i < 5; ++i) r.kernel.schedule(7, r.id, 0, i);
  r.kernel.run_until(7);
  ASSERT_EQ(r.fired.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(r.fired[i].arg0, static_cast<std::uint64_t>(i));
}

TEST(Kernel, ScheduleAtNowPrecedesLaterEvents) {
  Kernel k;
  std::vector<int> order;
  HandlerId id = 0;
  id = k.add_handler("h", [&](const Event& e) {
    order.push_back(static_cast<int>(e.arg0));
    if (e.arg0 == 1) k.schedule(k.now(), id, 0, 3);
  });
  k.schedule(10, id, 0, 1);
  k.schedule(11, id, 0, 2);
  k.run_until(20);
  EXPECT_EQ(order, (std::vector<int>{1, 3, 2}));
}

TEST(Kernel, EmptyQueue) {
  Kernel k;
  const auto stats = k.run_until(100);
  EXPECT_EQ(stats.events_fired, 0u);
  EXPECT_EQ(k.pending(), 0u);
}

TEST(Kernel, ClockAfterRun) {
  Recorder r;
  r.kernel.schedule(40, r.id, 0);
  auto stats = r.kernel.run_until(100);
  EXPECT_EQ(stats.clock, 40);  // drained: last event time
  r.kernel.schedule(150, r.id, 0);
  stats = r.kernel.run_until(120);
  EXPECT_EQ(stats.clock, 120);  // events remain: the horizon
  EXPECT_EQ(r.kernel.pending(), 1u);
}

TEST(Kernel, CancelledEventNeverFires) {
  Recorder r;
  const EventId a = r.kernel.schedule(1, r.id, 0, 1);
  r.kernel.schedule(2, r.id, 0, 2);
  EXPECT_TRUE(r.kernel.cancel(a));
  EXPECT_FALSE(r.kernel.cancel(a));
  r.kernel.run_until(5);
  ASSERT_EQ(r.fired.size(), 1u);
  EXPECT_EQ(r.fired[0].arg0, 2u);
}

TEST(Kernel, BandwidthScheduleFiresOnceEachInOrder) {
  Recorder r;
  for (double t : {3.0, 14.0, 25.0}) r.kernel.schedule(from_seconds(t), r.id, 0);
  r.kernel.run_until(from_seconds(100));
  ASSERT_EQ(r.fired.size(), 3u);
  EXPECT_EQ(r.fired[0].time, 3 * kNsPerSecond);
  EXPECT_EQ(r.fired[1].time, 14 * kNsPerSecond);
  EXPECT_EQ(r.fired[2].time, 25 * kNsPerSecond);
}

TEST(Kernel, SchedulingErrors) {
  Recorder r;
  r.kernel.schedule(10, r.id, 0);
  r.kernel.run_until(10);
  EXPECT_THROW(r.kernel.schedule(5, r.id, 0), SchedulingError);
  EXPECT_THROW(r.kernel.schedule(20, 99, 0), SchedulingError);
}

TEST(Kernel, HandlerFailureCarriesEventContext) {
  Kernel k;
  const HandlerId id =
      k.add_handler("boom", [](const Event&) { throw std::runtime_error("bad"); }, {"explode"});
  k.schedule(42, id, 0);
  try {
    k.run_until(100);
    FAIL() << "expected KernelError";
  } catch (const KernelError& e) {
    EXPECT_EQ(e.event().time, 42);
    const std::string what = e.what();
    EXPECT_NE(what.find("boom"), std::string::npos) << what;
    EXPECT_NE(what.find("explode"), std::string::npos) << what;
    EXPECT_NE(what.find("bad"), std::string::npos) << what;
  }
}

TEST(Kernel, TraceLine) {
  Recorder r;
  std::vector<std::string> lines;
  r.kernel.set_observer([&](const Event& e) { lines.push_back(r.kernel.trace_line(e)); });
  r.kernel.schedule(1500, r.id, 0);
  r.kernel.schedule(1500, r.id, 3);
  r.kernel.run_until(2000);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "1500,0,rec,a");
  EXPECT_EQ(lines[1], "1500,1,rec,3");
}

TEST(Kernel, RandomizedOrderingProperty) {
  Kernel k;
  std::vector<Event> log;
  HandlerId id = 0;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<TimeNs> when(0, 5'000);
  int extra = 0;
  id = k.add_handler("p", [&](const Event& e) {
    log.push_back(e);
    // Some handlers schedule follow-ups, including at the current time.
    if (extra < 2'000 && e.arg0 % 5 == 0) {
      ++extra;
      k.schedule(k.now() + when(rng) % 3, id, 0, e.arg0 + 1);
    }
  });
  for (int i = 0; i < 10'000; ++i) k.schedule(when(rng), id, 0, static_cast<std::uint64_t>(i));
  k.run_until(1'000'000);
  ASSERT_EQ(log.size(), 10'000u + static_cast<std::size_t>(extra));
  for (std::size_t i = 1; i < log.size(); ++i) {
    const auto& a = log[i - 1];
    const auto& b = log[i];
    ASSERT_TRUE(a.time < b.time || (a.time == b.time && a.seq < b.seq)) << "at " << i;
  }
}

}  // namespace
}  // namespace svsim
