#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <unordered_set>
#include <vector>

#include "svsim/error.hpp"
#include "svsim/time.hpp"

namespace svsim {

using HandlerId = std::uint32_t;
using EventId = std::uint64_t;

// An event is an opaque (action, arg0, arg1) triple addressed to a
// registered handler. seq doubles as the event id and breaks ties between
// events at the same fire time, so firing order is a total order.
struct Event {
  TimeNs time = 0;
  std::uint64_t seq = 0;
  HandlerId target = 0;
  std::uint32_t action = 0;
  std::uint64_t arg0 = 0;
  std::uint64_t arg1 = 0;
};

struct KernelStats {
  std::uint64_t events_fired = 0;
  TimeNs clock = 0;
};

class SchedulingError : public Error {
 public:
  using Error::Error;
};

// Raised when a handler throws; the message carries the event context.
class KernelError : public Error {
 public:
  // where names the handler and action, as in trace lines.
  KernelError(const Event& e, const std::string& where, const std::string& what);
  const Event& event() const { return event_; }

 private:
  Event event_;
};

class Kernel {
 public:
  using Handler = std::function<void(const Event&)>;
  using Observer = std::function<void(const Event&)>;

  // action_names label action codes in traces; missing names print as
  // the number.
  HandlerId add_handler(std::string name, Handler handler,
                        std::vector<std::string> action_names = {});

  EventId schedule(TimeNs at, HandlerId target, std::uint32_t action,
                   std::uint64_t arg0 = 0, std::uint64_t arg1 = 0);
  EventId schedule_in(TimeNs delay, HandlerId target, std::uint32_t action,
                      std::uint64_t arg0 = 0, std::uint64_t arg1 = 0) {
    return schedule(now_ + delay, target, action, arg0, arg1);
  }

  // Returns false if the event already fired or was cancelled.
  bool cancel(EventId id);

  // Fires every event with time <= end in (time, seq) order. The clock
  // ends at `end` if events remain queued, otherwise at the last fired
  // event time.
  KernelStats run_until(TimeNs end);

  TimeNs now() const { return now_; }
  std::size_t pending() const { return live_.size(); }
  std::uint64_t events_fired() const { return fired_; }

  // Called once per fired event, before the handler runs.
  void set_observer(Observer observer) { observer_ = std::move(observer); }

  // "time_ns,seq,target,action" with symbolic names.
  std::string trace_line(const Event& e) const;

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  struct Registered {
    std::string name;
    Handler handler;
    std::vector<std::string> action_names;
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::unordered_set<EventId> live_;
  std::vector<Registered> handlers_;
  Observer observer_;
  TimeNs now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t fired_ = 0;
};

}  // namespace svsim
