#include "svsim/kernel.hpp"

namespace svsim {

KernelError::KernelError(const Event& e, const std::string& where, const std::string& what)
    : Error("event seq=" + std::to_string(e.seq) + " t=" + std::to_string(e.time) + "ns " + where +
            ": " + what),
      event_(e) {}

HandlerId Kernel::add_handler(std::string name, Handler handler,
                              std::vector<std::string> action_names) {
  handlers_.push_back({std::move(name), std::move(handler), std::move(action_names)});
  return static_cast<HandlerId>(handlers_.size() - 1);
}

EventId Kernel::schedule(TimeNs at, HandlerId target, std::uint32_t action,
                         std::uint64_t arg0, std::uint64_t arg1) {
  if (at < now_) {
    throw SchedulingError("cannot schedule at " + std::to_string(at) + "ns, clock is at " +
                          std::to_string(now_) + "ns");
  }
  if (target >= handlers_.size()) {
    throw SchedulingError("unknown handler id " + std::to_string(target));
  }
  const EventId id = next_seq_++;
  queue_.push({at, id, target, action, arg0, arg1});
  live_.insert(id);
  return id;
}

bool Kernel::cancel(EventId id) { return live_.erase(id) > 0; }

KernelStats Kernel::run_until(TimeNs end) {
  if (end < now_) {
    throw SchedulingError("run_until(" + std::to_string(end) + "ns) is before the clock");
  }
  std::uint64_t fired = 0;
  while (!queue_.empty() && queue_.top().time <= end) {
    const Event e = queue_.top();
    queue_.pop();
    if (live_.erase(e.seq) == 0) continue;  // cancelled
    now_ = e.time;
    ++fired;
    ++fired_;
    if (observer_) observer_(e);
    try {
      handlers_[e.target].handler(e);
    } catch (const KernelError&) {
      throw;
    } catch (const std::exception& ex) {
      const auto& h = handlers_[e.target];
      const std::string action = e.action < h.action_names.size() ? h.action_names[e.action]
                                                                  : std::to_string(e.action);
      throw KernelError(e, "target=" + h.name + " action=" + action, ex.what());
    }
  }
  // Drop cancelled leftovers so "queue drained" is judged on live events.
  while (!queue_.empty() && !live_.count(queue_.top().seq)) queue_.pop();
  if (!queue_.empty()) now_ = end;
  return {fired, now_};
}

std::string Kernel::trace_line(const Event& e) const {
  const auto& h = handlers_.at(e.target);
  std::string action = e.action < h.action_names.size() ? h.action_names[e.action]
                                                        : std::to_string(e.action);
  return std::to_string(e.time) + "," + std::to_string(e.seq) + "," + h.name + "," + action;
}

}  // namespace svsim
