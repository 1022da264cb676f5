/* Copyright 2026 The secfabric Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace secfabric {

/// Virtual time in microseconds since simulation start.
using SimTime = std::chrono::duration<std::int64_t, std::micro>;

inline constexpr SimTime seconds(double s) { return SimTime(static_cast<std::int64_t>(s * 1e6)); }
inline constexpr SimTime millis(double ms) { return SimTime(static_cast<std::int64_t>(ms * 1e3)); }
std::string format_time(SimTime t);  // "12.345678s"

class LivelockGuard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Events are either activity (frames in flight, control messages, pending
/// acknowledgments) or background (periodic timers). quiesce() drains all
/// activity and stops in front of the next background event.
enum class EventKind { Activity, Background };

using EventId = std::uint64_t;

class EventQueue {
 public:
  explicit EventQueue(std::uint64_t max_events = 50'000'000) : max_events_(max_events) {}

  SimTime now() const { return now_; }
  std::uint64_t executed() const { return executed_; }
  std::size_t pending_activity() const { return activity_; }
  bool empty() const { return heap_.size() == cancelled_.size(); }

  EventId schedule_at(SimTime when, std::function<void()> fn, EventKind kind = EventKind::Activity);
  EventId schedule(SimTime delay, std::function<void()> fn, EventKind kind = EventKind::Activity) {
    return schedule_at(now_ + delay, std::move(fn), kind);
  }
  void cancel(EventId id);

  /// Runs every event with time <= t, then sets the clock to t.
  void run_until(SimTime t);
  /// Runs until no activity events remain.
  void quiesce();

 private:
  struct Entry {
    SimTime when;
    EventId id;
    EventKind kind;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.when != b.when ? a.when > b.when : a.id > b.id;
    }
  };

  bool pop_next(Entry& out);
  void execute(Entry& e);

  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::unordered_set<EventId> cancelled_;
  std::unordered_set<EventId> live_activity_;
  SimTime now_{0};
  EventId next_id_ = 1;  // 0 is never a valid id
  std::size_t activity_ = 0;
  std::uint64_t executed_ = 0;
  std::uint64_t max_events_;
};

}  // namespace secfabric
