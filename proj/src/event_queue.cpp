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

#include "secfabric/event_queue.hpp"

#include <cstdio>

namespace secfabric {

std::string format_time(SimTime t) {
  const auto us = t.count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%lld.%06llds", us < 0 ? "-" : "", static_cast<long long>(std::llabs(us) / 1000000),
                static_cast<long long>(std::llabs(us) % 1000000));
  return buf;
}

EventId EventQueue::schedule_at(SimTime when, std::function<void()> fn, EventKind kind) {
  if (when < now_) throw std::logic_error("event scheduled in the past");
  const EventId id = next_id_++;
  if (kind == EventKind::Activity) {
    ++activity_;
    live_activity_.insert(id);
  }
  heap_.push(Entry{when, id, kind, std::move(fn)});
  return id;
}

void EventQueue::cancel(EventId id) {
  if (live_activity_.erase(id) != 0) {
    --activity_;
    cancelled_.insert(id);
    return;
  }
  // Background events are not tracked individually; mark and skip on pop.
  cancelled_.insert(id);
}

bool EventQueue::pop_next(Entry& out) {
  while (!heap_.empty()) {
    Entry e = heap_.top();
    heap_.pop();
    if (cancelled_.erase(e.id) != 0) continue;
    out = std::move(e);
    return true;
  }
  return false;
}

void EventQueue::execute(Entry& e) {
  if (++executed_ > max_events_) throw LivelockGuard("event budget exceeded");
  now_ = e.when;
  if (e.kind == EventKind::Activity) {
    live_activity_.erase(e.id);
    --activity_;
  }
  e.fn();
}

void EventQueue::run_until(SimTime t) {
  if (t < now_) throw std::logic_error("run_until target is in the past");
  while (!heap_.empty()) {
    const Entry& top = heap_.top();
    if (cancelled_.count(top.id) != 0) {
      cancelled_.erase(top.id);
      heap_.pop();
      continue;
    }
    if (top.when > t) break;
    Entry e;
    if (!pop_next(e)) break;
    execute(e);
  }
  now_ = t;
}

void EventQueue::quiesce() {
  while (activity_ > 0) {
    Entry e;
    if (!pop_next(e)) break;
    execute(e);
  }
}

}  // namespace secfabric
