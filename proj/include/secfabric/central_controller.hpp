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

// Central controller: link discovery controller function (global link map)
// and MACsec controller function (secure channel lifecycle, SAK generation,
// rekeying, LLDP key distribution).

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "secfabric/crypto.hpp"
#include "secfabric/event_queue.hpp"
#include "secfabric/messages.hpp"

namespace secfabric {

enum class LinkState { ReportedOneWay, Confirmed };

/// Endpoints are stored in canonical order (a < b).
struct GlobalLink {
  Endpoint a;
  Endpoint b;
  LinkState state = LinkState::ReportedOneWay;
  friend bool operator==(const GlobalLink&, const GlobalLink&) = default;
};

using LinkKey = std::pair<Endpoint, Endpoint>;
using GlobalLinkMap = std::map<LinkKey, GlobalLink>;

inline LinkKey make_link_key(const Endpoint& x, const Endpoint& y) { return x < y ? LinkKey{x, y} : LinkKey{y, x}; }

struct ChannelRecord {
  enum class Phase { InstallingIngress, ActivatingEgress, Active };

  Endpoint sender;
  Endpoint receiver;
  Sci sci;
  std::uint8_t an = 0;
  Sak sak;
  Sai sender_sai = 0;
  Sai receiver_sai = 0;
  SimTime install_time{0};
  SimTime rekey_deadline{0};
  unsigned generation = 0;
  Phase phase = Phase::InstallingIngress;
  bool rekey_in_progress = false;
};

struct ScRecord {
  std::uint64_t id = 0;
  LinkKey link;
  /// channels[0] is a -> b, channels[1] is b -> a.
  std::array<ChannelRecord, 2> channels;
  bool quarantined = false;
};

struct CentralControllerConfig {
  SimTime rekey_interval = seconds(60);
  SimTime lldp_key_rotation = seconds(300);
  /// Old ingress SAs and LLDP keys stay usable this long after replacement.
  SimTime grace = seconds(30);
  SimTime request_timeout = seconds(1);
  bool integrity_only = false;
};

struct RegisteredSwitch {
  MacAddress mac;
  std::vector<PortId> ports;
  Sai next_sai = 1;
};

class CentralController {
 public:
  using Downlink = std::function<void(const std::string& chassis_id, ToLocal)>;

  CentralController(EventQueue& events, Drbg& rng, Downlink downlink, CentralControllerConfig config = {});

  void on_message(const ToCentral& message);

  void ldcf_handle_delta(const msg::LinkDelta& delta);
  void mscf_rekey_tick();
  void ldcf_rotate_lldp_key();
  /// Starts the periodic LLDP key rotation timer.
  void start();

  // Read-only query surface.
  const GlobalLinkMap& link_map() const { return links_; }
  std::vector<GlobalLink> confirmed_links() const;
  const std::map<LinkKey, ScRecord>& sc_records() const { return records_; }
  const std::map<std::string, RegisteredSwitch>& switches() const { return switches_; }
  const LldpKey& lldp_key() const { return key_; }
  /// Every SAK ever generated, in issue order.
  const std::vector<Sak>& sak_log() const { return sak_log_; }
  const std::vector<std::string>& alerts() const { return alerts_; }
  const std::map<std::string, std::uint64_t>& counters() const { return counters_; }
  std::uint64_t counter(const std::string& name) const;

 private:
  struct PendingRequest {
    std::string chassis;
    ToLocal message;
    int attempts = 0;
    EventId timeout = 0;
    std::function<void()> on_ack;
    std::function<void()> on_fail;
  };

  void handle_register(const msg::Register& r);
  void handle_reply(RequestId id, bool ok);
  void send_request(const std::string& chassis, ToLocal message, std::function<void()> on_ack,
                    std::function<void()> on_fail);
  void transmit(RequestId id);

  GlobalLinkMap compute_links() const;
  void reconcile(const GlobalLinkMap& before);
  void setup_channel(const LinkKey& key, std::uint64_t record_id, int dir);
  void start_rekey(const LinkKey& key, std::uint64_t record_id, int dir);
  void teardown(const ScRecord& record);
  void quarantine(const LinkKey& key, std::uint64_t record_id, const std::string& why);
  ScRecord* find_record(const LinkKey& key, std::uint64_t record_id);
  void schedule_rekey(SimTime deadline);

  Sak fresh_sak();
  Sai allocate_sai(const std::string& chassis);
  void alert(std::string text);
  void bump(const std::string& name) { ++counters_[name]; }

  EventQueue& events_;
  Drbg& rng_;
  Downlink downlink_;
  CentralControllerConfig config_;

  std::map<std::string, RegisteredSwitch> switches_;
  std::map<Endpoint, Endpoint> reports_;
  GlobalLinkMap links_;
  std::map<LinkKey, ScRecord> records_;
  std::uint64_t next_record_id_ = 1;
  std::map<RequestId, PendingRequest> pending_;
  RequestId next_request_ = 1;
  LldpKey key_;
  std::vector<Sak> sak_log_;
  std::vector<std::string> alerts_;
  std::map<std::string, std::uint64_t> counters_;
};

}  // namespace secfabric
