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

// Per-switch controller: MAC learning (MLF), secure link discovery (LDF) and
// MACsec table management (MSF). Everything runs from the simulator's event
// queue, one call at a time.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "secfabric/crypto.hpp"
#include "secfabric/dataplane.hpp"
#include "secfabric/event_queue.hpp"
#include "secfabric/messages.hpp"

namespace secfabric {

struct LinkViewEntry {
  Endpoint remote;
  SimTime last_seen{0};
  bool refreshed = true;  // seen since the previous discovery round
  int missed_rounds = 0;
};

/// Local port -> remote endpoint. Ports that are down never appear.
using LocalLinkView = std::map<PortId, LinkViewEntry>;

struct LocalControllerConfig {
  SimTime discovery_interval = seconds(30);
  /// View entries not refreshed for this many rounds are dropped.
  int expiry_rounds = 3;
};

class LocalController {
 public:
  using Uplink = std::function<void(ToCentral)>;
  using PacketOutFn = std::function<void(const PacketOut&)>;

  LocalController(Switch& sw, std::string chassis_id, EventQueue& events, Drbg& rng, Uplink uplink,
                  PacketOutFn packet_out, LocalControllerConfig config = {});

  /// Seeds tx_seq from the boot timestamp and registers with the central controller.
  void boot(std::uint32_t boot_timestamp);

  void on_message(const ToLocal& message);
  void on_packet_in(const outcome::PacketIn& pin);
  void on_port_status(PortId port, bool up);
  void on_rekey_needed(const Sci& sci);

  void mlf_handle_packet_in(const EthernetFrame& frame, PortId ingress);
  void ldf_emit_round();
  void ldf_handle_lldp(const SecureLldpFrame& frame, PortId ingress);
  void ldf_handle_port_event(PortId port, bool up);
  void msf_apply(const msg::ScConfig& config);
  /// Re-registers and reports the whole link view, e.g. after the control
  /// channel comes back.
  void ldf_resync();

  const std::string& chassis_id() const { return chassis_id_; }
  const LocalLinkView& link_view() const { return view_; }
  std::uint32_t tx_seq() const { return tx_seq_; }
  std::optional<std::uint32_t> rx_seq(PortId port) const;
  const std::optional<LldpKey>& current_key() const { return key_; }
  bool discovering() const { return discovering_; }

  const std::map<std::string, std::uint64_t>& counters() const { return counters_; }
  std::uint64_t counter(const std::string& name) const;

  /// Optional (key, nonce) uniqueness check for every sealed LLDPDU.
  void set_iv_registry(IvRegistry* registry) { iv_registry_ = registry; }

 private:
  void emit_lldp(PortId port);
  void schedule_round();
  void expire_stale_entries(msg::LinkDelta& delta);
  void report(msg::LinkDelta delta);
  void bump(const std::string& name) { ++counters_[name]; }

  Switch& switch_;
  std::string chassis_id_;
  EventQueue& events_;
  Drbg& rng_;
  Uplink uplink_;
  PacketOutFn packet_out_;
  LocalControllerConfig config_;

  std::optional<LldpKey> key_;
  std::optional<LldpKey> previous_key_;
  SimTime previous_key_valid_until_{0};
  bool discovering_ = false;
  std::uint32_t tx_seq_ = 0;
  std::map<PortId, std::uint32_t> rx_seq_;
  LocalLinkView view_;
  std::map<std::string, std::uint64_t> counters_;
  IvRegistry* iv_registry_ = nullptr;
};

}  // namespace secfabric
