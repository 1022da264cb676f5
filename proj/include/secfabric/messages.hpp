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

// Control-channel vocabulary between local controllers and the central
// controller. Messages are in-process values; the channel itself is modeled
// by the simulator as reliable ordered delivery unless partitioned.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "secfabric/crypto.hpp"
#include "secfabric/dataplane.hpp"

namespace secfabric {

using RequestId = std::uint64_t;

/// One side of an inter-switch link as seen by discovery.
struct Endpoint {
  std::string chassis_id;
  PortId port = 0;

  std::string to_string() const { return chassis_id + ":" + std::to_string(port); }
  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

namespace sc_item {
/// Receiver side of a channel: accept frames from `peer_sci` tagged `an`.
struct InstallIngressSa {
  Sci peer_sci;
  std::uint8_t an = 0;
  Sai sai = 0;
  Sak sak;
  bool encrypt = true;
};
/// Sender side: protect everything leaving `port` with this SA, replacing
/// whatever SA the port used before.
struct ActivateEgressSa {
  PortId port = 0;
  Sci sci;
  std::uint8_t an = 0;
  Sai sai = 0;
  Sak sak;
  bool encrypt = true;
};
/// Retire a replaced ingress SA; ignored unless (peer_sci, an) still maps to `sai`.
struct RemoveIngressSa {
  Sci peer_sci;
  std::uint8_t an = 0;
  Sai sai = 0;
};
/// Drop the egress SC on `port` with its SA, clear MACsec flags.
struct RevokeEgress {
  PortId port = 0;
};
/// Drop every ingress SA for `peer_sci`.
struct RevokeIngress {
  Sci peer_sci;
};
}  // namespace sc_item

using ScItem = std::variant<sc_item::InstallIngressSa, sc_item::ActivateEgressSa, sc_item::RemoveIngressSa,
                            sc_item::RevokeEgress, sc_item::RevokeIngress>;

namespace msg {

struct Register {
  std::string chassis_id;
  MacAddress mac;
  std::vector<PortId> ports;
};

struct LinkAdd {
  PortId local_port = 0;
  Endpoint remote;
  friend bool operator==(const LinkAdd&, const LinkAdd&) = default;
};

struct LinkDelta {
  std::string chassis_id;
  std::vector<LinkAdd> adds;
  std::vector<PortId> removes;
  /// `adds` is the sender's whole view; drop anything else it reported before.
  bool full = false;
};

struct Ack {
  std::string chassis_id;
  RequestId request = 0;
};

struct Nack {
  std::string chassis_id;
  RequestId request = 0;
  std::string reason;
};

struct RekeyNeeded {
  std::string chassis_id;
  Sci sci;
};

struct KeyInstall {
  RequestId request = 0;
  LldpKey key;
};

struct StartDiscovery {};

struct ScConfig {
  RequestId request = 0;
  std::vector<ScItem> items;
};

}  // namespace msg

using ToCentral = std::variant<msg::Register, msg::LinkDelta, msg::Ack, msg::Nack, msg::RekeyNeeded>;
using ToLocal = std::variant<msg::KeyInstall, msg::StartDiscovery, msg::ScConfig>;

}  // namespace secfabric
