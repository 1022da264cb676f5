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

// Per-switch match-action pipeline: EtherType dispatch, MAC table with
// MACsec flags, EG-SC / IG-SC / SA tables, protect/validate, and the CPU
// port (packet-in / packet-out).

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "secfabric/crypto.hpp"
#include "secfabric/wire.hpp"

namespace secfabric {

using Sai = std::uint32_t;

inline constexpr std::uint64_t kMaxPacketNumber = 0xffffffffULL;

struct MacTableEntry {
  MacAddress mac;
  PortId port = 0;
  bool macsec_flag = false;
  friend bool operator==(const MacTableEntry&, const MacTableEntry&) = default;
};

/// Keyed by egress port. The SCI is the one this switch puts in the SecTAG.
struct EgScEntry {
  PortId port = 0;
  Sci sci;
  Sai sai = 0;
  friend bool operator==(const EgScEntry&, const EgScEntry&) = default;
};

/// Keyed by (SCI, AN) so both SAs of a channel are resolvable during rekey.
struct IgScEntry {
  Sci sci;
  std::uint8_t an = 0;
  Sai sai = 0;
  friend bool operator==(const IgScEntry&, const IgScEntry&) = default;
};

/// For egress SAs next_pn is the next PN to transmit; for ingress SAs it is
/// the lowest acceptable PN (replay window of size 1).
struct SaEntry {
  Sai sai = 0;
  Sak sak;
  std::uint8_t an = 0;
  std::uint64_t next_pn = 1;
  bool encrypt = true;
  friend bool operator==(const SaEntry&, const SaEntry&) = default;
};

struct SwitchTables {
  std::map<MacAddress, MacTableEntry> mac;
  std::map<PortId, EgScEntry> eg_sc;
  std::map<std::pair<Sci, std::uint8_t>, IgScEntry> ig_sc;
  std::map<Sai, SaEntry> sa;
};

namespace table_op {
struct WriteMac { MacTableEntry entry; };
struct DeleteMac { MacAddress mac; };
struct WriteEgSc { EgScEntry entry; };
struct DeleteEgSc { PortId port = 0; };
struct WriteIgSc { IgScEntry entry; };
struct DeleteIgSc { Sci sci; std::uint8_t an = 0; };
struct WriteSa { SaEntry entry; };
struct DeleteSa { Sai sai = 0; };
/// Sets macsec_flag on every MAC entry pointing at `port`.
struct SetMacsecFlag { PortId port = 0; bool flag = false; };
}  // namespace table_op

using TableOp = std::variant<table_op::WriteMac, table_op::DeleteMac, table_op::WriteEgSc, table_op::DeleteEgSc,
                             table_op::WriteIgSc, table_op::DeleteIgSc, table_op::WriteSa, table_op::DeleteSa,
                             table_op::SetMacsecFlag>;

class InvalidEntry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DropReason {
  Truncated,
  UnknownSci,
  IntegrityFailure,
  ReplayPn,
  PnExhausted,
  NoEgressSc,
  Filtered,
  PortDown,
  /// Cleartext frame on a port that has an active egress SC.
  Unprotected,
};

std::string to_string(DropReason r);

enum class PuntReason { MacMiss, LldpPunt };

struct Emission {
  PortId port = 0;
  Bytes bytes;
  friend bool operator==(const Emission&, const Emission&) = default;
};

namespace outcome {
struct Forward {
  Emission out;
  friend bool operator==(const Forward&, const Forward&) = default;
};
struct Flood {
  std::vector<Emission> out;
  friend bool operator==(const Flood&, const Flood&) = default;
};
struct PacketIn {
  PortId ingress_port = 0;
  Bytes frame_bytes;
  PuntReason reason = PuntReason::MacMiss;
  friend bool operator==(const PacketIn&, const PacketIn&) = default;
};
struct Drop {
  DropReason reason = DropReason::Truncated;
  friend bool operator==(const Drop&, const Drop&) = default;
};
}  // namespace outcome

using IngressOutcome = std::variant<outcome::Forward, outcome::Flood, outcome::PacketIn, outcome::Drop>;

struct PacketOut {
  enum class Mode { Raw, ProcessEgress };
  PortId egress_port = 0;
  Bytes frame_bytes;
  Mode mode = Mode::Raw;
};

struct SwitchHooks {
  /// Called with the SAK and IV of every protect operation.
  std::function<void(const Sak&, const GcmIv&)> on_protect;
  /// An egress SA ran out of packet numbers; raised once per SA.
  std::function<void(const Sci&)> on_rekey_needed;
  /// Edge-triggered port state changes.
  std::function<void(PortId, bool up)> on_port_status;
};

class Switch {
 public:
  /// Ports are numbered 1..port_count and start up.
  Switch(std::string name, MacAddress mac, PortId port_count, std::uint64_t pn_ceiling = kMaxPacketNumber);

  const std::string& name() const { return name_; }
  const MacAddress& mac() const { return mac_; }
  PortId port_count() const { return port_count_; }
  bool valid_port(PortId p) const { return p >= 1 && p <= port_count_; }
  bool port_up(PortId p) const;
  std::vector<PortId> up_ports() const;

  /// Returns true when the state actually changed (and fires on_port_status).
  bool set_port_state(PortId port, bool up);

  IngressOutcome process_ingress(PortId port, ByteView bytes);

  /// Empty when the frame was not put on the wire (port down or protect failed).
  std::optional<Emission> packet_out(const PacketOut& msg);

  /// All-or-nothing: the batch is applied to a copy, validated, then
  /// committed. Throws InvalidEntry and leaves the tables untouched.
  void apply(std::span<const TableOp> batch);
  void write(const TableOp& op) { apply(std::span<const TableOp>(&op, 1)); }

  const SwitchTables& tables() const { return tables_; }
  const std::map<std::string, std::uint64_t>& counters() const { return counters_; }
  std::uint64_t counter(const std::string& name) const;

  SwitchHooks& hooks() { return hooks_; }

 private:
  IngressOutcome mac_processing(PortId ingress, const EthernetFrame& frame);
  /// Egress stage for one port: protect if an EG-SC exists, else plain.
  std::variant<Bytes, DropReason> egress_stage(PortId port, const EthernetFrame& frame);
  IngressOutcome drop(DropReason r);
  void bump(const std::string& name, std::uint64_t by = 1) { counters_[name] += by; }
  void validate(const SwitchTables& t) const;

  std::string name_;
  MacAddress mac_;
  PortId port_count_;
  std::uint64_t pn_ceiling_;
  std::vector<bool> port_up_;
  SwitchTables tables_;
  std::map<std::string, std::uint64_t> counters_;
  std::map<Sai, bool> rekey_raised_;
  SwitchHooks hooks_;
};

}  // namespace secfabric
