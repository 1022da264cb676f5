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

#include "secfabric/local_controller.hpp"

#include <algorithm>

namespace secfabric {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

LocalController::LocalController(Switch& sw, std::string chassis_id, EventQueue& events, Drbg& rng, Uplink uplink,
                                 PacketOutFn packet_out, LocalControllerConfig config)
    : switch_(sw), chassis_id_(std::move(chassis_id)), events_(events), rng_(rng), uplink_(std::move(uplink)),
      packet_out_(std::move(packet_out)), config_(config) {}

std::uint64_t LocalController::counter(const std::string& name) const {
  auto it = counters_.find(name);
  return it == counters_.end() ? 0 : it->second;
}

std::optional<std::uint32_t> LocalController::rx_seq(PortId port) const {
  auto it = rx_seq_.find(port);
  if (it == rx_seq_.end()) return std::nullopt;
  return it->second;
}

void LocalController::boot(std::uint32_t boot_timestamp) {
  tx_seq_ = boot_timestamp;
  std::vector<PortId> ports;
  for (PortId p = 1; p <= switch_.port_count(); ++p) ports.push_back(p);
  uplink_(msg::Register{chassis_id_, switch_.mac(), std::move(ports)});
}

void LocalController::on_message(const ToLocal& message) {
  std::visit(Overloaded{
                 [&](const msg::KeyInstall& k) {
                   if (key_ && key_->key_id != k.key.key_id) {
                     previous_key_ = key_;
                     previous_key_valid_until_ = events_.now() + config_.discovery_interval;
                   }
                   key_ = k.key;
                   bump("ldf.key_installs");
                   uplink_(msg::Ack{chassis_id_, k.request});
                 },
                 [&](const msg::StartDiscovery&) {
                   if (discovering_) return;
                   discovering_ = true;
                   ldf_emit_round();
                 },
                 [&](const msg::ScConfig& c) { msf_apply(c); },
             },
             message);
}

void LocalController::on_packet_in(const outcome::PacketIn& pin) {
  Frame frame;
  try {
    frame = parse_frame(pin.frame_bytes);
  } catch (const ParseError&) {
    bump("packet_in.malformed");
    return;
  }
  if (pin.reason == PuntReason::LldpPunt) {
    if (const auto* lldp = std::get_if<SecureLldpFrame>(&frame)) ldf_handle_lldp(*lldp, pin.ingress_port);
    return;
  }
  if (const auto* eth = std::get_if<EthernetFrame>(&frame)) mlf_handle_packet_in(*eth, pin.ingress_port);
}

void LocalController::on_port_status(PortId port, bool up) { ldf_handle_port_event(port, up); }

void LocalController::on_rekey_needed(const Sci& sci) {
  bump("msf.rekey_requests");
  uplink_(msg::RekeyNeeded{chassis_id_, sci});
}

void LocalController::mlf_handle_packet_in(const EthernetFrame& frame, PortId ingress) {
  const auto& macs = switch_.tables().mac;
  auto known = macs.find(frame.src);
  if (!frame.src.is_multicast() && (known == macs.end() || known->second.port != ingress)) {
    const bool protected_port = switch_.tables().eg_sc.count(ingress) != 0;
    switch_.write(table_op::WriteMac{{frame.src, ingress, protected_port}});
    bump("mlf.learned");
  }
  const Bytes bytes = serialize(frame);
  for (PortId p : switch_.up_ports()) {
    if (p == ingress) continue;
    packet_out_(PacketOut{p, bytes, PacketOut::Mode::ProcessEgress});
  }
  bump("mlf.flooded");
}

void LocalController::emit_lldp(PortId port) {
  if (!key_) {
    bump("ldf.no_key");
    return;
  }
  const auto nonce = rng_.bytes<kLldpNonceLen>();
  if (iv_registry_) iv_registry_->record(key_->key, nonce);
  ++tx_seq_;
  const SecureLldpFrame frame = lldp_seal(*key_, nonce, tx_seq_, Lldpdu{chassis_id_, port}, switch_.mac());
  packet_out_(PacketOut{port, serialize(frame), PacketOut::Mode::Raw});
  bump("ldf.sent");
}

void LocalController::schedule_round() {
  events_.schedule(config_.discovery_interval, [this] { ldf_emit_round(); }, EventKind::Background);
}

void LocalController::ldf_emit_round() {
  msg::LinkDelta delta{chassis_id_, {}, {}};
  expire_stale_entries(delta);
  if (!delta.removes.empty()) report(std::move(delta));

  if (!key_) {
    bump("ldf.no_key");
  } else {
    for (PortId p : switch_.up_ports()) emit_lldp(p);
  }
  bump("ldf.rounds");
  schedule_round();
}

void LocalController::expire_stale_entries(msg::LinkDelta& delta) {
  for (auto it = view_.begin(); it != view_.end();) {
    auto& entry = it->second;
    if (entry.refreshed) {
      entry.refreshed = false;
      entry.missed_rounds = 0;
    } else if (++entry.missed_rounds >= config_.expiry_rounds) {
      delta.removes.push_back(it->first);
      bump("ldf.expired");
      it = view_.erase(it);
      continue;
    }
    ++it;
  }
}

void LocalController::ldf_handle_lldp(const SecureLldpFrame& frame, PortId ingress) {
  if (!key_) {
    bump("ldf.no_key");
    return;
  }
  std::optional<OpenedLldp> opened;
  try {
    try {
      opened = lldp_open(*key_, frame);
    } catch (const IntegrityFailure&) {
      if (!previous_key_ || events_.now() >= previous_key_valid_until_) throw;
      opened = lldp_open(*previous_key_, frame);
      bump("ldf.opened_with_previous_key");
    }
  } catch (const IntegrityFailure&) {
    bump("ldf.integrity_failure");
    return;
  } catch (const DecodeFailure&) {
    bump("ldf.decode_failure");
    return;
  }

  auto last = rx_seq_.find(ingress);
  if (last != rx_seq_.end() && opened->seq <= last->second) {
    bump("ldf.replayed");
    return;
  }
  rx_seq_[ingress] = opened->seq;
  bump("ldf.accepted");

  const Endpoint remote{opened->pdu.chassis_id, opened->pdu.port_id};
  auto [it, inserted] = view_.try_emplace(ingress, LinkViewEntry{remote, events_.now(), true, 0});
  const bool changed = inserted || it->second.remote != remote;
  it->second = LinkViewEntry{remote, events_.now(), true, 0};
  if (changed) report(msg::LinkDelta{chassis_id_, {msg::LinkAdd{ingress, remote}}, {}});
}

void LocalController::ldf_handle_port_event(PortId port, bool up) {
  if (!up) {
    rx_seq_.erase(port);
    if (view_.erase(port) != 0) report(msg::LinkDelta{chassis_id_, {}, {port}});
    return;
  }
  if (discovering_) emit_lldp(port);
}

void LocalController::ldf_resync() {
  std::vector<PortId> ports;
  for (PortId p = 1; p <= switch_.port_count(); ++p) ports.push_back(p);
  uplink_(msg::Register{chassis_id_, switch_.mac(), std::move(ports)});
  msg::LinkDelta delta{chassis_id_, {}, {}, true};
  for (const auto& [port, entry] : view_) delta.adds.push_back(msg::LinkAdd{port, entry.remote});
  bump("ldf.resyncs");
  report(std::move(delta));
}

void LocalController::report(msg::LinkDelta delta) {
  bump("ldf.deltas");
  uplink_(std::move(delta));
}

void LocalController::msf_apply(const msg::ScConfig& config) {
  const SwitchTables& t = switch_.tables();
  std::vector<TableOp> ops;
  for (const auto& item : config.items) {
    std::visit(Overloaded{
                   [&](const sc_item::InstallIngressSa& i) {
                     auto old = t.ig_sc.find({i.peer_sci, i.an});
                     if (old != t.ig_sc.end() && old->second.sai != i.sai)
                       ops.push_back(table_op::DeleteSa{old->second.sai});
                     if (!t.sa.count(i.sai)) ops.push_back(table_op::WriteSa{{i.sai, i.sak, i.an, 1, i.encrypt}});
                     ops.push_back(table_op::WriteIgSc{{i.peer_sci, i.an, i.sai}});
                   },
                   [&](const sc_item::ActivateEgressSa& a) {
                     auto old = t.eg_sc.find(a.port);
                     // A retried batch must not rewind the PN of an SA already in use.
                     if (!t.sa.count(a.sai)) ops.push_back(table_op::WriteSa{{a.sai, a.sak, a.an, 1, a.encrypt}});
                     ops.push_back(table_op::WriteEgSc{{a.port, a.sci, a.sai}});
                     if (old != t.eg_sc.end() && old->second.sai != a.sai)
                       ops.push_back(table_op::DeleteSa{old->second.sai});
                     ops.push_back(table_op::SetMacsecFlag{a.port, true});
                   },
                   [&](const sc_item::RemoveIngressSa& r) {
                     auto old = t.ig_sc.find({r.peer_sci, r.an});
                     if (old == t.ig_sc.end() || old->second.sai != r.sai) return;
                     ops.push_back(table_op::DeleteIgSc{r.peer_sci, r.an});
                     ops.push_back(table_op::DeleteSa{old->second.sai});
                   },
                   [&](const sc_item::RevokeEgress& r) {
                     auto old = t.eg_sc.find(r.port);
                     if (old != t.eg_sc.end()) {
                       ops.push_back(table_op::DeleteEgSc{r.port});
                       ops.push_back(table_op::DeleteSa{old->second.sai});
                     }
                     ops.push_back(table_op::SetMacsecFlag{r.port, false});
                   },
                   [&](const sc_item::RevokeIngress& r) {
                     for (const auto& [key, e] : t.ig_sc) {
                       if (key.first != r.peer_sci) continue;
                       ops.push_back(table_op::DeleteIgSc{e.sci, e.an});
                       ops.push_back(table_op::DeleteSa{e.sai});
                     }
                   },
               },
               item);
  }

  try {
    switch_.apply(ops);
  } catch (const InvalidEntry& e) {
    bump("msf.nacks");
    uplink_(msg::Nack{chassis_id_, config.request, e.what()});
    return;
  }
  bump("msf.batches");
  uplink_(msg::Ack{chassis_id_, config.request});
}

}  // namespace secfabric
