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

#include "secfabric/dataplane.hpp"

namespace secfabric {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string port_key(const char* prefix, PortId p) { return std::string(prefix) + ".port" + std::to_string(p); }
std::string sa_key(Sai sai, const char* what) { return "sa" + std::to_string(sai) + "." + what; }

}  // namespace

std::string to_string(DropReason r) {
  switch (r) {
    case DropReason::Truncated: return "truncated";
    case DropReason::UnknownSci: return "unknown_sci";
    case DropReason::IntegrityFailure: return "integrity_failure";
    case DropReason::ReplayPn: return "replay_pn";
    case DropReason::PnExhausted: return "pn_exhausted";
    case DropReason::NoEgressSc: return "no_egress_sc";
    case DropReason::Filtered: return "filtered";
    case DropReason::PortDown: return "port_down";
    case DropReason::Unprotected: return "unprotected";
  }
  return "unknown";
}

Switch::Switch(std::string name, MacAddress mac, PortId port_count, std::uint64_t pn_ceiling)
    : name_(std::move(name)), mac_(mac), port_count_(port_count), pn_ceiling_(pn_ceiling),
      port_up_(static_cast<std::size_t>(port_count) + 1, true) {
  port_up_[0] = false;
}

bool Switch::port_up(PortId p) const { return valid_port(p) && port_up_[p]; }

std::vector<PortId> Switch::up_ports() const {
  std::vector<PortId> out;
  for (PortId p = 1; p <= port_count_; ++p)
    if (port_up_[p]) out.push_back(p);
  return out;
}

bool Switch::set_port_state(PortId port, bool up) {
  if (!valid_port(port)) throw InvalidEntry("no such port " + std::to_string(port));
  if (port_up_[port] == up) return false;
  port_up_[port] = up;
  if (hooks_.on_port_status) hooks_.on_port_status(port, up);
  return true;
}

std::uint64_t Switch::counter(const std::string& name) const {
  auto it = counters_.find(name);
  return it == counters_.end() ? 0 : it->second;
}

IngressOutcome Switch::drop(DropReason r) {
  bump("drop." + to_string(r));
  return outcome::Drop{r};
}

IngressOutcome Switch::process_ingress(PortId port, ByteView bytes) {
  bump(port_key("rx", port));
  Frame frame;
  try {
    frame = parse_frame(bytes);
  } catch (const ParseError&) {
    return drop(DropReason::Truncated);
  }

  switch (classify(frame)) {
    case FrameClass::SecureLldp:
      bump("packet_in.lldp");
      return outcome::PacketIn{port, Bytes(bytes.begin(), bytes.end()), PuntReason::LldpPunt};

    case FrameClass::Macsec: {
      const auto& mf = std::get<MacsecFrame>(frame);
      auto ig = tables_.ig_sc.find({mf.sec_tag.sci, mf.sec_tag.an()});
      if (ig == tables_.ig_sc.end()) return drop(DropReason::UnknownSci);
      SaEntry& sa = tables_.sa.at(ig->second.sai);
      EthernetFrame inner;
      try {
        inner = macsec_validate(sa.sak, mf);
      } catch (const IntegrityFailure&) {
        bump("macsec.failed");
        bump(sa_key(sa.sai, "failed"));
        return drop(DropReason::IntegrityFailure);
      } catch (const ParseError&) {
        return drop(DropReason::Truncated);
      }
      if (mf.sec_tag.packet_number < sa.next_pn) {
        bump(sa_key(sa.sai, "replayed"));
        return drop(DropReason::ReplayPn);
      }
      sa.next_pn = std::uint64_t{mf.sec_tag.packet_number} + 1;
      bump("macsec.validated");
      bump(sa_key(sa.sai, "validated"));
      return mac_processing(port, inner);
    }

    case FrameClass::Ethernet:
      if (tables_.eg_sc.count(port)) return drop(DropReason::Unprotected);
      break;
  }
  return mac_processing(port, std::get<EthernetFrame>(frame));
}

IngressOutcome Switch::mac_processing(PortId ingress, const EthernetFrame& frame) {
  auto src = tables_.mac.find(frame.src);
  const bool src_hit = src != tables_.mac.end() && src->second.port == ingress;

  if (frame.dst.is_multicast() && src_hit) {
    outcome::Flood flood;
    for (PortId p : up_ports()) {
      if (p == ingress) continue;
      auto result = egress_stage(p, frame);
      if (auto* b = std::get_if<Bytes>(&result)) {
        bump(port_key("tx", p));
        flood.out.push_back({p, std::move(*b)});
      } else {
        bump("drop." + to_string(std::get<DropReason>(result)));
      }
    }
    bump("flood");
    return flood;
  }

  auto dst = tables_.mac.find(frame.dst);
  if (!src_hit || dst == tables_.mac.end()) {
    bump("packet_in.mac_miss");
    return outcome::PacketIn{ingress, serialize(frame), PuntReason::MacMiss};
  }

  const PortId egress = dst->second.port;
  if (egress == ingress) return drop(DropReason::Filtered);
  if (!port_up(egress)) return drop(DropReason::PortDown);

  Bytes out;
  if (dst->second.macsec_flag) {
    if (!tables_.eg_sc.count(egress)) return drop(DropReason::NoEgressSc);
    auto result = egress_stage(egress, frame);
    if (auto* r = std::get_if<DropReason>(&result)) return drop(*r);
    out = std::move(std::get<Bytes>(result));
  } else {
    out = serialize(frame);
  }
  bump(port_key("tx", egress));
  return outcome::Forward{{egress, std::move(out)}};
}

std::variant<Bytes, DropReason> Switch::egress_stage(PortId port, const EthernetFrame& frame) {
  auto eg = tables_.eg_sc.find(port);
  if (eg == tables_.eg_sc.end()) return serialize(frame);

  SaEntry& sa = tables_.sa.at(eg->second.sai);
  if (sa.next_pn > pn_ceiling_ || sa.next_pn > kMaxPacketNumber) {
    if (!rekey_raised_[sa.sai]) {
      rekey_raised_[sa.sai] = true;
      if (hooks_.on_rekey_needed) hooks_.on_rekey_needed(eg->second.sci);
    }
    return DropReason::PnExhausted;
  }
  const auto pn = static_cast<std::uint32_t>(sa.next_pn++);
  MacsecFrame protected_frame = macsec_protect(sa.sak, eg->second.sci, pn, frame, sa.an, sa.encrypt);
  if (hooks_.on_protect) hooks_.on_protect(sa.sak, macsec_iv(eg->second.sci, pn));
  bump("macsec.protected");
  bump(sa_key(sa.sai, "protected"));
  return serialize(protected_frame);
}

std::optional<Emission> Switch::packet_out(const PacketOut& msg) {
  if (!port_up(msg.egress_port)) {
    bump("drop." + to_string(DropReason::PortDown));
    return std::nullopt;
  }
  if (msg.mode == PacketOut::Mode::Raw) {
    bump(port_key("tx", msg.egress_port));
    return Emission{msg.egress_port, msg.frame_bytes};
  }

  Frame frame;
  try {
    frame = parse_frame(msg.frame_bytes);
  } catch (const ParseError&) {
    bump("drop." + to_string(DropReason::Truncated));
    return std::nullopt;
  }
  const auto* eth = std::get_if<EthernetFrame>(&frame);
  if (eth == nullptr) {
    // Already-secured frames are never protected twice.
    bump(port_key("tx", msg.egress_port));
    return Emission{msg.egress_port, msg.frame_bytes};
  }
  auto result = egress_stage(msg.egress_port, *eth);
  if (auto* r = std::get_if<DropReason>(&result)) {
    bump("drop." + to_string(*r));
    return std::nullopt;
  }
  bump(port_key("tx", msg.egress_port));
  return Emission{msg.egress_port, std::move(std::get<Bytes>(result))};
}

void Switch::validate(const SwitchTables& t) const {
  for (const auto& [mac, e] : t.mac) {
    if (!valid_port(e.port)) throw InvalidEntry("MAC entry " + mac.to_string() + " points at bad port");
  }
  for (const auto& [port, e] : t.eg_sc) {
    if (!valid_port(port)) throw InvalidEntry("EG-SC entry on bad port " + std::to_string(port));
    if (!t.sa.count(e.sai)) throw InvalidEntry("EG-SC entry references missing SAI " + std::to_string(e.sai));
  }
  for (const auto& [key, e] : t.ig_sc) {
    if (e.an > 3) throw InvalidEntry("IG-SC entry with AN > 3");
    if (!t.sa.count(e.sai)) throw InvalidEntry("IG-SC entry references missing SAI " + std::to_string(e.sai));
  }
  for (const auto& [sai, e] : t.sa) {
    if (e.an > 3) throw InvalidEntry("SA entry with AN > 3");
  }
}

void Switch::apply(std::span<const TableOp> batch) {
  SwitchTables next = tables_;
  for (const auto& op : batch) {
    std::visit(Overloaded{
                   [&](const table_op::WriteMac& w) { next.mac[w.entry.mac] = w.entry; },
                   [&](const table_op::DeleteMac& d) { next.mac.erase(d.mac); },
                   [&](const table_op::WriteEgSc& w) { next.eg_sc[w.entry.port] = w.entry; },
                   [&](const table_op::DeleteEgSc& d) { next.eg_sc.erase(d.port); },
                   [&](const table_op::WriteIgSc& w) { next.ig_sc[{w.entry.sci, w.entry.an}] = w.entry; },
                   [&](const table_op::DeleteIgSc& d) { next.ig_sc.erase({d.sci, d.an}); },
                   [&](const table_op::WriteSa& w) {
                     if (w.entry.next_pn == 0) throw InvalidEntry("SA with packet number 0");
                     next.sa[w.entry.sai] = w.entry;
                   },
                   [&](const table_op::DeleteSa& d) { next.sa.erase(d.sai); },
                   [&](const table_op::SetMacsecFlag& s) {
                     for (auto& [mac, e] : next.mac)
                       if (e.port == s.port) e.macsec_flag = s.flag;
                   },
               },
               op);
  }
  validate(next);
  for (const auto& op : batch) {
    if (const auto* w = std::get_if<table_op::WriteSa>(&op)) rekey_raised_.erase(w->entry.sai);
  }
  tables_ = std::move(next);
  bump("table.batches");
}

}  // namespace secfabric
