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

#include "secfabric/central_controller.hpp"

#include <set>

namespace secfabric {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void set_request_id(ToLocal& m, RequestId id) {
  std::visit(Overloaded{
                 [&](msg::KeyInstall& k) { k.request = id; },
                 [&](msg::ScConfig& c) { c.request = id; },
                 [](msg::StartDiscovery&) {},
             },
             m);
}

}  // namespace

CentralController::CentralController(EventQueue& events, Drbg& rng, Downlink downlink, CentralControllerConfig config)
    : events_(events), rng_(rng), downlink_(std::move(downlink)), config_(config) {
  key_.key = rng_.bytes<16>();
  key_.key_id = 1;
}

std::uint64_t CentralController::counter(const std::string& name) const {
  auto it = counters_.find(name);
  return it == counters_.end() ? 0 : it->second;
}

std::vector<GlobalLink> CentralController::confirmed_links() const {
  std::vector<GlobalLink> out;
  for (const auto& [key, link] : links_)
    if (link.state == LinkState::Confirmed) out.push_back(link);
  return out;
}

void CentralController::start() {
  events_.schedule(config_.lldp_key_rotation, [this] { ldcf_rotate_lldp_key(); }, EventKind::Background);
}

void CentralController::alert(std::string text) {
  bump("alerts");
  alerts_.push_back(format_time(events_.now()) + " " + std::move(text));
}

void CentralController::on_message(const ToCentral& message) {
  std::visit(Overloaded{
                 [&](const msg::Register& r) { handle_register(r); },
                 [&](const msg::LinkDelta& d) { ldcf_handle_delta(d); },
                 [&](const msg::Ack& a) { handle_reply(a.request, true); },
                 [&](const msg::Nack& n) {
                   bump("nacks");
                   handle_reply(n.request, false);
                 },
                 [&](const msg::RekeyNeeded& r) {
                   bump("rekey_requests");
                   for (auto& [key, rec] : records_) {
                     for (int dir = 0; dir < 2; ++dir) {
                       const auto& ch = rec.channels[dir];
                       if (ch.sci == r.sci && ch.sender.chassis_id == r.chassis_id && !rec.quarantined &&
                           ch.phase == ChannelRecord::Phase::Active && !ch.rekey_in_progress) {
                         start_rekey(key, rec.id, dir);
                       }
                     }
                   }
                 },
             },
             message);
}

void CentralController::handle_register(const msg::Register& r) {
  auto& sw = switches_[r.chassis_id];
  sw.mac = r.mac;
  sw.ports = r.ports;
  bump("registrations");
  const std::string chassis = r.chassis_id;
  send_request(
      chassis, msg::KeyInstall{0, key_},
      [this, chassis] { downlink_(chassis, msg::StartDiscovery{}); },
      [this, chassis] { alert("initial LLDP key install failed for " + chassis); });
}

void CentralController::send_request(const std::string& chassis, ToLocal message, std::function<void()> on_ack,
                                     std::function<void()> on_fail) {
  const RequestId id = next_request_++;
  set_request_id(message, id);
  pending_[id] = PendingRequest{chassis, std::move(message), 0, 0, std::move(on_ack), std::move(on_fail)};
  transmit(id);
}

void CentralController::transmit(RequestId id) {
  auto& p = pending_.at(id);
  ++p.attempts;
  p.timeout = events_.schedule(config_.request_timeout, [this, id] {
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    it->second.timeout = 0;
    bump("request_timeouts");
    handle_reply(id, false);
  });
  downlink_(p.chassis, p.message);
}

void CentralController::handle_reply(RequestId id, bool ok) {
  auto it = pending_.find(id);
  if (it == pending_.end()) return;
  if (it->second.timeout != 0) events_.cancel(it->second.timeout);
  it->second.timeout = 0;
  if (!ok && it->second.attempts < 2) {
    bump("retries");
    transmit(id);
    return;
  }
  PendingRequest done = std::move(it->second);
  pending_.erase(it);
  if (ok) {
    if (done.on_ack) done.on_ack();
  } else if (done.on_fail) {
    done.on_fail();
  }
}

void CentralController::ldcf_handle_delta(const msg::LinkDelta& delta) {
  if (!switches_.count(delta.chassis_id)) {
    bump("unknown_switch_deltas");
    alert("link delta from unregistered switch " + delta.chassis_id);
    return;
  }
  bump("deltas");
  if (delta.full) {
    for (auto it = reports_.begin(); it != reports_.end();)
      it = it->first.chassis_id == delta.chassis_id ? reports_.erase(it) : std::next(it);
  }
  for (PortId p : delta.removes) reports_.erase(Endpoint{delta.chassis_id, p});
  for (const auto& add : delta.adds) reports_[Endpoint{delta.chassis_id, add.local_port}] = add.remote;

  const GlobalLinkMap before = links_;
  links_ = compute_links();
  reconcile(before);
}

GlobalLinkMap CentralController::compute_links() const {
  GlobalLinkMap out;
  std::set<Endpoint> used;
  for (const auto& [from, to] : reports_) {
    if (!(from < to)) continue;
    auto back = reports_.find(to);
    if (back != reports_.end() && back->second == from) {
      out[make_link_key(from, to)] = GlobalLink{from, to, LinkState::Confirmed};
      used.insert(from);
      used.insert(to);
    }
  }
  for (const auto& [from, to] : reports_) {
    if (used.count(from) || used.count(to)) continue;
    // A one-way report loses to whatever the far endpoint reports itself.
    if (reports_.count(to)) continue;
    const LinkKey key = make_link_key(from, to);
    out[key] = GlobalLink{key.first, key.second, LinkState::ReportedOneWay};
    used.insert(from);
    used.insert(to);
  }
  return out;
}

void CentralController::reconcile(const GlobalLinkMap& before) {
  auto confirmed = [](const GlobalLinkMap& m, const LinkKey& k) {
    auto it = m.find(k);
    return it != m.end() && it->second.state == LinkState::Confirmed;
  };

  for (const auto& [key, link] : before) {
    if (link.state != LinkState::Confirmed || confirmed(links_, key)) continue;
    bump("links_deconfirmed");
    auto rec = records_.find(key);
    if (rec != records_.end()) {
      teardown(rec->second);
      records_.erase(rec);
    }
  }

  for (const auto& [key, link] : links_) {
    if (link.state != LinkState::Confirmed || confirmed(before, key)) continue;
    bump("links_confirmed");
    const auto& sw_a = switches_.at(key.first.chassis_id);
    const auto& sw_b = switches_.at(key.second.chassis_id);

    ScRecord rec;
    rec.id = next_record_id_++;
    rec.link = key;
    auto make_channel = [&](const Endpoint& s, const MacAddress& mac, const Endpoint& r) {
      ChannelRecord ch;
      ch.sender = s;
      ch.receiver = r;
      ch.sci = Sci::make(mac, s.port);
      ch.an = 0;
      ch.sak = fresh_sak();
      ch.sender_sai = allocate_sai(s.chassis_id);
      ch.receiver_sai = allocate_sai(r.chassis_id);
      return ch;
    };
    rec.channels[0] = make_channel(key.first, sw_a.mac, key.second);
    rec.channels[1] = make_channel(key.second, sw_b.mac, key.first);
    const auto id = rec.id;
    records_[key] = std::move(rec);
    setup_channel(key, id, 0);
    setup_channel(key, id, 1);
  }
}

ScRecord* CentralController::find_record(const LinkKey& key, std::uint64_t record_id) {
  auto it = records_.find(key);
  if (it == records_.end() || it->second.id != record_id) return nullptr;
  return &it->second;
}

void CentralController::setup_channel(const LinkKey& key, std::uint64_t record_id, int dir) {
  ScRecord* rec = find_record(key, record_id);
  if (!rec) return;
  const ChannelRecord& ch = rec->channels[dir];
  const bool encrypt = !config_.integrity_only;

  msg::ScConfig ingress{0, {sc_item::InstallIngressSa{ch.sci, ch.an, ch.receiver_sai, ch.sak, encrypt}}};
  send_request(
      ch.receiver.chassis_id, std::move(ingress),
      [this, key, record_id, dir, encrypt] {
        ScRecord* r = find_record(key, record_id);
        if (!r) return;
        ChannelRecord& c = r->channels[dir];
        c.phase = ChannelRecord::Phase::ActivatingEgress;
        msg::ScConfig egress{0, {sc_item::ActivateEgressSa{c.sender.port, c.sci, c.an, c.sender_sai, c.sak, encrypt}}};
        send_request(
            c.sender.chassis_id, std::move(egress),
            [this, key, record_id, dir] {
              ScRecord* r2 = find_record(key, record_id);
              if (!r2) return;
              ChannelRecord& c2 = r2->channels[dir];
              c2.phase = ChannelRecord::Phase::Active;
              c2.install_time = events_.now();
              c2.rekey_deadline = events_.now() + config_.rekey_interval;
              bump("channels_activated");
              schedule_rekey(c2.rekey_deadline);
            },
            [this, key, record_id] { quarantine(key, record_id, "egress SC install failed"); });
      },
      [this, key, record_id] { quarantine(key, record_id, "ingress SC install failed"); });
}

void CentralController::schedule_rekey(SimTime deadline) {
  events_.schedule_at(deadline, [this] { mscf_rekey_tick(); }, EventKind::Background);
}

void CentralController::mscf_rekey_tick() {
  const SimTime now = events_.now();
  std::vector<std::pair<LinkKey, std::pair<std::uint64_t, int>>> due;
  for (const auto& [key, rec] : records_) {
    if (rec.quarantined) continue;
    for (int dir = 0; dir < 2; ++dir) {
      const auto& ch = rec.channels[dir];
      if (ch.phase == ChannelRecord::Phase::Active && !ch.rekey_in_progress && ch.rekey_deadline <= now)
        due.push_back({key, {rec.id, dir}});
    }
  }
  for (const auto& [key, id_dir] : due) start_rekey(key, id_dir.first, id_dir.second);
}

void CentralController::start_rekey(const LinkKey& key, std::uint64_t record_id, int dir) {
  ScRecord* rec = find_record(key, record_id);
  if (!rec) return;
  ChannelRecord& ch = rec->channels[dir];
  ch.rekey_in_progress = true;
  bump("rekeys_started");

  const Sak sak = fresh_sak();
  const auto an = static_cast<std::uint8_t>((ch.an + 1) % 4);
  const Sai sender_sai = allocate_sai(ch.sender.chassis_id);
  const Sai receiver_sai = allocate_sai(ch.receiver.chassis_id);
  const bool encrypt = !config_.integrity_only;

  msg::ScConfig ingress{0, {sc_item::InstallIngressSa{ch.sci, an, receiver_sai, sak, encrypt}}};
  send_request(
      ch.receiver.chassis_id, std::move(ingress),
      [=, this] {
        ScRecord* r = find_record(key, record_id);
        if (!r) return;
        ChannelRecord& c = r->channels[dir];
        msg::ScConfig egress{0, {sc_item::ActivateEgressSa{c.sender.port, c.sci, an, sender_sai, sak, encrypt}}};
        send_request(
            c.sender.chassis_id, std::move(egress),
            [=, this] {
              ScRecord* r2 = find_record(key, record_id);
              if (!r2) return;
              ChannelRecord& c2 = r2->channels[dir];
              const std::uint8_t old_an = c2.an;
              const Sai old_receiver_sai = c2.receiver_sai;
              c2.an = an;
              c2.sak = sak;
              c2.sender_sai = sender_sai;
              c2.receiver_sai = receiver_sai;
              c2.generation += 1;
              c2.install_time = events_.now();
              c2.rekey_deadline = events_.now() + config_.rekey_interval;
              c2.rekey_in_progress = false;
              bump("rekeys_completed");
              schedule_rekey(c2.rekey_deadline);

              const Sci sci = c2.sci;
              const std::string receiver = c2.receiver.chassis_id;
              events_.schedule(
                  config_.grace,
                  [=, this] {
                    if (!find_record(key, record_id)) return;
                    send_request(receiver, msg::ScConfig{0, {sc_item::RemoveIngressSa{sci, old_an, old_receiver_sai}}},
                                 nullptr, [this, receiver] { alert("old SA removal failed on " + receiver); });
                  },
                  EventKind::Background);
            },
            [this, key, record_id] { quarantine(key, record_id, "rekey egress activation failed"); });
      },
      [this, key, record_id] { quarantine(key, record_id, "rekey ingress install failed"); });
}

void CentralController::teardown(const ScRecord& record) {
  bump("teardowns");
  const ChannelRecord& ab = record.channels[0];
  const ChannelRecord& ba = record.channels[1];
  auto revoke = [this](const ChannelRecord& outgoing, const ChannelRecord& incoming) {
    const std::string chassis = outgoing.sender.chassis_id;
    if (!switches_.count(chassis)) return;
    msg::ScConfig cfg{0, {sc_item::RevokeEgress{outgoing.sender.port}, sc_item::RevokeIngress{incoming.sci}}};
    send_request(chassis, std::move(cfg), nullptr, [this, chassis] { alert("SC revoke failed on " + chassis); });
  };
  revoke(ab, ba);
  revoke(ba, ab);
}

void CentralController::quarantine(const LinkKey& key, std::uint64_t record_id, const std::string& why) {
  ScRecord* rec = find_record(key, record_id);
  if (!rec || rec->quarantined) return;
  rec->quarantined = true;
  bump("quarantined");
  alert("link " + key.first.to_string() + " <-> " + key.second.to_string() + " quarantined: " + why);
}

void CentralController::ldcf_rotate_lldp_key() {
  key_.key = rng_.bytes<16>();
  key_.key_id += 1;
  bump("lldp_key_rotations");
  for (const auto& [chassis, sw] : switches_) {
    const std::string name = chassis;
    send_request(name, msg::KeyInstall{0, key_}, nullptr,
                 [this, name] { alert("LLDP key " + std::to_string(key_.key_id) + " not delivered to " + name); });
  }
  events_.schedule(config_.lldp_key_rotation, [this] { ldcf_rotate_lldp_key(); }, EventKind::Background);
}

Sak CentralController::fresh_sak() {
  Sak sak{rng_.bytes<16>()};
  sak_log_.push_back(sak);
  bump("saks_issued");
  return sak;
}

Sai CentralController::allocate_sai(const std::string& chassis) { return switches_.at(chassis).next_sai++; }

}  // namespace secfabric
