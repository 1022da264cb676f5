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

#include "secfabric/netsim.hpp"

#include <algorithm>

#include "secfabric/pcapng.hpp"

namespace secfabric {

namespace {

constexpr std::uint32_t kBootEpoch = 1'700'000'000;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint64_t resolve_seed(const TopologySpec& spec, std::optional<std::uint64_t> seed) {
  return seed.value_or(spec.params.seed.value_or(0));
}

Drbg make_rng(const TopologySpec& spec, std::uint64_t seed) {
  return spec.params.hardware_entropy ? Drbg::from_entropy() : Drbg(seed);
}

// LLDP rejections happen in the local controller, after the pipeline punted.
constexpr const char* kLdfRejections[] = {"ldf.replayed", "ldf.integrity_failure", "ldf.decode_failure",
                                         "ldf.no_key"};

}  // namespace

Simulation::Simulation(TopologySpec spec, std::optional<std::uint64_t> seed)
    : spec_((spec.validate(), std::move(spec))),
      seed_(resolve_seed(spec_, seed)),
      events_(spec_.params.livelock_guard),
      rng_(make_rng(spec_, seed_)) {
  const SimParams& p = spec_.params;

  CentralControllerConfig cc;
  cc.rekey_interval = p.rekey_interval;
  cc.lldp_key_rotation = p.lldp_key_rotation;
  cc.grace = p.effective_grace();
  cc.request_timeout = p.request_timeout;
  cc.integrity_only = p.integrity_only;
  central_ = std::make_unique<CentralController>(
      events_, rng_,
      [this](const std::string& chassis, ToLocal m) {
        events_.schedule(spec_.params.control_latency, [this, chassis, m = std::move(m)] {
          if (partitioned_[chassis]) return;
          auto it = switches_.find(chassis);
          if (it != switches_.end()) it->second.local->on_message(m);
        });
      },
      cc);

  for (const auto& s : spec_.switches) {
    SwitchNode node;
    node.sw = std::make_unique<Switch>(s.id, s.mac, s.ports, p.pn_ceiling);
    const std::string chassis = s.id;
    LocalControllerConfig lc;
    lc.discovery_interval = p.discovery_interval;
    node.local = std::make_unique<LocalController>(
        *node.sw, chassis, events_, rng_,
        [this, chassis](ToCentral m) {
          events_.schedule(spec_.params.control_latency, [this, chassis, m = std::move(m)] {
            if (!partitioned_[chassis]) central_->on_message(m);
          });
        },
        [this, chassis](const PacketOut& out) {
          if (auto e = switches_.at(chassis).sw->packet_out(out)) emit(chassis, *e);
        },
        lc);
    node.local->set_iv_registry(&lldp_ivs_);
    node.boot_timestamp = kBootEpoch + rng_.next_u32() % 1'000'000;
    switches_.emplace(chassis, std::move(node));
  }
  for (const auto& h : spec_.hosts) hosts_.emplace(h.name, HostNode{h, {}});

  for (const auto& l : spec_.links) links_.push_back(SimLink{l.id, {l.a.chassis_id, l.a.port}, {l.b.chassis_id, l.b.port}});
  for (const auto& h : spec_.hosts)
    links_.push_back(SimLink{h.switch_id + "-" + h.name, {h.switch_id, h.port}, {h.name, 0}, true, true});
  for (std::size_t i = 0; i < links_.size(); ++i) {
    port_index_[{links_[i].a.node, links_[i].a.port}] = i;
    port_index_[{links_[i].b.node, links_[i].b.port}] = i;
  }

  for (auto& [id, node] : switches_) {
    Switch& sw = *node.sw;
    for (PortId port = 1; port <= sw.port_count(); ++port)
      if (attached(id, port) < 0) sw.set_port_state(port, false);
    LocalController* local = node.local.get();
    sw.hooks().on_protect = [this](const Sak& sak, const GcmIv& iv) { macsec_ivs_.record(sak.key, iv); };
    sw.hooks().on_rekey_needed = [local](const Sci& sci) { local->on_rekey_needed(sci); };
    sw.hooks().on_port_status = [local](PortId port, bool up) { local->on_port_status(port, up); };
  }

  central_->start();
  for (const auto& s : spec_.switches) {
    const std::string chassis = s.id;
    events_.schedule_at(SimTime{0}, [this, chassis] {
      auto& node = switches_.at(chassis);
      node.local->boot(node.boot_timestamp);
    });
  }
}

Simulation::~Simulation() = default;

void Simulation::run_until(SimTime t) {
  if (t < now()) throw std::invalid_argument("run_until: time is in the past");
  events_.run_until(t);
}

void Simulation::quiesce() { events_.quiesce(); }

SimLink& Simulation::find_link(const std::string& id) {
  for (auto& l : links_)
    if (l.id == id) return l;
  throw UnknownLink(id);
}

const SimLink& Simulation::link(const std::string& id) const {
  for (const auto& l : links_)
    if (l.id == id) return l;
  throw UnknownLink(id);
}

int Simulation::attached(const std::string& node, PortId port) const {
  auto it = port_index_.find({node, port});
  return it == port_index_.end() ? -1 : static_cast<int>(it->second);
}

std::optional<std::string> Simulation::link_between(const Endpoint& x, const Endpoint& y) const {
  const int i = attached(x.chassis_id, x.port);
  if (i < 0) return std::nullopt;
  const SimLink& l = links_[static_cast<std::size_t>(i)];
  const LinkEnd& far = (l.a.node == x.chassis_id && l.a.port == x.port) ? l.b : l.a;
  if (far.node != y.chassis_id || far.port != y.port) return std::nullopt;
  return l.id;
}

std::vector<LinkKey> Simulation::ground_truth_links() const {
  std::vector<LinkKey> out;
  for (const auto& l : links_)
    if (!l.host_link && l.up) out.push_back(make_link_key({l.a.node, l.a.port}, {l.b.node, l.b.port}));
  std::sort(out.begin(), out.end());
  return out;
}

Switch& Simulation::switch_at(const std::string& id) {
  auto it = switches_.find(id);
  if (it == switches_.end()) throw UnknownNode(id);
  return *it->second.sw;
}

const Switch& Simulation::switch_at(const std::string& id) const {
  auto it = switches_.find(id);
  if (it == switches_.end()) throw UnknownNode(id);
  return *it->second.sw;
}

LocalController& Simulation::local(const std::string& id) {
  auto it = switches_.find(id);
  if (it == switches_.end()) throw UnknownNode(id);
  return *it->second.local;
}

const LocalController& Simulation::local(const std::string& id) const {
  auto it = switches_.find(id);
  if (it == switches_.end()) throw UnknownNode(id);
  return *it->second.local;
}

std::vector<std::string> Simulation::switch_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : switches_) out.push_back(id);
  return out;
}

const HostSpec& Simulation::host(const std::string& name) const {
  auto it = hosts_.find(name);
  if (it == hosts_.end()) throw UnknownNode(name);
  return it->second.spec;
}

std::uint32_t Simulation::boot_timestamp(const std::string& chassis) const {
  auto it = switches_.find(chassis);
  if (it == switches_.end()) throw UnknownNode(chassis);
  return it->second.boot_timestamp;
}

void Simulation::set_control_partition(const std::string& chassis, bool partitioned) {
  if (!switches_.count(chassis)) throw UnknownNode(chassis);
  const bool was = partitioned_[chassis];
  partitioned_[chassis] = partitioned;
  if (was && !partitioned) switches_.at(chassis).local->ldf_resync();
}

void Simulation::set_link_state(const std::string& link_id, bool up) {
  SimLink& l = find_link(link_id);
  if (l.up == up) return;
  l.up = up;
  for (const LinkEnd* end : {&l.a, &l.b}) {
    auto it = switches_.find(end->node);
    if (it != switches_.end()) it->second.sw->set_port_state(end->port, up);
  }
}

SimTime Simulation::link_delay() {
  SimTime d = spec_.params.link_latency;
  if (spec_.params.jitter.count() > 0)
    d += SimTime(static_cast<std::int64_t>(rng_.uniform() * static_cast<double>(spec_.params.jitter.count())));
  return d;
}

void Simulation::emit(const std::string& node, const Emission& e) {
  const int i = attached(node, e.port);
  if (i < 0) return;
  transmit(static_cast<std::size_t>(i), node, e.bytes, false);
}

void Simulation::transmit(std::size_t link_index, const std::string& from, Bytes bytes, bool injected) {
  const SimLink& l = links_[link_index];
  const std::string to = l.a.node == from ? l.b.node : l.a.node;
  TraceRecord r;
  r.index = trace_.size();
  r.time = now();
  r.link_id = l.id;
  r.from = from;
  r.to = to;
  r.cls = classify(ByteView(bytes));
  r.bytes = std::move(bytes);
  r.injected = injected;
  const std::size_t record = trace_.size();
  trace_.push_back(std::move(r));

  if (!l.up) {
    trace_[record].drop = "link_down";
    return;
  }
  if (spec_.params.loss_probability > 0 && rng_.uniform() < spec_.params.loss_probability) {
    trace_[record].drop = "lost";
    return;
  }
  events_.schedule(link_delay(), [this, record, link_index, to] { deliver(record, link_index, to); });
}

void Simulation::deliver(std::size_t record, std::size_t link_index, const std::string& to) {
  const SimLink& l = links_[link_index];
  if (!l.up) {
    trace_[record].drop = "link_down";
    return;
  }
  if (auto h = hosts_.find(to); h != hosts_.end()) {
    h->second.received.push_back(HostDelivery{now(), trace_[record].bytes});
    return;
  }
  const PortId port = l.a.node == to ? l.a.port : l.b.port;
  switch_receive(record, switches_.at(to), port);
}

void Simulation::switch_receive(std::size_t record, SwitchNode& node, PortId port) {
  const Bytes bytes = trace_[record].bytes;
  const IngressOutcome out = node.sw->process_ingress(port, bytes);
  if (const auto* pin = std::get_if<outcome::PacketIn>(&out)) {
    std::uint64_t before[std::size(kLdfRejections)];
    for (std::size_t i = 0; i < std::size(kLdfRejections); ++i) before[i] = node.local->counter(kLdfRejections[i]);
    node.local->on_packet_in(*pin);
    for (std::size_t i = 0; i < std::size(kLdfRejections); ++i)
      if (node.local->counter(kLdfRejections[i]) != before[i]) trace_[record].drop = kLdfRejections[i];
    return;
  }
  apply_outcome(record, node.sw->name(), out);
}

void Simulation::apply_outcome(std::size_t record, const std::string& node, const IngressOutcome& out) {
  std::visit(Overloaded{
                 [&](const outcome::Forward& f) { emit(node, f.out); },
                 [&](const outcome::Flood& f) {
                   for (const auto& e : f.out) emit(node, e);
                 },
                 [&](const outcome::PacketIn&) {},
                 [&](const outcome::Drop& d) { trace_[record].drop = to_string(d.reason); },
             },
             out);
}

void Simulation::inject_frame(const std::string& link_id, const std::string& from_node, Bytes bytes) {
  const SimLink& l = find_link(link_id);
  if (l.a.node != from_node && l.b.node != from_node) throw UnknownNode(from_node + " on link " + link_id);
  const auto index = static_cast<std::size_t>(&l - links_.data());
  transmit(index, from_node, std::move(bytes), true);
}

void Simulation::host_send(const std::string& host, const MacAddress& dst, std::uint16_t ether_type, Bytes payload) {
  auto it = hosts_.find(host);
  if (it == hosts_.end()) throw UnknownNode(host);
  const HostSpec& h = it->second.spec;
  const int i = attached(h.name, 0);
  if (i < 0) throw UnknownNode(host);
  const EthernetFrame frame{dst, h.mac, ether_type, std::move(payload)};
  transmit(static_cast<std::size_t>(i), h.name, serialize(frame), false);
}

const std::vector<HostDelivery>& Simulation::host_received(const std::string& host) const {
  auto it = hosts_.find(host);
  if (it == hosts_.end()) throw UnknownNode(host);
  return it->second.received;
}

std::vector<TraceRecord> Simulation::trace_query(const TraceFilter& f) const {
  std::vector<TraceRecord> out;
  for (const auto& r : trace_) {
    if (f.link_id && r.link_id != *f.link_id) continue;
    if (f.cls && r.cls != *f.cls) continue;
    if (f.from && r.from != *f.from) continue;
    if (r.time < f.from_time) continue;
    if (f.to_time && r.time > *f.to_time) continue;
    if (!f.include_injected && r.injected) continue;
    out.push_back(r);
  }
  return out;
}

void Simulation::trace_export(const std::string& path) const { pcapng::write_file(path, trace_capture()); }

pcapng::Capture Simulation::trace_capture() const {
  pcapng::Capture cap;
  std::map<std::pair<std::string, std::string>, std::uint32_t> iface;
  for (const auto& l : links_) {
    for (const auto& [from, to] : {std::pair{l.a.node, l.b.node}, std::pair{l.b.node, l.a.node}}) {
      iface[{l.id, from}] = static_cast<std::uint32_t>(cap.interfaces.size());
      cap.interfaces.push_back(l.id + " " + from + "->" + to);
    }
  }
  for (const auto& r : trace_) {
    pcapng::Packet p;
    p.interface = iface.at({r.link_id, r.from});
    p.timestamp_us = static_cast<std::uint64_t>(r.time.count());
    p.data = r.bytes;
    if (r.injected) p.comment = "injected";
    if (r.drop) p.comment += (p.comment.empty() ? "" : "; ") + std::string("dropped: ") + *r.drop;
    cap.packets.push_back(std::move(p));
  }
  return cap;
}

}  // namespace secfabric
