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

// Discrete-event fabric: switches with their local controllers, hosts,
// virtual cables, the central controller and a per-link packet trace.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "secfabric/central_controller.hpp"
#include "secfabric/crypto.hpp"
#include "secfabric/dataplane.hpp"
#include "secfabric/event_queue.hpp"
#include "secfabric/local_controller.hpp"
#include "secfabric/pcapng.hpp"
#include "secfabric/topology.hpp"
#include "secfabric/wire.hpp"

namespace secfabric {

class UnknownLink : public std::runtime_error {
 public:
  explicit UnknownLink(const std::string& id) : std::runtime_error("unknown link " + id) {}
};

class UnknownNode : public std::runtime_error {
 public:
  explicit UnknownNode(const std::string& id) : std::runtime_error("unknown node " + id) {}
};

/// One side of a cable. `port` is 0 for hosts.
struct LinkEnd {
  std::string node;
  PortId port = 0;
};

struct SimLink {
  std::string id;
  LinkEnd a;
  LinkEnd b;
  bool up = true;
  bool host_link = false;
};

struct TraceRecord {
  std::uint64_t index = 0;
  SimTime time{0};
  std::string link_id;
  std::string from;
  std::string to;
  Bytes bytes;
  FrameClass cls = FrameClass::Ethernet;
  /// Set when the receiver discarded the frame or it never arrived.
  std::optional<std::string> drop;
  bool injected = false;
};

struct TraceFilter {
  std::optional<std::string> link_id;
  std::optional<FrameClass> cls;
  /// Sending node; selects one direction of a link.
  std::optional<std::string> from;
  SimTime from_time{0};
  std::optional<SimTime> to_time;
  bool include_injected = true;
};

struct HostDelivery {
  SimTime time{0};
  Bytes bytes;
};

class Simulation {
 public:
  /// Validates the topology, wires everything and schedules the boots at t=0.
  /// `seed` overrides the topology's seed; with neither, seed 0 is used.
  explicit Simulation(TopologySpec spec, std::optional<std::uint64_t> seed = std::nullopt);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  void run_until(SimTime t);
  void run_for(SimTime d) { run_until(now() + d); }
  void quiesce();
  SimTime now() const { return events_.now(); }
  std::uint64_t seed() const { return seed_; }

  void set_link_state(const std::string& link_id, bool up);
  /// Puts raw bytes on the wire as if sent by `from_node` (an end of the link).
  void inject_frame(const std::string& link_id, const std::string& from_node, Bytes bytes);
  void host_send(const std::string& host, const MacAddress& dst, std::uint16_t ether_type, Bytes payload);
  const std::vector<HostDelivery>& host_received(const std::string& host) const;

  /// Messages between `chassis` and the central controller are silently lost while set.
  void set_control_partition(const std::string& chassis, bool partitioned);

  const std::vector<TraceRecord>& trace() const { return trace_; }
  std::vector<TraceRecord> trace_query(const TraceFilter& filter) const;
  /// pcapng with one interface per link direction, named "<link> <from>-><to>".
  void trace_export(const std::string& path) const;
  pcapng::Capture trace_capture() const;

  const TopologySpec& spec() const { return spec_; }
  const std::vector<SimLink>& links() const { return links_; }
  const SimLink& link(const std::string& id) const;
  /// Inter-switch cables that are currently up, as controller link keys.
  std::vector<LinkKey> ground_truth_links() const;
  std::optional<std::string> link_between(const Endpoint& x, const Endpoint& y) const;

  Switch& switch_at(const std::string& id);
  const Switch& switch_at(const std::string& id) const;
  LocalController& local(const std::string& id);
  const LocalController& local(const std::string& id) const;
  CentralController& central() { return *central_; }
  const CentralController& central() const { return *central_; }
  std::vector<std::string> switch_ids() const;
  bool is_switch(const std::string& node) const { return switches_.count(node) != 0; }
  bool is_host(const std::string& node) const { return hosts_.count(node) != 0; }
  const HostSpec& host(const std::string& name) const;

  EventQueue& events() { return events_; }
  const IvRegistry& macsec_ivs() const { return macsec_ivs_; }
  const IvRegistry& lldp_ivs() const { return lldp_ivs_; }
  std::uint32_t boot_timestamp(const std::string& chassis) const;

 private:
  struct SwitchNode {
    std::unique_ptr<Switch> sw;
    std::unique_ptr<LocalController> local;
    std::uint32_t boot_timestamp = 0;
  };
  struct HostNode {
    HostSpec spec;
    std::vector<HostDelivery> received;
  };

  SimLink& find_link(const std::string& id);
  /// Link index attached to (node, port); -1 if none.
  int attached(const std::string& node, PortId port) const;
  void transmit(std::size_t link_index, const std::string& from, Bytes bytes, bool injected);
  void deliver(std::size_t record, std::size_t link_index, const std::string& to);
  void switch_receive(std::size_t record, SwitchNode& node, PortId port);
  void emit(const std::string& node, const Emission& e);
  void apply_outcome(std::size_t record, const std::string& node, const IngressOutcome& out);
  SimTime link_delay();

  TopologySpec spec_;
  std::uint64_t seed_ = 0;
  EventQueue events_;
  Drbg rng_;
  std::unique_ptr<CentralController> central_;
  std::map<std::string, SwitchNode> switches_;
  std::map<std::string, HostNode> hosts_;
  std::vector<SimLink> links_;
  std::map<std::pair<std::string, PortId>, std::size_t> port_index_;
  std::map<std::string, bool> partitioned_;
  std::vector<TraceRecord> trace_;
  IvRegistry macsec_ivs_;
  IvRegistry lldp_ivs_;
};

}  // namespace secfabric
