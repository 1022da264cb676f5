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

// Topology description consumed by the simulator. The YAML schema is
// described in README.md.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "secfabric/event_queue.hpp"
#include "secfabric/messages.hpp"
#include "secfabric/wire.hpp"

namespace secfabric {

class SpecError : public std::runtime_error {
 public:
  explicit SpecError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct SwitchSpec {
  std::string id;
  MacAddress mac;
  PortId ports = 0;
};

struct HostSpec {
  std::string name;
  MacAddress mac;
  std::string switch_id;
  PortId port = 0;
};

/// Inter-switch cable. Host attachments are implied by HostSpec.
struct LinkSpec {
  std::string id;
  Endpoint a;
  Endpoint b;
};

struct SimParams {
  SimTime discovery_interval = seconds(30);
  SimTime rekey_interval = seconds(60);
  SimTime lldp_key_rotation = seconds(300);
  std::optional<SimTime> grace;  // defaults to the discovery interval
  SimTime link_latency = millis(1);
  SimTime control_latency{0};
  SimTime request_timeout = seconds(1);
  double loss_probability = 0.0;
  SimTime jitter{0};
  std::uint64_t pn_ceiling = 0xffffffffULL;
  bool integrity_only = false;
  std::uint64_t livelock_guard = 50'000'000;
  std::optional<std::uint64_t> seed;
  bool hardware_entropy = false;

  SimTime effective_grace() const { return grace.value_or(discovery_interval); }
};

struct TopologySpec {
  std::vector<SwitchSpec> switches;
  std::vector<HostSpec> hosts;
  std::vector<LinkSpec> links;
  SimParams params;

  /// Throws SpecError naming the offending element.
  void validate() const;
  const SwitchSpec* find_switch(std::string_view id) const;
};

TopologySpec parse_topology(std::string_view yaml_text);
TopologySpec load_topology(const std::string& path);

/// "30s", "1.5ms", "250us", "2m", or a bare number of seconds.
SimTime parse_duration(std::string_view text);

}  // namespace secfabric
