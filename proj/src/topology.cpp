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

#include "secfabric/topology.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace secfabric {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

std::string scalar(const YAML::Node& n, const char* what) {
  if (!n || !n.IsScalar()) throw SpecError(std::string("expected scalar for ") + what, n ? line_of(n) : 0);
  return n.Scalar();
}

std::string required(const YAML::Node& parent, const char* key) {
  const YAML::Node n = parent[key];
  if (!n) throw SpecError(std::string("missing field '") + key + "'", line_of(parent));
  return scalar(n, key);
}

std::uint64_t as_uint(const YAML::Node& n, const char* what) {
  const std::string s = scalar(n, what);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw SpecError(std::string("bad integer for ") + what, line_of(n));
  return v;
}

MacAddress as_mac(const YAML::Node& n, const char* what) {
  try {
    return MacAddress::parse(scalar(n, what));
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what(), line_of(n));
  }
}

Endpoint as_endpoint(const YAML::Node& n, const char* what) {
  const std::string s = scalar(n, what);
  const auto colon = s.rfind(':');
  if (colon == std::string::npos || colon == 0) throw SpecError("endpoint must be <switch>:<port>: " + s, line_of(n));
  Endpoint e;
  e.chassis_id = s.substr(0, colon);
  const std::string port = s.substr(colon + 1);
  unsigned v = 0;
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), v);
  if (ec != std::errc{} || p != port.data() + port.size() || v == 0 || v > 0xffff)
    throw SpecError("bad port in endpoint " + s, line_of(n));
  e.port = static_cast<PortId>(v);
  return e;
}

SimTime as_duration(const YAML::Node& n, const char* what) {
  try {
    return parse_duration(scalar(n, what));
  } catch (const std::invalid_argument& e) {
    throw SpecError(std::string(what) + ": " + e.what(), line_of(n));
  }
}

bool as_bool(const YAML::Node& n, const char* what) {
  const std::string s = scalar(n, what);
  if (s == "true" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "no" || s == "off") return false;
  throw SpecError(std::string("bad boolean for ") + what, line_of(n));
}

void parse_params(const YAML::Node& node, SimParams& p) {
  if (!node.IsMap()) throw SpecError("params must be a mapping", line_of(node));
  for (const auto& kv : node) {
    const std::string key = kv.first.Scalar();
    const YAML::Node& v = kv.second;
    if (key == "discovery_interval") p.discovery_interval = as_duration(v, "discovery_interval");
    else if (key == "rekey_interval") p.rekey_interval = as_duration(v, "rekey_interval");
    else if (key == "lldp_key_rotation") p.lldp_key_rotation = as_duration(v, "lldp_key_rotation");
    else if (key == "grace") p.grace = as_duration(v, "grace");
    else if (key == "link_latency") p.link_latency = as_duration(v, "link_latency");
    else if (key == "control_latency") p.control_latency = as_duration(v, "control_latency");
    else if (key == "request_timeout") p.request_timeout = as_duration(v, "request_timeout");
    else if (key == "jitter") p.jitter = as_duration(v, "jitter");
    else if (key == "loss_probability") {
      try {
        p.loss_probability = std::stod(scalar(v, "loss_probability"));
      } catch (const std::exception&) {
        throw SpecError("bad loss_probability", line_of(v));
      }
    } else if (key == "pn_ceiling") p.pn_ceiling = as_uint(v, "pn_ceiling");
    else if (key == "integrity_only") p.integrity_only = as_bool(v, "integrity_only");
    else if (key == "livelock_guard") p.livelock_guard = as_uint(v, "livelock_guard");
    else if (key == "seed") p.seed = as_uint(v, "seed");
    else if (key == "hardware_entropy") p.hardware_entropy = as_bool(v, "hardware_entropy");
    else throw SpecError("unknown parameter '" + key + "'", line_of(kv.first));
  }
}

void only_keys(const YAML::Node& n, std::initializer_list<std::string_view> allowed, const std::string& what) {
  if (!n.IsMap()) throw SpecError(what + " entry must be a mapping", line_of(n));
  for (const auto& kv : n) {
    const std::string key = kv.first.Scalar();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw SpecError("unknown " + what + " key '" + key + "'", line_of(kv.first));
  }
}

}  // namespace

SimTime parse_duration(std::string_view text) {
  std::string s(text);
  double scale = 1e6;
  auto strip = [&](std::string_view suffix, double factor) {
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s.resize(s.size() - suffix.size());
      scale = factor;
      return true;
    }
    return false;
  };
  strip("us", 1.0) || strip("ms", 1e3) || strip("s", 1e6) || strip("m", 60e6);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad duration '" + std::string(text) + "'");
  }
  if (used != s.size() || v < 0) throw std::invalid_argument("bad duration '" + std::string(text) + "'");
  return SimTime(static_cast<std::int64_t>(v * scale + 0.5));
}

const SwitchSpec* TopologySpec::find_switch(std::string_view id) const {
  for (const auto& s : switches)
    if (s.id == id) return &s;
  return nullptr;
}

void TopologySpec::validate() const {
  if (switches.empty()) throw SpecError("topology needs at least one switch");
  std::set<std::string> names;
  std::set<MacAddress> macs;
  for (const auto& s : switches) {
    if (s.id.empty() || s.id.size() > kMaxChassisIdLen) throw SpecError("switch id must be 1..64 bytes: " + s.id);
    if (!names.insert(s.id).second) throw SpecError("duplicate node name " + s.id);
    if (!macs.insert(s.mac).second) throw SpecError("duplicate MAC " + s.mac.to_string());
    if (s.mac.is_multicast()) throw SpecError("switch " + s.id + " has a multicast MAC");
    if (s.ports == 0) throw SpecError("switch " + s.id + " has no ports");
  }
  std::set<Endpoint> used;
  auto claim = [&](const Endpoint& e, const std::string& who) {
    const SwitchSpec* sw = find_switch(e.chassis_id);
    if (!sw) throw SpecError(who + " references unknown switch " + e.chassis_id);
    if (e.port < 1 || e.port > sw->ports) throw SpecError(who + " references bad port " + e.to_string());
    if (!used.insert(e).second) throw SpecError(who + " reuses port " + e.to_string());
  };
  for (const auto& h : hosts) {
    if (!names.insert(h.name).second) throw SpecError("duplicate node name " + h.name);
    if (!macs.insert(h.mac).second) throw SpecError("duplicate MAC " + h.mac.to_string());
    if (h.mac.is_multicast()) throw SpecError("host " + h.name + " has a multicast MAC");
    claim(Endpoint{h.switch_id, h.port}, "host " + h.name);
  }
  std::set<std::string> link_ids;
  for (const auto& l : links) {
    if (!link_ids.insert(l.id).second) throw SpecError("duplicate link id " + l.id + " (give links explicit ids)");
    claim(l.a, "link " + l.id);
    claim(l.b, "link " + l.id);
  }
  for (const auto& h : hosts) {
    if (!link_ids.insert(h.switch_id + "-" + h.name).second)
      throw SpecError("host link id " + h.switch_id + "-" + h.name + " collides with a cable id");
  }
}

TopologySpec parse_topology(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw SpecError(e.msg, e.mark.line + 1);
  }
  if (!root.IsMap()) throw SpecError("topology must be a mapping");

  TopologySpec spec;
  for (const auto& kv : root) {
    const std::string key = kv.first.Scalar();
    if (key != "switches" && key != "hosts" && key != "links" && key != "params" && key != "seed" && key != "name")
      throw SpecError("unknown top-level key '" + key + "'", line_of(kv.first));
  }
  if (root["params"]) parse_params(root["params"], spec.params);
  if (root["seed"]) spec.params.seed = as_uint(root["seed"], "seed");

  if (const auto sw = root["switches"]) {
    if (!sw.IsSequence()) throw SpecError("switches must be a list", line_of(sw));
    for (const auto& n : sw) {
      only_keys(n, {"id", "mac", "ports"}, "switch");
      SwitchSpec s;
      s.id = required(n, "id");
      s.mac = as_mac(n["mac"], "mac");
      const auto ports = as_uint(n["ports"], "ports");
      if (ports == 0 || ports > 0xffff) throw SpecError("bad port count for " + s.id, line_of(n));
      s.ports = static_cast<PortId>(ports);
      spec.switches.push_back(std::move(s));
    }
  }
  if (const auto hs = root["hosts"]) {
    if (!hs.IsSequence()) throw SpecError("hosts must be a list", line_of(hs));
    for (const auto& n : hs) {
      only_keys(n, {"name", "mac", "attach"}, "host");
      HostSpec h;
      h.name = required(n, "name");
      h.mac = as_mac(n["mac"], "mac");
      const Endpoint at = as_endpoint(n["attach"], "attach");
      h.switch_id = at.chassis_id;
      h.port = at.port;
      spec.hosts.push_back(std::move(h));
    }
  }
  if (const auto ls = root["links"]) {
    if (!ls.IsSequence()) throw SpecError("links must be a list", line_of(ls));
    for (const auto& n : ls) {
      only_keys(n, {"a", "b", "id"}, "link");
      LinkSpec l;
      l.a = as_endpoint(n["a"], "a");
      l.b = as_endpoint(n["b"], "b");
      l.id = n["id"] ? scalar(n["id"], "id") : l.a.chassis_id + "-" + l.b.chassis_id;
      try {
        // Validate incrementally so the error carries this element's line.
        TopologySpec partial = spec;
        partial.links.push_back(l);
        partial.hosts.clear();
        partial.validate();
      } catch (const SpecError& e) {
        throw SpecError(e.what(), line_of(n));
      }
      spec.links.push_back(std::move(l));
    }
  }
  spec.validate();
  return spec;
}

TopologySpec load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open topology file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_topology(ss.str());
}

}  // namespace secfabric
