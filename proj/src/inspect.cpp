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

#include "secfabric/inspect.hpp"

#include <map>
#include <sstream>

namespace secfabric {

namespace {

std::string key_text(const Key128& key, DumpOptions opts) {
  return opts.unsafe_dump_keys ? to_hex(key) : fingerprint(key);
}

const char* phase_name(ChannelRecord::Phase p) {
  switch (p) {
    case ChannelRecord::Phase::InstallingIngress: return "installing_ingress";
    case ChannelRecord::Phase::ActivatingEgress: return "activating_egress";
    case ChannelRecord::Phase::Active: return "active";
  }
  return "?";
}

void counter_lines(std::ostringstream& out, const std::map<std::string, std::uint64_t>& counters) {
  for (const auto& [name, value] : counters) out << name << " " << value << "\n";
}

}  // namespace

std::string dump_links(const Simulation& sim) {
  std::ostringstream out;
  for (const auto& [key, link] : sim.central().link_map()) {
    if (link.state == LinkState::Confirmed)
      out << "CONFIRMED " << link.a.to_string() << " <-> " << link.b.to_string() << "\n";
    else
      out << "ONE_WAY " << link.a.to_string() << " <-> " << link.b.to_string() << "\n";
  }
  return out.str();
}

std::string dump_scs(const Simulation& sim, DumpOptions opts) {
  std::ostringstream out;
  for (const auto& [key, rec] : sim.central().sc_records()) {
    out << "SC " << rec.id << " " << key.first.to_string() << " <-> " << key.second.to_string()
        << (rec.quarantined ? " QUARANTINED" : "") << "\n";
    for (const auto& ch : rec.channels) {
      out << "  " << ch.sender.to_string() << " -> " << ch.receiver.to_string() << " sci=" << ch.sci.to_string()
          << " an=" << int{ch.an} << " gen=" << ch.generation << " sak=" << key_text(ch.sak.key, opts)
          << " phase=" << phase_name(ch.phase) << (ch.rekey_in_progress ? " rekeying" : "") << "\n";
    }
  }
  return out.str();
}

std::string dump_tables(const Simulation& sim, const std::string& switch_id, DumpOptions opts) {
  const SwitchTables& t = sim.switch_at(switch_id).tables();
  std::ostringstream out;
  out << "MAC\n";
  for (const auto& [mac, e] : t.mac)
    out << "  " << mac.to_string() << " port=" << e.port << " macsec=" << (e.macsec_flag ? 1 : 0) << "\n";
  out << "EG_SC\n";
  for (const auto& [port, e] : t.eg_sc) out << "  port=" << port << " sci=" << e.sci.to_string() << " sai=" << e.sai << "\n";
  out << "IG_SC\n";
  for (const auto& [k, e] : t.ig_sc)
    out << "  sci=" << e.sci.to_string() << " an=" << int{e.an} << " sai=" << e.sai << "\n";
  out << "SA\n";
  for (const auto& [sai, e] : t.sa)
    out << "  sai=" << sai << " an=" << int{e.an} << " next_pn=" << e.next_pn
        << " mode=" << (e.encrypt ? "encrypt" : "integrity") << " sak=" << key_text(e.sak.key, opts) << "\n";
  return out.str();
}

std::string dump_counters(const Simulation& sim, const std::string& switch_id) {
  std::map<std::string, std::uint64_t> merged = sim.switch_at(switch_id).counters();
  for (const auto& [k, v] : sim.local(switch_id).counters()) merged[k] += v;
  std::ostringstream out;
  counter_lines(out, merged);
  return out.str();
}

std::string dump_central_counters(const Simulation& sim) {
  std::ostringstream out;
  counter_lines(out, sim.central().counters());
  return out.str();
}

std::string dump_all_counters(const Simulation& sim) {
  std::ostringstream out;
  out << "[central]\n" << dump_central_counters(sim);
  for (const auto& id : sim.switch_ids()) out << "[" << id << "]\n" << dump_counters(sim, id);
  return out.str();
}

std::string inspect(const Simulation& sim, const std::string& query, DumpOptions opts) {
  if (query == "links") return dump_links(sim);
  if (query == "scs") return dump_scs(sim, opts);
  if (query == "counters") return dump_all_counters(sim);
  const auto open = query.find('(');
  if (open != std::string::npos && query.back() == ')') {
    const std::string verb = query.substr(0, open);
    const std::string arg = query.substr(open + 1, query.size() - open - 2);
    if (verb == "tables") return dump_tables(sim, arg, opts);
    if (verb == "counters") return arg == "central" ? dump_central_counters(sim) : dump_counters(sim, arg);
  }
  throw UnknownQuery(query);
}

}  // namespace secfabric
