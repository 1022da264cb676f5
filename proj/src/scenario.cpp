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

#include "secfabric/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "secfabric/inspect.hpp"
#include "secfabric/pcapng.hpp"

namespace secfabric {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct AssertionSpec {
  std::size_t min_args;
  std::size_t max_args;
};

const std::map<std::string, AssertionSpec>& vocabulary() {
  static const std::map<std::string, AssertionSpec> v = {
      {"link_map_matches_spec", {0, 0}},
      {"link_map_unchanged", {0, 0}},
      {"no_sc_for", {1, 1}},
      {"sc_exists_for", {1, 1}},
      {"all_interswitch_frames_protected", {0, 2}},
      {"counters_zero", {2, 64}},
      {"payload_delivered", {2, 3}},
      {"sak_rotated", {1, 2}},
  };
  return v;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::uint64_t parse_uint(const std::string& s, int line, const char* what) {
  std::uint64_t v = 0;
  int base = 10;
  std::string_view digits = s;
  if (digits.starts_with("0x") || digits.starts_with("0X")) {
    base = 16;
    digits.remove_prefix(2);
  }
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
  if (digits.empty() || ec != std::errc{} || p != digits.data() + digits.size())
    throw ScriptError(std::string("bad ") + what + " '" + s + "'", line);
  return v;
}

SimTime parse_time(const std::string& s, int line) {
  try {
    return parse_duration(s);
  } catch (const std::invalid_argument& e) {
    throw ScriptError(e.what(), line);
  }
}

std::optional<FrameClass> parse_class(const std::string& s) {
  if (s == "ethernet") return FrameClass::Ethernet;
  if (s == "macsec") return FrameClass::Macsec;
  if (s == "lldp") return FrameClass::SecureLldp;
  return std::nullopt;
}

directive::Expect parse_expect(const std::string& rest, int line) {
  directive::Expect e;
  const auto open = rest.find('(');
  if (open != std::string::npos) {
    if (rest.back() != ')') throw ScriptError("unbalanced parenthesis in expect", line);
    e.name = trim(rest.substr(0, open));
    std::stringstream args(rest.substr(open + 1, rest.size() - open - 2));
    for (std::string a; std::getline(args, a, ',');) {
      a = trim(a);
      if (!a.empty()) e.args.push_back(a);
    }
  } else {
    auto toks = split_ws(rest);
    if (toks.empty()) throw ScriptError("expect needs an assertion name", line);
    e.name = toks[0];
    e.args.assign(toks.begin() + 1, toks.end());
  }
  auto it = vocabulary().find(e.name);
  if (it == vocabulary().end()) throw ScriptError("unknown assertion '" + e.name + "'", line);
  if (e.args.size() < it->second.min_args || e.args.size() > it->second.max_args)
    throw ScriptError("wrong number of arguments for " + e.name, line);
  return e;
}

Directive parse_line(const std::string& text, int line) {
  const auto toks = split_ws(text);
  const std::string& verb = toks[0];
  auto want = [&](std::size_t n) {
    if (toks.size() != n) throw ScriptError("wrong number of arguments for " + verb, line);
  };
  if (verb == "run_until") {
    want(2);
    return directive::RunUntil{parse_time(toks[1], line)};
  }
  if (verb == "run_for") {
    want(2);
    return directive::RunFor{parse_time(toks[1], line)};
  }
  if (verb == "quiesce") {
    want(1);
    return directive::Quiesce{};
  }
  if (verb == "link") {
    want(3);
    if (toks[1] != "up" && toks[1] != "down") throw ScriptError("link state must be up or down", line);
    return directive::Link{toks[2], toks[1] == "up"};
  }
  if (verb == "inject") {
    if (toks.size() < 5) throw ScriptError("inject <link> <from> hex <bytes> | replay <k> [class]", line);
    if (toks[3] == "hex") {
      want(5);
      try {
        return directive::InjectHex{toks[1], toks[2], from_hex(toks[4])};
      } catch (const std::invalid_argument& e) {
        throw ScriptError(e.what(), line);
      }
    }
    if (toks[3] == "replay") {
      if (toks.size() > 6) throw ScriptError("too many arguments for inject replay", line);
      directive::InjectReplay r{toks[1], toks[2], parse_uint(toks[4], line, "capture index"), std::nullopt};
      if (toks.size() == 6) {
        r.cls = parse_class(toks[5]);
        if (!r.cls) throw ScriptError("unknown frame class '" + toks[5] + "'", line);
      }
      return r;
    }
    throw ScriptError("inject mode must be hex or replay", line);
  }
  if (verb == "send") {
    want(5);
    const auto type = parse_uint(toks[3], line, "ether type");
    if (type > 0xffff) throw ScriptError("ether type out of range", line);
    try {
      parse_payload(toks[4]);
    } catch (const std::invalid_argument& e) {
      throw ScriptError(e.what(), line);
    }
    return directive::Send{toks[1], toks[2], static_cast<std::uint16_t>(type), toks[4]};
  }
  if (verb == "expect") return parse_expect(trim(text.substr(text.find("expect") + 6)), line);
  throw ScriptError("unknown directive '" + verb + "'", line);
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::string key_string(const LinkKey& k) { return k.first.to_string() + "<->" + k.second.to_string(); }

LinkKey key_of(const SimLink& l) { return make_link_key({l.a.node, l.a.port}, {l.b.node, l.b.port}); }

bool confirmed(const Simulation& sim, const LinkKey& key) {
  auto it = sim.central().link_map().find(key);
  return it != sim.central().link_map().end() && it->second.state == LinkState::Confirmed;
}

std::map<std::string, std::uint64_t> merged_counters(const Simulation& sim, const std::string& sw) {
  std::map<std::string, std::uint64_t> m = sim.switch_at(sw).counters();
  for (const auto& [k, v] : sim.local(sw).counters()) m[k] += v;
  return m;
}

}  // namespace

Bytes parse_payload(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("payload must be kind:value: " + spec);
  const std::string kind = spec.substr(0, colon);
  const std::string value = spec.substr(colon + 1);
  auto number = [&](const std::string& s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument("bad number in payload " + spec);
    return v;
  };
  if (kind == "hex") return from_hex(value);
  if (kind == "text") return Bytes(value.begin(), value.end());
  const auto second = value.find(':');
  if (second == std::string::npos) throw std::invalid_argument("payload needs <n>:<arg>: " + spec);
  const std::size_t n = number(value.substr(0, second));
  if (n > 9000) throw std::invalid_argument("payload too large: " + spec);
  const std::string arg = value.substr(second + 1);
  if (kind == "fill") {
    const Bytes b = from_hex(arg);
    if (b.size() != 1) throw std::invalid_argument("fill byte must be one hex byte: " + spec);
    return Bytes(n, b[0]);
  }
  if (kind == "random") {
    Drbg rng(number(arg));
    Bytes out(n);
    rng.fill(out);
    return out;
  }
  throw std::invalid_argument("unknown payload kind '" + kind + "'");
}

const std::vector<std::string>& assertion_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : vocabulary()) v.push_back(k);
    return v;
  }();
  return names;
}

Script parse_script(const std::string& text) {
  Script script;
  std::istringstream in(text);
  int line = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    script.push_back(ScriptLine{line, parse_line(raw, line)});
  }
  return script;
}

Script load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScriptError("cannot open script " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_script(ss.str());
}

std::string format_result(const AssertionResult& r) {
  std::string detail = r.args.empty() ? r.detail : "[" + join(r.args, " ") + "] " + r.detail;
  return "ASSERT " + r.name + (r.pass ? " PASS " : " FAIL ") + detail;
}

RunArtifacts run_scenario(const TopologySpec& spec, const Script& script, std::optional<std::uint64_t> seed,
                          DumpOptions dump) {
  Scenario sc(spec, seed);
  sc.run(script);
  RunArtifacts a;
  a.report = sc.report();
  a.counters = dump_all_counters(sc.sim());
  a.state = "# links\n" + dump_links(sc.sim()) + "# scs\n" + dump_scs(sc.sim(), dump);
  a.trace = pcapng::encode(sc.sim().trace_capture());
  a.passed = sc.all_passed();
  return a;
}

void write_artifacts(const RunArtifacts& a, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto put = [&](const char* name, const void* data, std::size_t n) {
    const auto path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pcapng::IoError("cannot write " + path);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  };
  put("report.txt", a.report.data(), a.report.size());
  put("counters.txt", a.counters.data(), a.counters.size());
  put("state.txt", a.state.data(), a.state.size());
  put("trace.pcapng", a.trace.data(), a.trace.size());
}

Scenario::Scenario(TopologySpec spec, std::optional<std::uint64_t> seed) : sim_(std::move(spec), seed) {}

bool Scenario::all_passed() const {
  return std::all_of(results_.begin(), results_.end(), [](const AssertionResult& r) { return r.pass; });
}

std::string Scenario::report() const {
  std::ostringstream out;
  std::size_t passed = 0;
  for (const auto& r : results_) {
    out << format_result(r) << "\n";
    passed += r.pass;
  }
  out << "SUMMARY " << passed << "/" << results_.size() << " passed\n";
  return out.str();
}

void Scenario::check_link(const std::string& id, int line) const {
  try {
    sim_.link(id);
  } catch (const UnknownLink& e) {
    throw ScriptError(e.what(), line);
  }
}

void Scenario::check_node(const std::string& id, int line) const {
  if (!sim_.is_switch(id) && !sim_.is_host(id)) throw ScriptError("unknown node " + id, line);
}

void Scenario::run(const Script& script) {
  // Reject bad references before anything runs.
  for (const auto& l : script) {
    std::visit(Overloaded{
                   [&](const directive::Link& d) { check_link(d.id, l.line); },
                   [&](const directive::InjectHex& d) {
                     check_link(d.link, l.line);
                     check_node(d.from, l.line);
                   },
                   [&](const directive::InjectReplay& d) {
                     check_link(d.link, l.line);
                     check_node(d.from, l.line);
                   },
                   [&](const directive::Send& d) {
                     if (!sim_.is_host(d.host)) throw ScriptError("unknown host " + d.host, l.line);
                     if (!sim_.is_host(d.dst)) {
                       try {
                         MacAddress::parse(d.dst);
                       } catch (const std::invalid_argument&) {
                         throw ScriptError("destination is neither a host nor a MAC: " + d.dst, l.line);
                       }
                     }
                   },
                   [&](const directive::Expect& e) {
                     if (e.name == "no_sc_for" || e.name == "sc_exists_for" || e.name == "sak_rotated")
                       check_link(e.args[0], l.line);
                     if (e.name == "all_interswitch_frames_protected" && !e.args.empty() && e.args[0] != "*")
                       check_link(e.args[0], l.line);
                     if (e.name == "counters_zero" && e.args[0] != "*" && !sim_.is_switch(e.args[0]))
                       throw ScriptError("unknown switch " + e.args[0], l.line);
                     if (e.name == "payload_delivered") {
                       if (!sim_.is_host(e.args[0])) throw ScriptError("unknown host " + e.args[0], l.line);
                       if (e.args.size() == 3 && !sim_.is_host(e.args[2]))
                         throw ScriptError("unknown host " + e.args[2], l.line);
                       try {
                         parse_payload(e.args[1]);
                       } catch (const std::invalid_argument& ex) {
                         throw ScriptError(ex.what(), l.line);
                       }
                     }
                   },
                   [](const auto&) {},
               },
               l.directive);
  }
  for (const auto& l : script) execute(l);
}

void Scenario::before_inject() {
  if (!baseline_) baseline_ = sim_.central().link_map();
}

void Scenario::execute(const ScriptLine& l) {
  std::visit(Overloaded{
                 [&](const directive::RunUntil& d) {
                   if (d.time < sim_.now()) throw ScriptError("run_until goes back in time", l.line);
                   sim_.run_until(d.time);
                 },
                 [&](const directive::RunFor& d) { sim_.run_for(d.duration); },
                 [&](const directive::Quiesce&) { sim_.quiesce(); },
                 [&](const directive::Link& d) { sim_.set_link_state(d.id, d.up); },
                 [&](const directive::InjectHex& d) {
                   before_inject();
                   try {
                     sim_.inject_frame(d.link, d.from, d.bytes);
                   } catch (const UnknownNode& e) {
                     throw ScriptError(e.what(), l.line);
                   }
                 },
                 [&](const directive::InjectReplay& d) {
                   TraceFilter f;
                   f.link_id = d.link;
                   f.from = d.from;
                   f.cls = d.cls;
                   f.include_injected = false;
                   const auto captured = sim_.trace_query(f);
                   if (d.index >= captured.size())
                     throw ScriptError("capture index " + std::to_string(d.index) + " out of range (" +
                                           std::to_string(captured.size()) + " frames)",
                                       l.line);
                   before_inject();
                   sim_.inject_frame(d.link, d.from, captured[d.index].bytes);
                 },
                 [&](const directive::Send& d) {
                   const MacAddress dst = sim_.is_host(d.dst) ? sim_.host(d.dst).mac : MacAddress::parse(d.dst);
                   sim_.host_send(d.host, dst, d.ether_type, parse_payload(d.payload));
                 },
                 [&](const directive::Expect& e) {
                   AssertionResult r = evaluate(e);
                   r.line = l.line;
                   results_.push_back(std::move(r));
                 },
             },
             l.directive);
}

AssertionResult Scenario::evaluate(const directive::Expect& e) {
  AssertionResult r{e.name, e.args, false, {}, 0};
  const CentralController& central = sim_.central();

  if (e.name == "link_map_matches_spec") {
    std::set<LinkKey> want;
    for (const auto& k : sim_.ground_truth_links()) want.insert(k);
    std::set<LinkKey> got;
    for (const auto& l : central.confirmed_links()) got.insert({l.a, l.b});
    std::vector<std::string> missing, extra;
    for (const auto& k : want)
      if (!got.count(k)) missing.push_back(key_string(k));
    for (const auto& k : got)
      if (!want.count(k)) extra.push_back(key_string(k));
    std::size_t one_way = central.link_map().size() - got.size();
    r.pass = missing.empty() && extra.empty() && one_way == 0;
    std::ostringstream d;
    d << got.size() << " confirmed, " << want.size() << " expected";
    if (!missing.empty()) d << "; missing " << join(missing, ",");
    if (!extra.empty()) d << "; extra " << join(extra, ",");
    if (one_way) d << "; " << one_way << " one-way";
    r.detail = d.str();
  } else if (e.name == "link_map_unchanged") {
    if (!baseline_) {
      r.pass = true;
      r.detail = "no injections since last check";
    } else {
      r.pass = *baseline_ == central.link_map();
      r.detail = r.pass ? std::to_string(baseline_->size()) + " links unchanged"
                        : "link map changed: " + std::to_string(baseline_->size()) + " -> " +
                              std::to_string(central.link_map().size()) + " entries";
    }
    baseline_.reset();
  } else if (e.name == "no_sc_for" || e.name == "sc_exists_for") {
    const SimLink& link = sim_.link(e.args[0]);
    if (link.host_link) {
      r.pass = e.name == "no_sc_for";
      r.detail = "host link never carries an SC";
      return r;
    }
    const LinkKey key = key_of(link);
    auto rec = central.sc_records().find(key);
    const Switch& sa = sim_.switch_at(key.first.chassis_id);
    const Switch& sb = sim_.switch_at(key.second.chassis_id);
    const Sci sci_a = Sci::make(sa.mac(), key.first.port);
    const Sci sci_b = Sci::make(sb.mac(), key.second.port);
    auto has_ingress = [](const Switch& sw, const Sci& sci) {
      for (const auto& [k, _] : sw.tables().ig_sc)
        if (k.first == sci) return true;
      return false;
    };
    const bool eg_a = sa.tables().eg_sc.count(key.first.port) != 0;
    const bool eg_b = sb.tables().eg_sc.count(key.second.port) != 0;
    const bool ig_a = has_ingress(sa, sci_b);
    const bool ig_b = has_ingress(sb, sci_a);
    if (e.name == "no_sc_for") {
      r.pass = rec == central.sc_records().end() && !eg_a && !eg_b && !ig_a && !ig_b;
      std::ostringstream d;
      d << "record=" << (rec != central.sc_records().end()) << " eg=" << eg_a << eg_b << " ig=" << ig_a << ig_b;
      r.detail = d.str();
    } else {
      if (rec == central.sc_records().end()) {
        r.detail = "no SC record for " + key_string(key);
        return r;
      }
      const ScRecord& sc = rec->second;
      std::vector<std::string> problems;
      if (sc.quarantined) problems.push_back("quarantined");
      for (const auto& ch : sc.channels) {
        const Switch& sender = sim_.switch_at(ch.sender.chassis_id);
        const Switch& receiver = sim_.switch_at(ch.receiver.chassis_id);
        const std::string dir = ch.sender.to_string() + "->" + ch.receiver.to_string();
        if (ch.phase != ChannelRecord::Phase::Active) problems.push_back(dir + " not active");
        auto eg = sender.tables().eg_sc.find(ch.sender.port);
        if (eg == sender.tables().eg_sc.end() || eg->second.sci != ch.sci || eg->second.sai != ch.sender_sai)
          problems.push_back(dir + " egress SC mismatch");
        else if (sender.tables().sa.at(eg->second.sai).sak != ch.sak)
          problems.push_back(dir + " egress SAK mismatch");
        auto ig = receiver.tables().ig_sc.find({ch.sci, ch.an});
        if (ig == receiver.tables().ig_sc.end() || ig->second.sai != ch.receiver_sai)
          problems.push_back(dir + " ingress SC mismatch");
        else if (receiver.tables().sa.at(ig->second.sai).sak != ch.sak)
          problems.push_back(dir + " ingress SAK mismatch");
      }
      r.pass = problems.empty();
      r.detail = r.pass ? "both channels active (an=" + std::to_string(sc.channels[0].an) + "," +
                              std::to_string(sc.channels[1].an) + ")"
                        : join(problems, "; ");
    }
  } else if (e.name == "all_interswitch_frames_protected") {
    const std::string which = e.args.empty() ? "*" : e.args[0];
    SimTime from{0};
    if (e.args.size() == 2) {
      try {
        from = parse_duration(e.args[1]);
      } catch (const std::invalid_argument& ex) {
        r.detail = ex.what();
        return r;
      }
    }
    std::set<std::string> protected_links;
    std::vector<std::string> unconfirmed;
    for (const auto& l : sim_.links()) {
      if (l.host_link || (which != "*" && l.id != which)) continue;
      if (confirmed(sim_, key_of(l)))
        protected_links.insert(l.id);
      else if (which != "*")
        unconfirmed.push_back(l.id);
    }
    std::size_t macsec = 0, cleartext = 0, host_macsec = 0, host_frames = 0;
    for (const auto& rec : sim_.trace()) {
      if (rec.injected || rec.time < from) continue;
      if (protected_links.count(rec.link_id)) {
        macsec += rec.cls == FrameClass::Macsec;
        cleartext += rec.cls == FrameClass::Ethernet;
      } else if (which == "*" && sim_.link(rec.link_id).host_link) {
        ++host_frames;
        host_macsec += rec.cls == FrameClass::Macsec;
      }
    }
    r.pass = unconfirmed.empty() && cleartext == 0 && host_macsec == 0;
    std::ostringstream d;
    d << protected_links.size() << " links, " << macsec << " protected, " << cleartext << " cleartext";
    if (which == "*") d << "; host links " << host_frames << " frames, " << host_macsec << " protected";
    if (!unconfirmed.empty()) d << "; not confirmed: " << join(unconfirmed, ",");
    r.detail = d.str();
  } else if (e.name == "counters_zero") {
    std::vector<std::string> switches;
    if (e.args[0] == "*")
      switches = sim_.switch_ids();
    else
      switches.push_back(e.args[0]);
    std::vector<std::string> nonzero;
    for (const auto& sw : switches) {
      const auto counters = merged_counters(sim_, sw);
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        std::string pattern = e.args[i];
        const bool prefix = !pattern.empty() && pattern.back() == '*';
        if (prefix) pattern.pop_back();
        for (const auto& [name, value] : counters) {
          const bool match = prefix ? name.starts_with(pattern) : name == pattern;
          if (match && value != 0) nonzero.push_back(sw + "." + name + "=" + std::to_string(value));
        }
      }
    }
    r.pass = nonzero.empty();
    r.detail = r.pass ? "all zero" : join(nonzero, ",");
  } else if (e.name == "payload_delivered") {
    const HostSpec& host = sim_.host(e.args[0]);
    const Bytes want = parse_payload(e.args[1]);
    std::optional<MacAddress> src;
    if (e.args.size() == 3) src = sim_.host(e.args[2]).mac;
    std::size_t copies = 0;
    for (const auto& d : sim_.host_received(host.name)) {
      Frame f;
      try {
        f = parse_frame(d.bytes);
      } catch (const ParseError&) {
        continue;
      }
      const auto* eth = std::get_if<EthernetFrame>(&f);
      if (!eth || eth->payload != want) continue;
      if (eth->dst != host.mac && !eth->dst.is_multicast()) continue;
      if (src && eth->src != *src) continue;
      ++copies;
    }
    r.pass = copies >= 1;
    r.detail = std::to_string(copies) + " matching frame(s) of " + std::to_string(want.size()) + " bytes";
  } else if (e.name == "sak_rotated") {
    const SimLink& link = sim_.link(e.args[0]);
    unsigned min_gen = 1;
    if (e.args.size() == 2) {
      const auto& n = e.args[1];
      if (n.empty() || n.size() > 9 || !std::all_of(n.begin(), n.end(), ::isdigit)) {
        r.detail = "bad generation count '" + n + "'";
        return r;
      }
      min_gen = static_cast<unsigned>(std::stoul(n));
    }
    auto rec = link.host_link ? central.sc_records().end() : central.sc_records().find(key_of(link));
    if (rec == central.sc_records().end()) {
      r.detail = "no SC record";
      return r;
    }
    const auto& ch = rec->second.channels;
    r.pass = ch[0].generation >= min_gen && ch[1].generation >= min_gen;
    r.detail = "generations " + std::to_string(ch[0].generation) + "," + std::to_string(ch[1].generation) +
               " an " + std::to_string(ch[0].an) + "," + std::to_string(ch[1].an);
  }
  return r;
}

}  // namespace secfabric
