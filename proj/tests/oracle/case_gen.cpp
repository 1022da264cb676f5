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

#include "case_gen.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace oracle {

using namespace secfabric;
using Buf = std::vector<std::uint8_t>;

namespace {

std::uint32_t pick(Drbg& rng, std::uint32_t n) { return rng.next_u32() % n; }
bool chance(Drbg& rng, double p) { return rng.uniform() < p; }

Buf random_bytes(Drbg& rng, std::size_t n) {
  Buf b(n);
  rng.fill(b);
  return b;
}

MacAddress host_mac(int i) { return MacAddress{{0x02, 0x00, 0x00, 0x00, 0x01, static_cast<std::uint8_t>(i)}}; }

Sci peer_sci(int i) { return Sci::make(MacAddress{{0x02, 0, 0, 0, 0x09, static_cast<std::uint8_t>(i)}}, 1 + i); }

MacAddress pick_mac(Drbg& rng) {
  switch (pick(rng, 10)) {
    case 0: return MacAddress::broadcast();
    case 1: return kLldpMulticast;
    default: return host_mac(static_cast<int>(pick(rng, 6)));
  }
}

Buf ethernet(Drbg& rng, std::size_t max_payload, std::optional<MacAddress> src_hint = std::nullopt) {
  static const std::uint16_t kTypes[] = {0x0800, 0x86dd, 0x0806, 0x1234};
  Buf f;
  const MacAddress dst = pick_mac(rng);
  const MacAddress src = src_hint && chance(rng, 0.8) ? *src_hint : host_mac(static_cast<int>(pick(rng, 6)));
  f.insert(f.end(), dst.octets.begin(), dst.octets.end());
  f.insert(f.end(), src.octets.begin(), src.octets.end());
  const std::uint16_t t = kTypes[pick(rng, 4)];
  f.push_back(static_cast<std::uint8_t>(t >> 8));
  f.push_back(static_cast<std::uint8_t>(t));
  const Buf p = random_bytes(rng, pick(rng, static_cast<std::uint32_t>(max_payload + 1)));
  f.insert(f.end(), p.begin(), p.end());
  return f;
}

std::uint64_t random_next_pn(Drbg& rng) {
  switch (pick(rng, 5)) {
    case 0: return 1;
    case 1: return 2 + pick(rng, 20);
    case 2: return 0xffffffffULL - pick(rng, 3);
    case 3: return 0x100000000ULL;  // exhausted
    default: return 1 + pick(rng, 100000);
  }
}

}  // namespace

PipelineCase random_case(Drbg& rng) {
  PipelineCase c;
  c.switch_mac = MacAddress::parse("02:00:00:00:00:01");
  c.port_count = static_cast<PortId>(2 + pick(rng, 5));
  c.up.assign(c.port_count + 1, true);
  for (PortId p = 1; p <= c.port_count; ++p) c.up[p] = chance(rng, 0.85);
  c.ingress = static_cast<PortId>(1 + pick(rng, c.port_count));
  c.up[c.ingress] = true;
  c.pn_ceiling = chance(rng, 0.2) ? 30 + pick(rng, 40) : 0xffffffffULL;

  const int key_pool = 3;
  std::vector<Sak> keys(key_pool);
  for (auto& k : keys) rng.fill(k.key);

  const int sa_count = 1 + static_cast<int>(pick(rng, 6));
  for (int i = 1; i <= sa_count; ++i) {
    SaEntry sa;
    sa.sai = static_cast<Sai>(i);
    sa.sak = keys[pick(rng, key_pool)];
    sa.an = static_cast<std::uint8_t>(pick(rng, 4));
    sa.next_pn = random_next_pn(rng);
    sa.encrypt = chance(rng, 0.7);
    c.tables.sa[sa.sai] = sa;
  }
  auto random_sai = [&] { return static_cast<Sai>(1 + pick(rng, static_cast<std::uint32_t>(sa_count))); };

  for (int i = 0; i < 6; ++i) {
    if (!chance(rng, 0.6)) continue;
    const MacAddress m = host_mac(i);
    c.tables.mac[m] = MacTableEntry{m, static_cast<PortId>(1 + pick(rng, c.port_count)), chance(rng, 0.5)};
  }
  if (chance(rng, 0.1)) c.tables.mac[MacAddress::broadcast()] = {MacAddress::broadcast(), 1, false};
  std::optional<MacAddress> local_src;
  if (chance(rng, 0.7)) {
    local_src = host_mac(static_cast<int>(pick(rng, 6)));
    c.tables.mac[*local_src] = MacTableEntry{*local_src, c.ingress, chance(rng, 0.3)};
  }
  for (PortId p = 1; p <= c.port_count; ++p)
    if (chance(rng, p == c.ingress ? 0.15 : 0.5)) c.tables.eg_sc[p] = EgScEntry{p, Sci::make(c.switch_mac, p), random_sai()};
  const int ig_count = static_cast<int>(pick(rng, 5));
  for (int i = 0; i < ig_count; ++i) {
    const Sci sci = peer_sci(static_cast<int>(pick(rng, 3)));
    const auto an = static_cast<std::uint8_t>(pick(rng, 4));
    c.tables.ig_sc[{sci, an}] = IgScEntry{sci, an, random_sai()};
  }

  const auto roll = pick(rng, 100);
  if (roll < 30) {
    c.kind = "ethernet";
    c.frame = ethernet(rng, 80, local_src);
  } else if (roll < 62 && !c.tables.ig_sc.empty()) {
    c.kind = "macsec";
    auto it = c.tables.ig_sc.begin();
    std::advance(it, pick(rng, static_cast<std::uint32_t>(c.tables.ig_sc.size())));
    const IgScEntry& ig = it->second;
    const SaEntry& sa = c.tables.sa.at(ig.sai);
    std::int64_t pn = static_cast<std::int64_t>(std::min<std::uint64_t>(sa.next_pn, 0xffffffffULL)) +
                      static_cast<std::int64_t>(pick(rng, 6)) - 2;
    pn = std::clamp<std::int64_t>(pn, 1, 0xffffffffLL);
    Buf plain = ethernet(rng, 70, local_src);
    if (chance(rng, 0.03)) plain.resize(12 + pick(rng, 2));  // authentic but no EtherType
    const Sak key = chance(rng, 0.1) ? keys[pick(rng, key_pool)] : sa.sak;
    const bool encrypt = chance(rng, 0.9) ? sa.encrypt : !sa.encrypt;
    c.frame = reference_protect(key.key, ig.sci.octets, static_cast<std::uint32_t>(pn), ig.an, encrypt, plain);
    if (chance(rng, 0.2)) {
      c.kind = "macsec_flipped";
      const auto bit = pick(rng, static_cast<std::uint32_t>(c.frame.size() * 8));
      c.frame[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  } else if (roll < 70) {
    c.kind = "macsec_unknown";
    Buf plain = ethernet(rng, 40);
    Sak k;
    rng.fill(k.key);
    c.frame = reference_protect(k.key, peer_sci(5).octets, 1 + pick(rng, 10), static_cast<std::uint8_t>(pick(rng, 4)),
                                true, plain);
  } else if (roll < 80) {
    c.kind = "lldp";
    c.frame = random_bytes(rng, 30 + pick(rng, 60));
    c.frame[12] = 0x88;
    c.frame[13] = 0xcc;
  } else if (roll < 90) {
    c.kind = "short";
    c.frame = random_bytes(rng, pick(rng, 50));
    if (c.frame.size() >= 14 && chance(rng, 0.7)) {
      c.frame[12] = 0x88;
      c.frame[13] = chance(rng, 0.5) ? 0xe5 : 0xcc;
    }
  } else {
    c.kind = "random";
    c.frame = random_bytes(rng, pick(rng, 121));
  }
  return c;
}

std::unique_ptr<Switch> build_switch(const PipelineCase& c) {
  auto sw = std::make_unique<Switch>("dut", c.switch_mac, c.port_count, c.pn_ceiling);
  std::vector<TableOp> ops;
  for (const auto& [_, e] : c.tables.sa) ops.push_back(table_op::WriteSa{e});
  for (const auto& [_, e] : c.tables.mac) ops.push_back(table_op::WriteMac{e});
  for (const auto& [_, e] : c.tables.eg_sc) ops.push_back(table_op::WriteEgSc{e});
  for (const auto& [_, e] : c.tables.ig_sc) ops.push_back(table_op::WriteIgSc{e});
  sw->apply(ops);
  for (PortId p = 1; p <= c.port_count; ++p) sw->set_port_state(p, c.up[p]);
  return sw;
}

RefSwitch build_reference(const PipelineCase& c) { return RefSwitch{c.tables, c.up, c.pn_ceiling}; }

std::string describe(const IngressOutcome& o) {
  std::ostringstream out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, outcome::Forward>) {
          out << "forward port " << v.out.port << " " << to_hex(v.out.bytes);
        } else if constexpr (std::is_same_v<T, outcome::Flood>) {
          out << "flood";
          for (const auto& e : v.out) out << " [" << e.port << " " << to_hex(e.bytes) << "]";
        } else if constexpr (std::is_same_v<T, outcome::PacketIn>) {
          out << "packet_in " << (v.reason == PuntReason::LldpPunt ? "lldp" : "mac_miss") << " port "
              << v.ingress_port << " " << to_hex(v.frame_bytes);
        } else {
          out << "drop " << to_string(v.reason);
        }
      },
      o);
  return out.str();
}

std::string compare_case(const PipelineCase& c) {
  auto sw = build_switch(c);
  RefSwitch ref = build_reference(c);
  const IngressOutcome got = sw->process_ingress(c.ingress, c.frame);
  const IngressOutcome want = reference_ingress(ref, c.ingress, c.frame);
  if (!(got == want)) return c.kind + ": implementation " + describe(got) + " | reference " + describe(want);
  for (const auto& [sai, e] : ref.tables.sa) {
    if (sw->tables().sa.at(sai).next_pn != e.next_pn)
      return c.kind + ": SA " + std::to_string(sai) + " next_pn " + std::to_string(sw->tables().sa.at(sai).next_pn) +
             " vs " + std::to_string(e.next_pn);
  }
  return {};
}

}  // namespace oracle
