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

#include <gtest/gtest.h>

#include <set>

#include "secfabric/central_controller.hpp"

using namespace secfabric;

namespace {

struct Sent {
  SimTime at;
  std::string chassis;
  ToLocal message;
};

// Downlink that acknowledges every request after 1 ms unless the target
// switch is partitioned or configured to nack.
struct Harness {
  EventQueue events;
  Drbg rng{5};
  std::vector<Sent> sent;
  std::set<std::string> partitioned;
  std::set<std::string> nacking;
  CentralController cc;

  explicit Harness(CentralControllerConfig cfg = {})
      : cc(events, rng, [this](const std::string& c, ToLocal m) { on_send(c, std::move(m)); }, cfg) {}

  void on_send(const std::string& chassis, ToLocal m) {
    sent.push_back({events.now(), chassis, m});
    if (partitioned.count(chassis)) return;
    RequestId id = 0;
    if (auto* k = std::get_if<msg::KeyInstall>(&m)) id = k->request;
    if (auto* s = std::get_if<msg::ScConfig>(&m)) id = s->request;
    if (id == 0) return;
    const bool nack = nacking.count(chassis) != 0;
    events.schedule(millis(1), [this, chassis, id, nack] {
      if (nack)
        cc.on_message(msg::Nack{chassis, id, "no"});
      else
        cc.on_message(msg::Ack{chassis, id});
    });
  }

  void reg(const std::string& name, std::uint8_t mac_low) {
    cc.on_message(msg::Register{name, MacAddress{{2, 0, 0, 0, 0, mac_low}}, {1, 2, 3}});
  }

  void report(const std::string& from, PortId port, const std::string& to, PortId to_port) {
    cc.on_message(msg::LinkDelta{from, {msg::LinkAdd{port, Endpoint{to, to_port}}}, {}});
  }
  void withdraw(const std::string& from, PortId port) { cc.on_message(msg::LinkDelta{from, {}, {port}}); }

  std::vector<ScItem> items_to(const std::string& chassis, std::size_t from_index = 0) const {
    std::vector<ScItem> out;
    for (std::size_t i = from_index; i < sent.size(); ++i) {
      if (sent[i].chassis != chassis) continue;
      if (auto* s = std::get_if<msg::ScConfig>(&sent[i].message))
        out.insert(out.end(), s->items.begin(), s->items.end());
    }
    return out;
  }
};

const LinkKey kAB = make_link_key({"a", 1}, {"b", 2});

}  // namespace

TEST(CentralController, RegistrationInstallsKeyThenStartsDiscovery) {
  Harness h;
  h.reg("a", 1);
  ASSERT_EQ(h.sent.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<msg::KeyInstall>(h.sent[0].message));
  EXPECT_EQ(std::get<msg::KeyInstall>(h.sent[0].message).key, h.cc.lldp_key());
  h.events.quiesce();
  ASSERT_EQ(h.sent.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<msg::StartDiscovery>(h.sent[1].message));
}

TEST(CentralController, OneWayReportIsNotConfirmed) {
  Harness h;
  h.reg("a", 1);
  h.reg("b", 2);
  h.events.quiesce();
  h.report("a", 1, "b", 2);
  ASSERT_EQ(h.cc.link_map().size(), 1u);
  EXPECT_EQ(h.cc.link_map().at(kAB).state, LinkState::ReportedOneWay);
  EXPECT_TRUE(h.cc.sc_records().empty());

  h.report("b", 2, "a", 1);
  EXPECT_EQ(h.cc.link_map().at(kAB).state, LinkState::Confirmed);
  EXPECT_EQ(h.cc.sc_records().size(), 1u);
}

TEST(CentralController, ConflictingReportsNeverConfirm) {
  Harness h;
  for (auto n : {"a", "b", "c"}) h.reg(n, n[0]);
  h.events.quiesce();
  h.report("a", 1, "b", 2);
  h.report("b", 2, "c", 3);
  EXPECT_TRUE(h.cc.confirmed_links().empty());
  // The far endpoint's own report wins over a one-way claim about it.
  EXPECT_EQ(h.cc.link_map().count(kAB), 0u);
}

TEST(CentralController, IngressIsInstalledBeforeEgress) {
  Harness h;
  h.reg("a", 1);
  h.reg("b", 2);
  h.events.quiesce();
  const std::size_t mark = h.sent.size();
  h.report("a", 1, "b", 2);
  h.report("b", 2, "a", 1);
  h.events.quiesce();

  const ScRecord& rec = h.cc.sc_records().at(kAB);
  for (int dir = 0; dir < 2; ++dir) {
    const ChannelRecord& ch = rec.channels[dir];
    EXPECT_EQ(ch.phase, ChannelRecord::Phase::Active);
    SimTime ingress_at{-1}, egress_at{-1};
    for (std::size_t i = mark; i < h.sent.size(); ++i) {
      const auto* s = std::get_if<msg::ScConfig>(&h.sent[i].message);
      if (!s) continue;
      for (const auto& item : s->items) {
        if (auto* in = std::get_if<sc_item::InstallIngressSa>(&item); in && in->peer_sci == ch.sci) {
          EXPECT_EQ(h.sent[i].chassis, ch.receiver.chassis_id);
          EXPECT_EQ(in->sak, ch.sak);
          ingress_at = h.sent[i].at;
        }
        if (auto* eg = std::get_if<sc_item::ActivateEgressSa>(&item); eg && eg->sci == ch.sci) {
          EXPECT_EQ(h.sent[i].chassis, ch.sender.chassis_id);
          EXPECT_EQ(eg->port, ch.sender.port);
          egress_at = h.sent[i].at;
        }
      }
    }
    ASSERT_GE(ingress_at.count(), 0);
    EXPECT_GT(egress_at, ingress_at);
  }
  EXPECT_NE(rec.channels[0].sak, rec.channels[1].sak);
  EXPECT_EQ(rec.channels[0].sci, Sci::make(MacAddress{{2, 0, 0, 0, 0, 1}}, 1));
  EXPECT_EQ(h.cc.counter("channels_activated"), 2u);
}

TEST(CentralController, RekeyCyclesAnAndRetiresOldSa) {
  CentralControllerConfig cfg;
  cfg.rekey_interval = seconds(10);
  cfg.grace = seconds(2);
  Harness h(cfg);
  h.reg("a", 1);
  h.reg("b", 2);
  h.events.quiesce();
  h.report("a", 1, "b", 2);
  h.report("b", 2, "a", 1);
  h.events.quiesce();

  std::vector<int> ans{h.cc.sc_records().at(kAB).channels[0].an};
  std::set<Sak> saks{h.cc.sc_records().at(kAB).channels[0].sak};
  for (int i = 1; i <= 5; ++i) {
    h.events.run_until(seconds(10.5 * i + 0.1));
    const ChannelRecord& ch = h.cc.sc_records().at(kAB).channels[0];
    ans.push_back(ch.an);
    saks.insert(ch.sak);
  }
  EXPECT_EQ(ans, (std::vector<int>{0, 1, 2, 3, 0, 1}));
  EXPECT_EQ(saks.size(), 6u);
  EXPECT_EQ(h.cc.sc_records().at(kAB).channels[0].generation, 5u);

  int removals = 0;
  for (const auto& item : h.items_to("b"))
    if (std::holds_alternative<sc_item::RemoveIngressSa>(item)) ++removals;
  EXPECT_GE(removals, 4);
}

TEST(CentralController, RekeyOnPnExhaustionRequest) {
  Harness h;
  h.reg("a", 1);
  h.reg("b", 2);
  h.events.quiesce();
  h.report("a", 1, "b", 2);
  h.report("b", 2, "a", 1);
  h.events.quiesce();
  const Sci sci = h.cc.sc_records().at(kAB).channels[0].sci;
  h.cc.on_message(msg::RekeyNeeded{"a", sci});
  h.events.quiesce();
  EXPECT_EQ(h.cc.sc_records().at(kAB).channels[0].an, 1);
  EXPECT_EQ(h.cc.sc_records().at(kAB).channels[1].an, 0);
}

TEST(CentralController, WithdrawalTearsDownBothDirections) {
  Harness h;
  h.reg("a", 1);
  h.reg("b", 2);
  h.events.quiesce();
  h.report("a", 1, "b", 2);
  h.report("b", 2, "a", 1);
  h.events.quiesce();
  const std::size_t mark = h.sent.size();
  h.withdraw("a", 1);
  h.events.quiesce();
  EXPECT_TRUE(h.cc.sc_records().empty());
  for (const auto* who : {"a", "b"}) {
    auto items = h.items_to(who, mark);
    bool eg = false, ig = false;
    for (const auto& i : items) {
      eg |= std::holds_alternative<sc_item::RevokeEgress>(i);
      ig |= std::holds_alternative<sc_item::RevokeIngress>(i);
    }
    EXPECT_TRUE(eg && ig) << who;
  }
  EXPECT_EQ(h.cc.link_map().at(kAB).state, LinkState::ReportedOneWay);
}

TEST(CentralController, RetryThenQuarantineOnPartition) {
  Harness h;
  h.reg("a", 1);
  h.reg("b", 2);
  h.events.quiesce();
  h.partitioned.insert("b");
  h.report("a", 1, "b", 2);
  h.report("b", 2, "a", 1);
  h.events.quiesce();
  const ScRecord& rec = h.cc.sc_records().at(kAB);
  EXPECT_TRUE(rec.quarantined);
  EXPECT_GE(h.cc.counter("retries"), 1u);
  EXPECT_GE(h.cc.counter("request_timeouts"), 2u);
  ASSERT_FALSE(h.cc.alerts().empty());
  EXPECT_NE(h.cc.alerts().back().find("quarantined"), std::string::npos);
  // a -> b never got its egress activated.
  bool egress_on_a = false;
  for (const auto& i : h.items_to("a"))
    if (auto* e = std::get_if<sc_item::ActivateEgressSa>(&i); e && e->sci == rec.channels[0].sci) egress_on_a = true;
  EXPECT_FALSE(egress_on_a);
}

TEST(CentralController, NackAlsoQuarantines) {
  Harness h;
  h.reg("a", 1);
  h.reg("b", 2);
  h.events.quiesce();
  h.nacking.insert("a");
  h.report("a", 1, "b", 2);
  h.report("b", 2, "a", 1);
  h.events.quiesce();
  EXPECT_TRUE(h.cc.sc_records().at(kAB).quarantined);
  EXPECT_GE(h.cc.counter("nacks"), 2u);
}

TEST(CentralController, LldpKeyRotation) {
  CentralControllerConfig cfg;
  cfg.lldp_key_rotation = seconds(100);
  Harness h(cfg);
  h.cc.start();
  h.reg("a", 1);
  h.reg("b", 2);
  h.events.quiesce();
  const LldpKey first = h.cc.lldp_key();
  h.events.run_until(seconds(101));
  EXPECT_EQ(h.cc.lldp_key().key_id, first.key_id + 1);
  EXPECT_NE(h.cc.lldp_key().key, first.key);
  int installs = 0;
  for (const auto& s : h.sent)
    if (auto* k = std::get_if<msg::KeyInstall>(&s.message); k && k->key == h.cc.lldp_key()) ++installs;
  EXPECT_EQ(installs, 2);
}

TEST(CentralController, DeltaFromUnknownSwitchIsIgnored) {
  Harness h;
  h.report("ghost", 1, "b", 2);
  EXPECT_TRUE(h.cc.link_map().empty());
  EXPECT_EQ(h.cc.counter("unknown_switch_deltas"), 1u);
}

TEST(CentralController, SaksAreUniqueAcrossChurn) {
  Harness h;
  h.reg("a", 1);
  h.reg("b", 2);
  h.events.quiesce();
  for (int i = 0; i < 5; ++i) {
    h.report("a", 1, "b", 2);
    h.report("b", 2, "a", 1);
    h.events.quiesce();
    h.withdraw("a", 1);
    h.withdraw("b", 2);
    h.events.quiesce();
  }
  const auto& log = h.cc.sak_log();
  EXPECT_EQ(log.size(), 10u);
  EXPECT_EQ(std::set<Sak>(log.begin(), log.end()).size(), log.size());
}

TEST(CentralController, FullDeltaReplacesEarlierReports) {
  Harness h;
  for (auto n : {"a", "b", "c"}) h.reg(n, n[0]);
  h.events.quiesce();
  h.report("a", 1, "b", 2);
  h.report("b", 2, "a", 1);
  h.report("c", 3, "a", 3);
  h.events.quiesce();
  ASSERT_EQ(h.cc.confirmed_links().size(), 1u);
  // a now only sees c on port 3.
  h.cc.on_message(msg::LinkDelta{"a", {msg::LinkAdd{3, Endpoint{"c", 3}}}, {}, true});
  h.events.quiesce();
  ASSERT_EQ(h.cc.confirmed_links().size(), 1u);
  EXPECT_EQ(h.cc.confirmed_links()[0].a, (Endpoint{"a", 3}));
  EXPECT_EQ(h.cc.sc_records().count(kAB), 0u);
}
