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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "secfabric/inspect.hpp"
#include "secfabric/scenario.hpp"
#include "support/fabrics.hpp"

using namespace secfabric;

namespace {

std::vector<AssertionResult> run(const TopologySpec& spec, const std::string& script) {
  Scenario sc(spec);
  sc.run(parse_script(script));
  return sc.results();
}

AssertionResult run_one(const TopologySpec& spec, const std::string& script) {
  auto r = run(spec, script);
  EXPECT_FALSE(r.empty());
  return r.empty() ? AssertionResult{} : r.back();
}

int error_line(const std::string& script) {
  try {
    parse_script(script);
  } catch (const ScriptError& e) {
    return e.line();
  }
  return -1;
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ScriptParse, Directives) {
  const Script s = parse_script(R"(# header
run_until 1.5s
run_for 250ms
quiesce
link down a-b
inject a-b a hex 0102
inject a-b a replay 3 lldp
send h1 h2 0x0800 text:hi
expect counters_zero * drop.*
expect sak_rotated(a-b, 2)
)");
  ASSERT_EQ(s.size(), 9u);
  EXPECT_EQ(s[0].line, 2);
  EXPECT_EQ(std::get<directive::RunUntil>(s[0].directive).time, millis(1500));
  EXPECT_EQ(std::get<directive::RunFor>(s[1].directive).duration, millis(250));
  EXPECT_FALSE(std::get<directive::Link>(s[3].directive).up);
  EXPECT_EQ(std::get<directive::InjectHex>(s[4].directive).bytes, (Bytes{1, 2}));
  const auto& rep = std::get<directive::InjectReplay>(s[5].directive);
  EXPECT_EQ(rep.index, 3u);
  EXPECT_EQ(rep.cls, FrameClass::SecureLldp);
  EXPECT_EQ(std::get<directive::Send>(s[6].directive).ether_type, 0x0800);
  EXPECT_EQ(std::get<directive::Expect>(s[7].directive).args, (std::vector<std::string>{"*", "drop.*"}));
  const auto& call = std::get<directive::Expect>(s[8].directive);
  EXPECT_EQ(call.name, "sak_rotated");
  EXPECT_EQ(call.args, (std::vector<std::string>{"a-b", "2"}));
}

TEST(ScriptParse, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("quiesce\nfly away\n"), 2);
  EXPECT_EQ(error_line("\n\nexpect made_up_thing\n"), 3);
  EXPECT_EQ(error_line("expect no_sc_for\n"), 1);
  EXPECT_EQ(error_line("quiesce\nexpect sak_rotated(a-b\n"), 2);
  EXPECT_EQ(error_line("run_until soon\n"), 1);
  EXPECT_EQ(error_line("link sideways a-b\n"), 1);
  EXPECT_EQ(error_line("inject a-b a hex 01f\n"), 1);
  EXPECT_EQ(error_line("inject a-b a replay 0 carrier-pigeon\n"), 1);
  EXPECT_EQ(error_line("send h1 h2 0x10000 text:x\n"), 1);
  EXPECT_EQ(error_line("send h1 h2 0x0800 base64:x\n"), 1);
  EXPECT_EQ(error_line("quiesce now\n"), 1);
}

TEST(ScriptParse, Payloads) {
  EXPECT_EQ(parse_payload("hex:00ff"), (Bytes{0, 0xff}));
  EXPECT_EQ(parse_payload("text:ab"), (Bytes{'a', 'b'}));
  EXPECT_EQ(parse_payload("fill:3:7e"), (Bytes{0x7e, 0x7e, 0x7e}));
  EXPECT_EQ(parse_payload("random:16:5").size(), 16u);
  EXPECT_EQ(parse_payload("random:16:5"), parse_payload("random:16:5"));
  EXPECT_NE(parse_payload("random:16:5"), parse_payload("random:16:6"));
  EXPECT_THROW(parse_payload("fill:9001:00"), std::invalid_argument);
  EXPECT_THROW(parse_payload("nope"), std::invalid_argument);
}

TEST(Scenario, UnknownEntitiesAreRejectedBeforeRunning) {
  Scenario sc(fabrics::chain(2));
  EXPECT_THROW(sc.run(parse_script("quiesce\nlink down s9-s10\n")), ScriptError);
  // Nothing ran.
  EXPECT_EQ(sc.sim().now(), SimTime{0});
  EXPECT_TRUE(sc.sim().central().link_map().empty());
  try {
    Scenario(fabrics::chain(2)).run(parse_script("quiesce\n\nsend ghost right 0x0800 text:x\n"));
    FAIL();
  } catch (const ScriptError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(Scenario(fabrics::chain(2)).run(parse_script("expect counters_zero s7 drop.*\n")), ScriptError);
  EXPECT_THROW(Scenario(fabrics::chain(2)).run(parse_script("inject s1-s2 right hex 00\n")), ScriptError);
}

TEST(Scenario, LinkMapAssertions) {
  const auto spec = fabrics::chain(3);
  EXPECT_FALSE(run_one(spec, "expect link_map_matches_spec\n").pass);
  EXPECT_TRUE(run_one(spec, "quiesce\nexpect link_map_matches_spec\n").pass);
  // Ground truth follows cable state.
  EXPECT_TRUE(run_one(spec, "quiesce\nlink down s1-s2\nquiesce\nexpect link_map_matches_spec\n").pass);
  // Without the quiesce the controller has not heard about the cut yet.
  const auto r = run_one(spec, "quiesce\nlink down s1-s2\nexpect link_map_matches_spec\n");
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.detail.find("extra"), std::string::npos);
}

TEST(Scenario, ScAssertions) {
  const auto spec = fabrics::chain(3);
  EXPECT_TRUE(run_one(spec, "quiesce\nexpect sc_exists_for s2-s3\n").pass);
  EXPECT_FALSE(run_one(spec, "quiesce\nexpect no_sc_for s2-s3\n").pass);
  EXPECT_TRUE(run_one(spec, "quiesce\nlink down s2-s3\nquiesce\nexpect no_sc_for s2-s3\n").pass);
  EXPECT_FALSE(run_one(spec, "quiesce\nlink down s2-s3\nquiesce\nexpect sc_exists_for s2-s3\n").pass);
  EXPECT_TRUE(run_one(spec, "quiesce\nexpect no_sc_for s1-left\n").pass);
}

TEST(Scenario, ProtectionAndPayload) {
  const auto spec = fabrics::chain(4);
  const auto res = run(spec, R"(quiesce
send left right 0x0800 text:over-the-top
quiesce
expect payload_delivered right text:over-the-top left
expect payload_delivered right text:something-else
expect payload_delivered left text:over-the-top
expect all_interswitch_frames_protected *
expect all_interswitch_frames_protected s2-s3 0s
)");
  ASSERT_EQ(res.size(), 5u);
  EXPECT_TRUE(res[0].pass) << res[0].detail;
  EXPECT_FALSE(res[1].pass);
  EXPECT_FALSE(res[2].pass);
  EXPECT_TRUE(res[3].pass) << res[3].detail;
  EXPECT_TRUE(res[4].pass) << res[4].detail;

  // Traffic sent before the channels exist crosses in clear.
  const auto early = run_one(spec, "send left right 0x0800 text:early\nquiesce\nexpect all_interswitch_frames_protected *\n");
  EXPECT_FALSE(early.pass);
}

TEST(Scenario, CountersZero) {
  const auto spec = fabrics::chain(2);
  EXPECT_TRUE(run_one(spec, "quiesce\nexpect counters_zero * drop.* ldf.replayed\n").pass);
  const auto r = run_one(spec, "quiesce\ninject s1-s2 s1 replay 0 lldp\nquiesce\nexpect counters_zero s2 ldf.replayed\n");
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.detail, "s2.ldf.replayed=1");
}

TEST(Scenario, ReplayLeavesLinkMapUnchanged) {
  const auto res = run(fabrics::chain(3), R"(quiesce
inject s2-s3 s3 replay 0 lldp
inject s2-s3 s3 replay 0
quiesce
expect link_map_unchanged
expect link_map_unchanged
)");
  ASSERT_EQ(res.size(), 2u);
  EXPECT_TRUE(res[0].pass) << res[0].detail;
  EXPECT_EQ(res[1].detail, "no injections since last check");
  EXPECT_THROW(Scenario(fabrics::chain(2)).run(parse_script("inject s1-s2 s1 replay 500 lldp\n")), ScriptError);
}

TEST(Scenario, SakRotated) {
  const auto spec = fabrics::chain(2);
  EXPECT_FALSE(run_one(spec, "quiesce\nexpect sak_rotated s1-s2\n").pass);
  const auto r = run_one(spec, "run_until 130s\nquiesce\nexpect sak_rotated s1-s2 2\n");
  EXPECT_TRUE(r.pass) << r.detail;
  EXPECT_FALSE(run_one(spec, "quiesce\nexpect sak_rotated s1-s2 x\n").pass);
}

TEST(Scenario, ReportFormat) {
  Scenario sc(fabrics::chain(2));
  sc.run(parse_script("quiesce\nexpect link_map_matches_spec\nexpect no_sc_for s1-s2\n"));
  const std::string rep = sc.report();
  EXPECT_EQ(rep.rfind("ASSERT link_map_matches_spec PASS 1 confirmed, 1 expected\n", 0), 0u) << rep;
  EXPECT_NE(rep.find("ASSERT no_sc_for FAIL [s1-s2] "), std::string::npos);
  EXPECT_NE(rep.find("SUMMARY 1/2 passed\n"), std::string::npos);
  EXPECT_FALSE(sc.all_passed());
  EXPECT_EQ(sc.results()[0].args.size(), 0u);
}

TEST(Inspect, LinkDumpListsCablesInCanonicalOrder) {
  const TopologySpec spec = fabrics::tier3();
  Simulation sim(spec);
  sim.quiesce();
  std::set<std::pair<std::string, std::string>> want;
  for (const auto& l : spec.links) {
    auto a = l.a, b = l.b;
    if (b < a) std::swap(a, b);
    want.insert({a.to_string(), b.to_string()});
  }
  std::string expected;
  for (const auto& [a, b] : want) expected += "CONFIRMED " + a + " <-> " + b + "\n";
  EXPECT_EQ(inspect(sim, "links"), expected);
}

TEST(Inspect, KeysHiddenUnlessAsked) {
  Simulation sim(fabrics::chain(2));
  sim.quiesce();
  const auto& ch = sim.central().sc_records().begin()->second.channels[0];
  const std::string full = to_hex(ch.sak.key);
  EXPECT_EQ(inspect(sim, "scs").find(full), std::string::npos);
  EXPECT_NE(inspect(sim, "scs").find(fingerprint(ch.sak.key)), std::string::npos);
  EXPECT_NE(inspect(sim, "scs", DumpOptions{true}).find(full), std::string::npos);
  EXPECT_EQ(inspect(sim, "tables(s1)").find(full), std::string::npos);
  EXPECT_NE(inspect(sim, "tables(s1)", DumpOptions{true}).find(full), std::string::npos);
}

TEST(Inspect, Queries) {
  Simulation sim(fabrics::chain(2));
  sim.quiesce();
  EXPECT_NE(inspect(sim, "tables(s1)").find("EG_SC\n  port=3"), std::string::npos);
  EXPECT_NE(inspect(sim, "counters(s1)").find("ldf.sent"), std::string::npos);
  EXPECT_NE(inspect(sim, "counters(central)").find("channels_activated 2"), std::string::npos);
  const std::string all = inspect(sim, "counters");
  EXPECT_EQ(all.rfind("[central]\n", 0), 0u);
  EXPECT_LT(all.find("[s1]"), all.find("[s2]"));
  EXPECT_THROW(inspect(sim, "everything"), UnknownQuery);
  EXPECT_THROW(inspect(sim, "tables(s9)"), UnknownNode);
}

TEST(Scenario, ArtifactsAreDeterministic) {
  const auto spec = fabrics::tier3();
  const Script script = load_script(fabrics::scenario_path("tier3_basic.script"));
  const RunArtifacts a = run_scenario(spec, script, std::nullopt);
  const RunArtifacts b = run_scenario(spec, script, std::nullopt);
  EXPECT_TRUE(a.passed) << a.report;
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(a.counters, b.counters);
  EXPECT_EQ(a.state, b.state);
  EXPECT_EQ(a.trace, b.trace);
  const RunArtifacts c = run_scenario(spec, script, 99);
  EXPECT_NE(a.trace, c.trace);
}

TEST(Cli, RunWritesArtifactsAndExitCodes) {
  const std::string cli = SECFABRIC_CLI;
  const auto dir = std::filesystem::temp_directory_path() / "secfabric_cli_test";
  std::filesystem::remove_all(dir);
  const std::string spec = fabrics::scenario_path("tier3.yaml");
  const std::string ok = fabrics::scenario_path("tier3_basic.script");
  EXPECT_EQ(shell(cli + " run --spec " + spec + " --script " + ok + " --out " + dir.string() + " > /dev/null"), 0);
  for (const char* f : {"report.txt", "counters.txt", "state.txt", "trace.pcapng"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const auto cap = pcapng::read_file((dir / "trace.pcapng").string());
  EXPECT_FALSE(cap.packets.empty());
  EXPECT_NE(slurp(dir / "report.txt").find("SUMMARY"), std::string::npos);

  const auto failing = dir / "fail.script";
  std::ofstream(failing) << "expect link_map_matches_spec\n";
  EXPECT_EQ(shell(cli + " run --spec " + spec + " --script " + failing.string() + " --out " + dir.string() +
                  " > /dev/null"),
            1);
  const auto broken = dir / "broken.script";
  std::ofstream(broken) << "quiesce\nteleport h1\n";
  EXPECT_EQ(shell(cli + " run --spec " + spec + " --script " + broken.string() + " --out " + dir.string() +
                  " > /dev/null 2>&1"),
            2);
  EXPECT_EQ(shell(cli + " inspect --spec " + spec + " links > " + (dir / "links.txt").string()), 0);
  EXPECT_NE(slurp(dir / "links.txt").find("CONFIRMED access1:4 <-> agg1:1"), std::string::npos);
  EXPECT_EQ(shell(cli + " inspect --spec " + spec + " bogus > /dev/null 2>&1"), 2);
  std::filesystem::remove_all(dir);
}

TEST(Scenario, ShippedScriptsPass) {
  int scripts = 0;
  for (const auto& entry : std::filesystem::directory_iterator(fabrics::scenario_path(""))) {
    if (entry.path().extension() != ".script") continue;
    const std::string stem = entry.path().stem().string();
    const std::string topo = stem.substr(0, stem.find('_')) + ".yaml";
    const RunArtifacts a = run_scenario(load_topology(fabrics::scenario_path(topo)), load_script(entry.path()), std::nullopt);
    EXPECT_TRUE(a.passed) << entry.path() << "\n" << a.report;
    ++scripts;
  }
  EXPECT_GE(scripts, 3);
}
