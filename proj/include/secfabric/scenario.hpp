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

// Scenario scripts: a line-oriented list of directives executed against a
// Simulation, with a closed vocabulary of `expect` assertions.
//
//   run_until 95s
//   quiesce
//   link down agg1-core
//   inject agg1-core agg1 hex 0180c200000e...
//   inject agg1-core agg1 replay 3 lldp
//   send h1 h12 0x0800 text:hello
//   expect link_map_matches_spec
//   # comment

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "secfabric/central_controller.hpp"
#include "secfabric/inspect.hpp"
#include "secfabric/netsim.hpp"

namespace secfabric {

class ScriptError : public std::runtime_error {
 public:
  explicit ScriptError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace directive {
struct RunUntil {
  SimTime time{0};
};
struct RunFor {
  SimTime duration{0};
};
struct Quiesce {};
struct Link {
  std::string id;
  bool up = false;
};
struct InjectHex {
  std::string link;
  std::string from;
  Bytes bytes;
};
/// Re-sends the k-th (0-based) frame captured on `link` in the direction
/// leaving `from`, optionally counting only frames of one class.
struct InjectReplay {
  std::string link;
  std::string from;
  std::size_t index = 0;
  std::optional<FrameClass> cls;
};
struct Send {
  std::string host;
  std::string dst;  // host name or MAC address
  std::uint16_t ether_type = 0;
  std::string payload;  // payload spec, see parse_payload()
};
struct Expect {
  std::string name;
  std::vector<std::string> args;
};
}  // namespace directive

using Directive = std::variant<directive::RunUntil, directive::RunFor, directive::Quiesce, directive::Link,
                               directive::InjectHex, directive::InjectReplay, directive::Send, directive::Expect>;

struct ScriptLine {
  int line = 0;
  Directive directive;
};

using Script = std::vector<ScriptLine>;

Script parse_script(const std::string& text);
Script load_script(const std::string& path);

/// "hex:<hex>", "text:<chars>", "fill:<n>:<byte hex>", or "random:<n>:<seed>".
Bytes parse_payload(const std::string& spec);

/// The closed assertion vocabulary.
const std::vector<std::string>& assertion_names();

struct AssertionResult {
  std::string name;
  std::vector<std::string> args;
  bool pass = false;
  std::string detail;
  int line = 0;
};

/// "ASSERT <name> PASS|FAIL <detail>"
std::string format_result(const AssertionResult& r);

class Scenario {
 public:
  explicit Scenario(TopologySpec spec, std::optional<std::uint64_t> seed = std::nullopt);

  /// Runs every directive in order. ScriptError on a directive that names
  /// an unknown entity; assertion failures are recorded, not thrown.
  void run(const Script& script);
  void execute(const ScriptLine& line);
  AssertionResult evaluate(const directive::Expect& e);

  Simulation& sim() { return sim_; }
  const Simulation& sim() const { return sim_; }
  const std::vector<AssertionResult>& results() const { return results_; }
  bool all_passed() const;
  std::string report() const;

 private:
  void check_link(const std::string& id, int line) const;
  void check_node(const std::string& id, int line) const;
  void before_inject();

  Simulation sim_;
  std::vector<AssertionResult> results_;
  std::optional<GlobalLinkMap> baseline_;
};

/// Everything a run leaves behind, as in-memory bytes.
struct RunArtifacts {
  std::string report;
  std::string counters;
  std::string state;  // link map and SC records
  Bytes trace;  // pcapng
  bool passed = false;
};

RunArtifacts run_scenario(const TopologySpec& spec, const Script& script, std::optional<std::uint64_t> seed,
                          DumpOptions dump = {});
/// Writes report.txt, counters.txt, state.txt and trace.pcapng into `out_dir`.
void write_artifacts(const RunArtifacts& artifacts, const std::string& out_dir);

}  // namespace secfabric
