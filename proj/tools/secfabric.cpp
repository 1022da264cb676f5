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

// Command-line front end: `run` executes a scenario script, `inspect` dumps
// controller and switch state after a quiesced (or scripted) run.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "secfabric/inspect.hpp"
#include "secfabric/scenario.hpp"

using namespace secfabric;

namespace {

std::optional<std::uint64_t> default_seed() {
  const char* env = std::getenv("SECFABRIC_SEED");
  if (!env || !*env) return std::nullopt;
  return std::stoull(env, nullptr, 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated MACsec fabric with secure link discovery"};
  app.require_subcommand(1);

  std::string spec_path, script_path, out_dir = "out", query = "links";
  std::optional<std::uint64_t> seed;
  bool unsafe_keys = false;

  auto* run = app.add_subcommand("run", "execute a scenario script and write report, counters and trace");
  run->add_option("--spec", spec_path, "topology file (YAML)")->required()->check(CLI::ExistingFile);
  run->add_option("--script", script_path, "scenario script")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "random seed (default: $SECFABRIC_SEED, then the topology's seed)");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_flag("--unsafe-dump-keys", unsafe_keys, "print full key material in dumps");

  auto* insp = app.add_subcommand("inspect", "dump links, scs, tables(<switch>) or counters(<switch>)");
  insp->add_option("--spec", spec_path, "topology file (YAML)")->required()->check(CLI::ExistingFile);
  insp->add_option("--script", script_path, "run this script first instead of a plain quiesce")
      ->check(CLI::ExistingFile);
  insp->add_option("--query,query", query, "links | scs | tables(<switch>) | counters(<switch>) | counters")
      ->capture_default_str();
  insp->add_option("--seed", seed, "random seed");
  insp->add_flag("--unsafe-dump-keys", unsafe_keys, "print full key material");

  CLI11_PARSE(app, argc, argv);
  if (!seed) seed = default_seed();

  try {
    const TopologySpec spec = load_topology(spec_path);
    if (run->parsed()) {
      const Script script = load_script(script_path);
      const RunArtifacts artifacts = run_scenario(spec, script, seed, DumpOptions{unsafe_keys});
      write_artifacts(artifacts, out_dir);
      std::cout << artifacts.report;
      return artifacts.passed ? 0 : 1;
    }
    Scenario scenario(spec, seed);
    if (script_path.empty())
      scenario.sim().quiesce();
    else
      scenario.run(load_script(script_path));
    std::cout << inspect(scenario.sim(), query, DumpOptions{unsafe_keys});
    return 0;
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
  } catch (const ScriptError& e) {
    std::cerr << "script error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
