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

#include "support/fabrics.hpp"

namespace fabrics {

using namespace secfabric;

std::string scenario_path(const std::string& file) { return std::string(SECFABRIC_SOURCE_DIR) + "/scenarios/" + file; }

TopologySpec tier3() { return load_topology(scenario_path("tier3.yaml")); }

TopologySpec chain(int n, std::uint64_t seed) {
  TopologySpec t;
  auto mac = [](int hi, int lo) {
    return MacAddress{{0x02, 0, 0, 0, static_cast<std::uint8_t>(hi), static_cast<std::uint8_t>(lo)}};
  };
  for (int i = 1; i <= n; ++i) t.switches.push_back({"s" + std::to_string(i), mac(0, i), 3});
  for (int i = 1; i < n; ++i) {
    const std::string a = "s" + std::to_string(i), b = "s" + std::to_string(i + 1);
    t.links.push_back({a + "-" + b, Endpoint{a, 3}, Endpoint{b, 2}});
  }
  t.hosts.push_back({"left", mac(1, 1), "s1", 1});
  t.hosts.push_back({"right", mac(1, 2), "s" + std::to_string(n), 1});
  t.params.seed = seed;
  t.validate();
  return t;
}

}  // namespace fabrics
