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

// Stable, sorted text dumps of controller and switch state.

#include <stdexcept>
#include <string>

#include "secfabric/netsim.hpp"

namespace secfabric {

class UnknownQuery : public std::runtime_error {
 public:
  explicit UnknownQuery(const std::string& q) : std::runtime_error("unknown query " + q) {}
};

struct DumpOptions {
  /// Print SAKs and LLDP keys in full instead of 8-hex-digit fingerprints.
  bool unsafe_dump_keys = false;
};

std::string dump_links(const Simulation& sim);
std::string dump_scs(const Simulation& sim, DumpOptions opts = {});
std::string dump_tables(const Simulation& sim, const std::string& switch_id, DumpOptions opts = {});
/// Switch pipeline counters merged with its local controller's counters.
std::string dump_counters(const Simulation& sim, const std::string& switch_id);
std::string dump_central_counters(const Simulation& sim);
/// Every switch plus the central controller, in name order.
std::string dump_all_counters(const Simulation& sim);

/// "links", "scs", "tables(<switch>)", "counters(<switch>)", "counters".
/// Throws UnknownQuery or UnknownNode.
std::string inspect(const Simulation& sim, const std::string& query, DumpOptions opts = {});

}  // namespace secfabric
