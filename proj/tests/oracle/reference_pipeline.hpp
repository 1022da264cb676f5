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

// Naive reference interpreter of the switch processing pipeline, written
// as a direct walk through the documented steps: EtherType dispatch,
// MACsec validate, MAC table lookup, MACsec protect, output. Frames are
// handled as raw byte offsets and all crypto goes through the oracle GCM.

#include <cstdint>
#include <vector>

#include "secfabric/dataplane.hpp"

namespace oracle {

struct RefSwitch {
  secfabric::SwitchTables tables;
  std::vector<bool> up;  // index = port, entry 0 unused
  std::uint64_t pn_ceiling = 0xffffffffULL;
};

secfabric::IngressOutcome reference_ingress(RefSwitch& sw, std::uint16_t port, const std::vector<std::uint8_t>& frame);

/// Reference MACsec protect of a cleartext Ethernet frame (raw bytes).
std::vector<std::uint8_t> reference_protect(const std::array<std::uint8_t, 16>& sak,
                                            const std::array<std::uint8_t, 8>& sci, std::uint32_t pn,
                                            std::uint8_t an, bool encrypt, const std::vector<std::uint8_t>& frame);

/// Reference sealed LLDP frame: header, nonce, seq, ciphertext, tag.
std::vector<std::uint8_t> reference_lldp_seal(const std::array<std::uint8_t, 16>& key,
                                              const std::array<std::uint8_t, 12>& nonce, std::uint32_t seq,
                                              const std::vector<std::uint8_t>& header14,
                                              const std::vector<std::uint8_t>& lldpdu);

}  // namespace oracle
