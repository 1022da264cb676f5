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

// Minimal pcapng writer and reader: one section, Ethernet interfaces,
// enhanced packet blocks with microsecond timestamps and an optional comment.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "secfabric/bytes.hpp"

namespace secfabric::pcapng {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Packet {
  std::uint32_t interface = 0;
  std::uint64_t timestamp_us = 0;
  Bytes data;
  std::string comment;
  friend bool operator==(const Packet&, const Packet&) = default;
};

struct Capture {
  std::vector<std::string> interfaces;
  std::vector<Packet> packets;
};

Bytes encode(const Capture& capture);
Capture decode(ByteView bytes);

void write_file(const std::string& path, const Capture& capture);
Capture read_file(const std::string& path);

}  // namespace secfabric::pcapng
