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

// Wire formats for the three frame classes the switch pipeline dispatches on:
// plain Ethernet II, IEEE 802.1AE MACsec (SC bit always set, 14-byte SecTAG
// after the EtherType), and sealed LLDP. All multi-byte integers are
// big-endian. No FCS is modeled.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "secfabric/bytes.hpp"

namespace secfabric {

inline constexpr std::uint16_t kMacsecEtherType = 0x88E5;
inline constexpr std::uint16_t kLldpEtherType = 0x88CC;
inline constexpr MacAddress kLldpMulticast{{0x01, 0x80, 0xc2, 0x00, 0x00, 0x0e}};

inline constexpr std::size_t kEthernetHeaderLen = 14;
inline constexpr std::size_t kSecTagLen = 14;  // TCI/AN, SL, PN, SCI
inline constexpr std::size_t kIcvLen = 16;
inline constexpr std::size_t kLldpNonceLen = 12;
inline constexpr std::size_t kMaxChassisIdLen = 64;

// TCI flag bits (upper six bits of the TCI/AN octet).
inline constexpr std::uint8_t kTciVersion = 0x80;
inline constexpr std::uint8_t kTciEs = 0x40;
inline constexpr std::uint8_t kTciSc = 0x20;
inline constexpr std::uint8_t kTciScb = 0x10;
inline constexpr std::uint8_t kTciE = 0x08;
inline constexpr std::uint8_t kTciC = 0x04;

using PortId = std::uint16_t;
using Icv = std::array<std::uint8_t, kIcvLen>;
using LldpNonce = std::array<std::uint8_t, kLldpNonceLen>;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncatedFrame : public ParseError {
 public:
  using ParseError::ParseError;
};

class DecodeFailure : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Secure channel identifier: sender switch MAC followed by its egress port.
struct Sci {
  std::array<std::uint8_t, 8> octets{};

  static Sci make(const MacAddress& mac, PortId port);
  MacAddress mac() const;
  PortId port() const;
  std::string to_string() const;

  friend auto operator<=>(const Sci&, const Sci&) = default;
};

struct EthernetFrame {
  MacAddress dst;
  MacAddress src;
  std::uint16_t ether_type = 0;
  Bytes payload;

  friend bool operator==(const EthernetFrame&, const EthernetFrame&) = default;
};

struct SecTag {
  std::uint8_t tci_an = kTciSc;
  std::uint8_t short_length = 0;
  std::uint32_t packet_number = 0;
  Sci sci;

  std::uint8_t an() const { return tci_an & 0x03; }
  bool encrypted() const { return (tci_an & (kTciE | kTciC)) == (kTciE | kTciC); }

  /// TCI/AN for an SC-explicit tag; E and C set when the payload is encrypted.
  static std::uint8_t make_tci_an(std::uint8_t an, bool encrypt);
  /// SL is the secure data length when below 48 octets, else 0.
  static std::uint8_t short_length_for(std::size_t secure_data_len);

  std::array<std::uint8_t, kSecTagLen> serialize() const;

  friend bool operator==(const SecTag&, const SecTag&) = default;
};

struct MacsecFrame {
  MacAddress dst;
  MacAddress src;
  std::uint16_t ether_type = kMacsecEtherType;
  SecTag sec_tag;
  Bytes secure_data;
  Icv icv{};

  friend bool operator==(const MacsecFrame&, const MacsecFrame&) = default;
};

struct Lldpdu {
  std::string chassis_id;
  PortId port_id = 0;

  friend bool operator==(const Lldpdu&, const Lldpdu&) = default;
};

struct SecureLldpFrame {
  MacAddress dst = kLldpMulticast;
  MacAddress src;
  std::uint16_t ether_type = kLldpEtherType;
  LldpNonce nonce{};
  std::uint32_t seq = 0;
  Bytes ciphertext;
  Icv icv{};

  friend bool operator==(const SecureLldpFrame&, const SecureLldpFrame&) = default;
};

using Frame = std::variant<EthernetFrame, MacsecFrame, SecureLldpFrame>;

enum class FrameClass { Ethernet, Macsec, SecureLldp };

std::string to_string(FrameClass c);

/// Class implied by the EtherType at offset 12; Ethernet is the fallback.
/// Throws TruncatedFrame when fewer than 14 bytes are given.
FrameClass classify(ByteView bytes);
FrameClass classify(const Frame& frame);

/// Throws TruncatedFrame when the buffer is shorter than its class minimum.
Frame parse_frame(ByteView bytes);

Bytes serialize_frame(const Frame& frame);
Bytes serialize(const EthernetFrame& frame);
Bytes serialize(const MacsecFrame& frame);
Bytes serialize(const SecureLldpFrame& frame);

/// Chassis ID TLV, Port ID TLV, End TLV, nothing else.
/// Throws std::invalid_argument for a chassis id outside 1..64 bytes.
Bytes encode_lldpdu(const Lldpdu& pdu);
/// Throws DecodeFailure for anything other than exactly that TLV sequence.
Lldpdu decode_lldpdu(ByteView bytes);

}  // namespace secfabric
