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

#include "secfabric/wire.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace secfabric {

namespace {

constexpr std::uint8_t kTlvEnd = 0;
constexpr std::uint8_t kTlvChassisId = 1;
constexpr std::uint8_t kTlvPortId = 2;
constexpr std::uint8_t kSubtypeLocal = 7;

constexpr std::size_t kMinMacsecLen = kEthernetHeaderLen + kSecTagLen + kIcvLen;
constexpr std::size_t kMinSecureLldpLen = kEthernetHeaderLen + kLldpNonceLen + 4 + kIcvLen;

MacAddress read_mac(ByteView in, std::size_t at) {
  MacAddress mac;
  std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(at), 6, mac.octets.begin());
  return mac;
}

void put_header(Bytes& out, const MacAddress& dst, const MacAddress& src, std::uint16_t type) {
  append(out, dst.octets);
  append(out, src.octets);
  put_u16(out, type);
}

void put_tlv_header(Bytes& out, std::uint8_t type, std::size_t length) {
  put_u16(out, static_cast<std::uint16_t>((type << 9) | (length & 0x1ff)));
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

MacAddress MacAddress::parse(std::string_view text) {
  MacAddress mac;
  if (text.size() != 17) throw std::invalid_argument("bad MAC address: " + std::string(text));
  for (std::size_t i = 0; i < 6; ++i) {
    const int hi = hex_digit(text[i * 3]);
    const int lo = hex_digit(text[i * 3 + 1]);
    if (hi < 0 || lo < 0 || (i < 5 && text[i * 3 + 2] != ':'))
      throw std::invalid_argument("bad MAC address: " + std::string(text));
    mac.octets[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return mac;
}

std::string MacAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", octets[0], octets[1], octets[2],
                octets[3], octets[4], octets[5]);
  return buf;
}

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view text) {
  Bytes out;
  int pending = -1;
  for (char c : text) {
    if (c == ' ' || c == ':' || c == '\n' || c == '\t') continue;
    const int d = hex_digit(c);
    if (d < 0) throw std::invalid_argument("bad hex digit");
    if (pending < 0) {
      pending = d;
    } else {
      out.push_back(static_cast<std::uint8_t>(pending << 4 | d));
      pending = -1;
    }
  }
  if (pending >= 0) throw std::invalid_argument("odd number of hex digits");
  return out;
}

Sci Sci::make(const MacAddress& mac, PortId port) {
  Sci sci;
  std::copy(mac.octets.begin(), mac.octets.end(), sci.octets.begin());
  sci.octets[6] = static_cast<std::uint8_t>(port >> 8);
  sci.octets[7] = static_cast<std::uint8_t>(port);
  return sci;
}

MacAddress Sci::mac() const {
  MacAddress mac;
  std::copy_n(octets.begin(), 6, mac.octets.begin());
  return mac;
}

PortId Sci::port() const { return static_cast<PortId>(octets[6] << 8 | octets[7]); }

std::string Sci::to_string() const { return to_hex(octets); }

std::uint8_t SecTag::make_tci_an(std::uint8_t an, bool encrypt) {
  return static_cast<std::uint8_t>(kTciSc | (encrypt ? (kTciE | kTciC) : 0) | (an & 0x03));
}

std::uint8_t SecTag::short_length_for(std::size_t secure_data_len) {
  return secure_data_len < 48 ? static_cast<std::uint8_t>(secure_data_len) : 0;
}

std::array<std::uint8_t, kSecTagLen> SecTag::serialize() const {
  std::array<std::uint8_t, kSecTagLen> out{};
  out[0] = tci_an;
  out[1] = short_length;
  out[2] = static_cast<std::uint8_t>(packet_number >> 24);
  out[3] = static_cast<std::uint8_t>(packet_number >> 16);
  out[4] = static_cast<std::uint8_t>(packet_number >> 8);
  out[5] = static_cast<std::uint8_t>(packet_number);
  std::copy(sci.octets.begin(), sci.octets.end(), out.begin() + 6);
  return out;
}

std::string to_string(FrameClass c) {
  switch (c) {
    case FrameClass::Ethernet: return "ethernet";
    case FrameClass::Macsec: return "macsec";
    case FrameClass::SecureLldp: return "lldp";
  }
  return "?";
}

FrameClass classify(ByteView bytes) {
  if (bytes.size() < kEthernetHeaderLen) throw TruncatedFrame("frame shorter than Ethernet header");
  switch (get_u16(bytes, 12)) {
    case kMacsecEtherType: return FrameClass::Macsec;
    case kLldpEtherType: return FrameClass::SecureLldp;
    default: return FrameClass::Ethernet;
  }
}

FrameClass classify(const Frame& frame) { return static_cast<FrameClass>(frame.index()); }

Frame parse_frame(ByteView bytes) {
  const FrameClass cls = classify(bytes);
  const MacAddress dst = read_mac(bytes, 0);
  const MacAddress src = read_mac(bytes, 6);
  const std::uint16_t type = get_u16(bytes, 12);

  switch (cls) {
    case FrameClass::Macsec: {
      if (bytes.size() < kMinMacsecLen) throw TruncatedFrame("MACsec frame too short");
      MacsecFrame f;
      f.dst = dst;
      f.src = src;
      f.ether_type = type;
      std::size_t at = kEthernetHeaderLen;
      f.sec_tag.tci_an = bytes[at];
      f.sec_tag.short_length = bytes[at + 1];
      f.sec_tag.packet_number = get_u32(bytes, at + 2);
      std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(at + 6), 8, f.sec_tag.sci.octets.begin());
      at += kSecTagLen;
      const std::size_t data_len = bytes.size() - at - kIcvLen;
      f.secure_data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(at),
                           bytes.begin() + static_cast<std::ptrdiff_t>(at + data_len));
      std::copy_n(bytes.end() - kIcvLen, kIcvLen, f.icv.begin());
      return f;
    }
    case FrameClass::SecureLldp: {
      if (bytes.size() < kMinSecureLldpLen) throw TruncatedFrame("secure LLDP frame too short");
      SecureLldpFrame f;
      f.dst = dst;
      f.src = src;
      f.ether_type = type;
      std::size_t at = kEthernetHeaderLen;
      std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(at), kLldpNonceLen, f.nonce.begin());
      at += kLldpNonceLen;
      f.seq = get_u32(bytes, at);
      at += 4;
      f.ciphertext.assign(bytes.begin() + static_cast<std::ptrdiff_t>(at), bytes.end() - kIcvLen);
      std::copy_n(bytes.end() - kIcvLen, kIcvLen, f.icv.begin());
      return f;
    }
    case FrameClass::Ethernet:
      break;
  }
  return EthernetFrame{dst, src, type, Bytes(bytes.begin() + kEthernetHeaderLen, bytes.end())};
}

Bytes serialize(const EthernetFrame& f) {
  Bytes out;
  out.reserve(kEthernetHeaderLen + f.payload.size());
  put_header(out, f.dst, f.src, f.ether_type);
  append(out, f.payload);
  return out;
}

Bytes serialize(const MacsecFrame& f) {
  Bytes out;
  out.reserve(kEthernetHeaderLen + kSecTagLen + f.secure_data.size() + kIcvLen);
  put_header(out, f.dst, f.src, f.ether_type);
  append(out, f.sec_tag.serialize());
  append(out, f.secure_data);
  append(out, f.icv);
  return out;
}

Bytes serialize(const SecureLldpFrame& f) {
  Bytes out;
  out.reserve(kEthernetHeaderLen + kLldpNonceLen + 4 + f.ciphertext.size() + kIcvLen);
  put_header(out, f.dst, f.src, f.ether_type);
  append(out, f.nonce);
  put_u32(out, f.seq);
  append(out, f.ciphertext);
  append(out, f.icv);
  return out;
}

Bytes serialize_frame(const Frame& frame) {
  return std::visit([](const auto& f) { return serialize(f); }, frame);
}

Bytes encode_lldpdu(const Lldpdu& pdu) {
  if (pdu.chassis_id.empty() || pdu.chassis_id.size() > kMaxChassisIdLen)
    throw std::invalid_argument("chassis id must be 1..64 bytes");
  Bytes out;
  put_tlv_header(out, kTlvChassisId, 1 + pdu.chassis_id.size());
  out.push_back(kSubtypeLocal);
  out.insert(out.end(), pdu.chassis_id.begin(), pdu.chassis_id.end());
  put_tlv_header(out, kTlvPortId, 3);
  out.push_back(kSubtypeLocal);
  put_u16(out, pdu.port_id);
  put_tlv_header(out, kTlvEnd, 0);
  return out;
}

Lldpdu decode_lldpdu(ByteView bytes) {
  std::size_t at = 0;
  auto next_tlv = [&](std::uint8_t expected_type) -> ByteView {
    if (at + 2 > bytes.size()) throw DecodeFailure("LLDPDU truncated in TLV header");
    const std::uint16_t header = get_u16(bytes, at);
    const std::uint8_t type = static_cast<std::uint8_t>(header >> 9);
    const std::size_t length = header & 0x1ff;
    at += 2;
    if (type != expected_type) throw DecodeFailure("unexpected TLV type " + std::to_string(type));
    if (at + length > bytes.size()) throw DecodeFailure("LLDPDU truncated in TLV value");
    ByteView value = bytes.subspan(at, length);
    at += length;
    return value;
  };

  Lldpdu pdu;
  ByteView chassis = next_tlv(kTlvChassisId);
  if (chassis.size() < 2 || chassis.size() > kMaxChassisIdLen + 1 || chassis[0] != kSubtypeLocal)
    throw DecodeFailure("bad Chassis ID TLV");
  pdu.chassis_id.assign(chassis.begin() + 1, chassis.end());

  ByteView port = next_tlv(kTlvPortId);
  if (port.size() != 3 || port[0] != kSubtypeLocal) throw DecodeFailure("bad Port ID TLV");
  pdu.port_id = get_u16(port, 1);

  if (!next_tlv(kTlvEnd).empty()) throw DecodeFailure("End TLV must be empty");
  if (at != bytes.size()) throw DecodeFailure("trailing bytes after End TLV");
  return pdu;
}

}  // namespace secfabric
