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

#include "secfabric/pcapng.hpp"

#include <fstream>
#include <iterator>

namespace secfabric::pcapng {

namespace {

constexpr std::uint32_t kShb = 0x0A0D0D0A;
constexpr std::uint32_t kIdb = 0x00000001;
constexpr std::uint32_t kEpb = 0x00000006;
constexpr std::uint32_t kByteOrderMagic = 0x1A2B3C4D;
constexpr std::uint16_t kLinkTypeEthernet = 1;
constexpr std::uint16_t kOptEnd = 0;
constexpr std::uint16_t kOptComment = 1;
constexpr std::uint16_t kOptIfName = 2;

void le16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void le32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void pad4(Bytes& out) {
  while (out.size() % 4) out.push_back(0);
}

void option(Bytes& out, std::uint16_t code, const std::string& value) {
  le16(out, code);
  le16(out, static_cast<std::uint16_t>(value.size()));
  out.insert(out.end(), value.begin(), value.end());
  pad4(out);
}

void block(Bytes& out, std::uint32_t type, const Bytes& body) {
  const auto total = static_cast<std::uint32_t>(12 + body.size());
  le32(out, type);
  le32(out, total);
  out.insert(out.end(), body.begin(), body.end());
  le32(out, total);
}

struct Reader {
  ByteView data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw IoError("pcapng: truncated");
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = data[pos] | (data[pos + 1] << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
};

// Returns the value of `want` among the options in [pos, end).
std::string read_option(Reader r, std::size_t end, std::uint16_t want) {
  while (r.pos + 4 <= end) {
    const auto code = r.u16();
    const auto len = r.u16();
    if (code == kOptEnd) break;
    r.need(len);
    if (code == want) return std::string(r.data.begin() + r.pos, r.data.begin() + r.pos + len);
    r.pos += (len + 3u) & ~3u;
  }
  return {};
}

}  // namespace

Bytes encode(const Capture& capture) {
  Bytes out;
  {
    Bytes body;
    le32(body, kByteOrderMagic);
    le16(body, 1);
    le16(body, 0);
    le32(body, 0xffffffff);  // section length unknown
    le32(body, 0xffffffff);
    block(out, kShb, body);
  }
  for (const auto& name : capture.interfaces) {
    Bytes body;
    le16(body, kLinkTypeEthernet);
    le16(body, 0);
    le32(body, 0);  // no snap length limit
    option(body, kOptIfName, name);
    le32(body, 0);
    block(out, kIdb, body);
  }
  for (const auto& p : capture.packets) {
    if (p.interface >= capture.interfaces.size()) throw IoError("pcapng: packet on undeclared interface");
    Bytes body;
    le32(body, p.interface);
    le32(body, static_cast<std::uint32_t>(p.timestamp_us >> 32));
    le32(body, static_cast<std::uint32_t>(p.timestamp_us));
    le32(body, static_cast<std::uint32_t>(p.data.size()));
    le32(body, static_cast<std::uint32_t>(p.data.size()));
    body.insert(body.end(), p.data.begin(), p.data.end());
    pad4(body);
    if (!p.comment.empty()) {
      option(body, kOptComment, p.comment);
      le32(body, 0);
    }
    block(out, kEpb, body);
  }
  return out;
}

Capture decode(ByteView bytes) {
  Capture cap;
  Reader r{bytes};
  bool seen_shb = false;
  while (r.pos < bytes.size()) {
    const std::size_t start = r.pos;
    const auto type = r.u32();
    const auto total = r.u32();
    if (total < 12 || total % 4 || start + total > bytes.size()) throw IoError("pcapng: bad block length");
    const std::size_t end = start + total - 4;
    if (type == kShb) {
      if (r.u32() != kByteOrderMagic) throw IoError("pcapng: unsupported byte order");
      seen_shb = true;
    } else if (!seen_shb) {
      throw IoError("pcapng: missing section header");
    } else if (type == kIdb) {
      r.u16();
      r.u16();
      r.u32();
      cap.interfaces.push_back(read_option(r, end, kOptIfName));
    } else if (type == kEpb) {
      Packet p;
      p.interface = r.u32();
      const std::uint64_t hi = r.u32();
      p.timestamp_us = (hi << 32) | r.u32();
      const auto captured = r.u32();
      r.u32();
      r.need(captured);
      if (r.pos + captured > end) throw IoError("pcapng: packet overruns block");
      p.data.assign(bytes.begin() + r.pos, bytes.begin() + r.pos + captured);
      r.pos += (captured + 3u) & ~3u;
      p.comment = read_option(r, end, kOptComment);
      if (p.interface >= cap.interfaces.size()) throw IoError("pcapng: packet on undeclared interface");
      cap.packets.push_back(std::move(p));
    }
    r.pos = start + total;
    if (Reader{bytes, r.pos - 4}.u32() != total) throw IoError("pcapng: trailing length mismatch");
  }
  if (!seen_shb) throw IoError("pcapng: empty capture");
  return cap;
}

void write_file(const std::string& path, const Capture& capture) {
  const Bytes data = encode(capture);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path);
}

Capture read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(data);
}

}  // namespace secfabric::pcapng
