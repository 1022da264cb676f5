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

// AES-GCM-128 as used on the data plane (MACsec protect/validate) and by the
// link discovery function (sealed LLDPDUs), plus the deterministic random
// source that feeds nonces, keys and boot timestamps.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <set>
#include <string>

#include "secfabric/bytes.hpp"
#include "secfabric/wire.hpp"

namespace secfabric {

using Key128 = std::array<std::uint8_t, 16>;
using GcmIv = std::array<std::uint8_t, 12>;

struct Sak {
  Key128 key{};
  friend auto operator<=>(const Sak&, const Sak&) = default;
};

struct LldpKey {
  Key128 key{};
  std::uint32_t key_id = 0;
  friend bool operator==(const LldpKey&, const LldpKey&) = default;
};

class IntegrityFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GcmSealed {
  Bytes ciphertext;
  Icv tag{};
};

/// Raw AES-128-GCM with a 96-bit IV and a 128-bit tag.
GcmSealed gcm_seal(const Key128& key, const GcmIv& iv, ByteView aad, ByteView plaintext);
/// Returns nullopt when the tag does not verify.
std::optional<Bytes> gcm_open(const Key128& key, const GcmIv& iv, ByteView aad, ByteView ciphertext,
                              const Icv& tag);

/// SCI (8 octets) followed by the big-endian PN (4 octets).
GcmIv macsec_iv(const Sci& sci, std::uint32_t pn);
/// Destination MAC, source MAC, MACsec EtherType and the SecTAG octets.
Bytes macsec_aad(const MacAddress& dst, const MacAddress& src, const SecTag& tag);

/// Builds the MACsec frame for `frame` under SA key `sak`. With `encrypt`
/// false the user data travels in clear and is covered by the ICV only.
MacsecFrame macsec_protect(const Sak& sak, const Sci& sci, std::uint32_t pn, const EthernetFrame& frame,
                           std::uint8_t an = 0, bool encrypt = true);

/// Throws IntegrityFailure when the ICV does not verify, DecodeFailure when
/// the authenticated user data cannot hold an EtherType.
EthernetFrame macsec_validate(const Sak& sak, const MacsecFrame& frame);

struct OpenedLldp {
  std::uint32_t seq = 0;
  Lldpdu pdu;
};

/// IV is the nonce, AAD is the 4-byte sequence number, plaintext is the
/// encoded LLDPDU. The Ethernet header is not authenticated.
SecureLldpFrame lldp_seal(const LldpKey& key, const LldpNonce& nonce, std::uint32_t seq, const Lldpdu& pdu,
                          const MacAddress& src, const MacAddress& dst = kLldpMulticast);

/// Throws IntegrityFailure (tag mismatch) or DecodeFailure (bad LLDPDU).
OpenedLldp lldp_open(const LldpKey& key, const SecureLldpFrame& frame);

/// First 4 bytes of SHA-256(key) as 8 hex characters.
std::string fingerprint(const Key128& key);

/// AES-128-CTR keystream keyed by SHA-256 of the seed. Deterministic for a
/// given seed; from_entropy() seeds from the OS instead.
class Drbg {
 public:
  explicit Drbg(std::uint64_t seed);
  static Drbg from_entropy();

  Drbg(Drbg&&) noexcept;
  Drbg& operator=(Drbg&&) noexcept;
  ~Drbg();

  void fill(std::span<std::uint8_t> out);

  template <std::size_t N>
  std::array<std::uint8_t, N> bytes() {
    std::array<std::uint8_t, N> out{};
    fill(out);
    return out;
  }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();

 private:
  explicit Drbg(const Key128& key);
  void refill();

  struct Cipher;
  std::unique_ptr<Cipher> cipher_;
  std::array<std::uint8_t, 16> counter_{};
  std::array<std::uint8_t, 16> block_{};
  std::size_t used_ = 16;
};

/// Records every (key, IV) pair handed to GCM and throws std::logic_error
/// on the first reuse.
class IvRegistry {
 public:
  void record(const Key128& key, const GcmIv& iv);
  std::size_t size() const { return seen_.size(); }

 private:
  std::set<std::pair<Key128, GcmIv>> seen_;
};

}  // namespace secfabric
