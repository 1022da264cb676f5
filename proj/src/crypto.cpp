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

#include "secfabric/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <algorithm>
#include <climits>

namespace secfabric {

namespace {

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

CipherCtx new_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  return ctx;
}

int as_len(std::size_t n) {
  if (n > static_cast<std::size_t>(INT_MAX)) throw std::length_error("buffer too large for EVP");
  return static_cast<int>(n);
}

void check(int rc, const char* what) {
  if (rc != 1) throw std::runtime_error(std::string(what) + " failed");
}

}  // namespace

GcmSealed gcm_seal(const Key128& key, const GcmIv& iv, ByteView aad, ByteView plaintext) {
  auto ctx = new_ctx();
  check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), iv.data()), "EncryptInit");
  int len = 0;
  if (!aad.empty()) check(EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), as_len(aad.size())), "AAD");

  GcmSealed out;
  out.ciphertext.resize(plaintext.size());
  int written = 0;
  if (!plaintext.empty()) {
    check(EVP_EncryptUpdate(ctx.get(), out.ciphertext.data(), &written, plaintext.data(),
                            as_len(plaintext.size())),
          "EncryptUpdate");
  }
  int tail = 0;
  check(EVP_EncryptFinal_ex(ctx.get(), out.ciphertext.data() + written, &tail), "EncryptFinal");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kIcvLen, out.tag.data()), "GET_TAG");
  return out;
}

std::optional<Bytes> gcm_open(const Key128& key, const GcmIv& iv, ByteView aad, ByteView ciphertext,
                              const Icv& tag) {
  auto ctx = new_ctx();
  check(EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), iv.data()), "DecryptInit");
  int len = 0;
  if (!aad.empty()) check(EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), as_len(aad.size())), "AAD");

  Bytes plain(ciphertext.size());
  int written = 0;
  if (!ciphertext.empty()) {
    check(EVP_DecryptUpdate(ctx.get(), plain.data(), &written, ciphertext.data(), as_len(ciphertext.size())),
          "DecryptUpdate");
  }
  Icv expected = tag;
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kIcvLen, expected.data()), "SET_TAG");
  int tail = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + written, &tail) != 1) return std::nullopt;
  return plain;
}

GcmIv macsec_iv(const Sci& sci, std::uint32_t pn) {
  GcmIv iv{};
  std::copy(sci.octets.begin(), sci.octets.end(), iv.begin());
  iv[8] = static_cast<std::uint8_t>(pn >> 24);
  iv[9] = static_cast<std::uint8_t>(pn >> 16);
  iv[10] = static_cast<std::uint8_t>(pn >> 8);
  iv[11] = static_cast<std::uint8_t>(pn);
  return iv;
}

Bytes macsec_aad(const MacAddress& dst, const MacAddress& src, const SecTag& tag) {
  Bytes aad;
  aad.reserve(kEthernetHeaderLen + kSecTagLen);
  append(aad, dst.octets);
  append(aad, src.octets);
  put_u16(aad, kMacsecEtherType);
  append(aad, tag.serialize());
  return aad;
}

MacsecFrame macsec_protect(const Sak& sak, const Sci& sci, std::uint32_t pn, const EthernetFrame& frame,
                           std::uint8_t an, bool encrypt) {
  if (pn == 0) throw std::invalid_argument("packet number 0 is never transmitted");

  Bytes user_data;
  user_data.reserve(2 + frame.payload.size());
  put_u16(user_data, frame.ether_type);
  append(user_data, frame.payload);

  MacsecFrame out;
  out.dst = frame.dst;
  out.src = frame.src;
  out.sec_tag.tci_an = SecTag::make_tci_an(an, encrypt);
  out.sec_tag.short_length = SecTag::short_length_for(user_data.size());
  out.sec_tag.packet_number = pn;
  out.sec_tag.sci = sci;

  Bytes aad = macsec_aad(out.dst, out.src, out.sec_tag);
  const GcmIv iv = macsec_iv(sci, pn);
  if (encrypt) {
    auto sealed = gcm_seal(sak.key, iv, aad, user_data);
    out.secure_data = std::move(sealed.ciphertext);
    out.icv = sealed.tag;
  } else {
    append(aad, user_data);
    out.icv = gcm_seal(sak.key, iv, aad, {}).tag;
    out.secure_data = std::move(user_data);
  }
  return out;
}

EthernetFrame macsec_validate(const Sak& sak, const MacsecFrame& frame) {
  Bytes aad = macsec_aad(frame.dst, frame.src, frame.sec_tag);
  const GcmIv iv = macsec_iv(frame.sec_tag.sci, frame.sec_tag.packet_number);

  Bytes user_data;
  if (frame.sec_tag.encrypted()) {
    auto plain = gcm_open(sak.key, iv, aad, frame.secure_data, frame.icv);
    if (!plain) throw IntegrityFailure("MACsec ICV mismatch");
    user_data = std::move(*plain);
  } else {
    append(aad, frame.secure_data);
    if (!gcm_open(sak.key, iv, aad, {}, frame.icv)) throw IntegrityFailure("MACsec ICV mismatch");
    user_data = frame.secure_data;
  }
  if (user_data.size() < 2) throw DecodeFailure("MACsec user data lacks EtherType");

  EthernetFrame out;
  out.dst = frame.dst;
  out.src = frame.src;
  out.ether_type = get_u16(user_data, 0);
  out.payload.assign(user_data.begin() + 2, user_data.end());
  return out;
}

SecureLldpFrame lldp_seal(const LldpKey& key, const LldpNonce& nonce, std::uint32_t seq, const Lldpdu& pdu,
                          const MacAddress& src, const MacAddress& dst) {
  Bytes aad;
  put_u32(aad, seq);
  auto sealed = gcm_seal(key.key, nonce, aad, encode_lldpdu(pdu));

  SecureLldpFrame out;
  out.dst = dst;
  out.src = src;
  out.nonce = nonce;
  out.seq = seq;
  out.ciphertext = std::move(sealed.ciphertext);
  out.icv = sealed.tag;
  return out;
}

OpenedLldp lldp_open(const LldpKey& key, const SecureLldpFrame& frame) {
  Bytes aad;
  put_u32(aad, frame.seq);
  auto plain = gcm_open(key.key, frame.nonce, aad, frame.ciphertext, frame.icv);
  if (!plain) throw IntegrityFailure("LLDP ICV mismatch");
  return {frame.seq, decode_lldpdu(*plain)};
}

std::string fingerprint(const Key128& key) {
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> digest{};
  SHA256(key.data(), key.size(), digest.data());
  return to_hex(ByteView(digest.data(), 4));
}

void IvRegistry::record(const Key128& key, const GcmIv& iv) {
  if (!seen_.emplace(key, iv).second)
    throw std::logic_error("AES-GCM (key, IV) reuse: key " + fingerprint(key) + " iv " + to_hex(iv));
}

struct Drbg::Cipher {
  CipherCtx ctx = new_ctx();
};

Drbg::Drbg(const Key128& key) : cipher_(std::make_unique<Cipher>()) {
  check(EVP_EncryptInit_ex(cipher_->ctx.get(), EVP_aes_128_ecb(), nullptr, key.data(), nullptr), "DRBG init");
  EVP_CIPHER_CTX_set_padding(cipher_->ctx.get(), 0);
}

Drbg::Drbg(std::uint64_t seed) : Drbg([seed] {
  std::array<std::uint8_t, 8> seed_bytes{};
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> digest{};
  SHA256(seed_bytes.data(), seed_bytes.size(), digest.data());
  Key128 key{};
  std::copy_n(digest.begin(), key.size(), key.begin());
  return key;
}()) {}

Drbg Drbg::from_entropy() {
  Key128 key{};
  if (RAND_bytes(key.data(), static_cast<int>(key.size())) != 1) throw std::runtime_error("RAND_bytes failed");
  return Drbg(key);
}

Drbg::Drbg(Drbg&&) noexcept = default;
Drbg& Drbg::operator=(Drbg&&) noexcept = default;
Drbg::~Drbg() = default;

void Drbg::refill() {
  int len = 0;
  check(EVP_EncryptUpdate(cipher_->ctx.get(), block_.data(), &len, counter_.data(), 16), "DRBG block");
  for (int i = 15; i >= 0; --i) {
    if (++counter_[static_cast<std::size_t>(i)] != 0) break;
  }
  used_ = 0;
}

void Drbg::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) {
    if (used_ == block_.size()) refill();
    b = block_[used_++];
  }
}

std::uint32_t Drbg::next_u32() {
  auto b = bytes<4>();
  return get_u32(b, 0);
}

std::uint64_t Drbg::next_u64() { return (std::uint64_t{next_u32()} << 32) | next_u32(); }

double Drbg::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

}  // namespace secfabric
