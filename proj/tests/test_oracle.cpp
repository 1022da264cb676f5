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

#include <gtest/gtest.h>

#include "oracle/gcm_reference.hpp"
#include "secfabric/bytes.hpp"
#include "secfabric/crypto.hpp"

using namespace secfabric;

namespace {

oracle::Block block(const std::string& hex) {
  const Bytes b = from_hex(hex);
  oracle::Block out{};
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

std::array<std::uint8_t, 12> iv12(const std::string& hex) {
  const Bytes b = from_hex(hex);
  std::array<std::uint8_t, 12> out{};
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

struct Vector {
  const char* name;
  const char* key;
  const char* iv;
  const char* aad;
  const char* pt;
  const char* ct;
  const char* tag;
};

// McGrew and Viega GCM test cases 1-4 (AES-128).
const Vector kVectors[] = {
    {"tc1", "00000000000000000000000000000000", "000000000000000000000000", "", "", "",
     "58e2fccefa7e3061367f1d57a4e7455a"},
    {"tc2", "00000000000000000000000000000000", "000000000000000000000000", "", "00000000000000000000000000000000",
     "0388dace60b6a392f328c2b971b2fe78", "ab6e47d42cec13bdf53a67b21257bddf"},
    {"tc3", "feffe9928665731c6d6a8f9467308308", "cafebabefacedbaddecaf888", "",
     "d9313225f88406e5a55909c5aff5269a86a7a9531534f7da2e4c303d8a318a721c3c0c95956809532fcf0e2449a6b525b16aedf5aa0de657"
     "ba637b391aafd255",
     "42831ec2217774244b7221b784d0d49ce3aa212f2c02a4e035c17e2329aca12e21d514b25466931c7d8f6a5aac84aa051ba30b396a0aac97"
     "3d58e091473f5985",
     "4d5c2af327cd64a62cf35abd2ba6fab4"},
    {"tc4", "feffe9928665731c6d6a8f9467308308", "cafebabefacedbaddecaf888", "feedfacedeadbeeffeedfacedeadbeefabaddad2",
     "d9313225f88406e5a55909c5aff5269a86a7a9531534f7da2e4c303d8a318a721c3c0c95956809532fcf0e2449a6b525b16aedf5aa0de657"
     "ba637b39",
     "42831ec2217774244b7221b784d0d49ce3aa212f2c02a4e035c17e2329aca12e21d514b25466931c7d8f6a5aac84aa051ba30b396a0aac97"
     "3d58e091",
     "5bc94fbc3221a5db94fae95ae7121a47"},
};

}  // namespace

TEST(Aes128Reference, Fips197AppendixC1) {
  const auto out = oracle::aes128_encrypt(block("000102030405060708090a0b0c0d0e0f"),
                                          block("00112233445566778899aabbccddeeff"));
  EXPECT_EQ(to_hex(out), "69c4e0d86a7b0430d8cdb78070b4c55a");
}

TEST(GcmReference, KnownAnswerVectors) {
  for (const auto& v : kVectors) {
    SCOPED_TRACE(v.name);
    const auto out = oracle::gcm_encrypt(block(v.key), iv12(v.iv), from_hex(v.aad), from_hex(v.pt));
    EXPECT_EQ(to_hex(out.ciphertext), v.ct);
    EXPECT_EQ(to_hex(out.tag), v.tag);

    oracle::Buf plain;
    EXPECT_TRUE(oracle::gcm_decrypt(block(v.key), iv12(v.iv), from_hex(v.aad), out.ciphertext, out.tag, plain));
    EXPECT_EQ(to_hex(plain), v.pt);
  }
}

TEST(GcmLibrary, KnownAnswerVectors) {
  for (const auto& v : kVectors) {
    SCOPED_TRACE(v.name);
    const auto sealed = gcm_seal(block(v.key), iv12(v.iv), from_hex(v.aad), from_hex(v.pt));
    EXPECT_EQ(to_hex(sealed.ciphertext), v.ct);
    EXPECT_EQ(to_hex(sealed.tag), v.tag);
    const auto opened = gcm_open(block(v.key), iv12(v.iv), from_hex(v.aad), sealed.ciphertext, sealed.tag);
    ASSERT_TRUE(opened);
    EXPECT_EQ(to_hex(*opened), v.pt);
  }
}

TEST(GcmReference, RejectsFlippedTag) {
  const auto k = block("feffe9928665731c6d6a8f9467308308");
  const auto iv = iv12("cafebabefacedbaddecaf888");
  auto out = oracle::gcm_encrypt(k, iv, {1, 2, 3}, {4, 5, 6, 7});
  out.tag[3] ^= 0x10;
  oracle::Buf plain;
  EXPECT_FALSE(oracle::gcm_decrypt(k, iv, {1, 2, 3}, out.ciphertext, out.tag, plain));
}

TEST(GcmReference, AgreesWithLibraryOnOddLengths) {
  Drbg rng(99);
  for (std::size_t len : {0u, 1u, 15u, 16u, 17u, 31u, 33u, 100u}) {
    const auto key = rng.bytes<16>();
    const auto iv = rng.bytes<12>();
    Bytes aad(len / 3), pt(len);
    rng.fill(aad);
    rng.fill(pt);
    const auto ref = oracle::gcm_encrypt(key, iv, aad, pt);
    const auto lib = gcm_seal(key, iv, aad, pt);
    EXPECT_EQ(ref.ciphertext, lib.ciphertext) << len;
    EXPECT_EQ(ref.tag, lib.tag) << len;
  }
}
