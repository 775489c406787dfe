// Copyright 2026 The fedcap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include <openssl/evp.h>
#include <openssl/rand.h>

#include "fedcap/bytes.hpp"

namespace fedcap {

inline Digest sha256(const std::uint8_t* data, std::size_t len) {
  Digest out{};
  unsigned int out_len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data, len) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &out_len) != 1 || out_len != 32) {
    throw Error("sha256 failed");
  }
  return out;
}

inline Digest sha256(const Bytes& b) { return sha256(b.data(), b.size()); }
inline Digest sha256(const std::string& s) {
  return sha256(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

inline Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) {
    throw Error("RAND_bytes failed");
  }
  return out;
}

/// Ed25519 key pair. The private part is the 32-byte seed; keys are read-only
/// after load.
class KeyPair {
public:
  KeyPair() = default;
  KeyPair(Bytes public_key, Bytes private_key)
      : public_key_(std::move(public_key)), private_key_(std::move(private_key)) {
    if (public_key_.size() != 32 || private_key_.size() != 32) {
      throw Error("ed25519 keys must be 32 bytes");
    }
  }

  static KeyPair generate() {
    std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(
        EVP_PKEY_CTX_new_id(EVP_PKEY_ED25519, nullptr), &EVP_PKEY_CTX_free);
    EVP_PKEY* raw = nullptr;
    if (!ctx || EVP_PKEY_keygen_init(ctx.get()) != 1 ||
        EVP_PKEY_keygen(ctx.get(), &raw) != 1) {
      throw Error("ed25519 keygen failed");
    }
    std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)> key(raw, &EVP_PKEY_free);
    Bytes pub(32), priv(32);
    std::size_t pub_len = 32, priv_len = 32;
    if (EVP_PKEY_get_raw_public_key(key.get(), pub.data(), &pub_len) != 1 ||
        EVP_PKEY_get_raw_private_key(key.get(), priv.data(), &priv_len) != 1 ||
        pub_len != 32 || priv_len != 32) {
      throw Error("ed25519 key export failed");
    }
    return KeyPair(std::move(pub), std::move(priv));
  }

  const Bytes& public_key() const { return public_key_; }
  const Bytes& private_key() const { return private_key_; }
  bool usable() const { return private_key_.size() == 32; }

  Bytes sign(const Bytes& message) const {
    if (!usable()) throw Error("signing key not loaded");
    std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)> key(
        EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                     private_key_.data(), private_key_.size()),
        &EVP_PKEY_free);
    if (!key) throw Error("bad ed25519 private key");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
        EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    Bytes sig(64);
    std::size_t sig_len = 64;
    if (!ctx ||
        EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
        EVP_DigestSign(ctx.get(), sig.data(), &sig_len, message.data(),
                       message.size()) != 1 ||
        sig_len != 64) {
      throw Error("ed25519 sign failed");
    }
    return sig;
  }

  Bytes sign(const std::string& message) const { return sign(to_bytes(message)); }

private:
  Bytes public_key_;
  Bytes private_key_;
};

/// Verification never throws: malformed keys or signatures report false so
/// that callers can treat the result as a deny decision.
inline bool ed25519_verify(const Bytes& public_key, const Bytes& message,
                           const Bytes& signature) noexcept {
  if (public_key.size() != 32 || signature.size() != 64) return false;
  std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)> key(
      EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(),
                                  public_key.size()),
      &EVP_PKEY_free);
  if (!key) return false;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx) return false;
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(),
                          message.data(), message.size()) == 1;
}

inline bool ed25519_verify(const Bytes& public_key, const std::string& message,
                           const Bytes& signature) noexcept {
  return ed25519_verify(public_key, to_bytes(message), signature);
}

}  // namespace fedcap
