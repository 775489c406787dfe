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

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "fedcap/canonical.hpp"
#include "fedcap/crypto.hpp"
#include "fedcap/types.hpp"

namespace fedcap {

inline std::string generate_uuid() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uint64_t hi = rng();
  std::uint64_t lo = rng();
  // RFC 4122 version/variant bits.
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;
  char buf[37];
  std::snprintf(buf, sizeof(buf), "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32),
                static_cast<unsigned>((hi >> 16) & 0xffff),
                static_cast<unsigned>(hi & 0xffff),
                static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return std::string(buf);
}

/// VID = H(canonical(profile) || owner_sign).
inline VirtualIdentity compute_vid(const Profile& profile, const Bytes& owner_sign) {
  if (owner_sign.empty()) throw Error("compute_vid: owner signature is empty");
  Bytes input = canonical_serialize(profile);
  input.insert(input.end(), owner_sign.begin(), owner_sign.end());
  return VirtualIdentity{sha256(input)};
}

/// rnd0 = H(canonical(vid_o) || canonical(access_rights)). The empty
/// access-right list is allowed and produces a deny-all capability.
inline InternalCapability mint_internal_cap(const VirtualIdentity& vid_o,
                                            std::vector<AccessRight> access_rights) {
  CanonicalWriter w;
  canonical_append(w, vid_o);
  canonical_append(w, access_rights);
  InternalCapability cap;
  cap.vid_o = vid_o;
  cap.access_rights = std::move(access_rights);
  cap.rnd0 = sha256(w.bytes());
  return cap;
}

/// rnd_i = H(canonical(subject) || canonical(vid_o) || canonical(final AR) ||
/// canonical(conditions) || field(rnd0)). `granted_ar` is the (possibly
/// policy-narrowed) access-right list; `conditions` is attached to every
/// granted element, so a verifier recovers the condition set from the first
/// element. An empty grant carries no conditions.
inline Digest compute_rnd_i(const VirtualIdentity& subject,
                            const VirtualIdentity& vid_o,
                            const std::vector<AccessRight>& final_ar,
                            const std::vector<Condition>& conditions,
                            const Digest& rnd0) {
  CanonicalWriter w;
  canonical_append(w, subject);
  canonical_append(w, vid_o);
  canonical_append(w, final_ar);
  canonical_append(w, conditions);
  w.field(rnd0);
  return sha256(w.bytes());
}

struct TokenValidity {
  std::int64_t starttime = 0;
  std::int64_t endtime = 0;
};

inline CapabilityToken mint_external_cap(const InternalCapability& incap,
                                         const VirtualIdentity& subject_vid,
                                         std::vector<AccessRight> granted_ar,
                                         std::vector<Condition> conditions,
                                         TokenValidity validity,
                                         const KeyPair& issuer_key,
                                         const std::string& provider_address,
                                         std::int64_t issue_time) {
  if (validity.starttime > validity.endtime) {
    throw Error("mint_external_cap: starttime exceeds endtime");
  }
  if (!issuer_key.usable()) throw Error("mint_external_cap: issuer key unusable");
  for (auto& c : conditions) validate(c);

  if (granted_ar.empty()) conditions.clear();
  for (auto& ar : granted_ar) ar.conditions = conditions;

  CapabilityToken token;
  token.id = generate_uuid();
  token.issuer = issuer_key.public_key();
  token.issue_time = issue_time;
  token.subject = subject_vid;
  token.resource = provider_address;
  token.starttime = validity.starttime;
  token.endtime = validity.endtime;
  token.access_right = std::move(granted_ar);
  token.rnd_i = compute_rnd_i(subject_vid, incap.vid_o, token.access_right,
                              conditions, incap.rnd0);
  token.issue_sign = issuer_key.sign(token_signing_body(token));
  return token;
}

/// Convenience overload granting the internal capability's full AR set.
inline CapabilityToken mint_external_cap(const InternalCapability& incap,
                                         const VirtualIdentity& subject_vid,
                                         std::vector<Condition> conditions,
                                         TokenValidity validity,
                                         const KeyPair& issuer_key,
                                         const std::string& provider_address,
                                         std::int64_t issue_time) {
  return mint_external_cap(incap, subject_vid, incap.access_rights,
                           std::move(conditions), validity, issuer_key,
                           provider_address, issue_time);
}

/// True iff issue_sign verifies over the canonical token body under the key
/// carried in the issuer field. Malformed keys or bodies report false.
inline bool verify_token_signature(const CapabilityToken& token) noexcept {
  try {
    return ed25519_verify(token.issuer, token_signing_body(token),
                          token.issue_sign);
  } catch (const Error&) {
    return false;
  }
}

/// Recomputes the rnd chain from the token plus the provider-side (vid_o,
/// rnd0) pair and compares with the stored rnd_i.
inline bool verify_rnd_chain(const CapabilityToken& token,
                             const VirtualIdentity& vid_o,
                             const Digest& rnd0) noexcept {
  try {
    std::vector<Condition> conditions;
    if (!token.access_right.empty()) {
      conditions = token.access_right.front().conditions;
    }
    return compute_rnd_i(token.subject, vid_o, token.access_right, conditions,
                         rnd0) == token.rnd_i;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace fedcap
