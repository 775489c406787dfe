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

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fedcap/canonical.hpp"
#include "fedcap/clock.hpp"
#include "fedcap/crypto.hpp"
#include "fedcap/types.hpp"

namespace fedcap {

/// Global list of VIDs whose delegation rights have been revoked.
/// Delegation revocation is permanent: entries never expire.
struct DelegationRevocationList {
  std::map<VirtualIdentity, std::int64_t> entries;  // vid -> revocation time

  bool contains(const VirtualIdentity& vid) const { return entries.count(vid) > 0; }
  void add(const VirtualIdentity& vid, std::int64_t when) {
    entries.emplace(vid, when);
  }
};

/// Per-domain delegation record: at most one active delegatee.
struct DelegationState {
  std::string domain_id;
  VirtualIdentity delegatee_vid;
  DelegationCertificate certificate;
  std::vector<VirtualIdentity> revoked_history;
};

inline constexpr std::int64_t kDelegationCertLifetime = 24 * 3600;

/// Delegation Authority Center plus the identification service it consults.
/// The root (cloud) identity holds the only propagation privilege; the
/// propagation depth is fixed at one level.
class DelegationAuthority {
public:
  using ProfileLookup = std::function<std::optional<Profile>(const VirtualIdentity&)>;

  DelegationAuthority(VirtualIdentity root_vid, KeyPair cloud_key,
                      ProfileLookup lookup, ClockPtr clock)
      : root_vid_(root_vid),
        cloud_key_(std::move(cloud_key)),
        lookup_(std::move(lookup)),
        clock_(std::move(clock)) {}

  const VirtualIdentity& root_vid() const { return root_vid_; }
  const Bytes& cloud_public_key() const { return cloud_key_.public_key(); }

  // --- identity verification (nonce challenge) ------------------------------

  Bytes issue_challenge(const VirtualIdentity& vid) {
    std::lock_guard lock(mutex_);
    Bytes nonce = random_bytes(32);
    challenges_[vid] = nonce;
    return nonce;
  }

  /// Identity check: VID known to the profile database and possession of the
  /// profile's key proven by signing the outstanding nonce. Consumes the
  /// nonce on success and failure alike.
  bool authenticate(const VirtualIdentity& vid, const Bytes& proof) {
    Bytes nonce;
    {
      std::lock_guard lock(mutex_);
      auto it = challenges_.find(vid);
      if (it == challenges_.end()) return false;
      nonce = it->second;
      challenges_.erase(it);
    }
    auto profile = lookup_(vid);
    if (!profile) return false;
    return ed25519_verify(profile->public_key, nonce, proof);
  }

  // --- delegation operations --------------------------------------------------

  struct Result {
    std::optional<DelegationCertificate> certificate;
    std::string error;
    bool ok() const { return certificate.has_value(); }
  };

  /// Root self-delegation: the cloud identity obtains its own DC. Any other
  /// identity, unknown identities and DRL members are rejected.
  Result request_delegation(const VirtualIdentity& delegator_vid, const Bytes& proof) {
    if (!lookup_(delegator_vid)) {
      return {std::nullopt, "unknown identity"};
    }
    {
      std::lock_guard lock(mutex_);
      if (drl_.contains(delegator_vid)) {
        return {std::nullopt, "delegation rights revoked"};
      }
    }
    if (!authenticate(delegator_vid, proof)) {
      return {std::nullopt, "identity authentication failed"};
    }
    if (delegator_vid != root_vid_) {
      return {std::nullopt, "only the root delegator may request delegation"};
    }
    return {sign_certificate(root_vid_, root_vid_, ""), ""};
  }

  /// Delegation acknowledgement: the delegatee presents the root's DC and a
  /// proof of its own identity; a fresh DC bound to the delegatee is issued
  /// and the domain state switches to it.
  Result offer_delegation(const DelegationCertificate& dc,
                          const VirtualIdentity& delegatee_vid,
                          const std::string& domain_id, const Bytes& proof) {
    if (!verify_certificate(dc)) {
      return {std::nullopt, "delegation certificate verification failed"};
    }
    if (dc.delegatee_vid != root_vid_) {
      return {std::nullopt,
              "only the root delegator has the privilege of delegation propagation"};
    }
    std::int64_t now = clock_->now();
    if (dc.expiry <= now) {
      return {std::nullopt, "delegation certificate expired"};
    }
    if (!lookup_(delegatee_vid)) {
      return {std::nullopt, "unknown delegatee identity"};
    }
    {
      std::lock_guard lock(mutex_);
      if (drl_.contains(delegatee_vid)) {
        return {std::nullopt, "delegatee delegation rights revoked"};
      }
    }
    if (!authenticate(delegatee_vid, proof)) {
      return {std::nullopt, "delegatee identity authentication failed"};
    }
    auto cert = sign_certificate(delegatee_vid, root_vid_, domain_id);
    {
      std::lock_guard lock(mutex_);
      auto& state = domains_[domain_id];
      state.domain_id = domain_id;
      state.delegatee_vid = delegatee_vid;
      state.certificate = cert;
    }
    return {cert, ""};
  }

  struct RevocationResult {
    std::optional<RevocationCertificate> certificate;
    std::optional<DelegationCertificate> replacement;
    std::string error;
    bool ok() const { return certificate.has_value(); }
  };

  /// Nullifies the active delegatee of its domain, records it in the DRL and
  /// returns the revocation certificate for broadcast. When a replacement
  /// delegatee is named, its DC is issued in the same step.
  RevocationResult revoke_delegation(
      const VirtualIdentity& old_delegatee,
      const std::optional<VirtualIdentity>& new_delegatee = std::nullopt) {
    std::string domain_id;
    {
      std::lock_guard lock(mutex_);
      auto it = std::find_if(domains_.begin(), domains_.end(), [&](const auto& d) {
        return d.second.delegatee_vid == old_delegatee;
      });
      if (it == domains_.end()) {
        return {std::nullopt, std::nullopt, "not an active delegatee"};
      }
      domain_id = it->first;
      drl_.add(old_delegatee, clock_->now());
      it->second.revoked_history.push_back(old_delegatee);
    }
    std::int64_t now = clock_->now();
    RevocationCertificate cert;
    cert.revoked_vid = old_delegatee;
    cert.scope = RevocationScope::coordinator;
    cert.issue_time = now;
    // Coordinator revocation is permanent; the certificate itself stays
    // broadcastable for the DC lifetime it nullifies.
    cert.expire_time = now + kDelegationCertLifetime;
    cert.issuer = cloud_key_.public_key();
    cert.signature = cloud_key_.sign(revocation_signing_body(cert));

    std::optional<DelegationCertificate> replacement;
    if (new_delegatee) {
      if (lookup_(*new_delegatee) && !drl_.contains(*new_delegatee)) {
        replacement = sign_certificate(*new_delegatee, root_vid_, domain_id);
        std::lock_guard lock(mutex_);
        auto& state = domains_[domain_id];
        state.delegatee_vid = *new_delegatee;
        state.certificate = *replacement;
      }
    } else {
      std::lock_guard lock(mutex_);
      domains_.erase(domain_id);
    }
    return {cert, replacement, ""};
  }

  bool verify_certificate(const DelegationCertificate& dc) const noexcept {
    try {
      return ed25519_verify(cloud_key_.public_key(), delegation_signing_body(dc),
                            dc.signature);
    } catch (const Error&) {
      return false;
    }
  }

  bool is_revoked(const VirtualIdentity& vid) const {
    std::lock_guard lock(mutex_);
    return drl_.contains(vid);
  }

  std::optional<DelegationState> domain_state(const std::string& domain_id) const {
    std::lock_guard lock(mutex_);
    auto it = domains_.find(domain_id);
    if (it == domains_.end()) return std::nullopt;
    return it->second;
  }

  /// Active delegatee check used by sync authorization.
  bool is_active_delegatee(const VirtualIdentity& vid) const {
    std::lock_guard lock(mutex_);
    if (drl_.contains(vid)) return false;
    for (const auto& [_, state] : domains_) {
      if (state.delegatee_vid == vid && state.certificate.expiry > clock_->now()) {
        return true;
      }
    }
    return false;
  }

  std::vector<DelegationState> active_domains() const {
    std::lock_guard lock(mutex_);
    std::vector<DelegationState> out;
    for (const auto& [_, state] : domains_) out.push_back(state);
    return out;
  }

private:
  DelegationCertificate sign_certificate(const VirtualIdentity& delegatee,
                                         const VirtualIdentity& delegator,
                                         const std::string& domain_id) {
    DelegationCertificate dc;
    dc.delegatee_vid = delegatee;
    dc.delegator_vid = delegator;
    dc.domain_id = domain_id;
    dc.depth = 1;
    dc.issue_time = clock_->now();
    dc.expiry = dc.issue_time + kDelegationCertLifetime;
    dc.signature = cloud_key_.sign(delegation_signing_body(dc));
    return dc;
  }

  VirtualIdentity root_vid_;
  KeyPair cloud_key_;
  ProfileLookup lookup_;
  ClockPtr clock_;

  mutable std::mutex mutex_;
  DelegationRevocationList drl_;
  std::map<std::string, DelegationState> domains_;
  std::map<VirtualIdentity, Bytes> challenges_;
};

}  // namespace fedcap
