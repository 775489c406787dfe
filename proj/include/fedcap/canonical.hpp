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

#include <string>
#include <variant>
#include <vector>

#include "fedcap/bytes.hpp"
#include "fedcap/types.hpp"

namespace fedcap {

// Canonical byte encoding used for every hash and signature input. Grammar:
//
//   field(b)  := decimal(len(b)) ':' raw-bytes(b)
//   int(i)    := field(decimal ASCII of i)
//   enum(e)   := field(lowercase name)       (actions keep their upper case)
//   list(xs)  := field(decimal count) xs[0] xs[1] ...
//   struct    := concatenation of its fields in declared order
//
// Every element is length-prefixed, so concatenations decode unambiguously
// and two values of the same type serialize equal iff all fields are equal.
class CanonicalWriter {
public:
  void field(std::string_view bytes) {
    buf_ += std::to_string(bytes.size());
    buf_ += ':';
    buf_.append(bytes.data(), bytes.size());
  }

  void field(const Bytes& bytes) {
    buf_ += std::to_string(bytes.size());
    buf_ += ':';
    buf_.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }

  void field(const Digest& d) {
    buf_ += "32:";
    buf_.append(reinterpret_cast<const char*>(d.data()), d.size());
  }

  void integer(std::int64_t v) { field(std::to_string(v)); }
  void count(std::size_t n) { field(std::to_string(n)); }

  const std::string& str() const { return buf_; }
  Bytes bytes() const { return to_bytes(buf_); }

private:
  std::string buf_;
};

inline void canonical_append(CanonicalWriter& w, const Condition& c) {
  validate(c);
  w.field(condition_kind(c));
  if (const auto* tw = std::get_if<TimeWindowCondition>(&c)) {
    w.field(tw->start);
    w.field(tw->end);
  } else if (const auto* wd = std::get_if<WeekdaySetCondition>(&c)) {
    // Serialized as a set: sorted, deduplicated.
    std::vector<std::string> days(wd->weekdays);
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());
    w.count(days.size());
    for (const auto& d : days) w.field(d);
  } else if (const auto* cn = std::get_if<ClientNetworkCondition>(&c)) {
    w.field(cn->cidr);
  } else if (const auto* ee = std::get_if<EnvEqualsCondition>(&c)) {
    w.field(ee->key);
    w.field(ee->value);
  }
}

inline void canonical_append(CanonicalWriter& w, const AccessRight& ar) {
  validate(ar);
  w.field(to_name(ar.action));
  w.field(ar.resource);
  w.count(ar.conditions.size());
  for (const auto& c : ar.conditions) canonical_append(w, c);
}

inline void canonical_append(CanonicalWriter& w,
                             const std::vector<AccessRight>& list) {
  w.count(list.size());
  for (const auto& ar : list) canonical_append(w, ar);
}

inline void canonical_append(CanonicalWriter& w,
                             const std::vector<Condition>& list) {
  w.count(list.size());
  for (const auto& c : list) canonical_append(w, c);
}

inline void canonical_append(CanonicalWriter& w, const Profile& p) {
  validate(p);
  w.field(to_name(p.entity_kind));
  w.count(p.attributes.size());
  for (const auto& [k, v] : p.attributes) {
    w.field(k);
    w.field(v);
  }
  w.field(p.public_key);
  w.field(p.domain_id);
}

inline void canonical_append(CanonicalWriter& w, const VirtualIdentity& vid) {
  w.field(vid.digest);
}

inline void canonical_append(CanonicalWriter& w, const InternalCapability& ic) {
  canonical_append(w, ic.vid_o);
  canonical_append(w, ic.access_rights);
  w.field(ic.rnd0);
}

/// Token fields in declared order, issue_sign included.
inline void canonical_append(CanonicalWriter& w, const CapabilityToken& t) {
  validate(t);
  w.field(t.id);
  w.field(t.issuer);
  w.integer(t.issue_time);
  w.field(t.issue_sign);
  canonical_append(w, t.subject);
  w.field(t.resource);
  w.integer(t.starttime);
  w.integer(t.endtime);
  canonical_append(w, t.access_right);
  w.field(t.rnd_i);
}

inline void canonical_append(CanonicalWriter& w, const DelegationCertificate& dc) {
  validate(dc);
  canonical_append(w, dc.delegatee_vid);
  canonical_append(w, dc.delegator_vid);
  w.field(dc.domain_id);
  w.integer(dc.depth);
  w.integer(dc.issue_time);
  w.integer(dc.expiry);
  w.field(dc.signature);
}

inline void canonical_append(CanonicalWriter& w, const RevocationCertificate& rc) {
  validate(rc);
  canonical_append(w, rc.revoked_vid);
  w.field(to_name(rc.scope));
  w.integer(rc.issue_time);
  w.integer(rc.expire_time);
  w.field(rc.issuer);
  w.field(rc.signature);
}

template <typename T>
Bytes canonical_serialize(const T& value) {
  CanonicalWriter w;
  canonical_append(w, value);
  return w.bytes();
}

// --- signing bodies (all fields except the signature itself) ---------------

inline Bytes token_signing_body(const CapabilityToken& t) {
  validate(t);
  CanonicalWriter w;
  w.field(t.id);
  w.field(t.issuer);
  w.integer(t.issue_time);
  canonical_append(w, t.subject);
  w.field(t.resource);
  w.integer(t.starttime);
  w.integer(t.endtime);
  canonical_append(w, t.access_right);
  w.field(t.rnd_i);
  return w.bytes();
}

inline Bytes delegation_signing_body(const DelegationCertificate& dc) {
  validate(dc);
  CanonicalWriter w;
  canonical_append(w, dc.delegatee_vid);
  canonical_append(w, dc.delegator_vid);
  w.field(dc.domain_id);
  w.integer(dc.depth);
  w.integer(dc.issue_time);
  w.integer(dc.expiry);
  return w.bytes();
}

inline Bytes revocation_signing_body(const RevocationCertificate& rc) {
  validate(rc);
  CanonicalWriter w;
  canonical_append(w, rc.revoked_vid);
  w.field(to_name(rc.scope));
  w.integer(rc.issue_time);
  w.integer(rc.expire_time);
  w.field(rc.issuer);
  return w.bytes();
}

}  // namespace fedcap
