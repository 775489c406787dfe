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

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fedcap/bytes.hpp"

namespace fedcap {

// ---------------------------------------------------------------------------
// Enums

enum class EntityKind { subject, object, coordinator, pdc };

enum class Action { GET, PUT, POST, DELETE_ };

enum class RevocationScope { subject_cap, coordinator };

inline const char* to_name(EntityKind k) {
  switch (k) {
    case EntityKind::subject: return "subject";
    case EntityKind::object: return "object";
    case EntityKind::coordinator: return "coordinator";
    case EntityKind::pdc: return "pdc";
  }
  return "?";
}

inline std::optional<EntityKind> entity_kind_from(std::string_view s) {
  if (s == "subject") return EntityKind::subject;
  if (s == "object") return EntityKind::object;
  if (s == "coordinator") return EntityKind::coordinator;
  if (s == "pdc") return EntityKind::pdc;
  return std::nullopt;
}

inline const char* to_name(Action a) {
  switch (a) {
    case Action::GET: return "GET";
    case Action::PUT: return "PUT";
    case Action::POST: return "POST";
    case Action::DELETE_: return "DELETE";
  }
  return "?";
}

inline std::optional<Action> action_from(std::string_view s) {
  if (s == "GET") return Action::GET;
  if (s == "PUT") return Action::PUT;
  if (s == "POST") return Action::POST;
  if (s == "DELETE") return Action::DELETE_;
  return std::nullopt;
}

inline const char* to_name(RevocationScope s) {
  return s == RevocationScope::subject_cap ? "subject_cap" : "coordinator";
}

inline std::optional<RevocationScope> revocation_scope_from(std::string_view s) {
  if (s == "subject_cap") return RevocationScope::subject_cap;
  if (s == "coordinator") return RevocationScope::coordinator;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Conditions (the token's context-awareness set)

/// "HH:MM"–"HH:MM" window against the provider's UTC wall clock.
struct TimeWindowCondition {
  std::string start;
  std::string end;
  auto operator<=>(const TimeWindowCondition&) const = default;
};

/// Lowercase three-letter day names ("mon".."sun"), compared as a set.
struct WeekdaySetCondition {
  std::vector<std::string> weekdays;
  auto operator<=>(const WeekdaySetCondition&) const = default;
};

/// IPv4 CIDR the client address must fall inside, e.g. "127.0.0.0/8".
struct ClientNetworkCondition {
  std::string cidr;
  auto operator<=>(const ClientNetworkCondition&) const = default;
};

/// Provider-local environment fact, e.g. location=lab1.
struct EnvEqualsCondition {
  std::string key;
  std::string value;
  auto operator<=>(const EnvEqualsCondition&) const = default;
};

using Condition = std::variant<TimeWindowCondition, WeekdaySetCondition,
                               ClientNetworkCondition, EnvEqualsCondition>;

inline const char* condition_kind(const Condition& c) {
  switch (c.index()) {
    case 0: return "time_window";
    case 1: return "weekday_set";
    case 2: return "client_network";
    case 3: return "env_equals";
  }
  return "?";
}

namespace detail {

inline bool parse_clock_minutes(const std::string& hhmm, int* out) {
  if (hhmm.size() != 5 || hhmm[2] != ':') return false;
  for (std::size_t i : {0u, 1u, 3u, 4u}) {
    if (hhmm[i] < '0' || hhmm[i] > '9') return false;
  }
  int h = (hhmm[0] - '0') * 10 + (hhmm[1] - '0');
  int m = (hhmm[3] - '0') * 10 + (hhmm[4] - '0');
  if (h > 23 || m > 59) return false;
  *out = h * 60 + m;
  return true;
}

inline const std::set<std::string>& weekday_names() {
  static const std::set<std::string> names{"mon", "tue", "wed", "thu",
                                           "fri", "sat", "sun"};
  return names;
}

inline bool parse_ipv4(const std::string& s, std::uint32_t* out) {
  std::uint32_t value = 0;
  int octets = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (octets == 4) return false;
    std::size_t start = i;
    std::uint32_t octet = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      octet = octet * 10 + static_cast<std::uint32_t>(s[i] - '0');
      if (octet > 255) return false;
      ++i;
    }
    if (i == start) return false;
    value = (value << 8) | octet;
    ++octets;
    if (i < s.size()) {
      if (s[i] != '.') return false;
      ++i;
      if (i == s.size()) return false;
    }
  }
  if (octets != 4) return false;
  *out = value;
  return true;
}

inline bool parse_cidr(const std::string& s, std::uint32_t* net, int* prefix) {
  auto slash = s.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 >= s.size()) {
    return false;
  }
  if (!parse_ipv4(s.substr(0, slash), net)) return false;
  int p = 0;
  for (std::size_t i = slash + 1; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    p = p * 10 + (s[i] - '0');
    if (p > 32) return false;
  }
  if (s.size() - slash - 1 > 2) return false;
  *prefix = p;
  return true;
}

}  // namespace detail

/// Throws Error when a condition violates its structural invariants.
inline void validate(const Condition& c) {
  if (const auto* tw = std::get_if<TimeWindowCondition>(&c)) {
    int start = 0, end = 0;
    if (!detail::parse_clock_minutes(tw->start, &start) ||
        !detail::parse_clock_minutes(tw->end, &end)) {
      throw Error("time_window: clock times must be HH:MM");
    }
    if (start >= end) throw Error("time_window: start must precede end");
  } else if (const auto* wd = std::get_if<WeekdaySetCondition>(&c)) {
    if (wd->weekdays.empty()) throw Error("weekday_set: empty set");
    for (const auto& d : wd->weekdays) {
      if (!detail::weekday_names().count(d)) {
        throw Error("weekday_set: unknown day name '" + d + "'");
      }
    }
  } else if (const auto* cn = std::get_if<ClientNetworkCondition>(&c)) {
    std::uint32_t net = 0;
    int prefix = 0;
    if (!detail::parse_cidr(cn->cidr, &net, &prefix)) {
      throw Error("client_network: malformed CIDR '" + cn->cidr + "'");
    }
  } else if (const auto* ee = std::get_if<EnvEqualsCondition>(&c)) {
    if (ee->key.empty()) throw Error("env_equals: empty key");
  }
}

// ---------------------------------------------------------------------------
// Core capability types

struct Profile {
  EntityKind entity_kind = EntityKind::subject;
  std::vector<std::pair<std::string, std::string>> attributes;
  Bytes public_key;
  std::string domain_id;

  auto operator<=>(const Profile&) const = default;
};

inline void validate(const Profile& p) {
  if (p.attributes.empty()) throw Error("profile: attributes must be non-empty");
  std::set<std::string> keys;
  for (const auto& [k, v] : p.attributes) {
    if (!keys.insert(k).second) {
      throw Error("profile: duplicate attribute key '" + k + "'");
    }
  }
  if (p.domain_id.empty()) throw Error("profile: domain_id must be non-empty");
}

/// Hash-derived globally unique entity identifier.
struct VirtualIdentity {
  Digest digest{};

  std::string hex() const { return hex_encode(digest); }

  static std::optional<VirtualIdentity> from_hex(std::string_view s) {
    auto d = hex_decode_digest(s);
    if (!d) return std::nullopt;
    return VirtualIdentity{*d};
  }

  auto operator<=>(const VirtualIdentity&) const = default;
};

struct AccessRight {
  Action action = Action::GET;
  std::string resource;
  std::vector<Condition> conditions;

  auto operator<=>(const AccessRight&) const = default;
};

inline void validate(const AccessRight& ar) {
  if (ar.resource.empty() || ar.resource.front() != '/') {
    throw Error("access right: resource must begin with '/'");
  }
  for (const auto& c : ar.conditions) validate(c);
}

/// Object-side access-right metadata with anti-forgery rnd0.
struct InternalCapability {
  VirtualIdentity vid_o;
  std::vector<AccessRight> access_rights;
  Digest rnd0{};

  auto operator<=>(const InternalCapability&) const = default;
};

/// Subject-bound, signed, condition-carrying access grant.
struct CapabilityToken {
  std::string id;
  Bytes issuer;  // issuer public key
  std::int64_t issue_time = 0;
  Bytes issue_sign;
  VirtualIdentity subject;
  std::string resource;  // network address of the service provider
  std::int64_t starttime = 0;
  std::int64_t endtime = 0;
  std::vector<AccessRight> access_right;
  Digest rnd_i{};

  auto operator<=>(const CapabilityToken&) const = default;
};

inline void validate(const CapabilityToken& t) {
  if (t.id.empty()) throw Error("token: empty id");
  if (t.starttime > t.endtime) throw Error("token: starttime exceeds endtime");
  if (t.issue_time > t.endtime) throw Error("token: issued after endtime");
  for (const auto& ar : t.access_right) validate(ar);
}

struct DelegationCertificate {
  VirtualIdentity delegatee_vid;
  VirtualIdentity delegator_vid;
  std::string domain_id;
  int depth = 1;  // always 1: no further propagation right
  std::int64_t issue_time = 0;
  std::int64_t expiry = 0;
  Bytes signature;

  auto operator<=>(const DelegationCertificate&) const = default;
};

inline void validate(const DelegationCertificate& dc) {
  if (dc.depth != 1) throw Error("delegation certificate: depth must be 1");
  if (dc.issue_time >= dc.expiry) {
    throw Error("delegation certificate: issue_time must precede expiry");
  }
}

struct RevocationCertificate {
  VirtualIdentity revoked_vid;
  RevocationScope scope = RevocationScope::subject_cap;
  std::int64_t issue_time = 0;
  std::int64_t expire_time = 0;
  Bytes issuer;  // issuer public key
  Bytes signature;

  auto operator<=>(const RevocationCertificate&) const = default;
};

inline void validate(const RevocationCertificate& rc) {
  if (rc.issue_time >= rc.expire_time) {
    throw Error("revocation certificate: issue_time must precede expire_time");
  }
}

/// Provider-side list of revoked identities plus the latest coordinator-scope
/// certificate. Expired entries are dropped by prune().
struct RevocationList {
  std::map<VirtualIdentity, std::int64_t> entries;  // vid -> expire_time
  std::optional<RevocationCertificate> last_certificate;

  void add(const VirtualIdentity& vid, std::int64_t expire_time) {
    auto [it, inserted] = entries.emplace(vid, expire_time);
    if (!inserted && it->second < expire_time) it->second = expire_time;
  }

  bool contains_unexpired(const VirtualIdentity& vid, std::int64_t now) const {
    auto it = entries.find(vid);
    return it != entries.end() && it->second > now;
  }

  void prune(std::int64_t now) {
    std::erase_if(entries, [now](const auto& e) { return e.second <= now; });
  }
};

}  // namespace fedcap
