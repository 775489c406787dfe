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

#include <initializer_list>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "fedcap/types.hpp"

namespace fedcap {

using Json = nlohmann::json;

// JSON wire formats. Parsing is strict: unknown keys, wrong types, uppercase
// hex and out-of-range values are all rejected with Error so that the
// enforcement point can fail closed.

namespace wire_detail {

inline void require_keys(const Json& j, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional,
                         const char* what) {
  if (!j.is_object()) throw Error(std::string(what) + ": not a JSON object");
  std::set<std::string> allowed;
  for (const char* k : required) allowed.insert(k);
  for (const char* k : optional) allowed.insert(k);
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw Error(std::string(what) + ": unknown key '" + item.key() + "'");
    }
  }
  for (const char* k : required) {
    if (!j.contains(k)) {
      throw Error(std::string(what) + ": missing key '" + std::string(k) + "'");
    }
  }
}

inline std::string get_string(const Json& j, const char* key, const char* what) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw Error(std::string(what) + ": '" + key + "' not a string");
  return v.get<std::string>();
}

inline std::int64_t get_int(const Json& j, const char* key, const char* what) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) {
    throw Error(std::string(what) + ": '" + key + "' not an integer");
  }
  return v.get<std::int64_t>();
}

inline Bytes get_hex(const Json& j, const char* key, const char* what) {
  auto b = hex_decode(get_string(j, key, what));
  if (!b) throw Error(std::string(what) + ": '" + key + "' not lowercase hex");
  return *b;
}

inline Digest get_digest(const Json& j, const char* key, const char* what) {
  auto d = hex_decode_digest(get_string(j, key, what));
  if (!d) {
    throw Error(std::string(what) + ": '" + key + "' not a 32-byte hex digest");
  }
  return *d;
}

inline VirtualIdentity get_vid(const Json& j, const char* key, const char* what) {
  return VirtualIdentity{get_digest(j, key, what)};
}

}  // namespace wire_detail

// --- conditions -------------------------------------------------------------

inline Json to_json(const Condition& c) {
  Json j;
  j["kind"] = condition_kind(c);
  if (const auto* tw = std::get_if<TimeWindowCondition>(&c)) {
    j["start"] = tw->start;
    j["end"] = tw->end;
  } else if (const auto* wd = std::get_if<WeekdaySetCondition>(&c)) {
    std::vector<std::string> days(wd->weekdays);
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());
    j["weekdays"] = days;
  } else if (const auto* cn = std::get_if<ClientNetworkCondition>(&c)) {
    j["cidr"] = cn->cidr;
  } else if (const auto* ee = std::get_if<EnvEqualsCondition>(&c)) {
    j["key"] = ee->key;
    j["value"] = ee->value;
  }
  return j;
}

inline Condition condition_from_json(const Json& j) {
  using namespace wire_detail;
  std::string kind = get_string(j, "kind", "condition");
  Condition c;
  if (kind == "time_window") {
    require_keys(j, {"kind", "start", "end"}, {}, "condition");
    c = TimeWindowCondition{get_string(j, "start", "condition"),
                            get_string(j, "end", "condition")};
  } else if (kind == "weekday_set") {
    require_keys(j, {"kind", "weekdays"}, {}, "condition");
    const auto& days = j.at("weekdays");
    if (!days.is_array()) throw Error("condition: 'weekdays' not an array");
    WeekdaySetCondition wd;
    for (const auto& d : days) {
      if (!d.is_string()) throw Error("condition: weekday not a string");
      wd.weekdays.push_back(d.get<std::string>());
    }
    c = std::move(wd);
  } else if (kind == "client_network") {
    require_keys(j, {"kind", "cidr"}, {}, "condition");
    c = ClientNetworkCondition{get_string(j, "cidr", "condition")};
  } else if (kind == "env_equals") {
    require_keys(j, {"kind", "key", "value"}, {}, "condition");
    c = EnvEqualsCondition{get_string(j, "key", "condition"),
                           get_string(j, "value", "condition")};
  } else {
    throw Error("condition: unknown kind '" + kind + "'");
  }
  validate(c);
  return c;
}

// --- access rights ----------------------------------------------------------

inline Json to_json(const AccessRight& ar) {
  Json conditions = Json::array();
  for (const auto& c : ar.conditions) conditions.push_back(to_json(c));
  return Json{{"action", to_name(ar.action)},
              {"resource", ar.resource},
              {"conditions", std::move(conditions)}};
}

inline Json to_json(const std::vector<AccessRight>& list) {
  Json arr = Json::array();
  for (const auto& ar : list) arr.push_back(to_json(ar));
  return arr;
}

inline AccessRight access_right_from_json(const Json& j) {
  using namespace wire_detail;
  require_keys(j, {"action", "resource", "conditions"}, {}, "access_right");
  AccessRight ar;
  auto action = action_from(get_string(j, "action", "access_right"));
  if (!action) throw Error("access_right: unknown action");
  ar.action = *action;
  ar.resource = get_string(j, "resource", "access_right");
  const auto& conds = j.at("conditions");
  if (!conds.is_array()) throw Error("access_right: 'conditions' not an array");
  for (const auto& c : conds) ar.conditions.push_back(condition_from_json(c));
  validate(ar);
  return ar;
}

inline std::vector<AccessRight> access_rights_from_json(const Json& arr) {
  if (!arr.is_array()) throw Error("access_right list: not an array");
  std::vector<AccessRight> out;
  for (const auto& j : arr) out.push_back(access_right_from_json(j));
  return out;
}

// --- capability token -------------------------------------------------------

inline Json to_json(const CapabilityToken& t) {
  return Json{{"id", t.id},
              {"issuer", hex_encode(t.issuer)},
              {"issue_time", t.issue_time},
              {"issue_sign", hex_encode(t.issue_sign)},
              {"subject", t.subject.hex()},
              {"resource", t.resource},
              {"starttime", t.starttime},
              {"endtime", t.endtime},
              {"access_right", to_json(t.access_right)},
              {"rnd_i", hex_encode(t.rnd_i)}};
}

inline CapabilityToken token_from_json(const Json& j) {
  using namespace wire_detail;
  require_keys(j,
               {"id", "issuer", "issue_time", "issue_sign", "subject", "resource",
                "starttime", "endtime", "access_right", "rnd_i"},
               {}, "token");
  CapabilityToken t;
  t.id = get_string(j, "id", "token");
  t.issuer = get_hex(j, "issuer", "token");
  t.issue_time = get_int(j, "issue_time", "token");
  t.issue_sign = get_hex(j, "issue_sign", "token");
  t.subject = get_vid(j, "subject", "token");
  t.resource = get_string(j, "resource", "token");
  t.starttime = get_int(j, "starttime", "token");
  t.endtime = get_int(j, "endtime", "token");
  t.access_right = access_rights_from_json(j.at("access_right"));
  t.rnd_i = get_digest(j, "rnd_i", "token");
  validate(t);
  return t;
}

inline CapabilityToken token_from_string(const std::string& body) {
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error("token: malformed JSON");
  return token_from_json(j);
}

// --- profiles ---------------------------------------------------------------

inline Json to_json(const Profile& p) {
  Json attrs = Json::array();
  for (const auto& [k, v] : p.attributes) attrs.push_back(Json::array({k, v}));
  return Json{{"entity_kind", to_name(p.entity_kind)},
              {"attributes", std::move(attrs)},
              {"public_key", hex_encode(p.public_key)},
              {"domain_id", p.domain_id}};
}

inline Profile profile_from_json(const Json& j) {
  using namespace wire_detail;
  require_keys(j, {"entity_kind", "attributes", "public_key", "domain_id"}, {},
               "profile");
  Profile p;
  auto kind = entity_kind_from(get_string(j, "entity_kind", "profile"));
  if (!kind) throw Error("profile: unknown entity_kind");
  p.entity_kind = *kind;
  const auto& attrs = j.at("attributes");
  if (!attrs.is_array()) throw Error("profile: 'attributes' not an array");
  for (const auto& a : attrs) {
    if (!a.is_array() || a.size() != 2 || !a[0].is_string() || !a[1].is_string()) {
      throw Error("profile: attribute must be a [key, value] pair");
    }
    p.attributes.emplace_back(a[0].get<std::string>(), a[1].get<std::string>());
  }
  p.public_key = get_hex(j, "public_key", "profile");
  p.domain_id = get_string(j, "domain_id", "profile");
  validate(p);
  return p;
}

// --- internal capability ----------------------------------------------------

inline Json to_json(const InternalCapability& ic) {
  return Json{{"vid_o", ic.vid_o.hex()},
              {"access_rights", to_json(ic.access_rights)},
              {"rnd0", hex_encode(ic.rnd0)}};
}

inline InternalCapability internal_cap_from_json(const Json& j) {
  using namespace wire_detail;
  require_keys(j, {"vid_o", "access_rights", "rnd0"}, {}, "internal capability");
  InternalCapability ic;
  ic.vid_o = get_vid(j, "vid_o", "internal capability");
  ic.access_rights = access_rights_from_json(j.at("access_rights"));
  ic.rnd0 = get_digest(j, "rnd0", "internal capability");
  return ic;
}

// --- certificates -----------------------------------------------------------

inline Json to_json(const DelegationCertificate& dc) {
  return Json{{"delegatee_vid", dc.delegatee_vid.hex()},
              {"delegator_vid", dc.delegator_vid.hex()},
              {"domain_id", dc.domain_id},
              {"depth", dc.depth},
              {"issue_time", dc.issue_time},
              {"expiry", dc.expiry},
              {"signature", hex_encode(dc.signature)}};
}

inline DelegationCertificate delegation_cert_from_json(const Json& j) {
  using namespace wire_detail;
  require_keys(j,
               {"delegatee_vid", "delegator_vid", "domain_id", "depth",
                "issue_time", "expiry", "signature"},
               {}, "delegation certificate");
  DelegationCertificate dc;
  dc.delegatee_vid = get_vid(j, "delegatee_vid", "delegation certificate");
  dc.delegator_vid = get_vid(j, "delegator_vid", "delegation certificate");
  dc.domain_id = get_string(j, "domain_id", "delegation certificate");
  dc.depth = static_cast<int>(get_int(j, "depth", "delegation certificate"));
  dc.issue_time = get_int(j, "issue_time", "delegation certificate");
  dc.expiry = get_int(j, "expiry", "delegation certificate");
  dc.signature = get_hex(j, "signature", "delegation certificate");
  validate(dc);
  return dc;
}

inline Json to_json(const RevocationCertificate& rc) {
  return Json{{"revoked_vid", rc.revoked_vid.hex()},
              {"scope", to_name(rc.scope)},
              {"issue_time", rc.issue_time},
              {"expire_time", rc.expire_time},
              {"issuer", hex_encode(rc.issuer)},
              {"signature", hex_encode(rc.signature)}};
}

inline RevocationCertificate revocation_cert_from_json(const Json& j) {
  using namespace wire_detail;
  require_keys(j,
               {"revoked_vid", "scope", "issue_time", "expire_time", "issuer",
                "signature"},
               {}, "revocation certificate");
  RevocationCertificate rc;
  rc.revoked_vid = get_vid(j, "revoked_vid", "revocation certificate");
  auto scope = revocation_scope_from(get_string(j, "scope", "revocation certificate"));
  if (!scope) throw Error("revocation certificate: unknown scope");
  rc.scope = *scope;
  rc.issue_time = get_int(j, "issue_time", "revocation certificate");
  rc.expire_time = get_int(j, "expire_time", "revocation certificate");
  rc.issuer = get_hex(j, "issuer", "revocation certificate");
  rc.signature = get_hex(j, "signature", "revocation certificate");
  validate(rc);
  return rc;
}

}  // namespace fedcap
