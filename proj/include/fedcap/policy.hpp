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

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fedcap/authz.hpp"
#include "fedcap/wire.hpp"

namespace fedcap {

/// Flat attribute-equality allowlist rule: first match wins, default deny.
/// An empty granted list is a tombstone (explicit deny). Conditions apply to
/// the whole grant, mirroring the token-level context set.
struct PolicyRule {
  std::vector<std::pair<std::string, std::string>> subject_match;
  VirtualIdentity object_vid;
  std::vector<AccessRight> granted;
  std::vector<Condition> conditions;
  std::int64_t validity_duration = 3600;
};

struct PolicyGrant {
  std::vector<AccessRight> granted;
  std::vector<Condition> conditions;
  std::int64_t validity_duration = 0;
};

struct PolicyDecision {
  std::optional<PolicyGrant> grant;
  std::string reason;

  bool granted() const { return grant.has_value(); }
};

inline bool subject_matches(
    const PolicyRule& rule,
    const std::vector<std::pair<std::string, std::string>>& attributes) {
  for (const auto& [key, required] : rule.subject_match) {
    bool found = false;
    for (const auto& [k, v] : attributes) {
      if (k == key && v == required) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

/// requested ∩ granted: a requested (action, resource) is covered when a
/// granted element has the same action and a resource equal to it or a
/// wildcard pattern covering it. The output keeps the requested (narrower)
/// resource.
inline std::vector<AccessRight> intersect_rights(
    const std::vector<AccessRight>& requested,
    const std::vector<AccessRight>& granted) {
  std::vector<AccessRight> out;
  for (const auto& req : requested) {
    for (const auto& g : granted) {
      if (g.action != req.action) continue;
      if (g.resource == req.resource || resource_matches(g.resource, req.resource)) {
        AccessRight ar{req.action, req.resource, {}};
        if (std::find(out.begin(), out.end(), ar) == out.end()) {
          out.push_back(std::move(ar));
        }
        break;
      }
    }
  }
  return out;
}

inline PolicyDecision evaluate_policy(
    const std::vector<PolicyRule>& rules,
    const std::vector<std::pair<std::string, std::string>>& subject_attributes,
    const VirtualIdentity& object_vid,
    const std::vector<AccessRight>& requested) {
  for (const auto& rule : rules) {
    if (rule.object_vid != object_vid) continue;
    if (!subject_matches(rule, subject_attributes)) continue;
    if (rule.granted.empty()) {
      return PolicyDecision{std::nullopt, "explicit deny rule"};
    }
    auto intersection = intersect_rights(requested, rule.granted);
    if (intersection.empty()) {
      return PolicyDecision{std::nullopt, "requested rights not granted by policy"};
    }
    return PolicyDecision{
        PolicyGrant{std::move(intersection), rule.conditions,
                    rule.validity_duration},
        ""};
  }
  return PolicyDecision{std::nullopt, "no matching policy rule"};
}

// --- JSON / file form ---------------------------------------------------------

inline Json to_json(const PolicyRule& r) {
  Json match = Json::array();
  for (const auto& [k, v] : r.subject_match) match.push_back(Json::array({k, v}));
  Json conds = Json::array();
  for (const auto& c : r.conditions) conds.push_back(to_json(c));
  return Json{{"subject_match", std::move(match)},
              {"object_vid", r.object_vid.hex()},
              {"granted", to_json(r.granted)},
              {"conditions", std::move(conds)},
              {"validity_duration", r.validity_duration}};
}

inline PolicyRule policy_rule_from_json(const Json& j) {
  using namespace wire_detail;
  require_keys(j, {"subject_match", "object_vid", "granted"},
               {"conditions", "validity_duration"}, "policy rule");
  PolicyRule r;
  const auto& match = j.at("subject_match");
  if (!match.is_array()) throw Error("policy rule: 'subject_match' not an array");
  for (const auto& m : match) {
    if (!m.is_array() || m.size() != 2 || !m[0].is_string() || !m[1].is_string()) {
      throw Error("policy rule: subject_match entries are [key, value] pairs");
    }
    r.subject_match.emplace_back(m[0].get<std::string>(), m[1].get<std::string>());
  }
  r.object_vid = get_vid(j, "object_vid", "policy rule");
  r.granted = access_rights_from_json(j.at("granted"));
  if (j.contains("conditions")) {
    const auto& conds = j.at("conditions");
    if (!conds.is_array()) throw Error("policy rule: 'conditions' not an array");
    for (const auto& c : conds) r.conditions.push_back(condition_from_json(c));
  }
  if (j.contains("validity_duration")) {
    r.validity_duration = get_int(j, "validity_duration", "policy rule");
    if (r.validity_duration <= 0) {
      throw Error("policy rule: validity_duration must be positive");
    }
  }
  return r;
}

inline std::vector<PolicyRule> policy_rules_from_json(const Json& j) {
  if (!j.is_array()) throw Error("policy: rule list is not an array");
  std::vector<PolicyRule> rules;
  for (const auto& r : j) rules.push_back(policy_rule_from_json(r));
  return rules;
}

inline std::vector<PolicyRule> load_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open policy file: " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error("policy file is not valid JSON: " + path);
  if (j.is_object() && j.contains("rules")) return policy_rules_from_json(j.at("rules"));
  return policy_rules_from_json(j);
}

}  // namespace fedcap
