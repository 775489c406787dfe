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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedcap/harness/topology.hpp"
#include "fedcap/policy.hpp"

namespace fedcap::harness {

struct ActionOutcome {
  std::string description;
  bool passed = false;
  std::string note;
};

struct ScenarioReport {
  std::string name;
  std::vector<ActionOutcome> outcomes;

  bool all_passed() const {
    for (const auto& o : outcomes) {
      if (!o.passed) return false;
    }
    return !outcomes.empty();
  }
};

/// Drives a scripted allow/deny scenario against a freshly launched process
/// topology. Actors (subjects, objects, coordinators) are referenced by name;
/// issued tokens are stored under names given by the script.
class ScenarioRunner {
public:
  ScenarioRunner(Json scenario, TopologyOptions options)
      : scenario_(std::move(scenario)) {
    if (scenario_.contains("topology")) {
      const auto& topo = scenario_["topology"];
      if (topo.contains("coordinators")) {
        options.coordinators.clear();
        for (const auto& c : topo["coordinators"]) {
          options.coordinators.push_back(c.get<std::string>());
        }
      }
      if (topo.contains("artificial_delay_ms")) {
        options.artificial_delay_ms = topo["artificial_delay_ms"].get<int>();
      }
    }
    topology_ = std::make_unique<Topology>(std::move(options));
  }

  ScenarioReport run() {
    ScenarioReport report;
    report.name = scenario_.value("name", "unnamed");
    try {
      topology_->launch_pdc();
      topology_->launch_coordinators();
    } catch (const std::exception& e) {
      report.outcomes.push_back({"launch topology", false, e.what()});
      topology_->teardown();
      return report;
    }
    for (const auto& action : scenario_.value("actions", Json::array())) {
      ActionOutcome outcome = execute(action);
      report.outcomes.push_back(outcome);
    }
    topology_->teardown();
    return report;
  }

  Topology& topology() { return *topology_; }

private:
  struct Actor {
    KeyPair key;
    Profile profile;
    VirtualIdentity vid;
    int provider_index = -1;
  };

  struct ActionResult {
    bool ok = false;
    int status = 0;
    std::string stage;
    std::string note;
  };

  ActionOutcome execute(const Json& action) {
    std::string op = action.value("op", "?");
    ActionOutcome outcome;
    outcome.description = describe(action);
    ActionResult result;
    try {
      if (op == "register") {
        result = do_register(action);
      } else if (op == "delegate") {
        result = do_delegate(action);
      } else if (op == "install_policy") {
        result = do_install_policy();
      } else if (op == "issue") {
        result = do_issue(action);
      } else if (op == "request") {
        result = do_request(action);
      } else if (op == "revoke_subject") {
        result = do_revoke_subject(action);
      } else if (op == "revoke_incap") {
        result = do_revoke_incap(action);
      } else if (op == "revoke_coordinator") {
        result = do_revoke_coordinator(action);
      } else if (op == "advance_clock") {
        topology_->advance_clock(action.at("seconds").get<std::int64_t>());
        result.ok = true;
      } else if (op == "sync_now") {
        result = do_sync_now(action);
      } else if (op == "tamper_token") {
        result = do_tamper(action);
      } else {
        result.note = "unknown op '" + op + "'";
      }
    } catch (const std::exception& e) {
      result.ok = false;
      result.note = e.what();
    }
    outcome.passed = check_expect(action, result, &outcome.note);
    return outcome;
  }

  static std::string describe(const Json& action) {
    std::string op = action.value("op", "?");
    std::string text = op;
    for (const char* key : {"name", "coordinator", "subject", "object", "token",
                            "method", "path", "old", "new"}) {
      if (action.contains(key) && action[key].is_string()) {
        text += " " + action[key].get<std::string>();
      }
    }
    if (action.contains("provider")) {
      text += " provider=" + std::to_string(action["provider"].get<int>());
    }
    return text;
  }

  bool check_expect(const Json& action, const ActionResult& result,
                    std::string* note) {
    *note = result.note;
    if (!action.contains("expect")) return result.ok || result.status != 0;
    const auto& expect = action["expect"];
    if (expect.contains("ok") && expect["ok"].get<bool>() != result.ok) {
      *note = "expected ok=" + std::string(expect["ok"].get<bool>() ? "true" : "false") +
              ", got " + (result.ok ? "true" : "false") +
              (result.note.empty() ? "" : " (" + result.note + ")");
      return false;
    }
    if (expect.contains("status") &&
        expect["status"].get<int>() != result.status) {
      *note = "expected status " + std::to_string(expect["status"].get<int>()) +
              ", got " + std::to_string(result.status) +
              (result.note.empty() ? "" : " (" + result.note + ")");
      return false;
    }
    if (expect.contains("stage") &&
        expect["stage"].get<std::string>() != result.stage) {
      *note = "expected stage " + expect["stage"].get<std::string>() + ", got '" +
              result.stage + "'";
      return false;
    }
    if (expect.contains("signature_unchanged") &&
        expect["signature_unchanged"].get<bool>()) {
      if (signature_count_delta_ != 0) {
        *note = "signature verifier ran " +
                std::to_string(signature_count_delta_) + " time(s) during a deny";
        return false;
      }
    }
    return true;
  }

  ActionResult do_register(const Json& action) {
    std::string name = action.at("name").get<std::string>();
    std::string kind = action.value("kind", "subject");
    Actor actor;
    actor.key = KeyPair::generate();
    Profile p;
    auto parsed_kind = entity_kind_from(kind);
    if (!parsed_kind) throw Error("register: unknown kind " + kind);
    p.entity_kind = *parsed_kind;
    if (action.contains("attributes")) {
      for (const auto& a : action["attributes"]) {
        p.attributes.emplace_back(a[0].get<std::string>(), a[1].get<std::string>());
      }
    }
    if (p.attributes.empty()) p.attributes = {{"name", name}};
    p.public_key = actor.key.public_key();
    p.domain_id = "domain-1";

    ActionResult result;
    if (p.entity_kind == EntityKind::object) {
      // Objects are service providers: reserve the port first so the network
      // address can live in the registered profile.
      int port = pick_free_port();
      std::string address = "127.0.0.1:" + std::to_string(port);
      p.attributes.emplace_back("address", address);
      actor.profile = p;
      actor.vid = compute_vid(p, actor.key.sign(canonical_serialize(p)));

      std::vector<AccessRight> ars;
      if (action.contains("access_rights")) {
        ars = access_rights_from_json(action["access_rights"]);
      } else {
        ars = {AccessRight{Action::GET, "/data", {}},
               AccessRight{Action::GET, "/data/*", {}},
               AccessRight{Action::PUT, "/data", {}}};
      }
      Json body{{"profile", to_json(p)},
                {"owner_sign", hex_encode(actor.key.sign(canonical_serialize(p)))},
                {"access_rights", to_json(ars)}};
      auto client = topology_->pdc_client();
      auto res = client.Post("/register", body.dump(), "application/json");
      result.status = res ? res->status : 0;
      result.ok = res && res->status == 200;
      if (!result.ok) {
        result.note = res ? res->body : "no response";
        return result;
      }

      std::vector<ResourceSpec> resources;
      if (action.contains("resources")) {
        for (const auto& r : action["resources"]) {
          resources.push_back(ResourceSpec{r.at("path").get<std::string>(),
                                           r.at("payload").get<std::string>()});
        }
      } else {
        resources = {{"/data", Json{{"data", "reading from " + name}}.dump()},
                     {"/data/*", Json{{"data", "item from " + name}}.dump()}};
      }
      std::map<std::string, std::string> env;
      if (action.contains("environment")) {
        for (const auto& [k, v] : action["environment"].items()) {
          env[k] = v.get<std::string>();
        }
      }
      actor.provider_index =
          topology_->launch_provider(actor.vid, actor.key, resources, true, env, port);
    } else {
      actor.profile = p;
      actor.vid = compute_vid(p, actor.key.sign(canonical_serialize(p)));
      Json body{{"profile", to_json(p)},
                {"owner_sign", hex_encode(actor.key.sign(canonical_serialize(p)))}};
      auto client = topology_->pdc_client();
      auto res = client.Post("/register", body.dump(), "application/json");
      result.status = res ? res->status : 0;
      result.ok = res && res->status == 200;
      if (!result.ok) result.note = res ? res->body : "no response";
    }
    actors_[name] = std::move(actor);
    return result;
  }

  ActionResult do_delegate(const Json& action) {
    std::string name = action.at("coordinator").get<std::string>();
    ActionResult result;
    auto root_dc = fetch_root_dc();
    if (!root_dc) {
      result.note = "root delegation certificate unavailable";
      return result;
    }
    auto client = topology_->coordinator(name).client();
    Json body{{"dc", to_json(*root_dc)}};
    auto res = client.Post("/delegation/accept", body.dump(), "application/json");
    result.status = res ? res->status : 0;
    result.ok = res && res->status == 200;
    if (!result.ok) result.note = res ? res->body : "no response";
    return result;
  }

  ActionResult do_install_policy() {
    Json rules = Json::array();
    for (const auto& rule : scenario_.value("policy", Json::array())) {
      Json resolved = rule;
      std::string object_name = resolved.at("object").get<std::string>();
      resolved.erase("object");
      resolved["object_vid"] = actors_.at(object_name).vid.hex();
      rules.push_back(std::move(resolved));
    }
    Json body{{"rules", rules}};
    ActionResult result;
    auto pdc = topology_->pdc_client();
    auto res = pdc.Post("/admin/policy", body.dump(), "application/json");
    result.ok = res && res->status == 200;
    result.status = res ? res->status : 0;
    if (!result.ok) {
      result.note = res ? res->body : "no response";
      return result;
    }
    for (const auto& cname : coordinator_names()) {
      auto client = topology_->coordinator(cname).client();
      auto cres = client.Post("/admin/policy", body.dump(), "application/json");
      if (!cres || cres->status != 200) {
        result.ok = false;
        result.note = "policy install failed on " + cname;
        return result;
      }
    }
    return result;
  }

  ActionResult do_issue(const Json& action) {
    std::string subject = action.at("subject").get<std::string>();
    std::string object = action.at("object").get<std::string>();
    std::string via = action.value("via", "pdc");
    Json requested = action.contains("requested")
                         ? action["requested"]
                         : to_json(std::vector<AccessRight>{
                               AccessRight{Action::GET, "/data", {}}});
    Json body{{"subject_vid", actors_.at(subject).vid.hex()},
              {"object_vid", actors_.at(object).vid.hex()},
              {"requested", requested}};
    ActionResult result;
    httplib::Result res;
    if (via == "pdc") {
      auto client = topology_->pdc_client();
      res = client.Post("/cap/request", body.dump(), "application/json");
    } else {
      auto client = topology_->coordinator(via).client();
      res = client.Post("/cap/request", body.dump(), "application/json");
    }
    result.status = res ? res->status : 0;
    result.ok = res && res->status == 200;
    if (result.ok && action.contains("name")) {
      tokens_[action["name"].get<std::string>()] = res->body;
    }
    if (!result.ok) result.note = res ? res->body : "no response";
    return result;
  }

  ActionResult do_request(const Json& action) {
    int provider = action.at("provider").get<int>();
    std::string method = action.value("method", "GET");
    std::string path = action.value("path", "/data");
    httplib::Headers headers;
    if (action.contains("token")) {
      std::string token_name = action["token"].get<std::string>();
      if (token_name != "none") {
        headers.emplace(kTokenHeader, tokens_.at(token_name));
      }
    }
    const auto& node = topology_->provider(provider);
    auto client = node.client();

    std::uint64_t sig_before = signature_count(node);
    httplib::Result res;
    if (method == "GET") {
      res = client.Get(path, headers);
    } else if (method == "PUT") {
      res = client.Put(path, headers, "", "text/plain");
    } else if (method == "POST") {
      res = client.Post(path, headers, "", "text/plain");
    } else if (method == "DELETE") {
      res = client.Delete(path, headers);
    } else {
      throw Error("request: unsupported method " + method);
    }
    signature_count_delta_ =
        static_cast<std::int64_t>(signature_count(node)) -
        static_cast<std::int64_t>(sig_before);

    ActionResult result;
    result.status = res ? res->status : 0;
    result.ok = res && res->status == 200;
    if (res) {
      Json j = Json::parse(res->body, nullptr, false);
      if (!j.is_discarded() && j.contains("stage")) {
        result.stage = j["stage"].get<std::string>();
      }
      result.note = res->body;
    }
    return result;
  }

  ActionResult do_revoke_subject(const Json& action) {
    std::string subject = action.at("subject").get<std::string>();
    std::int64_t ttl = action.value("ttl", 3600);
    Json body{{"subject_vid", actors_.at(subject).vid.hex()}, {"ttl", ttl}};
    auto client = topology_->pdc_client();
    auto res = client.Post("/cap/revoke", body.dump(), "application/json");
    ActionResult result;
    result.status = res ? res->status : 0;
    result.ok = res && res->status == 200;
    if (!result.ok) result.note = res ? res->body : "no response";
    return result;
  }

  ActionResult do_revoke_incap(const Json& action) {
    std::string object = action.at("object").get<std::string>();
    Json body{{"object_vid", actors_.at(object).vid.hex()}};
    auto client = topology_->pdc_client();
    auto res = client.Post("/incap/revoke", body.dump(), "application/json");
    ActionResult result;
    result.status = res ? res->status : 0;
    result.ok = res && res->status == 200;
    return result;
  }

  /// The full coordinator-swap flow: the authority revokes the old
  /// coordinator and issues the replacement certificate; the new coordinator
  /// installs it and broadcasts the revocation to every provider.
  ActionResult do_revoke_coordinator(const Json& action) {
    std::string old_name = action.at("old").get<std::string>();
    std::string new_name = action.at("new").get<std::string>();
    Json body{{"old_delegatee", topology_->coordinator_vid(old_name).hex()},
              {"new_delegatee", topology_->coordinator_vid(new_name).hex()}};
    auto pdc = topology_->pdc_client();
    auto res = pdc.Post("/delegation/revoke", body.dump(), "application/json");
    ActionResult result;
    result.status = res ? res->status : 0;
    if (!res || res->status != 200) {
      result.note = res ? res->body : "no response";
      return result;
    }
    Json j = Json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("revocation_cert")) {
      result.note = "revocation response malformed";
      return result;
    }
    auto new_coord = topology_->coordinator(new_name).client();
    if (j.contains("replacement_dc")) {
      Json install{{"dc", j["replacement_dc"]}};
      auto ires = new_coord.Post("/delegation/install", install.dump(),
                                 "application/json");
      if (!ires || ires->status != 200) {
        result.note = "replacement certificate install failed";
        return result;
      }
    }
    auto bres = new_coord.Post("/revocation/receive-and-forward",
                               j["revocation_cert"].dump(), "application/json");
    if (!bres || bres->status != 200) {
      result.note = "revocation broadcast failed";
      return result;
    }
    Json breport = Json::parse(bres->body, nullptr, false);
    if (!breport.is_discarded() && breport.value("failures", 0) != 0) {
      result.note = "broadcast reported failures: " + bres->body;
      return result;
    }
    result.ok = true;
    return result;
  }

  ActionResult do_sync_now(const Json& action) {
    ActionResult result;
    result.ok = true;
    std::vector<std::string> names;
    if (action.contains("coordinator")) {
      names.push_back(action["coordinator"].get<std::string>());
    } else {
      names = coordinator_names();
    }
    for (const auto& name : names) {
      auto client = topology_->coordinator(name).client();
      auto res = client.Post("/sync/now", "{}", "application/json");
      if (!res || res->status != 200) {
        result.ok = false;
        result.note = "sync failed on " + name + (res ? ": " + res->body : "");
      }
    }
    result.status = result.ok ? 200 : 502;
    return result;
  }

  /// Flips one byte of the stored token's signature, keeping valid JSON.
  ActionResult do_tamper(const Json& action) {
    std::string source = action.at("token").get<std::string>();
    std::string target = action.value("name", source + "-tampered");
    Json token = Json::parse(tokens_.at(source));
    std::string sig = token.at("issue_sign").get<std::string>();
    sig[0] = sig[0] == 'a' ? 'b' : 'a';
    token["issue_sign"] = sig;
    tokens_[target] = token.dump();
    ActionResult result;
    result.ok = true;
    return result;
  }

  std::optional<DelegationCertificate> fetch_root_dc() {
    if (root_dc_) return root_dc_;
    auto client = topology_->pdc_client();
    Json challenge_req{{"vid", topology_->pdc_vid().hex()}};
    auto challenge = client.Post("/delegation/challenge", challenge_req.dump(),
                                 "application/json");
    if (!challenge || challenge->status != 200) return std::nullopt;
    Json cj = Json::parse(challenge->body, nullptr, false);
    auto nonce = hex_decode(cj.at("nonce").get<std::string>());
    if (!nonce) return std::nullopt;
    Bytes proof = topology_->pdc_key().sign(*nonce);
    Json req{{"vid", topology_->pdc_vid().hex()}, {"proof", hex_encode(proof)}};
    auto res = client.Post("/delegation/request", req.dump(), "application/json");
    if (!res || res->status != 200) return std::nullopt;
    Json dj = Json::parse(res->body, nullptr, false);
    if (dj.is_discarded()) return std::nullopt;
    root_dc_ = delegation_cert_from_json(dj);
    return root_dc_;
  }

  std::vector<std::string> coordinator_names() const {
    std::vector<std::string> names;
    for (const auto& c :
         scenario_.value("topology", Json::object()).value("coordinators",
                                                           Json::array())) {
      names.push_back(c.get<std::string>());
    }
    if (names.empty()) names.push_back("C1");
    return names;
  }

  static std::uint64_t signature_count(const NodeHandle& node) {
    auto client = node.client();
    auto res = client.Get("/metrics/stages");
    if (!res || res->status != 200) return 0;
    Json j = Json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("signature")) return 0;
    return j["signature"].value("count", 0ULL);
  }

  Json scenario_;
  std::unique_ptr<Topology> topology_;
  std::map<std::string, Actor> actors_;
  std::map<std::string, std::string> tokens_;
  std::optional<DelegationCertificate> root_dc_;
  std::int64_t signature_count_delta_ = 0;
};

// --- bundled scenarios --------------------------------------------------------

inline std::vector<std::string> builtin_scenario_names() {
  return {"happy-path", "deny-matrix", "coordinator-swap"};
}

/// Register subject + object, delegate, issue from both tiers, retrieve data.
inline Json scenario_happy_path() {
  return Json::parse(R"({
    "name": "happy-path",
    "topology": {"coordinators": ["C1"]},
    "policy": [
      {"subject_match": [["role", "nurse"]], "object": "O1",
       "granted": [{"action": "GET", "resource": "/data", "conditions": []}],
       "validity_duration": 600}
    ],
    "actions": [
      {"op": "register", "name": "S1", "kind": "subject",
       "attributes": [["role", "nurse"]], "expect": {"ok": true}},
      {"op": "register", "name": "O1", "kind": "object", "expect": {"ok": true}},
      {"op": "delegate", "coordinator": "C1", "expect": {"ok": true}},
      {"op": "install_policy", "expect": {"ok": true}},
      {"op": "issue", "name": "T1", "subject": "S1", "object": "O1", "via": "pdc",
       "requested": [{"action": "GET", "resource": "/data", "conditions": []}],
       "expect": {"ok": true}},
      {"op": "request", "token": "T1", "provider": 0, "method": "GET",
       "path": "/data", "expect": {"status": 200}},
      {"op": "sync_now", "coordinator": "C1", "expect": {"ok": true}},
      {"op": "issue", "name": "T2", "subject": "S1", "object": "O1", "via": "C1",
       "requested": [{"action": "GET", "resource": "/data", "conditions": []}],
       "expect": {"ok": true}},
      {"op": "request", "token": "T2", "provider": 0, "method": "GET",
       "path": "/data", "expect": {"status": 200}},
      {"op": "request", "token": "none", "provider": 0, "method": "GET",
       "path": "/data", "expect": {"status": 401}}
    ]
  })");
}

/// Six denial classes, each at its expected stage, with the signature
/// verifier provably idle on earlier-stage denials.
inline Json scenario_deny_matrix() {
  return Json::parse(R"({
    "name": "deny-matrix",
    "topology": {"coordinators": ["C1"]},
    "policy": [
      {"subject_match": [["role", "nurse"]], "object": "O1",
       "granted": [{"action": "GET", "resource": "/data", "conditions": []}],
       "validity_duration": 600},
      {"subject_match": [["role", "nurse"]], "object": "O2",
       "granted": [{"action": "GET", "resource": "/data", "conditions": []}],
       "conditions": [{"kind": "env_equals", "key": "location", "value": "lab9"}],
       "validity_duration": 600}
    ],
    "actions": [
      {"op": "register", "name": "S1", "kind": "subject",
       "attributes": [["role", "nurse"]], "expect": {"ok": true}},
      {"op": "register", "name": "O1", "kind": "object",
       "environment": {"location": "lab1"}, "expect": {"ok": true}},
      {"op": "register", "name": "O2", "kind": "object",
       "environment": {"location": "lab1"}, "expect": {"ok": true}},
      {"op": "delegate", "coordinator": "C1", "expect": {"ok": true}},
      {"op": "install_policy", "expect": {"ok": true}},
      {"op": "issue", "name": "T1", "subject": "S1", "object": "O1", "via": "pdc",
       "requested": [{"action": "GET", "resource": "/data", "conditions": []}],
       "expect": {"ok": true}},
      {"op": "request", "token": "T1", "provider": 0, "method": "PUT",
       "path": "/data",
       "expect": {"status": 403, "stage": "action_grant", "signature_unchanged": true}},
      {"op": "request", "token": "T1", "provider": 0, "method": "GET",
       "path": "/other",
       "expect": {"status": 403, "stage": "action_grant", "signature_unchanged": true}},
      {"op": "issue", "name": "T2", "subject": "S1", "object": "O2", "via": "pdc",
       "requested": [{"action": "GET", "resource": "/data", "conditions": []}],
       "expect": {"ok": true}},
      {"op": "request", "token": "T2", "provider": 1, "method": "GET",
       "path": "/data",
       "expect": {"status": 403, "stage": "condition", "signature_unchanged": true}},
      {"op": "tamper_token", "token": "T1", "name": "T1x", "expect": {"ok": true}},
      {"op": "request", "token": "T1x", "provider": 0, "method": "GET",
       "path": "/data", "expect": {"status": 403, "stage": "signature"}},
      {"op": "advance_clock", "seconds": 700},
      {"op": "request", "token": "T1", "provider": 0, "method": "GET",
       "path": "/data",
       "expect": {"status": 403, "stage": "token_time", "signature_unchanged": true}},
      {"op": "issue", "name": "T3", "subject": "S1", "object": "O1", "via": "pdc",
       "requested": [{"action": "GET", "resource": "/data", "conditions": []}],
       "expect": {"ok": true}},
      {"op": "request", "token": "T3", "provider": 0, "method": "GET",
       "path": "/data", "expect": {"status": 200}},
      {"op": "revoke_subject", "subject": "S1", "ttl": 3600, "expect": {"ok": true}},
      {"op": "request", "token": "T3", "provider": 0, "method": "GET",
       "path": "/data",
       "expect": {"status": 403, "stage": "revocation", "signature_unchanged": true}}
    ]
  })");
}

/// Revoke C1, install C2; C1's previously and newly issued tokens are denied
/// everywhere while C2 takes over issuance.
inline Json scenario_coordinator_swap() {
  return Json::parse(R"({
    "name": "coordinator-swap",
    "topology": {"coordinators": ["C1", "C2"]},
    "policy": [
      {"subject_match": [["role", "nurse"]], "object": "O1",
       "granted": [{"action": "GET", "resource": "/data", "conditions": []}],
       "validity_duration": 600}
    ],
    "actions": [
      {"op": "register", "name": "S1", "kind": "subject",
       "attributes": [["role", "nurse"]], "expect": {"ok": true}},
      {"op": "register", "name": "O1", "kind": "object", "expect": {"ok": true}},
      {"op": "delegate", "coordinator": "C1", "expect": {"ok": true}},
      {"op": "install_policy", "expect": {"ok": true}},
      {"op": "sync_now", "coordinator": "C1", "expect": {"ok": true}},
      {"op": "issue", "name": "T1", "subject": "S1", "object": "O1", "via": "C1",
       "requested": [{"action": "GET", "resource": "/data", "conditions": []}],
       "expect": {"ok": true}},
      {"op": "request", "token": "T1", "provider": 0, "method": "GET",
       "path": "/data", "expect": {"status": 200}},
      {"op": "revoke_coordinator", "old": "C1", "new": "C2", "expect": {"ok": true}},
      {"op": "request", "token": "T1", "provider": 0, "method": "GET",
       "path": "/data", "expect": {"status": 403, "stage": "signature"}},
      {"op": "issue", "name": "T2", "subject": "S1", "object": "O1", "via": "C1",
       "requested": [{"action": "GET", "resource": "/data", "conditions": []}],
       "expect": {"ok": true}},
      {"op": "request", "token": "T2", "provider": 0, "method": "GET",
       "path": "/data", "expect": {"status": 403, "stage": "signature"}},
      {"op": "sync_now", "coordinator": "C2", "expect": {"ok": true}},
      {"op": "issue", "name": "T3", "subject": "S1", "object": "O1", "via": "C2",
       "requested": [{"action": "GET", "resource": "/data", "conditions": []}],
       "expect": {"ok": true}},
      {"op": "request", "token": "T3", "provider": 0, "method": "GET",
       "path": "/data", "expect": {"status": 200}}
    ]
  })");
}

inline Json builtin_scenario(const std::string& name) {
  if (name == "happy-path") return scenario_happy_path();
  if (name == "deny-matrix") return scenario_deny_matrix();
  if (name == "coordinator-swap") return scenario_coordinator_swap();
  throw Error("unknown scenario '" + name + "'");
}

}  // namespace fedcap::harness
