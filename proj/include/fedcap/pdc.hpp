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

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fedcap/delegation.hpp"
#include "fedcap/http_util.hpp"
#include "fedcap/policy.hpp"
#include "fedcap/token.hpp"
#include "fedcap/wire.hpp"

namespace fedcap {

struct RegisteredEntity {
  VirtualIdentity vid;
  Profile profile;
  Bytes owner_sign;
  std::uint64_t version = 0;
};

struct PoolChange {
  std::uint64_t version = 0;
  bool removed = false;
  VirtualIdentity vid;
  std::optional<InternalCapability> incap;
};

struct VersionedCertificate {
  std::uint64_t version = 0;
  RevocationCertificate cert;
};

/// Synchronization delta: everything with version > since_version.
struct SyncDelta {
  std::uint64_t current_version = 0;
  std::vector<RegisteredEntity> profiles;
  std::vector<PoolChange> pool;
  std::vector<VersionedCertificate> certificates;

  bool empty() const {
    return profiles.empty() && pool.empty() && certificates.empty();
  }
};

inline Json to_json(const SyncDelta& d) {
  Json profiles = Json::array();
  for (const auto& e : d.profiles) {
    profiles.push_back(Json{{"vid", e.vid.hex()},
                            {"profile", to_json(e.profile)},
                            {"owner_sign", hex_encode(e.owner_sign)},
                            {"version", e.version}});
  }
  Json pool = Json::array();
  for (const auto& c : d.pool) {
    Json entry{{"op", c.removed ? "remove" : "upsert"},
               {"vid", c.vid.hex()},
               {"version", c.version}};
    if (c.incap) entry["incap"] = to_json(*c.incap);
    pool.push_back(std::move(entry));
  }
  Json certs = Json::array();
  for (const auto& vc : d.certificates) {
    certs.push_back(Json{{"cert", to_json(vc.cert)}, {"version", vc.version}});
  }
  return Json{{"current_version", d.current_version},
              {"profiles", std::move(profiles)},
              {"pool", std::move(pool)},
              {"certificates", std::move(certs)}};
}

inline SyncDelta sync_delta_from_json(const Json& j) {
  using namespace wire_detail;
  require_keys(j, {"current_version", "profiles", "pool", "certificates"}, {},
               "sync delta");
  SyncDelta d;
  d.current_version = j.at("current_version").get<std::uint64_t>();
  for (const auto& e : j.at("profiles")) {
    require_keys(e, {"vid", "profile", "owner_sign", "version"}, {}, "sync profile");
    RegisteredEntity ent;
    ent.vid = get_vid(e, "vid", "sync profile");
    ent.profile = profile_from_json(e.at("profile"));
    ent.owner_sign = get_hex(e, "owner_sign", "sync profile");
    ent.version = e.at("version").get<std::uint64_t>();
    d.profiles.push_back(std::move(ent));
  }
  for (const auto& e : j.at("pool")) {
    require_keys(e, {"op", "vid", "version"}, {"incap"}, "sync pool entry");
    PoolChange c;
    std::string op = get_string(e, "op", "sync pool entry");
    if (op != "upsert" && op != "remove") throw Error("sync pool entry: bad op");
    c.removed = op == "remove";
    c.vid = get_vid(e, "vid", "sync pool entry");
    c.version = e.at("version").get<std::uint64_t>();
    if (e.contains("incap")) c.incap = internal_cap_from_json(e.at("incap"));
    if (!c.removed && !c.incap) throw Error("sync pool entry: upsert without incap");
    d.pool.push_back(std::move(c));
  }
  for (const auto& e : j.at("certificates")) {
    require_keys(e, {"cert", "version"}, {}, "sync certificate");
    d.certificates.push_back(VersionedCertificate{
        e.at("version").get<std::uint64_t>(),
        revocation_cert_from_json(e.at("cert"))});
  }
  return d;
}

/// Canonical bytes of a capability pool; replicas are in sync when these
/// match the PDC's byte for byte.
inline Bytes pool_canonical_bytes(
    const std::map<VirtualIdentity, InternalCapability>& pool) {
  CanonicalWriter w;
  w.count(pool.size());
  for (const auto& [vid, incap] : pool) canonical_append(w, incap);
  return w.bytes();
}

// ---------------------------------------------------------------------------

struct PdcConfig {
  std::string listen = "127.0.0.1:9100";
  std::string domain_id = "domain-1";
  std::string key_file;
  std::string policy_file;
  std::string data_dir;
  int sync_period_s = 10;
  bool sim_clock = false;
};

/// Cloud policy decision center: registration, capability pool, policy-based
/// issuance, revocation and synchronization; hosts the delegation authority.
class PdcCore {
public:
  PdcCore(KeyPair key, ClockPtr clock, std::string domain_id = "domain-1",
          std::string data_dir = "")
      : key_(std::move(key)), clock_(std::move(clock)),
        domain_id_(std::move(domain_id)), data_dir_(std::move(data_dir)) {
    if (!data_dir_.empty()) {
      std::filesystem::create_directories(data_dir_);
      load_persisted();
    }
    Profile self;
    self.entity_kind = EntityKind::pdc;
    self.attributes = {{"role", "policy-decision-center"}};
    self.public_key = key_.public_key();
    self.domain_id = domain_id_;
    Bytes self_sign = key_.sign(canonical_serialize(self));
    root_vid_ = register_or_lookup(self, self_sign);
    delegation_ = std::make_unique<DelegationAuthority>(
        root_vid_, key_,
        [this](const VirtualIdentity& vid) { return profile_of(vid); }, clock_);
  }

  const VirtualIdentity& root_vid() const { return root_vid_; }
  const Bytes& public_key() const { return key_.public_key(); }
  const KeyPair& key() const { return key_; }
  DelegationAuthority& delegation() { return *delegation_; }
  ClockPtr clock() const { return clock_; }

  // --- registration ----------------------------------------------------------

  VirtualIdentity register_entity(const Profile& profile, const Bytes& owner_sign) {
    validate(profile);
    VirtualIdentity vid = compute_vid(profile, owner_sign);
    std::lock_guard lock(mutex_);
    for (const auto& [_, ent] : entities_) {
      if (ent.profile == profile) {
        throw Error("duplicate profile (vid " + ent.vid.hex() + ")");
      }
    }
    RegisteredEntity ent{vid, profile, owner_sign, ++version_};
    entities_[vid] = ent;
    persist(Json{{"event", "register"},
                 {"vid", vid.hex()},
                 {"profile", to_json(profile)},
                 {"owner_sign", hex_encode(owner_sign)},
                 {"version", ent.version}});
    return vid;
  }

  std::optional<RegisteredEntity> lookup(const VirtualIdentity& vid) const {
    std::lock_guard lock(mutex_);
    auto it = entities_.find(vid);
    if (it == entities_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<Profile> profile_of(const VirtualIdentity& vid) const {
    auto e = lookup(vid);
    if (!e) return std::nullopt;
    return e->profile;
  }

  // --- capability pool --------------------------------------------------------

  InternalCapability mint_internal_capability(const VirtualIdentity& object_vid,
                                              std::vector<AccessRight> ars) {
    auto incap = mint_internal_cap(object_vid, std::move(ars));
    std::lock_guard lock(mutex_);
    pool_[object_vid] = incap;
    PoolChange change{++version_, false, object_vid, incap};
    pool_log_.push_back(change);
    persist(Json{{"event", "incap_upsert"},
                 {"vid", object_vid.hex()},
                 {"incap", to_json(incap)},
                 {"version", change.version}});
    return incap;
  }

  /// Removes the object's internal capability. Absent object is a warned
  /// no-op and does not bump the version.
  bool revoke_internal_cap(const VirtualIdentity& object_vid) {
    std::lock_guard lock(mutex_);
    auto it = pool_.find(object_vid);
    if (it == pool_.end()) {
      std::fprintf(stderr, "[pdc] revoke_internal_cap: object %s not in pool\n",
                   object_vid.hex().c_str());
      return false;
    }
    pool_.erase(it);
    PoolChange change{++version_, true, object_vid, std::nullopt};
    pool_log_.push_back(change);
    persist(Json{{"event", "incap_remove"},
                 {"vid", object_vid.hex()},
                 {"version", change.version}});
    return true;
  }

  std::optional<InternalCapability> pool_entry(const VirtualIdentity& vid) const {
    std::lock_guard lock(mutex_);
    auto it = pool_.find(vid);
    if (it == pool_.end()) return std::nullopt;
    return it->second;
  }

  std::uint64_t version() const {
    std::lock_guard lock(mutex_);
    return version_;
  }

  Bytes pool_bytes() const {
    std::lock_guard lock(mutex_);
    return pool_canonical_bytes(pool_);
  }

  // --- policy -----------------------------------------------------------------

  void set_policy(std::vector<PolicyRule> rules) {
    std::lock_guard lock(mutex_);
    rules_ = std::move(rules);
  }

  std::vector<PolicyRule> policy() const {
    std::lock_guard lock(mutex_);
    return rules_;
  }

  // --- issuance ---------------------------------------------------------------

  struct IssueResult {
    std::optional<CapabilityToken> token;
    std::string rejection;
    bool ok() const { return token.has_value(); }
  };

  IssueResult issue_external_cap(const VirtualIdentity& subject_vid,
                                 const VirtualIdentity& object_vid,
                                 const std::vector<AccessRight>& requested) {
    auto subject = lookup(subject_vid);
    if (!subject) return {std::nullopt, "unknown subject"};
    auto object = lookup(object_vid);
    if (!object) return {std::nullopt, "unknown object"};
    auto incap = pool_entry(object_vid);
    if (!incap) return {std::nullopt, "object has no capability in pool"};

    auto decision = evaluate_policy(policy(), subject->profile.attributes,
                                    object_vid, requested);
    if (!decision.granted()) return {std::nullopt, decision.reason};

    std::int64_t now = clock_->now();
    CapabilityToken token = mint_external_cap(
        *incap, subject_vid, decision.grant->granted, decision.grant->conditions,
        TokenValidity{now, now + decision.grant->validity_duration}, key_,
        provider_address(object->profile), now);
    return {std::move(token), ""};
  }

  // --- revocation -------------------------------------------------------------

  RevocationCertificate revoke_external_cap(const VirtualIdentity& subject_vid,
                                            std::int64_t ttl) {
    if (!lookup(subject_vid)) throw Error("unknown subject");
    std::int64_t now = clock_->now();
    RevocationCertificate cert;
    cert.revoked_vid = subject_vid;
    cert.scope = RevocationScope::subject_cap;
    cert.issue_time = now;
    cert.expire_time = now + ttl;
    cert.issuer = key_.public_key();
    cert.signature = key_.sign(revocation_signing_body(cert));
    std::lock_guard lock(mutex_);
    VersionedCertificate vc{++version_, cert};
    certs_.push_back(vc);
    persist(Json{{"event", "revocation_cert"},
                 {"cert", to_json(cert)},
                 {"version", vc.version}});
    return cert;
  }

  // --- synchronization ----------------------------------------------------------

  struct SyncResult {
    std::optional<SyncDelta> delta;
    std::string error;
    bool ok() const { return delta.has_value(); }
  };

  SyncResult sync_domain(const VirtualIdentity& coordinator_vid,
                         std::uint64_t since_version) const {
    if (!delegation_->is_active_delegatee(coordinator_vid)) {
      return {std::nullopt, "coordinator has no active delegation"};
    }
    std::lock_guard lock(mutex_);
    SyncDelta d;
    d.current_version = version_;
    for (const auto& [_, ent] : entities_) {
      if (ent.version > since_version) d.profiles.push_back(ent);
    }
    for (const auto& change : pool_log_) {
      if (change.version > since_version) d.pool.push_back(change);
    }
    for (const auto& vc : certs_) {
      if (vc.version > since_version) d.certificates.push_back(vc);
    }
    return {std::move(d), ""};
  }

  /// Well-known profile attribute carrying the provider's network address.
  static std::string provider_address(const Profile& p) {
    for (const auto& [k, v] : p.attributes) {
      if (k == "address") return v;
    }
    return "";
  }

  void snapshot() {
    if (data_dir_.empty()) return;
    std::lock_guard lock(mutex_);
    Json entities = Json::array();
    for (const auto& [_, e] : entities_) {
      entities.push_back(Json{{"vid", e.vid.hex()},
                              {"profile", to_json(e.profile)},
                              {"owner_sign", hex_encode(e.owner_sign)},
                              {"version", e.version}});
    }
    Json pool = Json::array();
    for (const auto& c : pool_log_) {
      Json entry{{"op", c.removed ? "remove" : "upsert"},
                 {"vid", c.vid.hex()},
                 {"version", c.version}};
      if (c.incap) entry["incap"] = to_json(*c.incap);
      pool.push_back(std::move(entry));
    }
    Json certs = Json::array();
    for (const auto& vc : certs_) {
      certs.push_back(Json{{"cert", to_json(vc.cert)}, {"version", vc.version}});
    }
    Json snap{{"version", version_},
              {"entities", std::move(entities)},
              {"pool_log", std::move(pool)},
              {"certificates", std::move(certs)}};
    std::ofstream out(snapshot_path(), std::ios::trunc);
    out << snap.dump() << '\n';
    std::filesystem::remove(log_path());
  }

private:
  VirtualIdentity register_or_lookup(const Profile& profile, const Bytes& sign) {
    try {
      return register_entity(profile, sign);
    } catch (const Error&) {
      std::lock_guard lock(mutex_);
      for (const auto& [vid, ent] : entities_) {
        if (ent.profile == profile) return vid;
      }
      throw;
    }
  }

  std::string log_path() const { return data_dir_ + "/events.jsonl"; }
  std::string snapshot_path() const { return data_dir_ + "/snapshot.json"; }

  void persist(const Json& event) {
    if (data_dir_.empty()) return;
    std::ofstream out(log_path(), std::ios::app);
    out << event.dump() << '\n';
  }

  void apply_event(const Json& e) {
    std::string kind = e.at("event").get<std::string>();
    if (kind == "register") {
      RegisteredEntity ent;
      ent.vid = *VirtualIdentity::from_hex(e.at("vid").get<std::string>());
      ent.profile = profile_from_json(e.at("profile"));
      ent.owner_sign = *hex_decode(e.at("owner_sign").get<std::string>());
      ent.version = e.at("version").get<std::uint64_t>();
      entities_[ent.vid] = ent;
      version_ = std::max(version_, ent.version);
    } else if (kind == "incap_upsert") {
      PoolChange c;
      c.vid = *VirtualIdentity::from_hex(e.at("vid").get<std::string>());
      c.incap = internal_cap_from_json(e.at("incap"));
      c.version = e.at("version").get<std::uint64_t>();
      pool_[c.vid] = *c.incap;
      pool_log_.push_back(c);
      version_ = std::max(version_, c.version);
    } else if (kind == "incap_remove") {
      PoolChange c;
      c.removed = true;
      c.vid = *VirtualIdentity::from_hex(e.at("vid").get<std::string>());
      c.version = e.at("version").get<std::uint64_t>();
      pool_.erase(c.vid);
      pool_log_.push_back(c);
      version_ = std::max(version_, c.version);
    } else if (kind == "revocation_cert") {
      VersionedCertificate vc;
      vc.cert = revocation_cert_from_json(e.at("cert"));
      vc.version = e.at("version").get<std::uint64_t>();
      certs_.push_back(vc);
      version_ = std::max(version_, vc.version);
    }
  }

  void load_persisted() {
    std::ifstream snap(snapshot_path());
    if (snap) {
      Json j = Json::parse(snap, nullptr, false);
      if (!j.is_discarded()) {
        version_ = j.at("version").get<std::uint64_t>();
        for (const auto& e : j.at("entities")) {
          RegisteredEntity ent;
          ent.vid = *VirtualIdentity::from_hex(e.at("vid").get<std::string>());
          ent.profile = profile_from_json(e.at("profile"));
          ent.owner_sign = *hex_decode(e.at("owner_sign").get<std::string>());
          ent.version = e.at("version").get<std::uint64_t>();
          entities_[ent.vid] = ent;
        }
        for (const auto& e : j.at("pool_log")) {
          PoolChange c;
          c.removed = e.at("op").get<std::string>() == "remove";
          c.vid = *VirtualIdentity::from_hex(e.at("vid").get<std::string>());
          if (e.contains("incap")) c.incap = internal_cap_from_json(e.at("incap"));
          c.version = e.at("version").get<std::uint64_t>();
          if (c.removed) {
            pool_.erase(c.vid);
          } else {
            pool_[c.vid] = *c.incap;
          }
          pool_log_.push_back(c);
        }
        for (const auto& e : j.at("certificates")) {
          certs_.push_back(VersionedCertificate{
              e.at("version").get<std::uint64_t>(),
              revocation_cert_from_json(e.at("cert"))});
        }
      }
    }
    std::ifstream log(log_path());
    if (log) {
      std::string line;
      while (std::getline(log, line)) {
        if (line.empty()) continue;
        Json e = Json::parse(line, nullptr, false);
        if (e.is_discarded()) continue;
        apply_event(e);
      }
    }
  }

  KeyPair key_;
  ClockPtr clock_;
  std::string domain_id_;
  std::string data_dir_;
  VirtualIdentity root_vid_;
  std::unique_ptr<DelegationAuthority> delegation_;

  mutable std::mutex mutex_;
  std::uint64_t version_ = 0;
  std::map<VirtualIdentity, RegisteredEntity> entities_;
  std::map<VirtualIdentity, InternalCapability> pool_;
  std::vector<PoolChange> pool_log_;
  std::vector<VersionedCertificate> certs_;
  std::vector<PolicyRule> rules_;
};

// ---------------------------------------------------------------------------

/// HTTP facade over PdcCore, hosting the DAC/IAC endpoints.
class PdcServer {
public:
  PdcServer(PdcCore& core, std::shared_ptr<SimClock> sim = nullptr)
      : core_(core), sim_(std::move(sim)) {
    mount();
  }

  httplib::Server& server() { return server_; }

  void start(const std::string& listen) {
    auto addr = parse_listen(listen);
    runner_.start(server_, addr.host, addr.port);
  }

  void stop() { runner_.stop(); }

  /// Coordinator addresses that completed the delegation handshake; subject
  /// revocation certificates are pushed there.
  std::vector<std::string> coordinator_addresses() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [_, addr] : coordinator_addresses_) out.push_back(addr);
    return out;
  }

private:
  void mount() {
    mount_common_endpoints(server_, "pdc", core_.clock(), sim_);

    server_.Post("/register", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"profile", "owner_sign"},
                                  {"access_rights"}, "register request");
        Profile profile = profile_from_json(body->at("profile"));
        Bytes owner_sign = wire_detail::get_hex(*body, "owner_sign", "register");
        VirtualIdentity vid = core_.register_entity(profile, owner_sign);
        Json out{{"vid", vid.hex()}};
        if (body->contains("access_rights")) {
          auto ars = access_rights_from_json(body->at("access_rights"));
          auto incap = core_.mint_internal_capability(vid, std::move(ars));
          out["incap"] = to_json(incap);
        }
        reply_json(res, 200, out);
      } catch (const Error& e) {
        int status = std::string(e.what()).find("duplicate") == 0 ? 409 : 400;
        reply_error(res, status, e.what());
      }
    });

    server_.Get(R"(/profiles/([0-9a-f]{64}))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  auto vid = VirtualIdentity::from_hex(req.matches[1].str());
                  auto ent = vid ? core_.lookup(*vid) : std::nullopt;
                  if (!ent) {
                    reply_error(res, 404, "unknown vid");
                    return;
                  }
                  reply_json(res, 200,
                             Json{{"vid", ent->vid.hex()},
                                  {"profile", to_json(ent->profile)}});
                });

    server_.Post("/cap/request", [this](const httplib::Request& req,
                                        httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"subject_vid", "object_vid", "requested"},
                                  {}, "capability request");
        auto subject = wire_detail::get_vid(*body, "subject_vid", "capability request");
        auto object = wire_detail::get_vid(*body, "object_vid", "capability request");
        auto requested = access_rights_from_json(body->at("requested"));
        auto result = core_.issue_external_cap(subject, object, requested);
        if (!result.ok()) {
          reply_error(res, 403, result.rejection);
          return;
        }
        reply_json(res, 200, to_json(*result.token));
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    server_.Post("/cap/revoke", [this](const httplib::Request& req,
                                       httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"subject_vid", "ttl"}, {},
                                  "revocation request");
        auto subject = wire_detail::get_vid(*body, "subject_vid", "revocation request");
        std::int64_t ttl = wire_detail::get_int(*body, "ttl", "revocation request");
        if (ttl <= 0) {
          reply_error(res, 400, "ttl must be positive");
          return;
        }
        auto cert = core_.revoke_external_cap(subject, ttl);
        push_certificate(cert);
        reply_json(res, 200, to_json(cert));
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    server_.Post("/incap/revoke", [this](const httplib::Request& req,
                                         httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"object_vid"}, {}, "incap revocation");
        auto object = wire_detail::get_vid(*body, "object_vid", "incap revocation");
        bool removed = core_.revoke_internal_cap(object);
        reply_json(res, 200, Json{{"removed", removed}});
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    server_.Get("/sync", [this](const httplib::Request& req, httplib::Response& res) {
      auto vid_param = req.get_param_value("coordinator");
      auto since_param = req.get_param_value("since");
      auto vid = VirtualIdentity::from_hex(vid_param);
      if (!vid) {
        reply_error(res, 400, "missing or malformed 'coordinator' parameter");
        return;
      }
      std::uint64_t since = 0;
      try {
        since = since_param.empty() ? 0 : std::stoull(since_param);
      } catch (...) {
        reply_error(res, 400, "malformed 'since' parameter");
        return;
      }
      auto result = core_.sync_domain(*vid, since);
      if (!result.ok()) {
        reply_error(res, 403, result.error);
        return;
      }
      reply_json(res, 200, to_json(*result.delta));
    });

    server_.Post("/delegation/challenge", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"vid"}, {}, "challenge request");
        auto vid = wire_detail::get_vid(*body, "vid", "challenge request");
        Bytes nonce = core_.delegation().issue_challenge(vid);
        reply_json(res, 200, Json{{"nonce", hex_encode(nonce)}});
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    server_.Post("/delegation/request", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"vid", "proof"}, {}, "delegation request");
        auto vid = wire_detail::get_vid(*body, "vid", "delegation request");
        Bytes proof = wire_detail::get_hex(*body, "proof", "delegation request");
        auto result = core_.delegation().request_delegation(vid, proof);
        if (!result.ok()) {
          reply_error(res, 403, result.error);
          return;
        }
        reply_json(res, 200, to_json(*result.certificate));
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    server_.Post("/delegation/offer", [this](const httplib::Request& req,
                                             httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"dc", "delegatee_vid", "domain_id", "proof"},
                                  {"address"}, "delegation offer");
        auto dc = delegation_cert_from_json(body->at("dc"));
        auto delegatee = wire_detail::get_vid(*body, "delegatee_vid", "delegation offer");
        std::string domain = wire_detail::get_string(*body, "domain_id",
                                                     "delegation offer");
        Bytes proof = wire_detail::get_hex(*body, "proof", "delegation offer");
        auto result = core_.delegation().offer_delegation(dc, delegatee, domain, proof);
        if (!result.ok()) {
          reply_error(res, 403, result.error);
          return;
        }
        if (body->contains("address")) {
          std::lock_guard lock(mutex_);
          coordinator_addresses_[delegatee] =
              wire_detail::get_string(*body, "address", "delegation offer");
        }
        reply_json(res, 200, to_json(*result.certificate));
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    server_.Post("/delegation/revoke", [this](const httplib::Request& req,
                                              httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"old_delegatee"}, {"new_delegatee"},
                                  "delegation revocation");
        auto old_vid = wire_detail::get_vid(*body, "old_delegatee",
                                            "delegation revocation");
        std::optional<VirtualIdentity> new_vid;
        if (body->contains("new_delegatee")) {
          new_vid = wire_detail::get_vid(*body, "new_delegatee",
                                         "delegation revocation");
        }
        auto result = core_.delegation().revoke_delegation(old_vid, new_vid);
        if (!result.ok()) {
          reply_error(res, 400, result.error);
          return;
        }
        {
          std::lock_guard lock(mutex_);
          coordinator_addresses_.erase(old_vid);
        }
        Json out{{"revocation_cert", to_json(*result.certificate)}};
        if (result.replacement) out["replacement_dc"] = to_json(*result.replacement);
        reply_json(res, 200, out);
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    server_.Post("/admin/policy", [this](const httplib::Request& req,
                                         httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"rules"}, {}, "policy install");
        core_.set_policy(policy_rules_from_json(body->at("rules")));
        reply_json(res, 200, Json{{"installed", true}});
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });
  }

  /// Best-effort push to every known coordinator; the periodic sync pull
  /// covers any coordinator that is down.
  void push_certificate(const RevocationCertificate& cert) {
    for (const auto& address : coordinator_addresses()) {
      try {
        auto addr = parse_listen(address);
        httplib::Client client(addr.host, addr.port);
        client.set_connection_timeout(2, 0);
        client.Post("/revocation/receive-and-forward", to_json(cert).dump(),
                    "application/json");
      } catch (...) {
        std::fprintf(stderr, "[pdc] certificate push to %s failed\n",
                     address.c_str());
      }
    }
  }

  PdcCore& core_;
  std::shared_ptr<SimClock> sim_;
  httplib::Server server_;
  ServerRunner runner_;
  mutable std::mutex mutex_;
  std::map<VirtualIdentity, std::string> coordinator_addresses_;
};

}  // namespace fedcap
