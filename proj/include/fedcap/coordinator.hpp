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

#include <atomic>
#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "fedcap/pdc.hpp"

namespace fedcap {

struct ProviderEndpoint {
  VirtualIdentity vid;
  std::string address;
};

struct DeliveryReport {
  struct Entry {
    std::string address;
    bool delivered = false;
  };
  std::vector<Entry> deliveries;

  int failures() const {
    int n = 0;
    for (const auto& d : deliveries) n += d.delivered ? 0 : 1;
    return n;
  }
};

/// Fog-layer delegatee: mirrors PDC state via pull sync, issues domain-local
/// capabilities under its delegation certificate, and fans revocation
/// certificates out to the providers of its domain.
class CoordinatorCore {
public:
  /// Sends one certificate to one provider address; returns success.
  using CertSender =
      std::function<bool(const std::string& address, const RevocationCertificate&)>;

  CoordinatorCore(KeyPair key, ClockPtr clock, std::string domain_id)
      : key_(std::move(key)), clock_(std::move(clock)),
        domain_id_(std::move(domain_id)) {
    sender_ = [](const std::string& address, const RevocationCertificate& cert) {
      try {
        auto addr = parse_listen(address);
        httplib::Client client(addr.host, addr.port);
        client.set_connection_timeout(2, 0);
        auto res = client.Post("/revocation", to_json(cert).dump(), "application/json");
        return res && res->status == 200;
      } catch (...) {
        return false;
      }
    };
  }

  const Bytes& public_key() const { return key_.public_key(); }
  const KeyPair& key() const { return key_; }
  const std::string& domain_id() const { return domain_id_; }
  ClockPtr clock() const { return clock_; }

  void set_own_vid(const VirtualIdentity& vid) { own_vid_ = vid; }
  const VirtualIdentity& own_vid() const { return own_vid_; }

  void set_cert_sender(CertSender sender) { sender_ = std::move(sender); }

  // --- delegation -------------------------------------------------------------

  /// Installs the certificate obtained from the delegation handshake. A
  /// second certificate replaces the current one only when newer.
  bool install_certificate(const DelegationCertificate& dc) {
    std::lock_guard lock(mutex_);
    if (dc.delegatee_vid != own_vid_) return false;
    if (certificate_ && certificate_->issue_time >= dc.issue_time) return false;
    certificate_ = dc;
    revoked_ = false;
    return true;
  }

  std::optional<DelegationCertificate> certificate() const {
    std::lock_guard lock(mutex_);
    return certificate_;
  }

  bool active() const {
    std::lock_guard lock(mutex_);
    return certificate_ && !revoked_ && certificate_->expiry > clock_->now();
  }

  // --- mirror state -----------------------------------------------------------

  void apply_sync_delta(const SyncDelta& delta) {
    std::vector<RevocationCertificate> to_forward;
    {
      std::lock_guard lock(mutex_);
      for (const auto& ent : delta.profiles) profiles_[ent.vid] = ent;
      std::vector<PoolChange> changes(delta.pool);
      std::sort(changes.begin(), changes.end(),
                [](const PoolChange& a, const PoolChange& b) {
                  return a.version < b.version;
                });
      for (const auto& change : changes) {
        if (change.removed) {
          pool_.erase(change.vid);
        } else {
          pool_[change.vid] = *change.incap;
        }
      }
      for (const auto& vc : delta.certificates) {
        std::string sig = hex_encode(vc.cert.signature);
        if (seen_certs_.insert(sig).second) to_forward.push_back(vc.cert);
      }
      synced_version_ = delta.current_version;
    }
    for (const auto& cert : to_forward) handle_certificate(cert);
  }

  std::uint64_t synced_version() const {
    std::lock_guard lock(mutex_);
    return synced_version_;
  }

  Bytes pool_bytes() const {
    std::lock_guard lock(mutex_);
    return pool_canonical_bytes(pool_);
  }

  std::optional<Profile> profile_of(const VirtualIdentity& vid) const {
    std::lock_guard lock(mutex_);
    auto it = profiles_.find(vid);
    if (it == profiles_.end()) return std::nullopt;
    return it->second.profile;
  }

  std::optional<InternalCapability> pool_entry(const VirtualIdentity& vid) const {
    std::lock_guard lock(mutex_);
    auto it = pool_.find(vid);
    if (it == pool_.end()) return std::nullopt;
    return it->second;
  }

  // --- policy -----------------------------------------------------------------

  void set_rules(std::vector<PolicyRule> rules) {
    std::lock_guard lock(mutex_);
    rules_ = std::move(rules);
  }

  std::vector<PolicyRule> rules() const {
    std::lock_guard lock(mutex_);
    return rules_;
  }

  // --- issuance ---------------------------------------------------------------

  PdcCore::IssueResult issue_local_cap(const VirtualIdentity& subject_vid,
                                       const VirtualIdentity& object_vid,
                                       const std::vector<AccessRight>& requested) {
    if (!active()) return {std::nullopt, "delegation lapsed"};
    auto subject = profile_of(subject_vid);
    if (!subject) return {std::nullopt, "unknown subject"};
    auto object = profile_of(object_vid);
    if (!object) return {std::nullopt, "unknown object"};
    auto incap = pool_entry(object_vid);
    if (!incap) return {std::nullopt, "object has no capability in pool"};

    auto decision =
        evaluate_policy(rules(), subject->attributes, object_vid, requested);
    if (!decision.granted()) return {std::nullopt, decision.reason};

    std::int64_t now = clock_->now();
    CapabilityToken token = mint_external_cap(
        *incap, subject_vid, decision.grant->granted, decision.grant->conditions,
        TokenValidity{now, now + decision.grant->validity_duration}, key_,
        PdcCore::provider_address(*object), now);
    return {std::move(token), ""};
  }

  // --- providers and revocation fan-out ----------------------------------------

  void register_provider(const VirtualIdentity& vid, const std::string& address) {
    std::lock_guard lock(mutex_);
    providers_[vid] = address;
  }

  std::vector<ProviderEndpoint> providers() const {
    std::lock_guard lock(mutex_);
    std::vector<ProviderEndpoint> out;
    for (const auto& [vid, address] : providers_) out.push_back({vid, address});
    return out;
  }

  /// Sends the certificate to every registered provider. Failed deliveries
  /// stay queued and are retried by retry_pending() on the sync tick.
  DeliveryReport broadcast_revocation(const RevocationCertificate& cert) {
    if (cert.scope == RevocationScope::coordinator && cert.revoked_vid == own_vid_) {
      std::lock_guard lock(mutex_);
      revoked_ = true;
    }
    DeliveryReport report;
    for (const auto& provider : providers()) {
      bool ok = sender_(provider.address, cert);
      report.deliveries.push_back({provider.address, ok});
      if (!ok) {
        std::lock_guard lock(mutex_);
        pending_.push_back({provider.address, cert});
      }
    }
    return report;
  }

  int retry_pending() {
    std::vector<PendingDelivery> pending;
    {
      std::lock_guard lock(mutex_);
      pending.swap(pending_);
    }
    int delivered = 0;
    for (auto& p : pending) {
      if (sender_(p.address, p.cert)) {
        ++delivered;
      } else {
        std::lock_guard lock(mutex_);
        pending_.push_back(std::move(p));
      }
    }
    return delivered;
  }

  int pending_count() const {
    std::lock_guard lock(mutex_);
    return static_cast<int>(pending_.size());
  }

  /// A certificate arriving by push or via sync: coordinator-scope against
  /// this coordinator deactivates it; everything is forwarded to providers.
  DeliveryReport handle_certificate(const RevocationCertificate& cert) {
    return broadcast_revocation(cert);
  }

private:
  struct PendingDelivery {
    std::string address;
    RevocationCertificate cert;
  };

  KeyPair key_;
  ClockPtr clock_;
  std::string domain_id_;
  VirtualIdentity own_vid_;
  CertSender sender_;

  mutable std::mutex mutex_;
  std::optional<DelegationCertificate> certificate_;
  bool revoked_ = false;
  std::map<VirtualIdentity, RegisteredEntity> profiles_;
  std::map<VirtualIdentity, InternalCapability> pool_;
  std::map<VirtualIdentity, std::string> providers_;
  std::vector<PolicyRule> rules_;
  std::set<std::string> seen_certs_;
  std::vector<PendingDelivery> pending_;
  std::uint64_t synced_version_ = 0;
};

// ---------------------------------------------------------------------------

struct CoordinatorConfig {
  std::string listen = "127.0.0.1:9200";
  std::string pdc_address = "127.0.0.1:9100";
  std::string domain_id = "domain-1";
  std::string key_file;
  std::string local_policy_file;
  int sync_period_s = 10;
  bool sim_clock = false;
  Profile profile;  // own identity, registered at startup
};

/// HTTP facade plus the periodic sync loop.
class CoordinatorService {
public:
  CoordinatorService(CoordinatorCore& core, std::string pdc_address,
                     int sync_period_s, std::shared_ptr<SimClock> sim = nullptr)
      : core_(core), pdc_address_(std::move(pdc_address)),
        sync_period_s_(sync_period_s), sim_(std::move(sim)) {
    mount();
  }

  ~CoordinatorService() { stop(); }

  httplib::Server& server() { return server_; }
  CoordinatorCore& core() { return core_; }

  /// Registers the coordinator's identity with the PDC (tolerating an
  /// existing registration) and stores the resulting VID.
  bool ensure_registered(const Profile& profile) {
    Bytes owner_sign = core_.key().sign(canonical_serialize(profile));
    VirtualIdentity vid = compute_vid(profile, owner_sign);
    core_.set_own_vid(vid);
    auto client = pdc_client();
    Json body{{"profile", to_json(profile)}, {"owner_sign", hex_encode(owner_sign)}};
    auto res = client->Post("/register", body.dump(), "application/json");
    if (!res) return false;
    return res->status == 200 || res->status == 409;
  }

  /// Completes the delegation handshake for a root DC received in an offer.
  bool complete_delegation(const DelegationCertificate& root_dc) {
    auto client = pdc_client();
    Json challenge_req{{"vid", core_.own_vid().hex()}};
    auto challenge =
        client->Post("/delegation/challenge", challenge_req.dump(), "application/json");
    if (!challenge || challenge->status != 200) return false;
    Json cj = Json::parse(challenge->body, nullptr, false);
    if (cj.is_discarded() || !cj.contains("nonce")) return false;
    auto nonce = hex_decode(cj["nonce"].get<std::string>());
    if (!nonce) return false;
    Bytes proof = core_.key().sign(*nonce);
    Json offer{{"dc", to_json(root_dc)},
               {"delegatee_vid", core_.own_vid().hex()},
               {"domain_id", core_.domain_id()},
               {"proof", hex_encode(proof)},
               {"address", listen_address_}};
    auto res = client->Post("/delegation/offer", offer.dump(), "application/json");
    if (!res || res->status != 200) return false;
    Json dj = Json::parse(res->body, nullptr, false);
    if (dj.is_discarded()) return false;
    try {
      return core_.install_certificate(delegation_cert_from_json(dj));
    } catch (const Error&) {
      return false;
    }
  }

  /// One sync pull against the PDC; returns false on transport or
  /// authorization failure.
  bool sync_once() {
    auto client = pdc_client();
    std::string path = "/sync?coordinator=" + core_.own_vid().hex() +
                       "&since=" + std::to_string(core_.synced_version());
    auto res = client->Get(path);
    if (!res || res->status != 200) return false;
    Json j = Json::parse(res->body, nullptr, false);
    if (j.is_discarded()) return false;
    try {
      core_.apply_sync_delta(sync_delta_from_json(j));
    } catch (const Error&) {
      return false;
    }
    core_.retry_pending();
    return true;
  }

  void start(const std::string& listen) {
    listen_address_ = listen;
    auto addr = parse_listen(listen);
    runner_.start(server_, addr.host, addr.port);
    stop_requested_ = false;
    sync_thread_ = std::thread([this] { sync_loop(); });
  }

  void stop() {
    {
      std::lock_guard lock(sync_mutex_);
      stop_requested_ = true;
    }
    sync_cv_.notify_all();
    if (sync_thread_.joinable()) sync_thread_.join();
    runner_.stop();
  }

private:
  void mount() {
    mount_common_endpoints(server_, "coordinator", core_.clock(), sim_);

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
        auto result = core_.issue_local_cap(subject, object, requested);
        if (!result.ok()) {
          reply_error(res, 403, result.rejection);
          return;
        }
        reply_json(res, 200, to_json(*result.token));
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    server_.Post("/provider/register", [this](const httplib::Request& req,
                                              httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"vid", "address"}, {}, "provider registration");
        auto vid = wire_detail::get_vid(*body, "vid", "provider registration");
        std::string address =
            wire_detail::get_string(*body, "address", "provider registration");
        core_.register_provider(vid, address);
        reply_json(res, 200, Json{{"registered", true}});
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    server_.Post("/revocation/receive-and-forward",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   auto body = parse_body(req, res);
                   if (!body) return;
                   try {
                     auto cert = revocation_cert_from_json(*body);
                     auto report = core_.handle_certificate(cert);
                     Json deliveries = Json::array();
                     for (const auto& d : report.deliveries) {
                       deliveries.push_back(Json{{"address", d.address},
                                                 {"delivered", d.delivered}});
                     }
                     reply_json(res, 200,
                                Json{{"failures", report.failures()},
                                     {"deliveries", std::move(deliveries)}});
                   } catch (const Error& e) {
                     reply_error(res, 400, e.what());
                   }
                 });

    server_.Post("/delegation/accept", [this](const httplib::Request& req,
                                              httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"dc"}, {}, "delegation acceptance");
        auto dc = delegation_cert_from_json(body->at("dc"));
        if (!complete_delegation(dc)) {
          reply_error(res, 403, "delegation handshake failed");
          return;
        }
        reply_json(res, 200, to_json(*core_.certificate()));
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    // Installs a certificate the authority already issued to this
    // coordinator, e.g. the replacement certificate minted during a
    // coordinator swap.
    server_.Post("/delegation/install", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        wire_detail::require_keys(*body, {"dc"}, {}, "delegation install");
        auto dc = delegation_cert_from_json(body->at("dc"));
        if (!core_.install_certificate(dc)) {
          reply_error(res, 403, "certificate not applicable");
          return;
        }
        reply_json(res, 200, to_json(dc));
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
        core_.set_rules(policy_rules_from_json(body->at("rules")));
        reply_json(res, 200, Json{{"installed", true}});
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    // Admin: trigger an immediate sync pull (the harness uses this instead
    // of waiting out the period).
    server_.Post("/sync/now", [this](const httplib::Request&, httplib::Response& res) {
      bool ok = sync_once();
      reply_json(res, ok ? 200 : 502,
                 Json{{"synced", ok}, {"version", core_.synced_version()}});
    });
  }

  std::unique_ptr<httplib::Client> pdc_client() {
    auto addr = parse_listen(pdc_address_);
    auto client = std::make_unique<httplib::Client>(addr.host, addr.port);
    client->set_connection_timeout(2, 0);
    client->set_read_timeout(5, 0);
    return client;
  }

  void sync_loop() {
    std::unique_lock lock(sync_mutex_);
    while (!stop_requested_) {
      sync_cv_.wait_for(lock, std::chrono::seconds(sync_period_s_),
                        [this] { return stop_requested_; });
      if (stop_requested_) break;
      lock.unlock();
      if (core_.active()) sync_once();
      lock.lock();
    }
  }

  CoordinatorCore& core_;
  std::string pdc_address_;
  std::string listen_address_;
  int sync_period_s_;
  std::shared_ptr<SimClock> sim_;
  httplib::Server server_;
  ServerRunner runner_;
  std::thread sync_thread_;
  std::mutex sync_mutex_;
  std::condition_variable sync_cv_;
  bool stop_requested_ = false;
};

}  // namespace fedcap
