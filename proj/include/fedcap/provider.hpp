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
#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fedcap/authz.hpp"
#include "fedcap/http_util.hpp"
#include "fedcap/wire.hpp"

namespace fedcap {

inline constexpr const char* kTokenHeader = "X-Capability-Token";

struct TrustedIssuer {
  VirtualIdentity vid;
  Bytes public_key;
};

struct ResourceSpec {
  std::string path;  // exact or trailing "/*" pattern
  std::string payload;
};

struct ProviderConfig {
  VirtualIdentity vid;
  std::string listen = "127.0.0.1:9300";
  std::string coordinator_address;  // optional: register here at startup
  std::vector<TrustedIssuer> trusted_issuers;
  std::map<std::string, std::string> environment;
  std::vector<ResourceSpec> resources;
  bool enforce = true;        // false = baseline mode, middleware bypassed
  bool deny_detail = true;    // include failing stage in 403 bodies
  bool strict_chain = false;  // re-verify the rnd chain (needs rnd0)
  std::optional<Digest> rnd0;
  int artificial_delay_ms = 0;
  bool sim_clock = false;
  std::string key_file;  // only used to derive identity in standalone runs
};

inline void validate(const ProviderConfig& cfg) {
  if (cfg.enforce && cfg.trusted_issuers.empty()) {
    throw Error("provider config: at least one trusted issuer key required");
  }
  if (cfg.strict_chain && !cfg.rnd0) {
    throw Error("provider config: strict_chain requires rnd0");
  }
}

struct ProviderResponse {
  int status = 500;
  std::string body;
  std::string content_type = "application/json";
};

struct TimingBucket {
  std::atomic<std::uint64_t> count{0};
  std::atomic<std::uint64_t> total_ns{0};

  void add(std::uint64_t ns) {
    count.fetch_add(1, std::memory_order_relaxed);
    total_ns.fetch_add(ns, std::memory_order_relaxed);
  }
};

struct StageTimingReport {
  struct Line {
    std::string name;
    std::uint64_t count = 0;
    std::uint64_t total_ns = 0;
    double mean_ms = 0.0;
  };
  std::vector<Line> lines;

  const Line* find(const std::string& name) const {
    for (const auto& l : lines) {
      if (l.name == name) return &l;
    }
    return nullptr;
  }
};

/// Edge enforcement point: extracts the capability token from each inbound
/// resource request, runs the validation pipeline and only then invokes the
/// resource handler. Every malformed path fails closed. Decisions are never
/// cached, so an applied revocation is visible to the very next request.
class ProviderCore {
public:
  using Handler = std::function<ProviderResponse(const RequestContext&)>;

  ProviderCore(ProviderConfig config, ClockPtr clock)
      : config_(std::move(config)), clock_(std::move(clock)) {
    validate(config_);
    for (const auto& r : config_.resources) {
      std::string payload = r.payload;
      add_handler(r.path, [payload](const RequestContext&) {
        return ProviderResponse{200, payload, "application/json"};
      });
    }
  }

  const ProviderConfig& config() const { return config_; }
  ClockPtr clock() const { return clock_; }
  const AuthzEngine& engine() const { return engine_; }

  void add_handler(const std::string& path_pattern, Handler handler) {
    std::unique_lock lock(handler_mutex_);
    handlers_.emplace_back(path_pattern, std::move(handler));
  }

  /// The interception path. `token_header` empty means no token presented.
  ProviderResponse handle(Action method, const std::string& uri_path,
                          const std::string& client_address,
                          const std::string& token_header) {
    using std::chrono::steady_clock;
    auto request_start = steady_clock::now();
    RequestContext ctx;
    ctx.method = method;
    ctx.uri_path = uri_path;
    ctx.client_address = client_address;
    ctx.now = clock_->now();
    ctx.environment = config_.environment;

    ProviderResponse response;
    if (!config_.enforce) {
      response = dispatch(ctx);
    } else {
      response = enforce(ctx, token_header);
    }
    auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                  steady_clock::now() - request_start)
                  .count();
    request_total_.add(static_cast<std::uint64_t>(ns));
    return response;
  }

  void apply_revocation(const RevocationCertificate& cert) {
    if (!cert_signature_trusted(cert)) {
      std::fprintf(stderr, "[provider] discarding revocation certificate with "
                           "untrusted or invalid signature\n");
      return;
    }
    std::unique_lock lock(revocation_mutex_);
    if (cert.scope == RevocationScope::subject_cap) {
      revocation_list_.add(cert.revoked_vid, cert.expire_time);
      revocation_list_.last_certificate = cert;
      return;
    }
    // Coordinator scope: only the latest certificate is kept; the revoked
    // coordinator's key moves to the issuer denylist.
    if (latest_coordinator_cert_ &&
        latest_coordinator_cert_->issue_time >= cert.issue_time) {
      return;
    }
    latest_coordinator_cert_ = cert;
    denied_issuers_.clear();
    for (const auto& issuer : config_.trusted_issuers) {
      if (issuer.vid == cert.revoked_vid) denied_issuers_.push_back(issuer.public_key);
    }
  }

  RevocationList revocation_list() const {
    std::shared_lock lock(revocation_mutex_);
    return revocation_list_;
  }

  std::optional<RevocationCertificate> latest_coordinator_cert() const {
    std::shared_lock lock(revocation_mutex_);
    return latest_coordinator_cert_;
  }

  std::vector<Bytes> denied_issuer_keys() const {
    std::shared_lock lock(revocation_mutex_);
    return denied_issuers_;
  }

  StageTimingReport stage_timing_report() const {
    StageTimingReport report;
    auto line = [](const std::string& name, std::uint64_t count,
                   std::uint64_t total_ns) {
      StageTimingReport::Line l;
      l.name = name;
      l.count = count;
      l.total_ns = total_ns;
      l.mean_ms = count == 0 ? 0.0
                             : static_cast<double>(total_ns) /
                                   static_cast<double>(count) / 1e6;
      return l;
    };
    report.lines.push_back(line("parse", parse_.count.load(), parse_.total_ns.load()));
    for (int i = 0; i < AuthzEngine::kStageCount; ++i) {
      auto s = engine_.stats(i);
      report.lines.push_back(line(AuthzEngine::stage_name(i), s.count, s.total_ns));
    }
    report.lines.push_back(
        line("authz_total", authz_total_.count.load(), authz_total_.total_ns.load()));
    report.lines.push_back(line("request_total", request_total_.count.load(),
                                request_total_.total_ns.load()));
    return report;
  }

  void reset_metrics() {
    parse_.count = 0;
    parse_.total_ns = 0;
    authz_total_.count = 0;
    authz_total_.total_ns = 0;
    request_total_.count = 0;
    request_total_.total_ns = 0;
    engine_.reset();
  }

  Decision last_decision() const {
    std::shared_lock lock(revocation_mutex_);
    return last_decision_;
  }

private:
  bool cert_signature_trusted(const RevocationCertificate& cert) const {
    for (const auto& issuer : config_.trusted_issuers) {
      if (issuer.public_key == cert.issuer &&
          ed25519_verify(cert.issuer, revocation_signing_body(cert),
                         cert.signature)) {
        return true;
      }
    }
    return false;
  }

  ProviderResponse enforce(const RequestContext& ctx, const std::string& token_header) {
    using std::chrono::steady_clock;

    if (token_header.empty()) {
      return ProviderResponse{401, Json{{"error", "missing capability token"}}.dump()};
    }

    auto parse_start = steady_clock::now();
    std::optional<CapabilityToken> token;
    try {
      token = token_from_string(token_header);
    } catch (const Error&) {
      token.reset();
    }
    parse_.add(static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(steady_clock::now() -
                                                             parse_start)
            .count()));
    if (!token) {
      return ProviderResponse{401, Json{{"error", "malformed capability token"}}.dump()};
    }

    IssuerTrust trust;
    trust.restrict_issuers = true;
    std::optional<ChainCheck> chain;
    RevocationList rl;
    {
      std::shared_lock lock(revocation_mutex_);
      rl = revocation_list_;
      trust.denied_keys = denied_issuers_;
    }
    for (const auto& issuer : config_.trusted_issuers) {
      trust.trusted_keys.push_back(issuer.public_key);
    }
    if (config_.strict_chain && config_.rnd0) {
      chain = ChainCheck{config_.vid, *config_.rnd0};
    }

    auto authz_start = steady_clock::now();
    Decision decision = engine_.authorize(*token, ctx, rl, &trust, chain);
    authz_total_.add(static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(steady_clock::now() -
                                                             authz_start)
            .count()));
    {
      std::unique_lock lock(revocation_mutex_);
      last_decision_ = decision;
    }

    if (!decision.granted()) {
      Json body{{"error", "deny access notification"}};
      if (config_.deny_detail) {
        body["stage"] = to_name(decision.stage);
        body["detail"] = decision.detail;
      }
      return ProviderResponse{403, body.dump()};
    }
    return dispatch(ctx);
  }

  ProviderResponse dispatch(const RequestContext& ctx) {
    Handler handler;
    {
      std::shared_lock lock(handler_mutex_);
      for (const auto& [pattern, h] : handlers_) {
        if (resource_matches(pattern, ctx.uri_path)) {
          handler = h;
          break;
        }
      }
    }
    if (!handler) {
      return ProviderResponse{404, Json{{"error", "no such resource"}}.dump()};
    }
    try {
      return handler(ctx);
    } catch (const std::exception& e) {
      return ProviderResponse{500, Json{{"error", e.what()}}.dump()};
    } catch (...) {
      return ProviderResponse{500, Json{{"error", "handler failure"}}.dump()};
    }
  }

  ProviderConfig config_;
  ClockPtr clock_;
  AuthzEngine engine_;

  mutable std::shared_mutex handler_mutex_;
  std::vector<std::pair<std::string, Handler>> handlers_;

  mutable std::shared_mutex revocation_mutex_;
  RevocationList revocation_list_;
  std::optional<RevocationCertificate> latest_coordinator_cert_;
  std::vector<Bytes> denied_issuers_;
  Decision last_decision_;

  TimingBucket parse_;
  TimingBucket authz_total_;
  TimingBucket request_total_;
};

// ---------------------------------------------------------------------------

/// HTTP wrapper exposing the configured resources behind the middleware plus
/// the certificate inbox and the metrics endpoint.
class ProviderServer {
public:
  ProviderServer(ProviderCore& core, std::shared_ptr<SimClock> sim = nullptr)
      : core_(core), sim_(std::move(sim)) {
    mount();
  }

  ~ProviderServer() { stop(); }

  httplib::Server& server() { return server_; }

  void start(const std::string& listen) {
    auto addr = parse_listen(listen);
    runner_.start(server_, addr.host, addr.port);
  }

  void stop() { runner_.stop(); }

  /// Registers this provider with its domain coordinator.
  bool register_with_coordinator(const std::string& coordinator_address,
                                 const std::string& own_address) {
    try {
      auto addr = parse_listen(coordinator_address);
      httplib::Client client(addr.host, addr.port);
      client.set_connection_timeout(2, 0);
      Json body{{"vid", core_.config().vid.hex()}, {"address", own_address}};
      auto res = client.Post("/provider/register", body.dump(), "application/json");
      return res && res->status == 200;
    } catch (...) {
      return false;
    }
  }

private:
  void mount() {
    mount_common_endpoints(server_, "provider", core_.clock(), sim_);

    server_.Post("/revocation", [this](const httplib::Request& req,
                                       httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      try {
        core_.apply_revocation(revocation_cert_from_json(*body));
        reply_json(res, 200, Json{{"applied", true}});
      } catch (const Error& e) {
        reply_error(res, 400, e.what());
      }
    });

    server_.Get("/metrics/stages", [this](const httplib::Request&,
                                          httplib::Response& res) {
      auto report = core_.stage_timing_report();
      Json stages = Json::object();
      for (const auto& l : report.lines) {
        stages[l.name] = Json{{"count", l.count},
                              {"total_ns", l.total_ns},
                              {"mean_ms", l.mean_ms}};
      }
      reply_json(res, 200, stages);
    });

    server_.Post("/metrics/reset", [this](const httplib::Request&,
                                          httplib::Response& res) {
      core_.reset_metrics();
      reply_json(res, 200, Json{{"reset", true}});
    });

    // Everything else is a resource request going through the middleware.
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      if (req.path == "/healthz" || req.path == "/revocation" ||
          req.path == "/metrics/stages" || req.path == "/metrics/reset" ||
          req.path == "/clock/advance") {
        res.status = 405;
        return;
      }
      auto method = action_from(req.method);
      if (!method) {
        reply_error(res, 405, "unsupported method");
        return;
      }
      if (core_.config().artificial_delay_ms > 0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(core_.config().artificial_delay_ms));
      }
      auto out = core_.handle(*method, req.path, req.remote_addr,
                              req.get_header_value(kTokenHeader));
      res.status = out.status;
      res.set_content(out.body, out.content_type);
    };
    server_.Get(".*", route);
    server_.Put(".*", route);
    server_.Post(".*", route);
    server_.Delete(".*", route);
  }

  ProviderCore& core_;
  std::shared_ptr<SimClock> sim_;
  httplib::Server server_;
  ServerRunner runner_;
};

}  // namespace fedcap
