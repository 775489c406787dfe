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
#include <string>
#include <thread>

#include <httplib.h>

#include "fedcap/clock.hpp"
#include "fedcap/wire.hpp"

namespace fedcap {

inline void reply_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void reply_error(httplib::Response& res, int status, const std::string& msg) {
  reply_json(res, status, Json{{"error", msg}});
}

/// Parses the request body as a JSON object; replies 400 and returns nullopt
/// on garbage.
inline std::optional<Json> parse_body(const httplib::Request& req,
                                      httplib::Response& res) {
  Json j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    reply_error(res, 400, "malformed JSON body");
    return std::nullopt;
  }
  return j;
}

struct ListenAddress {
  std::string host;
  int port = 0;
};

inline ListenAddress parse_listen(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos || colon + 1 >= s.size()) {
    throw Error("listen address must be host:port, got '" + s + "'");
  }
  ListenAddress a;
  a.host = s.substr(0, colon);
  a.port = std::stoi(s.substr(colon + 1));
  return a;
}

/// Standard service plumbing shared by all three services: /healthz and, when
/// a SimClock is installed, POST /clock/advance.
inline void mount_common_endpoints(httplib::Server& server, const std::string& role,
                                   const ClockPtr& clock,
                                   const std::shared_ptr<SimClock>& sim) {
  server.Get("/healthz", [role, clock](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200, Json{{"role", role}, {"now", clock->now()}});
  });
  if (sim) {
    server.Post("/clock/advance",
                [sim, clock](const httplib::Request& req, httplib::Response& res) {
                  auto body = parse_body(req, res);
                  if (!body) return;
                  if (!body->contains("seconds") ||
                      !(*body)["seconds"].is_number_integer()) {
                    reply_error(res, 400, "expected integer 'seconds'");
                    return;
                  }
                  sim->advance((*body)["seconds"].get<std::int64_t>());
                  reply_json(res, 200, Json{{"now", clock->now()}});
                });
  }
}

/// Owns an httplib server running on its own thread.
class ServerRunner {
public:
  ServerRunner() = default;
  ServerRunner(const ServerRunner&) = delete;
  ServerRunner& operator=(const ServerRunner&) = delete;

  ~ServerRunner() { stop(); }

  /// Binds and starts serving; throws when the port cannot be bound.
  void start(httplib::Server& server, const std::string& host, int port) {
    server_ = &server;
    if (!server.bind_to_port(host, port)) {
      throw Error("cannot bind " + host + ":" + std::to_string(port));
    }
    thread_ = std::thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  void stop() {
    if (server_ != nullptr) {
      server_->stop();
      server_ = nullptr;
    }
    if (thread_.joinable()) thread_.join();
  }

private:
  httplib::Server* server_ = nullptr;
  std::thread thread_;
};

}  // namespace fedcap
