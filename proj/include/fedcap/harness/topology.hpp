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
#include <memory>
#include <string>
#include <vector>

#include "fedcap/crypto.hpp"
#include "fedcap/harness/process.hpp"
#include "fedcap/provider.hpp"
#include "fedcap/token.hpp"

namespace fedcap::harness {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

inline void write_key_file(const std::string& path, const KeyPair& key) {
  write_file(path, Json{{"public_key", hex_encode(key.public_key())},
                        {"private_key", hex_encode(key.private_key())}}
                       .dump(2) +
                       "\n");
}

inline KeyPair load_key_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open key file: " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("public_key") || !j.contains("private_key")) {
    throw Error("malformed key file: " + path);
  }
  auto pub = hex_decode(j["public_key"].get<std::string>());
  auto priv = hex_decode(j["private_key"].get<std::string>());
  if (!pub || !priv) throw Error("malformed key material in " + path);
  return KeyPair(*pub, *priv);
}

struct NodeHandle {
  std::string name;
  std::string address;  // host:port
  ChildProcess process;

  httplib::Client client() const {
    auto colon = address.rfind(':');
    httplib::Client c(address.substr(0, colon),
                      std::stoi(address.substr(colon + 1)));
    c.set_connection_timeout(2, 0);
    c.set_read_timeout(10, 0);
    return c;
  }
};

struct TopologyOptions {
  std::vector<std::string> coordinators = {"C1"};
  std::string domain_id = "domain-1";
  int artificial_delay_ms = 0;
  std::string run_dir;  // scratch directory; created when empty
  std::string binary_dir;  // where the service executables live
};

/// Desk-scale loopback topology of real child processes: one PDC, the named
/// coordinators, and providers spawned as objects register.
class Topology {
public:
  explicit Topology(TopologyOptions options) : options_(std::move(options)) {
    if (options_.binary_dir.empty()) options_.binary_dir = executable_dir();
    if (options_.run_dir.empty()) {
      options_.run_dir =
          (std::filesystem::temp_directory_path() /
           ("fedcap-run-" + std::to_string(::getpid()) + "-" +
            std::to_string(std::chrono::steady_clock::now().time_since_epoch().count() %
                           100000)))
              .string();
    }
    std::filesystem::create_directories(options_.run_dir);
  }

  const std::string& run_dir() const { return options_.run_dir; }
  const KeyPair& pdc_key() const { return pdc_key_; }
  const std::string& pdc_address() const { return pdc_.address; }
  VirtualIdentity pdc_vid() const { return pdc_vid_; }

  const KeyPair& coordinator_key(const std::string& name) const {
    return coordinator_keys_.at(name);
  }
  VirtualIdentity coordinator_vid(const std::string& name) const {
    return coordinator_vids_.at(name);
  }
  const NodeHandle& coordinator(const std::string& name) const {
    return *coordinators_.at(name);
  }
  const NodeHandle& provider(int index) const { return *providers_.at(index); }
  int provider_count() const { return static_cast<int>(providers_.size()); }

  void launch_pdc() {
    pdc_key_ = KeyPair::generate();
    std::string key_path = options_.run_dir + "/pdc_key.json";
    write_key_file(key_path, pdc_key_);
    int port = pick_free_port();
    pdc_.name = "pdc";
    pdc_.address = "127.0.0.1:" + std::to_string(port);
    Json config{{"listen", pdc_.address},
                {"domain_id", options_.domain_id},
                {"key_file", key_path},
                {"data_dir", options_.run_dir + "/pdc_data"},
                {"sync_period_s", 1},
                {"sim_clock", true}};
    std::string config_path = options_.run_dir + "/pdc.json";
    write_file(config_path, config.dump(2));
    pdc_.process = ChildProcess::spawn("pdc", options_.binary_dir + "/fedcap-pdc",
                                       {"--config", config_path},
                                       options_.run_dir + "/pdc.log");
    if (!wait_healthy("127.0.0.1", port)) throw Error("pdc did not become healthy");

    Profile self;
    self.entity_kind = EntityKind::pdc;
    self.attributes = {{"role", "policy-decision-center"}};
    self.public_key = pdc_key_.public_key();
    self.domain_id = options_.domain_id;
    pdc_vid_ = compute_vid(self, pdc_key_.sign(canonical_serialize(self)));
  }

  void launch_coordinators() {
    for (const auto& name : options_.coordinators) {
      KeyPair key = KeyPair::generate();
      coordinator_keys_.emplace(name, key);
      std::string key_path = options_.run_dir + "/" + name + "_key.json";
      write_key_file(key_path, key);
      int port = pick_free_port();
      auto node = std::make_unique<NodeHandle>();
      node->name = name;
      node->address = "127.0.0.1:" + std::to_string(port);
      Json config{{"listen", node->address},
                  {"pdc_address", pdc_.address},
                  {"domain_id", options_.domain_id},
                  {"key_file", key_path},
                  {"sync_period_s", 1},
                  {"sim_clock", true},
                  {"attributes", Json::array({Json::array({"name", name})})}};
      std::string config_path = options_.run_dir + "/" + name + ".json";
      write_file(config_path, config.dump(2));
      node->process = ChildProcess::spawn(
          name, options_.binary_dir + "/fedcap-coordinator",
          {"--config", config_path}, options_.run_dir + "/" + name + ".log");
      if (!wait_healthy("127.0.0.1", port)) {
        throw Error("coordinator " + name + " did not become healthy");
      }
      Profile profile = coordinator_profile(name, key);
      coordinator_vids_.emplace(name, compute_vid(profile, key.sign(canonical_serialize(
                                                               profile))));
      coordinators_.emplace(name, std::move(node));
    }
  }

  Profile coordinator_profile(const std::string& name, const KeyPair& key) const {
    Profile p;
    p.entity_kind = EntityKind::coordinator;
    p.attributes = {{"name", name}};
    p.public_key = key.public_key();
    p.domain_id = options_.domain_id;
    return p;
  }

  /// Spawns a provider serving the given resources; the provider trusts the
  /// PDC and every coordinator and registers itself with all of them.
  int launch_provider(const VirtualIdentity& vid, const KeyPair& key,
                      const std::vector<ResourceSpec>& resources, bool enforce,
                      const std::map<std::string, std::string>& environment = {},
                      int port = 0) {
    int index = static_cast<int>(providers_.size());
    std::string name = "provider-" + std::to_string(index);
    std::string key_path = options_.run_dir + "/" + name + "_key.json";
    write_key_file(key_path, key);
    if (port == 0) port = pick_free_port();
    auto node = std::make_unique<NodeHandle>();
    node->name = name;
    node->address = "127.0.0.1:" + std::to_string(port);

    Json trusted = Json::array();
    trusted.push_back(Json{{"vid", pdc_vid_.hex()},
                           {"public_key", hex_encode(pdc_key_.public_key())}});
    for (const auto& [cname, ckey] : coordinator_keys_) {
      trusted.push_back(Json{{"vid", coordinator_vids_.at(cname).hex()},
                             {"public_key", hex_encode(ckey.public_key())}});
    }
    Json resource_list = Json::array();
    for (const auto& r : resources) {
      resource_list.push_back(Json{{"path", r.path}, {"payload", r.payload}});
    }
    Json coords = Json::array();
    for (const auto& [_, c] : coordinators_) coords.push_back(c->address);
    Json env = Json::object();
    for (const auto& [k, v] : environment) env[k] = v;

    Json config{{"listen", node->address},
                {"vid", vid.hex()},
                {"trusted_issuers", std::move(trusted)},
                {"coordinator_addresses", std::move(coords)},
                {"environment", std::move(env)},
                {"resources", std::move(resource_list)},
                {"enforce", enforce},
                {"deny_detail", true},
                {"artificial_delay_ms", options_.artificial_delay_ms},
                {"sim_clock", true}};
    std::string config_path = options_.run_dir + "/" + name + ".json";
    write_file(config_path, config.dump(2));
    node->process = ChildProcess::spawn(
        name, options_.binary_dir + "/fedcap-provider", {"--config", config_path},
        options_.run_dir + "/" + name + ".log");
    if (!wait_healthy("127.0.0.1", port)) {
      throw Error(name + " did not become healthy");
    }
    providers_.push_back(std::move(node));
    return index;
  }

  httplib::Client pdc_client() const { return pdc_.client(); }

  /// Broadcasts a simulated-clock advance to every node.
  void advance_clock(std::int64_t seconds) {
    Json body{{"seconds", seconds}};
    auto post = [&](const NodeHandle& node) {
      auto client = node.client();
      client.Post("/clock/advance", body.dump(), "application/json");
    };
    post(pdc_);
    for (const auto& [_, c] : coordinators_) post(*c);
    for (const auto& p : providers_) post(*p);
  }

  void teardown() {
    for (auto& p : providers_) p->process.terminate();
    for (auto& [_, c] : coordinators_) c->process.terminate();
    pdc_.process.terminate();
  }

private:
  TopologyOptions options_;
  KeyPair pdc_key_;
  VirtualIdentity pdc_vid_;
  NodeHandle pdc_;
  std::map<std::string, KeyPair> coordinator_keys_;
  std::map<std::string, VirtualIdentity> coordinator_vids_;
  std::map<std::string, std::unique_ptr<NodeHandle>> coordinators_;
  std::vector<std::unique_ptr<NodeHandle>> providers_;
};

}  // namespace fedcap::harness
