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
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedcap/token.hpp"
#include "fedcap/types.hpp"

namespace fedcap {

// Tolerated clock disagreement between issuer and provider, in seconds.
inline constexpr std::int64_t kClockSkew = 30;

struct RequestContext {
  Action method = Action::GET;
  std::string uri_path;
  std::string client_address;
  std::int64_t now = 0;
  std::map<std::string, std::string> environment;
};

enum class Outcome { grant, deny };

enum class Stage { revocation, token_time, action_grant, condition, signature, granted };

inline const char* to_name(Stage s) {
  switch (s) {
    case Stage::revocation: return "revocation";
    case Stage::token_time: return "token_time";
    case Stage::action_grant: return "action_grant";
    case Stage::condition: return "condition";
    case Stage::signature: return "signature";
    case Stage::granted: return "granted";
  }
  return "?";
}

/// Grant/deny outcome annotated with the pipeline stage that produced it.
struct Decision {
  Outcome outcome = Outcome::deny;
  Stage stage = Stage::token_time;
  std::string detail;

  bool granted() const { return outcome == Outcome::grant; }

  static Decision deny(Stage stage, std::string detail) {
    return Decision{Outcome::deny, stage, std::move(detail)};
  }
  static Decision grant() {
    return Decision{Outcome::grant, Stage::granted, "ok"};
  }
};

// --- individual pipeline stages ---------------------------------------------

/// issue_time <= now + skew and starttime - skew <= now <= endtime + skew.
inline bool validate_token_times(const CapabilityToken& token, std::int64_t now) {
  if (token.issue_time > now + kClockSkew) return false;
  if (token.starttime - kClockSkew > now) return false;
  if (now > token.endtime + kClockSkew) return false;
  return true;
}

/// Exact path match plus a single trailing "*" segment wildcard.
inline bool resource_matches(const std::string& pattern, const std::string& path) {
  if (pattern.size() >= 2 && pattern.compare(pattern.size() - 2, 2, "/*") == 0) {
    std::string_view prefix(pattern.data(), pattern.size() - 1);  // keeps '/'
    if (path.size() <= prefix.size()) return false;
    if (path.compare(0, prefix.size(), prefix) != 0) return false;
    std::string_view tail(path.data() + prefix.size(),
                          path.size() - prefix.size());
    return tail.find('/') == std::string_view::npos;
  }
  return pattern == path;
}

/// First access_right element whose action and resource match the request;
/// failing elements are skipped in favour of the next one.
inline const AccessRight* check_action_grant(const CapabilityToken& token,
                                             const RequestContext& ctx) {
  for (const auto& ar : token.access_right) {
    if (ar.action == ctx.method && resource_matches(ar.resource, ctx.uri_path)) {
      return &ar;
    }
  }
  return nullptr;
}

inline bool condition_satisfied(const Condition& c, const RequestContext& ctx) {
  try {
    validate(c);
  } catch (const Error& e) {
    std::fprintf(stderr, "[authz] malformed condition treated as unsatisfied: %s\n",
                 e.what());
    return false;
  }
  if (const auto* tw = std::get_if<TimeWindowCondition>(&c)) {
    int start = 0, end = 0;
    detail::parse_clock_minutes(tw->start, &start);
    detail::parse_clock_minutes(tw->end, &end);
    int minute_of_day = static_cast<int>((ctx.now % 86400) / 60);
    return start <= minute_of_day && minute_of_day < end;
  }
  if (const auto* wd = std::get_if<WeekdaySetCondition>(&c)) {
    static const char* names[] = {"sun", "mon", "tue", "wed", "thu", "fri", "sat"};
    int weekday = static_cast<int>(((ctx.now / 86400) + 4) % 7);
    const std::string today = names[weekday];
    return std::find(wd->weekdays.begin(), wd->weekdays.end(), today) !=
           wd->weekdays.end();
  }
  if (const auto* cn = std::get_if<ClientNetworkCondition>(&c)) {
    std::uint32_t net = 0, addr = 0;
    int prefix = 0;
    if (!detail::parse_cidr(cn->cidr, &net, &prefix)) return false;
    if (!detail::parse_ipv4(ctx.client_address, &addr)) return false;
    std::uint32_t mask = prefix == 0 ? 0u : ~std::uint32_t(0) << (32 - prefix);
    return (net & mask) == (addr & mask);
  }
  if (const auto* ee = std::get_if<EnvEqualsCondition>(&c)) {
    auto it = ctx.environment.find(ee->key);
    return it != ctx.environment.end() && it->second == ee->value;
  }
  return false;
}

/// Empty condition set means no context constraint; otherwise at least one
/// condition element must be satisfied.
inline bool verify_conditions(const AccessRight& matched, const RequestContext& ctx) {
  if (matched.conditions.empty()) return true;
  for (const auto& c : matched.conditions) {
    if (condition_satisfied(c, ctx)) return true;
  }
  return false;
}

/// True (revoked) iff an unexpired entry with this VID exists.
inline bool check_revocation(const VirtualIdentity& subject,
                             const RevocationList& rl, std::int64_t now) {
  return rl.contains_unexpired(subject, now);
}

// --- issuer trust (used by the provider enforcement point) -------------------

struct IssuerTrust {
  bool restrict_issuers = false;
  std::vector<Bytes> trusted_keys;
  std::vector<Bytes> denied_keys;

  bool trusted(const Bytes& key) const {
    if (!restrict_issuers) return true;
    return std::find(trusted_keys.begin(), trusted_keys.end(), key) !=
           trusted_keys.end();
  }
  bool denied(const Bytes& key) const {
    return std::find(denied_keys.begin(), denied_keys.end(), key) !=
           denied_keys.end();
  }
};

/// Optional strict mode: recompute the rnd chain from provider-side facts.
struct ChainCheck {
  VirtualIdentity vid_o;
  Digest rnd0{};
};

// --- engine -------------------------------------------------------------------

struct StageStats {
  std::uint64_t count = 0;
  std::uint64_t total_ns = 0;
};

/// Four-stage validation pipeline with a leading revocation-list check.
/// Stages run in a fixed order and the first failure short-circuits; the
/// signature check is deliberately last. Reentrant; counters are atomic.
class AuthzEngine {
public:
  Decision authorize(const CapabilityToken& token, const RequestContext& ctx,
                     const RevocationList& rl,
                     const IssuerTrust* trust = nullptr,
                     const std::optional<ChainCheck>& chain = std::nullopt) const {
    using std::chrono::steady_clock;
    auto timed = [this](int stage_idx, auto&& fn) {
      auto t0 = steady_clock::now();
      auto result = fn();
      auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                    steady_clock::now() - t0)
                    .count();
      counters_[stage_idx].fetch_add(1, std::memory_order_relaxed);
      total_ns_[stage_idx].fetch_add(static_cast<std::uint64_t>(ns),
                                     std::memory_order_relaxed);
      return result;
    };

    if (timed(0, [&] { return check_revocation(token.subject, rl, ctx.now); })) {
      return Decision::deny(Stage::revocation, "subject revoked");
    }
    if (!timed(1, [&] { return validate_token_times(token, ctx.now); })) {
      return Decision::deny(Stage::token_time, "token not valid at this time");
    }
    const AccessRight* matched =
        timed(2, [&] { return check_action_grant(token, ctx); });
    if (matched == nullptr) {
      return Decision::deny(Stage::action_grant, "no matching access right");
    }
    if (!timed(3, [&] { return verify_conditions(*matched, ctx); })) {
      return Decision::deny(Stage::condition, "no condition satisfied");
    }
    std::string detail;
    bool sig_ok = timed(4, [&] {
      if (trust != nullptr) {
        if (trust->denied(token.issuer)) {
          detail = "issuer revoked";
          return false;
        }
        if (!trust->trusted(token.issuer)) {
          detail = "untrusted issuer";
          return false;
        }
      }
      if (chain && !verify_rnd_chain(token, chain->vid_o, chain->rnd0)) {
        detail = "capability chain mismatch";
        return false;
      }
      if (!verify_token_signature(token)) {
        detail = "bad signature";
        return false;
      }
      return true;
    });
    if (!sig_ok) return Decision::deny(Stage::signature, detail);
    return Decision::grant();
  }

  static constexpr int kStageCount = 5;

  static const char* stage_name(int idx) {
    static const char* names[kStageCount] = {"revocation", "token_time",
                                             "action_grant", "condition",
                                             "signature"};
    return names[idx];
  }

  StageStats stats(int idx) const {
    return StageStats{counters_[idx].load(std::memory_order_relaxed),
                      total_ns_[idx].load(std::memory_order_relaxed)};
  }

  std::uint64_t invocations(Stage s) const {
    switch (s) {
      case Stage::revocation: return stats(0).count;
      case Stage::token_time: return stats(1).count;
      case Stage::action_grant: return stats(2).count;
      case Stage::condition: return stats(3).count;
      case Stage::signature: return stats(4).count;
      default: return 0;
    }
  }

  void reset() const {
    for (int i = 0; i < kStageCount; ++i) {
      counters_[i].store(0, std::memory_order_relaxed);
      total_ns_[i].store(0, std::memory_order_relaxed);
    }
  }

private:
  mutable std::atomic<std::uint64_t> counters_[kStageCount] = {};
  mutable std::atomic<std::uint64_t> total_ns_[kStageCount] = {};
};

}  // namespace fedcap
