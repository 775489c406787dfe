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
#include <cstdint>
#include <memory>

namespace fedcap {

/// Unix-seconds clock. Services take a shared Clock so that expiry and
/// revocation-TTL behaviour can be driven without real waiting.
class Clock {
public:
  virtual ~Clock() = default;
  virtual std::int64_t now() const = 0;
};

class SystemClock final : public Clock {
public:
  std::int64_t now() const override {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
};

/// System time plus an adjustable offset. advance() is what the services'
/// POST /clock/advance endpoint calls.
class SimClock final : public Clock {
public:
  SimClock() = default;
  explicit SimClock(std::int64_t start_epoch)
      : fixed_base_(true), base_(start_epoch) {}

  std::int64_t now() const override {
    std::int64_t base = base_;
    if (!fixed_base_) {
      base = std::chrono::duration_cast<std::chrono::seconds>(
                 std::chrono::system_clock::now().time_since_epoch())
                 .count();
    }
    return base + offset_.load(std::memory_order_relaxed);
  }

  void advance(std::int64_t seconds) {
    offset_.fetch_add(seconds, std::memory_order_relaxed);
  }

private:
  bool fixed_base_ = false;
  std::int64_t base_ = 0;
  std::atomic<std::int64_t> offset_{0};
};

using ClockPtr = std::shared_ptr<Clock>;

inline ClockPtr system_clock() {
  return std::make_shared<SystemClock>();
}

}  // namespace fedcap
