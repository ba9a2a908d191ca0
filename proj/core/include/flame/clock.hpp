// Copyright 2026 The Flame Authors.
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

#ifndef FLAME_CLOCK_HPP_
#define FLAME_CLOCK_HPP_

#include <atomic>
#include <chrono>

namespace flame {

// Monotonic time source in seconds. Simulations drive a ManualClock so
// TTL arithmetic is exact and runs are repeatable.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  double now() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }
};

class ManualClock final : public Clock {
 public:
  explicit ManualClock(double start = 0) : t_(start) {}
  double now() const override { return t_.load(); }
  void set(double t) { t_.store(t); }
  void advance(double dt) {
    double cur = t_.load();
    while (!t_.compare_exchange_weak(cur, cur + dt)) {
    }
  }

 private:
  std::atomic<double> t_;
};

}  // namespace flame

#endif  // FLAME_CLOCK_HPP_
