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

#ifndef FLAME_SIM_HARNESS_HPP_
#define FLAME_SIM_HARNESS_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flame/client/client.hpp"
#include "flame/sim/world.hpp"

namespace flame::sim {

struct ServerStepScore {
  std::string map_id;
  bool ok = false;
  double confidence = 0;
  int matched_count = 0;
  std::optional<double> error_m;
  std::optional<double> ema_error_m;
};

struct StepMetrics {
  int step = 0;
  double t = 0;
  bool indoor = false;
  double coarse_radius_m = 0;
  // Discovery replayed on this step's coarse location.
  int geodomains_total = 0;
  int geodomains_uncached = 0;
  int geodomains_cached = 0;
  double hit_ratio = 0;
  int delegated_lookups = 0;
  int discovered = 0;
  // Client.
  bool rediscovered = false;
  std::optional<std::string> active;
  std::optional<std::string> truth;
  int truth_visible = 0;
  std::vector<ServerStepScore> scores;
  std::optional<double> pose_error_m;  // active estimate vs ground truth
  std::uint64_t client_dns_wire_queries = 0;
};

struct BoundaryCrossing {
  int step = 0;
  std::optional<std::string> from;
  std::optional<std::string> to;
  std::optional<int> lag;  // steps until the next rediscovery, if any
};

struct Aggregates {
  double median_total = 0;
  double median_uncached = 0;
  int first_total = 0;
  int first_uncached = 0;
  std::vector<int> hit_ratio_histogram;  // 10 bins over [0, 1], post-warmup
  double frac_hit_ratio_ge_0_9 = 0;      // post-warmup
  double mean_hit_ratio = 0;             // post-warmup
  bool conservation_ok = true;  // cached + uncached == total on every step
  int selection_steps = 0;      // post-warmup steps with a ground-truth map
  int selection_correct = 0;
  double selection_accuracy = 0;
  std::vector<BoundaryCrossing> crossings;
  int max_crossing_lag = 0;     // -1 when some crossing never saw a rediscovery
  int rediscoveries = 0;
  int spurious_rediscoveries = 0;  // while the active server was acceptable
  int economy_violations = 0;      // DNS traffic on a step without rediscovery
  std::optional<double> median_pose_error_m;
  std::optional<double> median_rpe_translation_m;
  std::optional<double> median_rpe_rotation_deg;
};

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  int warmup_steps = 0;
  std::vector<StepMetrics> steps;
  Aggregates aggregates;
  nlohmann::json metadata;

  nlohmann::json to_json() const;  // deterministic for a given world spec
};

struct RunOptions {
  // Client event log lines, in step order.
  std::function<void(const nlohmann::json&)> event_sink;
  // Per-step progress, mainly for the CLI.
  std::function<void(const StepMetrics&)> progress;
};

// Boots the nameservers and map servers, then walks the trajectory with a
// simulated clock. Throws Error when a component fails to start.
MetricsReport run(const WorldSpec& spec, const RunOptions& options = {});
MetricsReport run(const World& world, const RunOptions& options = {});

// Aggregates from per-step metrics; run() already fills them.
Aggregates aggregate(const std::vector<StepMetrics>& steps, int warmup_steps,
                     double error_threshold_m);

// Writes summary.json, steps.csv and one data file per figure under `dir`,
// plus manifest.json. Returns the paths written, manifest last.
std::vector<std::string> report(const MetricsReport& metrics, const WorldSpec& spec,
                                const std::string& dir,
                                const std::vector<nlohmann::json>& events = {});

// FNV-1a over the canonical JSON of the spec, as 16 hex digits.
std::string config_hash(const WorldSpec& spec);

}  // namespace flame::sim

#endif  // FLAME_SIM_HARNESS_HPP_
