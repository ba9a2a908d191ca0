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

#include "flame/client/client.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "flame/errors.hpp"

namespace flame::client {

void ClientConfig::validate() const {
  if (!(query_interval_s > 0)) throw ValidationError("query_interval_s must be positive");
  if (!(ema_alpha > 0 && ema_alpha <= 1)) throw ValidationError("ema_alpha must be in (0, 1]");
  if (!(error_threshold_m >= 0)) throw ValidationError("error_threshold_m must be >= 0");
  if (!(confidence_threshold >= 0 && confidence_threshold <= 1)) {
    throw ValidationError("confidence_threshold must be in [0, 1]");
  }
  if (max_parallel < 1) throw ValidationError("max_parallel must be >= 1");
  query_cfg.validate();
}

double error_score(const pose::Pose& l_prev, const pose::Pose& l_now, const pose::Pose& s_prev,
                   const pose::Pose& s_now) {
  const double d_l = pose::relative_displacement(l_now, l_prev);
  const double d_s = pose::relative_displacement(s_now, s_prev);
  return std::abs(d_l - d_s);
}

double ema_update(std::optional<double> ema, double e, double alpha) {
  if (!ema) return e;
  return alpha * e + (1 - alpha) * *ema;
}

pose::Vec3 waypoint_to_app_frame(const pose::Pose& p_a, const pose::Pose& p_r,
                                 const pose::Vec3& w_r) {
  return pose::transform_point(pose::compose(p_a, pose::inverse(p_r)), w_r);
}

nlohmann::json ServerScore::to_json() const {
  nlohmann::json j{{"url", url}, {"ok", ok}, {"confidence", confidence}, {"matched", matched_count}};
  j["e"] = error_m ? nlohmann::json(*error_m) : nlohmann::json(nullptr);
  j["ema"] = ema_error_m ? nlohmann::json(*ema_error_m) : nlohmann::json(nullptr);
  if (!error.empty()) j["error"] = error;
  return j;
}

nlohmann::json ClientOutput::to_json() const {
  nlohmann::json j;
  j["step"] = step;
  j["t"] = t;
  j["rediscovered"] = rediscovered;
  j["active"] = active ? nlohmann::json(active->url) : nlohmann::json(nullptr);
  j["pose"] = pose_in_map ? pose_in_map->to_json() : nlohmann::json(nullptr);
  j["waypoints"] = waypoints_in_app_frame.size();
  j["scores"] = nlohmann::json::array();
  for (const auto& s : scores) j["scores"].push_back(s.to_json());
  nlohmann::json dns{{"wire_queries", dns_wire_queries}};
  if (discovery) {
    dns["names"] = discovery->names;
    dns["cache_hits"] = discovery->cache_hits;
    dns["wire_lookups"] = discovery->wire_lookups;
    dns["failures"] = discovery->failures;
  }
  j["dns"] = dns;
  j["timing"] = {{"discovery_s", timing.discovery_s},
                 {"capabilities_s", timing.capabilities_s},
                 {"localize_s", timing.localize_s},
                 {"waypoints_s", timing.waypoints_s},
                 {"total_s", timing.total_s()}};
  if (!warnings.empty()) j["warnings"] = warnings;
  return j;
}

FlameClient::FlameClient(ClientConfig config, std::shared_ptr<discovery::DiscoveryClient> discovery,
                         std::shared_ptr<mapserver::MapTransport> maps,
                         std::shared_ptr<const Clock> clock)
    : config_(std::move(config)),
      discovery_(std::move(discovery)),
      maps_(std::move(maps)),
      clock_(std::move(clock)) {
  config_.validate();
  if (!discovery_ || !maps_ || !clock_) throw ValidationError("client needs discovery, maps and clock");
}

bool FlameClient::acceptable(const ServerTrack& t, bool have_vio) const {
  if (!t.last_result || !t.last_result->ok) return false;
  if (have_vio && t.ema_error_m) return *t.ema_error_m <= config_.error_threshold_m;
  if (config_.use_confidence) return t.last_result->confidence >= config_.confidence_threshold;
  return false;
}

void FlameClient::localize_one(ServerTrack& t, const std::optional<pose::Pose>& vio,
                               const mapserver::LocationCues& cues, double now, double& latency) {
  t.last_time = now;
  t.last_error.clear();
  t.last_error_m.reset();
  try {
    t.last_result = mapserver::RemoteMap(maps_, t.descriptor.url).localize(cues, &latency);
  } catch (const TransportError& e) {
    mapserver::LocalizeResult failed;
    failed.error_code = "transport";
    failed.message = e.what();
    t.last_result = failed;
    t.last_error = e.what();
    return;
  }
  if (!t.last_result->ok) return;
  const pose::Pose& s_now = t.last_result->pose;
  if (t.prev && vio && t.prev->l) {
    const double e = error_score(*t.prev->l, *vio, t.prev->s, s_now);
    t.last_error_m = e;
    t.ema_error_m = ema_update(t.ema_error_m, e, config_.ema_alpha);
  }
  t.prev = ServerTrack::Prev{vio, s_now, now};
}

ServerScore FlameClient::score_of(const ServerTrack& t) const {
  ServerScore s;
  s.url = t.descriptor.url;
  if (t.last_result) {
    s.ok = t.last_result->ok;
    s.confidence = t.last_result->confidence;
    s.matched_count = t.last_result->matched_count;
    if (!s.ok) s.error = t.last_error.empty() ? t.last_result->error_code : t.last_error;
  }
  s.error_m = t.last_error_m;
  s.ema_error_m = t.ema_error_m;
  return s;
}

namespace {

template <typename Fn>
void fan_out(std::size_t n, int width, Fn&& fn) {
  if (width <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::atomic<std::size_t> next{0};
  for (std::size_t k = 0; k < std::min<std::size_t>(n, width); ++k) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : threads) th.join();
}

}  // namespace

ClientOutput FlameClient::step(const geo::CoarseLocation& loc, const std::optional<pose::Pose>& vio,
                               const mapserver::LocationCues& cues) {
  const double now = clock_->now();
  ClientOutput out;
  out.step = step_++;
  out.t = now;
  const std::uint64_t wire_before = discovery_->wire_queries();
  const bool have_vio = vio.has_value();
  std::vector<std::string> touched;

  if (active_ && acceptable(tracks_.at(*active_), have_vio)) {
    double latency = 0;
    localize_one(tracks_.at(*active_), vio, cues, now, latency);
    out.timing.localize_s = latency;
    touched.push_back(*active_);
  } else {
    out.rediscovered = true;
    active_.reset();
    discovery::DiscoveryResult found;
    try {
      found = discovery_->discover(loc, config_.query_cfg, config_.policy);
    } catch (const discovery::DiscoveryError& e) {
      out.warnings.push_back(e.what());
    }
    out.discovery = found.stats;
    out.timing.discovery_s = found.elapsed_s;
    for (auto& w : found.warnings) out.warnings.push_back(std::move(w));

    std::vector<ServerTrack*> candidates;
    double caps_latency = 0;
    for (const auto& d : found.descriptors) {
      ServerTrack& t = tracks_[d.url];
      t.descriptor = d;
      if (!t.capabilities) {
        double latency = 0;
        try {
          t.capabilities = mapserver::RemoteMap(maps_, d.url).capabilities(&latency);
        } catch (const TransportError& e) {
          out.warnings.push_back(std::string("capabilities: ") + e.what());
        }
        caps_latency = std::max(caps_latency, latency);
      }
      if (!t.capabilities) continue;
      if (!t.capabilities->supports_any(config_.cue_types)) {
        out.warnings.push_back(d.url + ": no common cue type, skipped");
        continue;
      }
      candidates.push_back(&t);
    }
    out.timing.capabilities_s = caps_latency;

    std::vector<double> latencies(candidates.size(), 0);
    fan_out(candidates.size(), config_.max_parallel, [&](std::size_t i) {
      localize_one(*candidates[i], vio, cues, now, latencies[i]);
    });
    out.timing.localize_s = latencies.empty() ? 0 : *std::max_element(latencies.begin(), latencies.end());

    // Rank: low error score first, then confidence, then url.
    struct Rank {
      int tier;
      double value;
      std::string url;
      bool operator<(const Rank& o) const {
        return std::tie(tier, value, url) < std::tie(o.tier, o.value, o.url);
      }
    };
    std::optional<Rank> best;
    for (ServerTrack* t : candidates) {
      touched.push_back(t->descriptor.url);
      if (!t->last_result || !t->last_result->ok) continue;
      Rank r{4, 0, t->descriptor.url};
      if (have_vio && t->ema_error_m) {
        r = {*t->ema_error_m <= config_.error_threshold_m ? 0 : 2, *t->ema_error_m, r.url};
      } else if (config_.use_confidence) {
        const double c = t->last_result->confidence;
        r = {c >= config_.confidence_threshold ? 1 : 3, -c, r.url};
      }
      if (!best || r < *best) best = r;
    }
    if (best) active_ = best->url;
  }

  if (active_) {
    ServerTrack& t = tracks_.at(*active_);
    if (t.last_result && t.last_result->ok && t.last_time == now) {
      out.active = t.descriptor;
      out.pose_in_map = t.last_result->pose;
      if (have_vio) {
        if (!t.waypoints) {
          try {
            t.waypoints = mapserver::RemoteMap(maps_, t.descriptor.url).waypoints(&out.timing.waypoints_s);
          } catch (const TransportError& e) {
            out.warnings.push_back(std::string("waypoints: ") + e.what());
          }
        }
        if (t.waypoints) {
          for (const auto& w : t.waypoints->waypoints) {
            out.waypoints_in_app_frame.push_back(
                {w.name, waypoint_to_app_frame(*vio, *out.pose_in_map, w.position), w.meta});
          }
        }
      }
    }
  }
  std::sort(touched.begin(), touched.end());
  for (const auto& url : touched) out.scores.push_back(score_of(tracks_.at(url)));
  out.dns_wire_queries = discovery_->wire_queries() - wire_before;
  if (sink_) sink_(out.to_json());
  return out;
}

}  // namespace flame::client
