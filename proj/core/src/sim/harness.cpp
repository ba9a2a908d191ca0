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

#include "flame/sim/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>

#include <Eigen/Core>
#include <fmt/format.h>

#include "flame/clock.hpp"
#include "flame/discovery/transport.hpp"
#include "flame/dns/nameserver.hpp"
#include "flame/dns/zone.hpp"
#include "flame/errors.hpp"
#include "flame/geo/zone_records.hpp"
#include "flame/mapserver/service.hpp"

#ifndef FLAME_VERSION
#define FLAME_VERSION "0.0.0"
#endif

namespace flame::sim {
namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

nlohmann::json opt_json(const std::optional<std::string>& s) {
  return s ? nlohmann::json(*s) : nlohmann::json(nullptr);
}
nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string csv_opt(const std::optional<std::string>& s) { return s ? *s : ""; }
std::string csv_opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : ""; }

// Everything that has to stay alive for a run.
struct Network {
  std::shared_ptr<discovery::Transport> dns;
  std::shared_ptr<mapserver::MapTransport> maps;
  net::Endpoint root;
  std::vector<std::string> urls;  // per map
  std::vector<std::unique_ptr<dns::Nameserver>> nameservers;
  std::vector<std::unique_ptr<mapserver::MapServer>> map_servers;
};

dns::ZoneSet make_zone(const WorldSpec& spec, const std::vector<geo::ZoneRecord>& records) {
  geo::SoaParams soa = geo::SoaParams::defaults_for(spec.suffix);
  soa.minimum = spec.soa_minimum;
  dns::ZoneSet zs;
  zs.add(dns::load_zone(geo::render_zone(spec.suffix, soa, records, spec.record_ttl)));
  return zs;
}

Network boot(const World& world) {
  const WorldSpec& spec = world.spec();
  const bool loopback = spec.network == "loopback";
  Network net;
  net.urls.resize(world.maps().size());

  std::shared_ptr<mapserver::InProcessMapTransport> in_process;
  if (loopback) {
    net.maps = std::make_shared<mapserver::HttpMapTransport>();
  } else {
    in_process = std::make_shared<mapserver::InProcessMapTransport>();
    const double lat = spec.map_latency_s;
    in_process->set_latency([lat](const std::string&, std::string_view) { return lat; });
    net.maps = in_process;
  }
  for (std::size_t m = 0; m < world.maps().size(); ++m) {
    auto svc = std::make_shared<const mapserver::MapService>(world.maps()[m]);
    if (loopback) {
      net.map_servers.push_back(
          std::make_unique<mapserver::MapServer>(svc, net::Endpoint{"127.0.0.1", 0}));
      net.urls[m] = net.map_servers.back()->base_url();
    } else {
      net.urls[m] = spec.maps[m].url;
      in_process->add(net.urls[m], svc);
    }
  }

  std::vector<std::vector<geo::ZoneRecord>> records(spec.nameservers);
  auto register_map = [&](std::size_t m, int ns, const dns::FlameRecord& target) {
    const auto recs = geo::zone_records(world.maps()[m].region_polygon(), target,
                                        cells::CoveringParams::registration_defaults(), spec.suffix,
                                        spec.record_ttl);
    records[ns].insert(records[ns].end(), recs.begin(), recs.end());
  };
  for (std::size_t m = 0; m < world.maps().size(); ++m) {
    register_map(m, spec.maps[m].nameserver, dns::FlameRecord::mcname(net.urls[m]));
  }

  std::shared_ptr<discovery::SimulatedTransport> sim;
  if (!loopback) {
    sim = std::make_shared<discovery::SimulatedTransport>();
    const double lat = spec.dns_latency_s;
    sim->set_latency([lat](const net::Endpoint&, const std::string&) { return lat; });
    net.dns = sim;
  } else {
    net.dns = std::make_shared<discovery::UdpTransport>();
  }
  auto start = [&](int ns, const std::vector<geo::ZoneRecord>& recs) -> net::Endpoint {
    auto zs = make_zone(spec, recs);
    if (loopback) {
      dns::NameserverConfig cfg;
      cfg.listen = {"127.0.0.1", 0};
      net.nameservers.push_back(std::make_unique<dns::Nameserver>(std::move(zs), cfg));
      return net.nameservers.back()->endpoint();
    }
    const net::Endpoint ep{"10.53.0." + std::to_string(ns + 1), 53};
    sim->add_server(ep, std::make_shared<const dns::ZoneSet>(std::move(zs)));
    return ep;
  };
  // Delegated servers first; the root needs their addresses.
  std::vector<net::Endpoint> endpoints(spec.nameservers);
  for (int ns = 1; ns < spec.nameservers; ++ns) endpoints[ns] = start(ns, records[ns]);
  for (std::size_t m = 0; m < world.maps().size(); ++m) {
    const int ns = spec.maps[m].nameserver;
    if (ns > 0) register_map(m, 0, dns::FlameRecord::mns(endpoints[ns].to_string()));
  }
  net.root = endpoints[0] = start(0, records[0]);
  return net;
}

}  // namespace

nlohmann::json MetricsReport::to_json() const {
  const Aggregates& a = aggregates;
  nlohmann::json crossings = nlohmann::json::array();
  for (const auto& c : a.crossings) {
    crossings.push_back({{"step", c.step}, {"from", opt_json(c.from)}, {"to", opt_json(c.to)},
                         {"lag", c.lag ? nlohmann::json(*c.lag) : nlohmann::json(nullptr)}});
  }
  nlohmann::json agg{
      {"median_total", a.median_total},
      {"median_uncached", a.median_uncached},
      {"first_total", a.first_total},
      {"first_uncached", a.first_uncached},
      {"hit_ratio_histogram", a.hit_ratio_histogram},
      {"frac_hit_ratio_ge_0_9", a.frac_hit_ratio_ge_0_9},
      {"mean_hit_ratio", a.mean_hit_ratio},
      {"conservation_ok", a.conservation_ok},
      {"selection_steps", a.selection_steps},
      {"selection_correct", a.selection_correct},
      {"selection_accuracy", a.selection_accuracy},
      {"crossings", crossings},
      {"max_crossing_lag", a.max_crossing_lag},
      {"rediscoveries", a.rediscoveries},
      {"spurious_rediscoveries", a.spurious_rediscoveries},
      {"economy_violations", a.economy_violations},
      {"median_pose_error_m", opt_json(a.median_pose_error_m)},
      {"median_rpe_translation_m", opt_json(a.median_rpe_translation_m)},
      {"median_rpe_rotation_deg", opt_json(a.median_rpe_rotation_deg)},
  };
  nlohmann::json steps_j = nlohmann::json::array();
  for (const StepMetrics& s : steps) {
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& sc : s.scores) {
      scores.push_back({{"map_id", sc.map_id}, {"ok", sc.ok}, {"confidence", sc.confidence},
                        {"matched", sc.matched_count}, {"e", opt_json(sc.error_m)},
                        {"ema", opt_json(sc.ema_error_m)}});
    }
    steps_j.push_back({{"step", s.step},
                       {"t", s.t},
                       {"indoor", s.indoor},
                       {"coarse_radius_m", s.coarse_radius_m},
                       {"geodomains_total", s.geodomains_total},
                       {"geodomains_uncached", s.geodomains_uncached},
                       {"geodomains_cached", s.geodomains_cached},
                       {"hit_ratio", s.hit_ratio},
                       {"delegated_lookups", s.delegated_lookups},
                       {"discovered", s.discovered},
                       {"rediscovered", s.rediscovered},
                       {"active", opt_json(s.active)},
                       {"truth", opt_json(s.truth)},
                       {"truth_visible", s.truth_visible},
                       {"scores", scores},
                       {"pose_error_m", opt_json(s.pose_error_m)},
                       {"client_dns_wire_queries", s.client_dns_wire_queries}});
  }
  return {{"scenario", scenario}, {"seed", seed},           {"warmup_steps", warmup_steps},
          {"aggregates", agg},    {"metadata", metadata},   {"steps", steps_j}};
}

Aggregates aggregate(const std::vector<StepMetrics>& steps, int warmup_steps,
                     double error_threshold_m) {
  Aggregates a;
  a.hit_ratio_histogram.assign(10, 0);
  if (steps.empty()) return a;
  std::vector<double> totals, uncached, ratios, pose_errors;
  for (const StepMetrics& s : steps) {
    totals.push_back(s.geodomains_total);
    uncached.push_back(s.geodomains_uncached);
    if (s.geodomains_cached + s.geodomains_uncached != s.geodomains_total) a.conservation_ok = false;
    if (s.pose_error_m) pose_errors.push_back(*s.pose_error_m);
    if (s.rediscovered) ++a.rediscoveries;
    if (s.client_dns_wire_queries > 0 && !s.rediscovered) ++a.economy_violations;
    if (s.step < warmup_steps) continue;
    ratios.push_back(s.hit_ratio);
    a.hit_ratio_histogram[std::min(9, static_cast<int>(s.hit_ratio * 10))]++;
    if (s.truth) {
      ++a.selection_steps;
      if (s.active == s.truth) ++a.selection_correct;
    }
  }
  a.median_total = median(totals);
  a.median_uncached = median(uncached);
  a.first_total = steps.front().geodomains_total;
  a.first_uncached = steps.front().geodomains_uncached;
  if (!ratios.empty()) {
    a.frac_hit_ratio_ge_0_9 =
        static_cast<double>(std::count_if(ratios.begin(), ratios.end(),
                                          [](double r) { return r >= 0.9; })) /
        static_cast<double>(ratios.size());
    double sum = 0;
    for (double r : ratios) sum += r;
    a.mean_hit_ratio = sum / static_cast<double>(ratios.size());
  }
  a.selection_accuracy =
      a.selection_steps ? static_cast<double>(a.selection_correct) / a.selection_steps : 1.0;
  if (!pose_errors.empty()) a.median_pose_error_m = median(pose_errors);

  const int n = static_cast<int>(steps.size());
  for (int k = 1; k < n; ++k) {
    if (steps[k].truth == steps[k - 1].truth) continue;
    BoundaryCrossing c{k, steps[k - 1].truth, steps[k].truth, std::nullopt};
    for (int j = k; j < n; ++j) {
      if (steps[j].rediscovered) {
        c.lag = j - k;
        break;
      }
    }
    if (c.lag) {
      if (a.max_crossing_lag >= 0) a.max_crossing_lag = std::max(a.max_crossing_lag, *c.lag);
    } else if (k + 3 < n) {
      a.max_crossing_lag = -1;
    }
    a.crossings.push_back(std::move(c));
  }
  for (int k = 1; k < n; ++k) {
    if (!steps[k].rediscovered || !steps[k - 1].active) continue;
    for (const auto& sc : steps[k - 1].scores) {
      if (sc.map_id == *steps[k - 1].active && sc.ok && sc.ema_error_m &&
          *sc.ema_error_m <= error_threshold_m) {
        ++a.spurious_rediscoveries;
      }
    }
  }
  return a;
}

MetricsReport run(const WorldSpec& spec, const RunOptions& options) {
  return run(World(spec), options);
}

MetricsReport run(const World& world, const RunOptions& options) {
  const WorldSpec& spec = world.spec();
  Network net;
  try {
    net = boot(world);
  } catch (const Error& e) {
    throw Error(std::string("simulation startup failed: ") + e.what());
  }
  std::map<std::string, std::string> url_to_id;
  for (std::size_t m = 0; m < world.maps().size(); ++m) {
    url_to_id[net.urls[m]] = world.maps()[m].map_id;
  }
  std::map<std::string, std::size_t> id_to_index;
  for (std::size_t m = 0; m < world.maps().size(); ++m) id_to_index[world.maps()[m].map_id] = m;

  auto clock = std::make_shared<ManualClock>(0);
  discovery::DiscoveryConfig dcfg;
  dcfg.resolvers = {net.root};
  // Replays discovery on every step, as the trace study does.
  discovery::DiscoveryClient replay(dcfg, net.dns, clock);
  auto client_dns = std::make_shared<discovery::DiscoveryClient>(dcfg, net.dns, clock);

  client::ClientConfig ccfg;
  ccfg.query_interval_s = spec.step_s;
  ccfg.error_threshold_m = spec.error_threshold_m;
  ccfg.confidence_threshold = spec.confidence_threshold;
  ccfg.ema_alpha = spec.ema_alpha;
  ccfg.query_cfg.suffix = spec.suffix;
  client::FlameClient client(ccfg, client_dns, net.maps, clock);
  if (options.event_sink) client.set_event_sink(options.event_sink);

  MetricsReport report;
  report.scenario = spec.name;
  report.seed = spec.rng_seed;
  report.warmup_steps = spec.warmup_steps;
  std::vector<pose::Pose> ref_poses, est_poses;

  for (std::size_t k = 0; k < world.steps().size(); ++k) {
    const StepTruth& st = world.steps()[k];
    clock->set(st.t);
    StepMetrics sm;
    sm.step = static_cast<int>(k);
    sm.t = st.t;
    sm.indoor = st.indoor;
    sm.coarse_radius_m = st.coarse.error_radius_m;

    sm.geodomains_total = static_cast<int>(geo::query_set(st.coarse, ccfg.query_cfg).size());
    replay.take_trace();
    try {
      const auto res = replay.discover(st.coarse, ccfg.query_cfg);
      sm.discovered = static_cast<int>(res.descriptors.size());
    } catch (const discovery::DiscoveryError&) {
      sm.discovered = 0;
    }
    std::set<std::string> wire, delegated;
    for (const auto& e : replay.take_trace()) {
      if (e.endpoint == net.root) {
        if (e.cache_hit) {
          ++sm.geodomains_cached;
        } else {
          wire.insert(e.name);
        }
      } else {
        delegated.insert(e.endpoint.to_string() + " " + e.name);
      }
    }
    sm.geodomains_uncached = static_cast<int>(wire.size());
    sm.delegated_lookups = static_cast<int>(delegated.size());
    sm.hit_ratio = sm.geodomains_total
                       ? static_cast<double>(sm.geodomains_cached) / sm.geodomains_total
                       : 0;

    const auto out = client.step(st.coarse, st.vio, synthesize_all_cues(world, k));
    sm.rediscovered = out.rediscovered;
    sm.client_dns_wire_queries = out.dns_wire_queries;
    if (out.active) sm.active = url_to_id.at(out.active->url);
    for (const auto& s : out.scores) {
      sm.scores.push_back({url_to_id.count(s.url) ? url_to_id.at(s.url) : s.url, s.ok,
                           s.confidence, s.matched_count, s.error_m, s.ema_error_m});
    }
    std::sort(sm.scores.begin(), sm.scores.end(),
              [](const auto& a, const auto& b) { return a.map_id < b.map_id; });
    if (const auto best = world.best_map(st.x)) {
      sm.truth = world.maps()[*best].map_id;
      sm.truth_visible = static_cast<int>(world.visible_landmarks(*best, st.x).size());
    }
    if (sm.active && out.pose_in_map) {
      const pose::Pose est =
          pose::compose(spec.maps[id_to_index.at(*sm.active)].frame, *out.pose_in_map);
      sm.pose_error_m = (est.translation() - st.x.translation()).norm();
      ref_poses.push_back(st.x);
      est_poses.push_back(est);
    }
    if (options.progress) options.progress(sm);
    report.steps.push_back(std::move(sm));
  }

  report.aggregates = aggregate(report.steps, spec.warmup_steps, spec.error_threshold_m);
  if (ref_poses.size() >= 2) {
    std::vector<double> tr, rot;
    for (const auto& s : pose::rpe(ref_poses, est_poses)) {
      tr.push_back(s.translational_m);
      rot.push_back(s.rotational_deg);
    }
    report.aggregates.median_rpe_translation_m = median(tr);
    report.aggregates.median_rpe_rotation_deg = median(rot);
  }
  report.metadata = {
      {"network", spec.network},
      {"coarse_location_model",
       fmt::format("synthetic: true position plus 2-D Gaussian noise whose 95% radius is drawn "
                   "uniformly from [{}, {}] m outdoors and [{}, {}] m indoors; fix interval {} s",
                   spec.coarse.outdoor_min_m, spec.coarse.outdoor_max_m, spec.coarse.indoor_min_m,
                   spec.coarse.indoor_max_m,
                   spec.coarse.fix_interval_s > 0 ? spec.coarse.fix_interval_s : spec.step_s)},
      {"visibility", spec.occlusion ? "within r_vis and inside the map region"
                                    : "within r_vis"},
      {"steps", spec.steps},
      {"step_s", spec.step_s},
  };
  return report;
}

std::string config_hash(const WorldSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : spec.to_json().dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::vector<std::string> report(const MetricsReport& metrics, const WorldSpec& spec,
                                const std::string& dir,
                                const std::vector<nlohmann::json>& events) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto open = [&](const std::string& name) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    written.push_back(path);
    return out;
  };
  const Aggregates& a = metrics.aggregates;
  const nlohmann::json full = metrics.to_json();
  open("metrics.json") << full.dump(2) << "\n";
  open("summary.json") << nlohmann::json{{"scenario", metrics.scenario},
                                         {"seed", metrics.seed},
                                         {"aggregates", full["aggregates"]},
                                         {"metadata", metrics.metadata}}
                              .dump(2)
                       << "\n";
  {
    auto out = open("steps.csv");
    out << "step,t,indoor,coarse_radius_m,geodomains_total,geodomains_uncached,geodomains_cached,"
           "hit_ratio,rediscovered,active,truth,pose_error_m,client_dns_wire_queries\n";
    for (const auto& s : metrics.steps) {
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", s.step, s.t, s.indoor ? 1 : 0,
                         s.coarse_radius_m, s.geodomains_total, s.geodomains_uncached,
                         s.geodomains_cached, s.hit_ratio, s.rediscovered ? 1 : 0,
                         csv_opt(s.active), csv_opt(s.truth), csv_opt(s.pose_error_m),
                         s.client_dns_wire_queries);
    }
  }
  {
    auto out = open("fig10a_geodomains_timeseries.csv");
    out << "step,t,total,uncached\n";
    for (const auto& s : metrics.steps) {
      out << fmt::format("{},{},{},{}\n", s.step, s.t, s.geodomains_total, s.geodomains_uncached);
    }
  }
  {
    auto out = open("fig10b_geodomains_boxplot.csv");
    out << "series,n,min,q1,median,q3,max\n";
    std::vector<double> tot, unc;
    for (const auto& s : metrics.steps) {
      tot.push_back(s.geodomains_total);
      unc.push_back(s.geodomains_uncached);
    }
    for (const auto& [name, v] : {std::pair{"total", tot}, std::pair{"uncached", unc}}) {
      out << fmt::format("{},{},{},{},{},{},{}\n", name, v.size(), quantile(v, 0), quantile(v, 0.25),
                         quantile(v, 0.5), quantile(v, 0.75), quantile(v, 1));
    }
  }
  {
    auto out = open("fig11_hit_ratio_histogram.csv");
    out << "bin_lo,bin_hi,count\n";
    for (int b = 0; b < 10; ++b) {
      out << fmt::format("{:.1f},{:.1f},{}\n", b / 10.0, (b + 1) / 10.0, a.hit_ratio_histogram[b]);
    }
  }
  {
    auto out = open("fig12_map_selection.csv");
    std::vector<std::string> ids;
    for (const auto& m : spec.maps) ids.push_back(m.map_id);
    std::sort(ids.begin(), ids.end());
    out << "step,t,truth,active,rediscovered";
    for (const auto& id : ids) out << ",confidence_" << id << ",ema_" << id;
    out << "\n";
    for (const auto& s : metrics.steps) {
      out << fmt::format("{},{},{},{},{}", s.step, s.t, csv_opt(s.truth), csv_opt(s.active),
                         s.rediscovered ? 1 : 0);
      for (const auto& id : ids) {
        const auto it = std::find_if(s.scores.begin(), s.scores.end(),
                                     [&](const auto& sc) { return sc.map_id == id; });
        if (it == s.scores.end()) {
          out << ",,";
        } else {
          out << fmt::format(",{},{}", it->confidence, csv_opt(it->ema_error_m));
        }
      }
      out << "\n";
    }
  }
  if (!events.empty()) {
    auto out = open("events.jsonl");
    for (const auto& e : events) out << e.dump() << "\n";
  }

  std::vector<std::string> names;
  for (const auto& p : written) names.push_back(fs::path(p).filename().string());
  const nlohmann::json manifest{
      {"scenario", metrics.scenario},
      {"seed", metrics.seed},
      {"config_hash", config_hash(spec)},
      {"versions",
       {{"flame", FLAME_VERSION},
        {"map_protocol", mapserver::kProtocolVersion},
        {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                      NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH)},
        {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                              EIGEN_MINOR_VERSION)}}},
      {"network", spec.network},
      {"coarse_location_model", metrics.metadata.value("coarse_location_model", "")},
      {"files", names},
  };
  open("manifest.json") << manifest.dump(2) << "\n";
  return written;
}

}  // namespace flame::sim
