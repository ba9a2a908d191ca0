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

#include <benchmark/benchmark.h>

#include "flame/cells/coverer.hpp"
#include "flame/dns/message.hpp"
#include "flame/dns/nameserver.hpp"
#include "flame/dns/zone.hpp"
#include "flame/geo/geodomain.hpp"
#include "flame/geo/zone_records.hpp"

namespace {

using namespace flame;

dns::ZoneSet campus_zone() {
  const cells::SphericalCap cap({40.4433, -79.9436}, 200);
  const auto recs = geo::zone_records(cap, dns::FlameRecord::mcname("https://campus.example.edu"),
                                      cells::CoveringParams::registration_defaults(),
                                      geo::kDefaultSuffix);
  dns::ZoneSet zs;
  zs.add(dns::load_zone(geo::render_zone(
      geo::kDefaultSuffix, geo::SoaParams::defaults_for(geo::kDefaultSuffix), recs)));
  return zs;
}

void BM_EncodeDecodeQuery(benchmark::State& state) {
  const std::string name = "2.1.1.3.3.2.0.3.0.0.1.0.1.2.3.1.2.2.1.0.0.1.4.flame.test";
  for (auto _ : state) {
    auto wire = dns::encode_query(name, dns::rtype::kTxt);
    auto msg = dns::decode_message(wire);
    benchmark::DoNotOptimize(msg);
  }
}
BENCHMARK(BM_EncodeDecodeQuery);

// Whole datagram path of the nameserver minus the socket.
void BM_HandleDatagram(benchmark::State& state) {
  const auto zones = campus_zone();
  const geo::CoarseLocation loc{{40.4433, -79.9436}, 20};
  std::vector<std::vector<std::uint8_t>> queries;
  for (const auto& d : geo::query_set(loc, geo::QueryConfig{})) {
    queries.push_back(dns::encode_query(d.to_string(), dns::rtype::kTxt));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    auto reply = dns::handle_datagram(queries[i++ % queries.size()], zones);
    benchmark::DoNotOptimize(reply);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_HandleDatagram);

void BM_LoadZone(benchmark::State& state) {
  const cells::SphericalCap cap({40.4433, -79.9436}, 200);
  const auto recs = geo::zone_records(cap, dns::FlameRecord::mcname("https://campus.example.edu"),
                                      cells::CoveringParams::registration_defaults(),
                                      geo::kDefaultSuffix);
  const std::string text =
      geo::render_zone(geo::kDefaultSuffix, geo::SoaParams::defaults_for(geo::kDefaultSuffix), recs);
  for (auto _ : state) {
    auto z = dns::load_zone(text);
    benchmark::DoNotOptimize(z);
  }
  state.counters["records"] = static_cast<double>(recs.size());
}
BENCHMARK(BM_LoadZone);

}  // namespace
