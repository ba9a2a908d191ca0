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
#include "flame/geo/geodomain.hpp"
#include "flame/geo/zone_records.hpp"

namespace {

using namespace flame;

void BM_CoverCap(benchmark::State& state) {
  const cells::SphericalCap cap({40.4433, -79.9436}, static_cast<double>(state.range(0)));
  const auto params = cells::CoveringParams::registration_defaults();
  std::size_t n = 0;
  for (auto _ : state) {
    auto c = cells::cover(cap, params);
    n = c.size();
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["cells"] = static_cast<double>(n);
}
BENCHMARK(BM_CoverCap)->Arg(10)->Arg(100)->Arg(1000);

void BM_QuerySet(benchmark::State& state) {
  const geo::CoarseLocation loc{{40.4433, -79.9436}, static_cast<double>(state.range(0))};
  const geo::QueryConfig cfg;
  std::size_t n = 0;
  for (auto _ : state) {
    auto q = geo::query_set(loc, cfg);
    n = q.size();
    benchmark::DoNotOptimize(q.data());
  }
  state.counters["domains"] = static_cast<double>(n);
}
BENCHMARK(BM_QuerySet)->Arg(5)->Arg(30)->Arg(60);

void BM_ZoneRecords(benchmark::State& state) {
  const cells::SphericalCap cap({40.4433, -79.9436}, 60);
  const auto target = dns::FlameRecord::mcname("https://hall.maps.example.edu");
  for (auto _ : state) {
    auto recs = geo::zone_records(cap, target, cells::CoveringParams::registration_defaults(),
                                  geo::kDefaultSuffix);
    benchmark::DoNotOptimize(recs.data());
  }
}
BENCHMARK(BM_ZoneRecords);

void BM_CellToDomain(benchmark::State& state) {
  const auto cell = cells::CellId::from_latlng(cells::LatLng(40.4433, -79.9436), 24);
  for (auto _ : state) {
    auto d = geo::cell_to_geodomain(cell, geo::kDefaultSuffix);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_CellToDomain);

}  // namespace
