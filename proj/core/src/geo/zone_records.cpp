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

#include "flame/geo/zone_records.hpp"

#include "flame/dns/name.hpp"
#include "flame/geo/geodomain.hpp"

namespace flame::geo {

SoaParams SoaParams::defaults_for(std::string_view origin) {
  const std::string o = dns::normalize_name(origin);
  SoaParams soa;
  soa.mname = "ns1." + o;
  soa.rname = "hostmaster." + o;
  return soa;
}

std::vector<ZoneRecord> zone_records(const cells::Region& region,
                                     const dns::FlameRecord& target,
                                     cells::CoveringParams params,
                                     std::string_view suffix,
                                     std::uint32_t ttl) {
  params.mode = cells::CoverMode::kExterior;
  const std::string txt = target.to_txt();
  std::vector<ZoneRecord> out;
  for (cells::CellId cell : cells::cover(region, params)) {
    out.push_back({GeoDomain(cell, suffix).to_string(), ttl, txt, cell});
  }
  return out;
}

std::string quote_txt(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string render_zone(std::string_view origin, const SoaParams& soa,
                        const std::vector<ZoneRecord>& records,
                        std::uint32_t default_ttl) {
  const std::string o = dns::normalize_name(origin);
  std::string out;
  out += "$ORIGIN " + o + ".\n";
  out += "$TTL " + std::to_string(default_ttl) + "\n";
  out += "@ " + std::to_string(soa.ttl) + " IN SOA " + soa.mname + ". " +
         soa.rname + ". " + std::to_string(soa.serial) + " " +
         std::to_string(soa.refresh) + " " + std::to_string(soa.retry) + " " +
         std::to_string(soa.expire) + " " + std::to_string(soa.minimum) + "\n";
  for (const ZoneRecord& r : records) {
    out += r.owner + ". " + std::to_string(r.ttl) + " IN TXT " +
           quote_txt(r.txt) + "\n";
  }
  return out;
}

}  // namespace flame::geo
