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

#ifndef FLAME_GEO_ZONE_RECORDS_HPP_
#define FLAME_GEO_ZONE_RECORDS_HPP_

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flame/cells/coverer.hpp"
#include "flame/cells/region.hpp"
#include "flame/dns/flame_record.hpp"

namespace flame::geo {

// SOA fields of a generated zone. The negative-caching TTL resolvers apply
// is min(ttl, minimum).
struct SoaParams {
  std::string mname;  // primary nameserver, absolute name without dot
  std::string rname;  // mailbox as a name
  std::uint32_t serial = 1;
  std::uint32_t refresh = 3600;
  std::uint32_t retry = 600;
  std::uint32_t expire = 86400;
  std::uint32_t minimum = 60;
  std::uint32_t ttl = 3600;

  static SoaParams defaults_for(std::string_view origin);
  std::uint32_t negative_ttl() const { return std::min(ttl, minimum); }
};

struct ZoneRecord {
  std::string owner;  // normalized, no trailing dot
  std::uint32_t ttl = 300;
  std::string txt;    // one character-string
  cells::CellId cell;

  friend bool operator==(const ZoneRecord&, const ZoneRecord&) = default;
};

inline constexpr std::uint32_t kDefaultRecordTtl = 300;

// One TXT record per exterior-covering cell of `region`, in cell order.
// The covering mode in `params` is forced to exterior.
std::vector<ZoneRecord> zone_records(const cells::Region& region,
                                     const dns::FlameRecord& target,
                                     cells::CoveringParams params,
                                     std::string_view suffix,
                                     std::uint32_t ttl = kDefaultRecordTtl);

// Master-file text: $ORIGIN, $TTL, the SOA, then one line per record as
// "<owner>. <ttl> IN TXT \"<text>\"". Owners are absolute and lowercase.
std::string render_zone(std::string_view origin, const SoaParams& soa,
                        const std::vector<ZoneRecord>& records,
                        std::uint32_t default_ttl = kDefaultRecordTtl);

// Quotes a TXT character-string for master-file output.
std::string quote_txt(std::string_view text);

}  // namespace flame::geo

#endif  // FLAME_GEO_ZONE_RECORDS_HPP_
