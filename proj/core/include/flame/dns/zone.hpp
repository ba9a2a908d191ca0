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

#ifndef FLAME_DNS_ZONE_HPP_
#define FLAME_DNS_ZONE_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "flame/dns/message.hpp"

namespace flame::dns {

// Authoritative data for one origin. Immutable after loading.
class Zone {
 public:
  Zone(std::string origin, std::uint32_t soa_ttl, SoaData soa);

  // Adds a record; the owner must be at or below the origin.
  void add(ResourceRecord rr);

  const std::string& origin() const { return origin_; }
  const SoaData& soa() const { return soa_; }
  std::uint32_t soa_ttl() const { return soa_ttl_; }
  // TTL for negative answers: min(SOA TTL, SOA MINIMUM).
  std::uint32_t negative_ttl() const { return std::min(soa_ttl_, soa_.minimum); }
  ResourceRecord soa_record() const;
  ResourceRecord negative_soa_record() const;

  // Records at exactly `owner`, or nullptr.
  const std::vector<ResourceRecord>* find(std::string_view owner) const;
  // True for names with no records of their own but with descendants.
  bool is_empty_non_terminal(std::string_view owner) const;

  // Every record except the SOA, ordered by owner then insertion.
  std::vector<ResourceRecord> records() const;
  std::size_t record_count() const;

  // Non-fatal findings from loading (e.g. malformed FLAME TXT data).
  std::vector<std::string> warnings;

 private:
  std::string origin_;
  std::uint32_t soa_ttl_;
  SoaData soa_;
  std::unordered_map<std::string, std::vector<ResourceRecord>> by_owner_;
  std::unordered_set<std::string> interior_;
};

// Parses master-file text: $ORIGIN, $TTL, SOA and TXT records, comments,
// parenthesised continuation lines, "@" and relative owner names. Needs
// either $ORIGIN or `default_origin`. Throws ParseError whose position() is
// the 1-based line number.
Zone load_zone(std::string_view text,
               std::optional<std::string_view> default_origin = {});
Zone load_zone_file(const std::string& path);

// Set of zones served together; queries go to the zone with the longest
// matching origin.
class ZoneSet {
 public:
  ZoneSet() = default;
  explicit ZoneSet(std::vector<Zone> zones);
  // A zone whose origin is already present is merged into it: the first
  // SOA is kept and repeated records are dropped.
  void add(Zone zone);
  const Zone* find_zone(std::string_view name) const;
  const std::vector<std::shared_ptr<const Zone>>& zones() const { return zones_; }

 private:
  std::vector<std::shared_ptr<const Zone>> zones_;
};

// Builds the authoritative response:
//   owner has TXT           -> NOERROR, AA, every TXT record
//   owner exists, no match  -> NOERROR (NODATA), SOA in authority
//   owner does not exist    -> NXDOMAIN, SOA in authority
//   outside every origin    -> REFUSED
// Negative answers carry the SOA with TTL min(SOA TTL, MINIMUM).
DnsMessage answer(const DnsMessage& query, const Zone& zone);
DnsMessage answer(const DnsMessage& query, const ZoneSet& zones);

}  // namespace flame::dns

#endif  // FLAME_DNS_ZONE_HPP_
