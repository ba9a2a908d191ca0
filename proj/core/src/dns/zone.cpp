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

#include "flame/dns/zone.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "flame/dns/flame_record.hpp"
#include "flame/dns/name.hpp"
#include "flame/errors.hpp"

namespace flame::dns {
namespace {

struct Token {
  std::string text;
  bool quoted = false;
};

// One logical entry: its first physical line number, whether it starts
// with blank space (owner omitted) and its tokens.
struct Entry {
  int line = 0;
  bool inherit_owner = false;
  std::vector<Token> tokens;
};

std::vector<Entry> tokenize(std::string_view text) {
  std::vector<Entry> entries;
  Entry cur;
  int line = 1;
  int depth = 0;
  bool at_line_start = true;
  std::size_t i = 0;
  const auto flush = [&] {
    if (!cur.tokens.empty()) entries.push_back(std::move(cur));
    cur = Entry{};
  };
  while (i < text.size()) {
    const char c = text[i];
    if (at_line_start && depth == 0) {
      flush();
      cur.line = line;
      cur.inherit_owner = (c == ' ' || c == '\t');
      at_line_start = false;
    }
    if (c == '\n') {
      ++line;
      ++i;
      at_line_start = true;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '(') {
      ++depth;
      ++i;
      continue;
    }
    if (c == ')') {
      if (depth == 0) throw ParseError("unbalanced ')'", line);
      --depth;
      ++i;
      continue;
    }
    Token tok;
    if (c == '"') {
      tok.quoted = true;
      ++i;
      while (true) {
        if (i >= text.size() || text[i] == '\n') {
          throw ParseError("unterminated quoted string", line);
        }
        if (text[i] == '"') {
          ++i;
          break;
        }
        if (text[i] == '\\') {
          ++i;
          if (i >= text.size()) throw ParseError("dangling escape", line);
          if (i + 2 < text.size() && std::isdigit(static_cast<unsigned char>(text[i])) &&
              std::isdigit(static_cast<unsigned char>(text[i + 1])) &&
              std::isdigit(static_cast<unsigned char>(text[i + 2]))) {
            const int v = (text[i] - '0') * 100 + (text[i + 1] - '0') * 10 + (text[i + 2] - '0');
            if (v > 255) throw ParseError("bad \\DDD escape", line);
            tok.text.push_back(static_cast<char>(v));
            i += 3;
            continue;
          }
        }
        tok.text.push_back(text[i++]);
      }
    } else {
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
             text[i] != ';' && text[i] != '(' && text[i] != ')' && text[i] != '"') {
        tok.text.push_back(text[i++]);
      }
    }
    cur.tokens.push_back(std::move(tok));
  }
  if (depth != 0) throw ParseError("unbalanced '('", line);
  flush();
  return entries;
}

std::optional<std::uint32_t> to_u32(std::string_view s) {
  std::uint32_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string ascii_upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string absolute(const std::string& name, const std::string& origin, int line) {
  try {
    if (name == "@") return origin;
    if (name.ends_with('.')) return normalize_name(name);
    if (origin.empty()) return normalize_name(name);
    return normalize_name(name + "." + origin);
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), line);
  }
}

}  // namespace

Zone::Zone(std::string origin, std::uint32_t soa_ttl, SoaData soa)
    : origin_(normalize_name(origin)), soa_ttl_(soa_ttl), soa_(std::move(soa)) {
  by_owner_[origin_].push_back(soa_record());
}

ResourceRecord Zone::soa_record() const {
  return ResourceRecord::soa(origin_, soa_ttl_, soa_);
}

ResourceRecord Zone::negative_soa_record() const {
  return ResourceRecord::soa(origin_, negative_ttl(), soa_);
}

void Zone::add(ResourceRecord rr) {
  rr.owner = normalize_name(rr.owner);
  if (!is_at_or_below(rr.owner, origin_)) {
    throw ValidationError("owner '" + rr.owner + "' is outside origin '" + origin_ + "'");
  }
  if (rr.type == rtype::kSoa) throw ValidationError("zone already has an SOA");
  std::string_view name = rr.owner;
  while (name.size() > origin_.size()) {
    const std::size_t dot = name.find('.');
    name.remove_prefix(dot + 1);
    interior_.emplace(name);
  }
  by_owner_[rr.owner].push_back(std::move(rr));
}

const std::vector<ResourceRecord>* Zone::find(std::string_view owner) const {
  const auto it = by_owner_.find(std::string(owner));
  return it == by_owner_.end() ? nullptr : &it->second;
}

bool Zone::is_empty_non_terminal(std::string_view owner) const {
  return !find(owner) && interior_.count(std::string(owner)) != 0;
}

std::vector<ResourceRecord> Zone::records() const {
  std::map<std::string_view, const std::vector<ResourceRecord>*> sorted;
  for (const auto& [owner, rrs] : by_owner_) sorted.emplace(owner, &rrs);
  std::vector<ResourceRecord> out;
  for (const auto& [owner, rrs] : sorted) {
    for (const ResourceRecord& rr : *rrs) {
      if (rr.type != rtype::kSoa) out.push_back(rr);
    }
  }
  return out;
}

std::size_t Zone::record_count() const {
  std::size_t n = 0;
  for (const auto& [owner, rrs] : by_owner_) n += rrs.size();
  return n - 1;
}

Zone load_zone(std::string_view text, std::optional<std::string_view> default_origin) {
  std::string origin = default_origin ? normalize_name(*default_origin) : std::string();
  bool have_origin = default_origin.has_value();
  std::optional<std::uint32_t> default_ttl;
  std::optional<Zone> zone;
  std::string last_owner;
  std::vector<std::pair<int, ResourceRecord>> pending;
  std::vector<std::string> warnings;

  for (const Entry& e : tokenize(text)) {
    const auto& t = e.tokens;
    if (!t[0].quoted && t[0].text.starts_with('$')) {
      const std::string directive = ascii_upper(t[0].text);
      if (t.size() != 2) throw ParseError(directive + " takes one argument", e.line);
      if (directive == "$ORIGIN") {
        if (!t[1].text.ends_with('.')) throw ParseError("$ORIGIN must be absolute", e.line);
        origin = absolute(t[1].text, "", e.line);
        have_origin = true;
      } else if (directive == "$TTL") {
        default_ttl = to_u32(t[1].text);
        if (!default_ttl) throw ParseError("bad $TTL value", e.line);
      } else {
        throw ParseError("unsupported directive " + directive, e.line);
      }
      continue;
    }
    std::size_t k = 0;
    std::string owner;
    if (e.inherit_owner) {
      if (last_owner.empty()) throw ParseError("record without an owner", e.line);
      owner = last_owner;
    } else {
      if (!have_origin && !t[0].text.ends_with('.')) {
        throw ParseError("relative owner before $ORIGIN", e.line);
      }
      owner = absolute(t[k++].text, origin, e.line);
    }
    last_owner = owner;
    std::optional<std::uint32_t> ttl;
    for (int pass = 0; pass < 2 && k < t.size(); ++pass) {
      if (const auto v = to_u32(t[k].text); v && !ttl) {
        ttl = v;
        ++k;
      } else if (ascii_upper(t[k].text) == "IN") {
        ++k;
      }
    }
    if (k >= t.size()) throw ParseError("missing record type", e.line);
    const std::string type = ascii_upper(t[k++].text);
    if (type == "SOA") {
      if (zone) throw ParseError("more than one SOA record", e.line);
      if (t.size() - k != 7) throw ParseError("SOA needs 7 fields", e.line);
      if (!have_origin) {
        origin = owner;
        have_origin = true;
      }
      if (owner != origin) throw ParseError("SOA owner must be the origin", e.line);
      SoaData soa;
      soa.mname = absolute(t[k].text, origin, e.line);
      soa.rname = absolute(t[k + 1].text, origin, e.line);
      std::uint32_t* fields[] = {&soa.serial, &soa.refresh, &soa.retry, &soa.expire,
                                 &soa.minimum};
      for (int f = 0; f < 5; ++f) {
        const auto v = to_u32(t[k + 2 + f].text);
        if (!v) throw ParseError("bad SOA number '" + t[k + 2 + f].text + "'", e.line);
        *fields[f] = *v;
      }
      // RFC 2308: without an explicit TTL the SOA uses $TTL.
      const std::uint32_t soa_ttl = ttl.value_or(default_ttl.value_or(soa.minimum));
      zone.emplace(origin, soa_ttl, std::move(soa));
    } else if (type == "TXT") {
      if (k >= t.size()) throw ParseError("TXT without data", e.line);
      TxtData strings;
      for (; k < t.size(); ++k) {
        if (t[k].text.size() > 255) throw ParseError("TXT string over 255 octets", e.line);
        strings.push_back(t[k].text);
      }
      if (!ttl && !default_ttl) throw ParseError("record without TTL and no $TTL", e.line);
      try {
        parse_flame_record(strings);
      } catch (const ValidationError& err) {
        warnings.push_back("line " + std::to_string(e.line) + ": " + err.what());
      }
      pending.emplace_back(e.line, ResourceRecord::txt(owner, ttl.value_or(*default_ttl),
                                                       std::move(strings)));
    } else {
      throw ParseError("unsupported record type " + type, e.line);
    }
  }
  if (!zone) throw ParseError("zone has no SOA record", 0);
  for (auto& [line, rr] : pending) {
    if (!is_at_or_below(rr.owner, zone->origin())) {
      throw ParseError("owner '" + rr.owner + "' is outside origin '" + zone->origin() + "'",
                       line);
    }
    zone->add(std::move(rr));
  }
  zone->warnings = std::move(warnings);
  return std::move(*zone);
}

Zone load_zone_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open zone file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_zone(ss.str());
}

ZoneSet::ZoneSet(std::vector<Zone> zones) {
  for (Zone& z : zones) add(std::move(z));
}

void ZoneSet::add(Zone zone) {
  for (auto& existing : zones_) {
    if (existing->origin() != zone.origin()) continue;
    Zone merged = *existing;
    for (auto& rr : zone.records()) {
      const auto* have = merged.find(rr.owner);
      // same owner, type and data is the same record whatever the TTL
      if (have && std::any_of(have->begin(), have->end(), [&](ResourceRecord o) {
            o.ttl = rr.ttl;
            return o == rr;
          })) {
        continue;
      }
      merged.add(std::move(rr));
    }
    merged.warnings.insert(merged.warnings.end(), zone.warnings.begin(), zone.warnings.end());
    existing = std::make_shared<const Zone>(std::move(merged));
    return;
  }
  zones_.push_back(std::make_shared<const Zone>(std::move(zone)));
}

const Zone* ZoneSet::find_zone(std::string_view name) const {
  const Zone* best = nullptr;
  for (const auto& z : zones_) {
    if (is_at_or_below(name, z->origin()) &&
        (!best || z->origin().size() > best->origin().size())) {
      best = z.get();
    }
  }
  return best;
}

namespace {

DnsMessage response_skeleton(const DnsMessage& query) {
  DnsMessage r;
  r.id = query.id;
  r.qr = true;
  r.opcode = query.opcode;
  r.rd = query.rd;
  r.questions = query.questions;
  return r;
}

}  // namespace

DnsMessage answer(const DnsMessage& query, const Zone& zone) {
  DnsMessage r = response_skeleton(query);
  if (query.qr || query.questions.size() != 1) {
    r.rcode = Rcode::kFormErr;
    return r;
  }
  if (query.opcode != 0) {
    r.rcode = Rcode::kNotImp;
    return r;
  }
  const Question& q = query.questions[0];
  if (q.klass != kClassIn || !is_at_or_below(q.name, zone.origin())) {
    r.rcode = Rcode::kRefused;
    return r;
  }
  r.aa = true;
  const std::vector<ResourceRecord>* rrs = zone.find(q.name);
  if (rrs) {
    for (const ResourceRecord& rr : *rrs) {
      if (rr.type == q.type || q.type == rtype::kAny) r.answers.push_back(rr);
    }
    if (r.answers.empty()) r.authority.push_back(zone.negative_soa_record());
    return r;
  }
  if (!zone.is_empty_non_terminal(q.name)) r.rcode = Rcode::kNxDomain;
  r.authority.push_back(zone.negative_soa_record());
  return r;
}

DnsMessage answer(const DnsMessage& query, const ZoneSet& zones) {
  const Zone* zone = nullptr;
  if (!query.qr && query.questions.size() == 1) {
    zone = zones.find_zone(query.questions[0].name);
  }
  if (zone) return answer(query, *zone);
  DnsMessage r = response_skeleton(query);
  r.rcode = (query.qr || query.questions.size() != 1) ? Rcode::kFormErr : Rcode::kRefused;
  return r;
}

}  // namespace flame::dns
