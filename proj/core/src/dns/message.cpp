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

#include "flame/dns/message.hpp"

#include <random>

#include "flame/dns/name.hpp"
#include "flame/errors.hpp"

namespace flame::dns {
namespace {

constexpr std::size_t kHeaderSize = 12;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
  }
  void name(std::string_view n) {
    const std::string norm = normalize_name(n);
    for (std::string_view label : split_labels(norm)) {
      u8(static_cast<std::uint8_t>(label.size()));
      out_.insert(out_.end(), label.begin(), label.end());
    }
    u8(0);
  }
  void character_string(std::string_view s) {
    if (s.size() > 255) {
      throw ValidationError("TXT character-string longer than 255 octets");
    }
    u8(static_cast<std::uint8_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void bytes(std::span<const std::uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }
  std::size_t size() const { return out_.size(); }
  void patch_u16(std::size_t at, std::uint16_t v) {
    out_[at] = static_cast<std::uint8_t>(v >> 8);
    out_[at + 1] = static_cast<std::uint8_t>(v);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> wire) : wire_(wire) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return wire_.size() - pos_; }

  void need(std::size_t n) const {
    if (remaining() < n) throw ParseError("truncated message", static_cast<int>(pos_));
  }
  std::uint8_t u8() {
    need(1);
    return wire_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = static_cast<std::uint16_t>((wire_[pos_] << 8) | wire_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    const std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }

  // Reads a possibly compressed name starting at the cursor.
  std::string name() {
    std::string out;
    std::size_t at = pos_;
    std::size_t wire_len = 1;
    bool jumped = false;
    // Every pointer must move strictly backwards, so this terminates.
    std::size_t limit = pos_;
    while (true) {
      if (at >= wire_.size()) throw ParseError("truncated name", static_cast<int>(at));
      const std::uint8_t len = wire_[at];
      if ((len & 0xc0) == 0xc0) {
        if (at + 1 >= wire_.size()) throw ParseError("truncated pointer", static_cast<int>(at));
        const std::size_t target = ((len & 0x3f) << 8) | wire_[at + 1];
        if (target >= limit) {
          throw ParseError("compression pointer does not point backwards",
                           static_cast<int>(at));
        }
        if (!jumped) pos_ = at + 2;
        jumped = true;
        limit = target;
        at = target;
        continue;
      }
      if ((len & 0xc0) != 0) throw ParseError("bad label type", static_cast<int>(at));
      if (len == 0) {
        if (!jumped) pos_ = at + 1;
        break;
      }
      if (at + 1 + len > wire_.size()) throw ParseError("truncated label", static_cast<int>(at));
      wire_len += len + 1;
      if (wire_len > kMaxNameWireLength) throw ParseError("name too long", static_cast<int>(at));
      if (!out.empty()) out.push_back('.');
      for (std::size_t i = 0; i < len; ++i) {
        char c = static_cast<char>(wire_[at + 1 + i]);
        if (c <= ' ' || c == '.' || c == '\\' || c >= 0x7f) {
          throw ParseError("unsupported octet in label", static_cast<int>(at + 1 + i));
        }
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        out.push_back(c);
      }
      at += 1 + len;
    }
    return out;
  }

  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    const auto s = wire_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> wire_;
  std::size_t pos_ = 0;
};

void write_record(Writer& w, const ResourceRecord& rr) {
  w.name(rr.owner);
  w.u16(rr.type);
  w.u16(rr.klass);
  w.u32(rr.ttl);
  const std::size_t len_at = w.size();
  w.u16(0);
  const std::size_t start = w.size();
  if (const auto* txt = std::get_if<TxtData>(&rr.rdata)) {
    if (txt->empty()) throw ValidationError("TXT record without strings");
    for (const std::string& s : *txt) w.character_string(s);
  } else if (const auto* soa = std::get_if<SoaData>(&rr.rdata)) {
    w.name(soa->mname);
    w.name(soa->rname);
    w.u32(soa->serial);
    w.u32(soa->refresh);
    w.u32(soa->retry);
    w.u32(soa->expire);
    w.u32(soa->minimum);
  } else {
    w.bytes(std::get<OpaqueData>(rr.rdata));
  }
  const std::size_t len = w.size() - start;
  if (len > 0xffff) throw ValidationError("rdata too long");
  w.patch_u16(len_at, static_cast<std::uint16_t>(len));
}

ResourceRecord read_record(Reader& r) {
  ResourceRecord rr;
  rr.owner = r.name();
  rr.type = r.u16();
  rr.klass = r.u16();
  rr.ttl = r.u32();
  const std::uint16_t rdlength = r.u16();
  r.need(rdlength);
  const std::size_t end = r.pos() + rdlength;
  if (rr.type == rtype::kTxt) {
    TxtData strings;
    while (r.pos() < end) {
      const std::uint8_t n = r.u8();
      if (r.pos() + n > end) throw ParseError("TXT string overruns rdata", static_cast<int>(r.pos()));
      const auto b = r.bytes(n);
      strings.emplace_back(b.begin(), b.end());
    }
    if (strings.empty()) throw ParseError("empty TXT rdata", static_cast<int>(r.pos()));
    rr.rdata = std::move(strings);
  } else if (rr.type == rtype::kSoa) {
    SoaData soa;
    soa.mname = r.name();
    soa.rname = r.name();
    soa.serial = r.u32();
    soa.refresh = r.u32();
    soa.retry = r.u32();
    soa.expire = r.u32();
    soa.minimum = r.u32();
    rr.rdata = std::move(soa);
  } else {
    const auto b = r.bytes(rdlength);
    rr.rdata = OpaqueData(b.begin(), b.end());
  }
  if (r.pos() != end) throw ParseError("rdata length mismatch", static_cast<int>(r.pos()));
  return rr;
}

}  // namespace

std::string_view to_string(Rcode rcode) {
  switch (rcode) {
    case Rcode::kNoError: return "NOERROR";
    case Rcode::kFormErr: return "FORMERR";
    case Rcode::kServFail: return "SERVFAIL";
    case Rcode::kNxDomain: return "NXDOMAIN";
    case Rcode::kNotImp: return "NOTIMP";
    case Rcode::kRefused: return "REFUSED";
  }
  return "RCODE?";
}

std::string rtype_name(std::uint16_t type) {
  switch (type) {
    case rtype::kA: return "A";
    case rtype::kNs: return "NS";
    case rtype::kCname: return "CNAME";
    case rtype::kSoa: return "SOA";
    case rtype::kTxt: return "TXT";
    case rtype::kAaaa: return "AAAA";
    case rtype::kAny: return "ANY";
  }
  return "TYPE" + std::to_string(type);
}

ResourceRecord ResourceRecord::txt(std::string owner, std::uint32_t ttl,
                                   TxtData strings) {
  ResourceRecord rr;
  rr.owner = std::move(owner);
  rr.type = rtype::kTxt;
  rr.ttl = ttl;
  rr.rdata = std::move(strings);
  return rr;
}

ResourceRecord ResourceRecord::soa(std::string owner, std::uint32_t ttl,
                                   SoaData soa) {
  ResourceRecord rr;
  rr.owner = std::move(owner);
  rr.type = rtype::kSoa;
  rr.ttl = ttl;
  rr.rdata = std::move(soa);
  return rr;
}

TxtData split_txt(std::string_view text) {
  TxtData out;
  do {
    out.emplace_back(text.substr(0, 255));
    text.remove_prefix(std::min<std::size_t>(255, text.size()));
  } while (!text.empty());
  return out;
}

std::vector<std::uint8_t> encode_message(const DnsMessage& m) {
  const auto check_count = [](std::size_t n) {
    if (n > 0xffff) throw ValidationError("too many records");
    return static_cast<std::uint16_t>(n);
  };
  Writer w;
  w.u16(m.id);
  std::uint16_t flags = 0;
  if (m.qr) flags |= 0x8000;
  flags |= static_cast<std::uint16_t>((m.opcode & 0xf) << 11);
  if (m.aa) flags |= 0x0400;
  if (m.tc) flags |= 0x0200;
  if (m.rd) flags |= 0x0100;
  if (m.ra) flags |= 0x0080;
  flags |= static_cast<std::uint16_t>(m.rcode) & 0xf;
  w.u16(flags);
  w.u16(check_count(m.questions.size()));
  w.u16(check_count(m.answers.size()));
  w.u16(check_count(m.authority.size()));
  w.u16(check_count(m.additional.size()));
  for (const Question& q : m.questions) {
    w.name(q.name);
    w.u16(q.type);
    w.u16(q.klass);
  }
  for (const auto* section : {&m.answers, &m.authority, &m.additional}) {
    for (const ResourceRecord& rr : *section) write_record(w, rr);
  }
  return w.take();
}

DnsMessage make_query(std::string_view name, std::uint16_t qtype,
                      std::uint16_t id) {
  DnsMessage m;
  m.id = id;
  m.rd = true;
  m.questions.push_back({normalize_name(name), qtype, kClassIn});
  return m;
}

std::vector<std::uint8_t> encode_query(std::string_view name,
                                       std::uint16_t qtype) {
  thread_local std::mt19937 rng(std::random_device{}());
  const auto id = static_cast<std::uint16_t>(rng());
  return encode_message(make_query(name, qtype, id));
}

DnsMessage decode_message(std::span<const std::uint8_t> wire) {
  Reader r(wire);
  if (wire.size() < kHeaderSize) throw ParseError("message shorter than header", 0);
  DnsMessage m;
  m.id = r.u16();
  const std::uint16_t flags = r.u16();
  m.qr = flags & 0x8000;
  m.opcode = static_cast<std::uint8_t>((flags >> 11) & 0xf);
  m.aa = flags & 0x0400;
  m.tc = flags & 0x0200;
  m.rd = flags & 0x0100;
  m.ra = flags & 0x0080;
  m.rcode = static_cast<Rcode>(flags & 0xf);
  const std::uint16_t qd = r.u16();
  const std::uint16_t an = r.u16();
  const std::uint16_t ns = r.u16();
  const std::uint16_t ar = r.u16();
  // Each question needs >= 5 octets and each record >= 11; reject counts
  // the datagram cannot possibly hold before allocating.
  if (static_cast<std::size_t>(qd) * 5 + (static_cast<std::size_t>(an) + ns + ar) * 11 >
      r.remaining()) {
    throw ParseError("section counts exceed message size", 4);
  }
  m.questions.reserve(qd);
  for (int i = 0; i < qd; ++i) {
    Question q;
    q.name = r.name();
    q.type = r.u16();
    q.klass = r.u16();
    m.questions.push_back(std::move(q));
  }
  for (auto [count, section] : {std::pair{an, &m.answers}, std::pair{ns, &m.authority},
                                std::pair{ar, &m.additional}}) {
    section->reserve(count);
    for (int i = 0; i < count; ++i) section->push_back(read_record(r));
  }
  if (r.remaining() != 0) throw ParseError("trailing octets", static_cast<int>(r.pos()));
  return m;
}

}  // namespace flame::dns
