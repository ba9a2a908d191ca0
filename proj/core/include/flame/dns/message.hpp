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

#ifndef FLAME_DNS_MESSAGE_HPP_
#define FLAME_DNS_MESSAGE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace flame::dns {

namespace rtype {
inline constexpr std::uint16_t kA = 1;
inline constexpr std::uint16_t kNs = 2;
inline constexpr std::uint16_t kCname = 5;
inline constexpr std::uint16_t kSoa = 6;
inline constexpr std::uint16_t kTxt = 16;
inline constexpr std::uint16_t kAaaa = 28;
inline constexpr std::uint16_t kAny = 255;
}  // namespace rtype

inline constexpr std::uint16_t kClassIn = 1;

enum class Rcode : std::uint8_t {
  kNoError = 0,
  kFormErr = 1,
  kServFail = 2,
  kNxDomain = 3,
  kNotImp = 4,
  kRefused = 5,
};

std::string_view to_string(Rcode rcode);
std::string rtype_name(std::uint16_t type);

struct SoaData {
  std::string mname;
  std::string rname;
  std::uint32_t serial = 0;
  std::uint32_t refresh = 0;
  std::uint32_t retry = 0;
  std::uint32_t expire = 0;
  std::uint32_t minimum = 0;

  friend bool operator==(const SoaData&, const SoaData&) = default;
};

// TXT rdata: one or more character-strings of at most 255 octets each.
using TxtData = std::vector<std::string>;
// Rdata of any other type, kept verbatim.
using OpaqueData = std::vector<std::uint8_t>;

struct ResourceRecord {
  std::string owner;  // normalized, no trailing dot
  std::uint16_t type = rtype::kTxt;
  std::uint16_t klass = kClassIn;
  std::uint32_t ttl = 0;
  std::variant<TxtData, SoaData, OpaqueData> rdata;

  static ResourceRecord txt(std::string owner, std::uint32_t ttl,
                            TxtData strings);
  static ResourceRecord soa(std::string owner, std::uint32_t ttl, SoaData soa);

  friend bool operator==(const ResourceRecord&, const ResourceRecord&) = default;
};

struct Question {
  std::string name;
  std::uint16_t type = rtype::kTxt;
  std::uint16_t klass = kClassIn;

  friend bool operator==(const Question&, const Question&) = default;
};

struct DnsMessage {
  std::uint16_t id = 0;
  bool qr = false;  // response
  std::uint8_t opcode = 0;
  bool aa = false;
  bool tc = false;
  bool rd = false;
  bool ra = false;
  Rcode rcode = Rcode::kNoError;
  std::vector<Question> questions;
  std::vector<ResourceRecord> answers;
  std::vector<ResourceRecord> authority;
  std::vector<ResourceRecord> additional;

  friend bool operator==(const DnsMessage&, const DnsMessage&) = default;
};

// Splits text into <= 255-octet character-strings.
TxtData split_txt(std::string_view text);

// Wire form without name compression. Throws ValidationError for names or
// character-strings over the RFC 1035 limits.
std::vector<std::uint8_t> encode_message(const DnsMessage& msg);

// A query with RD=1 and one question.
DnsMessage make_query(std::string_view name, std::uint16_t qtype,
                      std::uint16_t id);
// make_query with a fresh random id, encoded.
std::vector<std::uint8_t> encode_query(std::string_view name,
                                       std::uint16_t qtype);

// Parses header, questions and the three record sections. Follows
// compression pointers, which must point strictly backwards. Throws
// ParseError (position = byte offset) on any malformed input.
DnsMessage decode_message(std::span<const std::uint8_t> wire);

}  // namespace flame::dns

#endif  // FLAME_DNS_MESSAGE_HPP_
