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

#ifndef FLAME_DNS_FLAME_RECORD_HPP_
#define FLAME_DNS_FLAME_RECORD_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace flame::dns {

// http(s)://host[:port][/path]
struct Url {
  std::string scheme;
  std::string host;
  std::uint16_t port = 0;  // 0 when absent
  std::string path;        // "" or starts with '/'

  std::uint16_t effective_port() const {
    return port != 0 ? port : (scheme == "https" ? 443 : 80);
  }
};

// Returns nullopt unless `text` is an http or https URL with a valid host.
std::optional<Url> parse_url(std::string_view text);

struct HostPort {
  std::string host;
  std::uint16_t port = 0;  // 0 when absent
};
std::optional<HostPort> parse_host_port(std::string_view text);

// Discovery record carried in a TXT record:
//   "flame1 MCNAME <url>"        a map server
//   "flame1 MNS <host[:port]>"   a delegated nameserver
struct FlameRecord {
  enum class Kind { kMcname, kMns };

  Kind kind = Kind::kMcname;
  std::string target;

  static FlameRecord mcname(std::string url);
  static FlameRecord mns(std::string host_port);

  std::string to_txt() const;

  friend bool operator==(const FlameRecord&, const FlameRecord&) = default;
};

inline constexpr std::string_view kFlameVersionToken = "flame1";

// Joins the TXT character-strings and parses the grammar above. Returns
// nullopt for TXT data that is not a FLAME record (no leading version
// token); throws ValidationError when the version token is present but the
// rest is malformed.
std::optional<FlameRecord> parse_flame_record(
    std::span<const std::string> txt_strings);
std::optional<FlameRecord> parse_flame_record(std::string_view txt);

std::string_view to_string(FlameRecord::Kind kind);

}  // namespace flame::dns

#endif  // FLAME_DNS_FLAME_RECORD_HPP_
