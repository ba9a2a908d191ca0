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

#include "flame/dns/flame_record.hpp"

#include <charconv>

#include "flame/dns/name.hpp"
#include "flame/errors.hpp"

namespace flame::dns {
namespace {

bool valid_host(std::string_view host) {
  if (host.empty()) return false;
  try {
    normalize_name(host);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

std::optional<std::uint16_t> parse_port(std::string_view text) {
  unsigned value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0 ||
      value > 65535) {
    return std::nullopt;
  }
  return static_cast<std::uint16_t>(value);
}

}  // namespace

std::optional<HostPort> parse_host_port(std::string_view text) {
  HostPort out;
  const std::size_t colon = text.rfind(':');
  std::string_view host = text;
  if (colon != std::string_view::npos) {
    host = text.substr(0, colon);
    const auto port = parse_port(text.substr(colon + 1));
    if (!port) return std::nullopt;
    out.port = *port;
  }
  if (!valid_host(host)) return std::nullopt;
  out.host = normalize_name(host);
  return out;
}

std::optional<Url> parse_url(std::string_view text) {
  Url url;
  const std::size_t sep = text.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  url.scheme = std::string(text.substr(0, sep));
  if (url.scheme != "http" && url.scheme != "https") return std::nullopt;
  std::string_view rest = text.substr(sep + 3);
  const std::size_t slash = rest.find('/');
  if (slash != std::string_view::npos) {
    url.path = std::string(rest.substr(slash));
    rest = rest.substr(0, slash);
  }
  for (char c : url.path) {
    if (c <= ' ' || c == '"' || c == 0x7f) return std::nullopt;
  }
  const auto hp = parse_host_port(rest);
  if (!hp) return std::nullopt;
  url.host = hp->host;
  url.port = hp->port;
  return url;
}

FlameRecord FlameRecord::mcname(std::string url) {
  if (!parse_url(url)) throw ValidationError("invalid MCNAME url '" + url + "'");
  return {Kind::kMcname, std::move(url)};
}

FlameRecord FlameRecord::mns(std::string host_port) {
  if (!parse_host_port(host_port)) {
    throw ValidationError("invalid MNS target '" + host_port + "'");
  }
  return {Kind::kMns, std::move(host_port)};
}

std::string_view to_string(FlameRecord::Kind kind) {
  return kind == FlameRecord::Kind::kMcname ? "MCNAME" : "MNS";
}

std::string FlameRecord::to_txt() const {
  return std::string(kFlameVersionToken) + " " + std::string(to_string(kind)) +
         " " + target;
}

std::optional<FlameRecord> parse_flame_record(std::string_view txt) {
  const std::size_t first = txt.find(' ');
  if (txt.substr(0, first) != kFlameVersionToken) return std::nullopt;
  if (first == std::string_view::npos) {
    throw ValidationError("FLAME record without a kind");
  }
  std::string_view rest = txt.substr(first + 1);
  const std::size_t second = rest.find(' ');
  if (second == std::string_view::npos) {
    throw ValidationError("FLAME record without a target");
  }
  const std::string_view kind = rest.substr(0, second);
  const std::string_view target = rest.substr(second + 1);
  if (target.empty() || target.find(' ') != std::string_view::npos) {
    throw ValidationError("malformed FLAME record target '" +
                          std::string(target) + "'");
  }
  if (kind == "MCNAME") return FlameRecord::mcname(std::string(target));
  if (kind == "MNS") return FlameRecord::mns(std::string(target));
  throw ValidationError("unknown FLAME record kind '" + std::string(kind) + "'");
}

std::optional<FlameRecord> parse_flame_record(
    std::span<const std::string> txt_strings) {
  std::string joined;
  for (const std::string& s : txt_strings) joined += s;
  return parse_flame_record(std::string_view(joined));
}

}  // namespace flame::dns
