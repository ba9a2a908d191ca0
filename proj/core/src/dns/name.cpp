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

#include "flame/dns/name.hpp"

#include <cctype>

#include "flame/errors.hpp"

namespace flame::dns {

std::string normalize_name(std::string_view name) {
  if (!name.empty() && name.back() == '.') name.remove_suffix(1);
  std::string out;
  out.reserve(name.size());
  if (name.empty()) return out;
  std::size_t wire = 1;
  std::size_t label_len = 0;
  for (std::size_t i = 0; i <= name.size(); ++i) {
    if (i == name.size() || name[i] == '.') {
      if (label_len == 0) {
        throw ValidationError("empty label in name '" + std::string(name) + "'");
      }
      if (label_len > kMaxLabelLength) {
        throw ValidationError("label longer than 63 octets in '" +
                              std::string(name) + "'");
      }
      wire += label_len + 1;
      label_len = 0;
      if (i < name.size()) out.push_back('.');
      continue;
    }
    const unsigned char c = static_cast<unsigned char>(name[i]);
    if (!std::isalnum(c) && c != '-' && c != '_') {
      throw ValidationError("invalid character in name '" + std::string(name) +
                            "'");
    }
    out.push_back(static_cast<char>(std::tolower(c)));
    ++label_len;
  }
  if (wire > kMaxNameWireLength) {
    throw ValidationError("name exceeds 255 octets");
  }
  return out;
}

std::vector<std::string_view> split_labels(std::string_view name) {
  std::vector<std::string_view> labels;
  while (!name.empty()) {
    const std::size_t dot = name.find('.');
    if (dot == std::string_view::npos) {
      labels.push_back(name);
      break;
    }
    labels.push_back(name.substr(0, dot));
    name.remove_prefix(dot + 1);
  }
  return labels;
}

bool is_at_or_below(std::string_view name, std::string_view origin) {
  if (origin.empty()) return true;
  if (name.size() == origin.size()) return name == origin;
  return name.size() > origin.size() && name.ends_with(origin) &&
         name[name.size() - origin.size() - 1] == '.';
}

}  // namespace flame::dns
