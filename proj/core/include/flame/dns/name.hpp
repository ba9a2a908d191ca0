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

#ifndef FLAME_DNS_NAME_HPP_
#define FLAME_DNS_NAME_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace flame::dns {

inline constexpr std::size_t kMaxLabelLength = 63;
inline constexpr std::size_t kMaxNameWireLength = 255;

// Lowercases, drops one trailing dot and checks label syntax (letters,
// digits, '-' and '_'; 1..63 octets) and the 255-octet wire limit. The
// root name is returned as "". Throws ValidationError.
std::string normalize_name(std::string_view name);

// Labels of an already normalized name, leftmost first.
std::vector<std::string_view> split_labels(std::string_view name);

// True when `name` equals `origin` or lies below it. Both normalized.
bool is_at_or_below(std::string_view name, std::string_view origin);

}  // namespace flame::dns

#endif  // FLAME_DNS_NAME_HPP_
