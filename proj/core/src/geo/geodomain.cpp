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

#include "flame/geo/geodomain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "flame/cells/region.hpp"
#include "flame/dns/name.hpp"
#include "flame/errors.hpp"

namespace flame::geo {
namespace {

std::string checked_suffix(std::string_view suffix) {
  std::string s = dns::normalize_name(suffix);
  if (s.empty()) throw ValidationError("geo-domain suffix must not be empty");
  return s;
}

}  // namespace

GeoDomain::GeoDomain(cells::CellId cell, std::string_view suffix)
    : cell_(cell), suffix_(checked_suffix(suffix)) {
  if (!cell.is_valid()) throw ValidationError("invalid cell id");
}

GeoDomain GeoDomain::parse(std::string_view name,
                           std::optional<std::string_view> expected_suffix) {
  std::string norm;
  try {
    norm = dns::normalize_name(name);
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  const auto labels = dns::split_labels(norm);
  std::size_t n = 0;
  while (n < labels.size() && labels[n].size() == 1 &&
         std::isdigit(static_cast<unsigned char>(labels[n][0]))) {
    ++n;
  }
  if (expected_suffix) {
    // With a known suffix, digit-only suffix labels are not cell labels.
    const std::string want = dns::normalize_name(*expected_suffix);
    const std::size_t want_labels = dns::split_labels(want).size();
    if (labels.size() < want_labels + 1 ||
        !dns::is_at_or_below(norm, want) || norm == want) {
      throw ParseError("'" + norm + "' is not under suffix '" + want + "'",
                       static_cast<int>(labels.size()) - 1);
    }
    n = labels.size() - want_labels;
  }
  if (n == 0) throw ParseError("no cell labels in '" + norm + "'", 0);
  if (n == labels.size()) throw ParseError("missing suffix in '" + norm + "'",
                                           static_cast<int>(n) - 1);
  if (n - 1 > static_cast<std::size_t>(cells::kMaxLevel)) {
    throw ParseError("more than 30 child labels", 0);
  }
  const auto digit = [&](std::size_t i, int max) {
    const std::string_view l = labels[i];
    if (l.size() != 1 || l[0] < '0' || l[0] - '0' > max) {
      throw ParseError("label " + std::to_string(i) + " ('" + std::string(l) +
                           "') must be a digit 0-" + std::to_string(max),
                       static_cast<int>(i));
    }
    return l[0] - '0';
  };
  const int face = digit(n - 1, 5);
  std::vector<int> path;
  for (std::size_t i = n - 1; i-- > 0;) path.push_back(digit(i, 3));
  std::string suffix;
  for (std::size_t i = n; i < labels.size(); ++i) {
    if (!suffix.empty()) suffix.push_back('.');
    suffix.append(labels[i]);
  }
  return GeoDomain(cells::CellId::from_face_path(face, path), suffix);
}

std::vector<std::string> GeoDomain::labels() const {
  std::vector<std::string> out;
  const std::vector<int> path = cell_.path();
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    out.push_back(std::to_string(*it));
  }
  out.push_back(std::to_string(cell_.face()));
  return out;
}

std::string GeoDomain::to_string() const {
  std::string out;
  const std::vector<int> path = cell_.path();
  out.reserve(2 * path.size() + 2 + suffix_.size());
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    out.push_back(static_cast<char>('0' + *it));
    out.push_back('.');
  }
  out.push_back(static_cast<char>('0' + cell_.face()));
  out.push_back('.');
  out.append(suffix_);
  return out;
}

GeoDomain cell_to_geodomain(cells::CellId cell, std::string_view suffix) {
  return GeoDomain(cell, suffix);
}

cells::CellId geodomain_to_cell(const GeoDomain& domain) {
  return domain.cell();
}

std::vector<GeoDomain> parent_domains(const GeoDomain& domain) {
  std::vector<GeoDomain> out;
  for (int level = domain.level() - 1; level >= 0; --level) {
    out.emplace_back(domain.cell().parent(level), domain.suffix());
  }
  return out;
}

void CoarseLocation::validate() const {
  if (!(error_radius_m > 0) || !std::isfinite(error_radius_m)) {
    throw ValidationError("error radius must be a positive number of meters");
  }
  if (!std::isfinite(center.lat()) || !std::isfinite(center.lng())) {
    throw ValidationError("location center is not finite");
  }
}

void QueryConfig::validate() const {
  covering.validate();
  if (child_levels < 0 || child_levels > 3) {
    throw ValidationError("child_levels must be in [0, 3]");
  }
  if (center_chain_level < -1 || center_chain_level > cells::kMaxLevel) {
    throw ValidationError("center_chain_level must be -1 or in [0, 30]");
  }
  checked_suffix(suffix);
}

QueryCells query_cells(const CoarseLocation& loc, const QueryConfig& cfg) {
  loc.validate();
  cfg.validate();
  QueryCells out;
  const cells::SphericalCap cap(loc.center, loc.error_radius_m);
  out.base = cells::cover(cap, cfg.covering);
  if (out.base.empty()) {
    out.base.push_back(
        cells::CellId::from_latlng(loc.center, cfg.covering.max_level));
  }
  std::vector<cells::CellId>& all = out.all;
  for (cells::CellId base : out.base) {
    for (int level = 0; level <= base.level(); ++level) {
      all.push_back(base.parent(level));
    }
    const int deepest = std::min(cells::kMaxLevel, base.level() + cfg.child_levels);
    for (int level = base.level() + 1; level <= deepest; ++level) {
      for (cells::CellId c = base.child_begin(level), end = base.child_end(level);
           c != end; c = c.next()) {
        all.push_back(c);
      }
    }
  }
  if (cfg.center_chain_level >= 0) {
    const cells::CellId center =
        cells::CellId::from_latlng(loc.center, cfg.center_chain_level);
    for (int level = 0; level <= center.level(); ++level) {
      all.push_back(center.parent(level));
    }
  }
  std::sort(all.begin(), all.end(), [](cells::CellId a, cells::CellId b) {
    if (a.level() != b.level()) return a.level() > b.level();
    return a.id() < b.id();
  });
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return out;
}

std::vector<GeoDomain> query_set(const CoarseLocation& loc,
                                 const QueryConfig& cfg) {
  const QueryCells qc = query_cells(loc, cfg);
  std::vector<GeoDomain> out;
  out.reserve(qc.all.size());
  for (cells::CellId c : qc.all) out.emplace_back(c, cfg.suffix);
  return out;
}

}  // namespace flame::geo
