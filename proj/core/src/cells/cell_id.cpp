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

#include "flame/cells/cell_id.hpp"

#include <algorithm>
#include <bit>

#include "flame/errors.hpp"

namespace flame::cells {
namespace {

void check_level(int level) {
  if (level < 0 || level > kMaxLevel) {
    throw RangeError("cell level " + std::to_string(level) +
                     " outside [0, 30]");
  }
}

}  // namespace

CellId CellId::from_face(int face) {
  if (face < 0 || face >= kNumFaces) {
    throw RangeError("face " + std::to_string(face) + " outside [0, 5]");
  }
  return CellId((static_cast<std::uint64_t>(face) << kPosBits) +
                lsb_for_level(0));
}

CellId CellId::from_face_ij(int face, int i, int j) {
  std::uint64_t n = static_cast<std::uint64_t>(face) << (kPosBits - 1);
  int orientation = face & kSwapMask;
  for (int k = kMaxLevel - 1; k >= 0; --k) {
    const int ij = (((i >> k) & 1) << 1) | ((j >> k) & 1);
    const int pos = kIJtoPos[orientation][ij];
    n |= static_cast<std::uint64_t>(pos) << (2 * k);
    orientation ^= kPosToOrientation[pos];
  }
  return CellId(n * 2 + 1);
}

CellId CellId::from_face_ij_wrap(int face, int i, int j) {
  // Clamp to one leaf beyond the face edge, map through the linear
  // projection to xyz, then reproject onto whichever face owns the point.
  i = std::max(-1, std::min(kLimitIJ, i));
  j = std::max(-1, std::min(kLimitIJ, j));
  constexpr double kScale = 1.0 / kLimitIJ;
  constexpr double kLimit = 1.0 + DBL_EPSILON;
  double u = std::max(-kLimit,
                      std::min(kLimit, kScale * (2 * (i - kLimitIJ / 2) + 1)));
  double v = std::max(-kLimit,
                      std::min(kLimit, kScale * (2 * (j - kLimitIJ / 2) + 1)));
  face = xyz_to_face_uv(face_uv_to_xyz(face, u, v), &u, &v);
  return from_face_ij(face, st_to_ij(0.5 * (u + 1)), st_to_ij(0.5 * (v + 1)));
}

CellId CellId::from_point(const Point& p) {
  double u, v;
  const int face = xyz_to_face_uv(p, &u, &v);
  return from_face_ij(face, st_to_ij(uv_to_st(u)), st_to_ij(uv_to_st(v)));
}

CellId CellId::from_latlng(const LatLng& ll, int level) {
  check_level(level);
  return from_point(ll.to_point()).parent_unchecked(level);
}

CellId CellId::from_face_path(int face, std::span<const int> path) {
  if (path.size() > static_cast<std::size_t>(kMaxLevel)) {
    throw RangeError("cell path longer than 30 levels");
  }
  CellId id = from_face(face);
  for (int digit : path) {
    if (digit < 0 || digit > 3) {
      throw RangeError("child digit " + std::to_string(digit) +
                       " outside [0, 3]");
    }
    id = id.child(digit);
  }
  return id;
}

std::optional<CellId> CellId::from_token(std::string_view token) {
  if (token.empty() || token.size() > 16) return std::nullopt;
  std::uint64_t id = 0;
  int pos = 60;
  for (char c : token) {
    std::uint64_t d;
    if (c >= '0' && c <= '9') {
      d = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      d = c - 'a' + 10;
    } else if (c >= 'A' && c <= 'F') {
      d = c - 'A' + 10;
    } else {
      return std::nullopt;
    }
    id |= d << pos;
    pos -= 4;
  }
  CellId cell(id);
  if (!cell.is_valid()) return std::nullopt;
  return cell;
}

bool CellId::is_valid() const {
  return face() < kNumFaces && (lsb() & 0x1555555555555555ULL) != 0;
}

int CellId::level() const {
  return kMaxLevel - (std::countr_zero(id_) >> 1);
}

int CellId::child_position(int level) const {
  if (level < 1 || level > this->level()) {
    throw RangeError("child position requested for level " +
                     std::to_string(level));
  }
  return static_cast<int>(id_ >> (2 * (kMaxLevel - level) + 1)) & 3;
}

std::vector<int> CellId::path() const {
  std::vector<int> digits;
  const int n = level();
  digits.reserve(n);
  for (int l = 1; l <= n; ++l) digits.push_back(child_position(l));
  return digits;
}

CellId CellId::parent() const {
  if (is_face()) throw RangeError("face cell has no parent");
  return parent_unchecked(level() - 1);
}

CellId CellId::parent(int level) const {
  check_level(level);
  if (level > this->level()) {
    throw RangeError("parent level " + std::to_string(level) +
                     " is deeper than cell level " +
                     std::to_string(this->level()));
  }
  return parent_unchecked(level);
}

CellId CellId::child(int position) const {
  if (is_leaf()) throw RangeError("leaf cell has no children");
  if (position < 0 || position > 3) {
    throw RangeError("child position outside [0, 3]");
  }
  const std::uint64_t new_lsb = lsb() >> 2;
  return CellId(id_ - 3 * new_lsb +
                2 * static_cast<std::uint64_t>(position) * new_lsb);
}

std::array<CellId, 4> CellId::children() const {
  if (is_leaf()) throw RangeError("level-30 cell has no children");
  return {child(0), child(1), child(2), child(3)};
}

CellId CellId::child_begin() const {
  const std::uint64_t old_lsb = lsb();
  return CellId(id_ - old_lsb + (old_lsb >> 2));
}

CellId CellId::child_begin(int level) const {
  return CellId(id_ - lsb() + lsb_for_level(level));
}

CellId CellId::child_end(int level) const {
  return CellId(id_ + lsb() + lsb_for_level(level));
}

bool CellId::contains(CellId other) const {
  return other >= range_min() && other <= range_max();
}

bool CellId::intersects(CellId other) const {
  return other.range_min() <= range_max() && other.range_max() >= range_min();
}

int CellId::common_ancestor_level(CellId other) const {
  const std::uint64_t bits =
      std::max(id_ ^ other.id_, std::max(lsb(), other.lsb()));
  const int msb = 63 - std::countl_zero(bits);
  return std::max(60 - msb, -1) >> 1;
}

int CellId::to_face_ij_orientation(int* pi, int* pj, int* orientation) const {
  const int face = this->face();
  int bits = face & kSwapMask;
  int i = 0;
  int j = 0;
  for (int k = kMaxLevel - 1; k >= 0; --k) {
    const int pos = static_cast<int>(id_ >> (2 * k + 1)) & 3;
    const int ij = kPosToIJ[bits][pos];
    i |= (ij >> 1) << k;
    j |= (ij & 1) << k;
    bits ^= kPosToOrientation[pos];
  }
  *pi = i;
  *pj = j;
  if (orientation != nullptr) {
    // The trailing 10* suffix of a non-leaf cell flips the swap bit once per
    // "00" pair it contains.
    if (lsb() & 0x1111111111111110ULL) bits ^= kSwapMask;
    *orientation = bits;
  }
  return face;
}

int CellId::center_siti(int* psi, int* pti) const {
  int i, j;
  const int face = to_face_ij_orientation(&i, &j, nullptr);
  const int delta =
      is_leaf() ? 1 : ((i ^ (static_cast<int>(id_) >> 2)) & 1) ? 2 : 0;
  *psi = 2 * i + delta;
  *pti = 2 * j + delta;
  return face;
}

Point CellId::center_point() const {
  int si, ti;
  const int face = center_siti(&si, &ti);
  return face_uv_to_xyz(face, st_to_uv(siti_to_st(si)),
                        st_to_uv(siti_to_st(ti)));
}

LatLng CellId::center_latlng() const {
  return LatLng::from_point(center_point().normalized());
}

void CellId::append_vertex_neighbors(int level,
                                     std::vector<CellId>* output) const {
  int i, j;
  const int face = to_face_ij_orientation(&i, &j, nullptr);
  // The next bit of i and j below `level` tells which quadrant of the
  // level-`level` ancestor this cell lies in, hence which vertex is closest.
  const int halfsize = size_ij(level + 1);
  const int size = halfsize << 1;
  bool isame, jsame;
  int ioffset, joffset;
  if (i & halfsize) {
    ioffset = size;
    isame = (i + size) < kLimitIJ;
  } else {
    ioffset = -size;
    isame = (i - size) >= 0;
  }
  if (j & halfsize) {
    joffset = size;
    jsame = (j + size) < kLimitIJ;
  } else {
    joffset = -size;
    jsame = (j - size) >= 0;
  }
  auto lookup = [face](int ii, int jj, bool same) {
    return same ? from_face_ij(face, ii, jj) : from_face_ij_wrap(face, ii, jj);
  };
  output->push_back(parent_unchecked(level));
  output->push_back(lookup(i + ioffset, j, isame).parent_unchecked(level));
  output->push_back(lookup(i, j + joffset, jsame).parent_unchecked(level));
  // Both edge neighbours on other faces: a cube corner with only 3 cells.
  if (isame || jsame) {
    output->push_back(lookup(i + ioffset, j + joffset, isame && jsame)
                          .parent_unchecked(level));
  }
}

std::string CellId::to_token() const {
  if (id_ == 0) return "X";
  static constexpr char kHex[] = "0123456789abcdef";
  const int zero_digits = std::countr_zero(id_) / 4;
  const int digits = 16 - zero_digits;
  std::string out(digits, '0');
  std::uint64_t v = id_ >> (4 * zero_digits);
  for (int k = digits - 1; k >= 0; --k, v >>= 4) out[k] = kHex[v & 0xF];
  return out;
}

std::string CellId::to_string() const {
  if (!is_valid()) return "Invalid: " + to_token();
  std::string out = std::to_string(face()) + "/";
  for (int digit : path()) out += static_cast<char>('0' + digit);
  return out;
}

}  // namespace flame::cells
