#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace calib6 {

// Alternating-algebra index bookkeeping on R^6.
//
// A degree-k basis element is a strictly increasing k-tuple of axis labels
// from (x1,x2,x3,y1,y2,y3), stored as a 6-bit mask.  Canonical enumeration
// is lexicographic on the tuple, which matches the usual 123, 12I, 12II, ...
// listing with Roman numerals for the y axes.
namespace multiindex {

constexpr int kDim = 6;

constexpr int binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return (int)r;
}

inline int popcount(unsigned m) { return __builtin_popcount(m); }

// Basis masks of degree k, lexicographic in tuple order.
inline const std::vector<unsigned>& basis(int k) {
  static std::array<std::vector<unsigned>, kDim + 1> tables = [] {
    std::array<std::vector<unsigned>, kDim + 1> t;
    for (int deg = 0; deg <= kDim; ++deg) {
      std::vector<int> tuple(deg);
      for (int i = 0; i < deg; ++i) tuple[i] = i;
      while (true) {
        unsigned m = 0;
        for (int ax : tuple) m |= 1u << ax;
        t[deg].push_back(m);
        if (deg == 0) break;
        // next combination in lexicographic order
        int i = deg - 1;
        while (i >= 0 && tuple[i] == kDim - deg + i) --i;
        if (i < 0) break;
        ++tuple[i];
        for (int j = i + 1; j < deg; ++j) tuple[j] = tuple[j - 1] + 1;
      }
    }
    return t;
  }();
  return tables[k];
}

// index of mask within basis(k), or -1
inline int index_of(unsigned mask) {
  static std::array<int, 64> table = [] {
    std::array<int, 64> t{};
    for (int k = 0; k <= kDim; ++k) {
      const auto& b = basis(k);
      for (int i = 0; i < (int)b.size(); ++i) t[b[i]] = i;
    }
    return t;
  }();
  return table[mask & 63];
}

// sign of moving e_axis past the elements of mask that are below it
inline int interior_sign(unsigned mask, int axis) {
  unsigned below = mask & ((1u << axis) - 1);
  return (popcount(below) % 2) ? -1 : 1;
}

// sign of concatenating two disjoint masks a, b into sorted order
inline int merge_sign(unsigned a, unsigned b) {
  int inv = 0;
  for (int i = 0; i < kDim; ++i)
    if (b & (1u << i)) inv += popcount(a >> (i + 1));
  return (inv % 2) ? -1 : 1;
}

inline std::string name(unsigned mask) {
  static const char* axis[] = {"x1", "x2", "x3", "y1", "y2", "y3"};
  std::string s;
  for (int i = 0; i < kDim; ++i)
    if (mask & (1u << i)) {
      if (!s.empty()) s += "^";
      s += axis[i];
    }
  return s.empty() ? "1" : s;
}

// axes of a mask in increasing order
inline std::vector<int> axes(unsigned mask) {
  std::vector<int> out;
  for (int i = 0; i < kDim; ++i)
    if (mask & (1u << i)) out.push_back(i);
  return out;
}

}  // namespace multiindex
}  // namespace calib6
