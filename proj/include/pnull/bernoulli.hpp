#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pnull/rational.hpp"
#include "pnull/residue.hpp"

// Bernoulli numbers modulo p^N, irregular indices, and the regular-prime
// scan.  The fast path runs the defining recursion entirely in Z/p^N; this
// is legitimate for m <= p-3 because every division along the way is by
// some i+1 <= p-2, a p-unit, so no precision is lost.  Outside that range
// the exact-rational oracle takes over.

namespace pnull {

struct IrregularityRecord {
  u64 p = 0;
  std::vector<u64> indices;  // even k in [2, p-3] with p | B_k, ascending
  std::size_t index_of_irregularity() const { return indices.size(); }
  bool regular() const { return indices.empty(); }
};

namespace detail {

// B_0 .. B_top mod q via sum_{j<=i} C(i+1,j) B_j = 0.  All divisions are
// by i+1, which the caller guarantees is a unit mod q.  Uses mulmod, so q
// may be any modulus below 2^62.
inline std::vector<u64> bernoulli_row_mod(unsigned top, u64 q) {
  std::vector<u64> b(top + 1, 0);
  b[0] = 1 % q;
  std::vector<u64> binom(top + 2, 0);  // row of C(i+1, j)
  binom[0] = 1 % q;
  binom[1] = 1 % q;
  for (unsigned i = 1; i <= top; ++i) {
    for (unsigned j = i + 1; j >= 1; --j) binom[j] = addmod(binom[j], binom[j - 1], q);
    u64 s = 0;
    for (unsigned j = 0; j < i; ++j)
      if (b[j]) s = addmod(s, mulmod(binom[j], b[j], q), q);
    b[i] = mulmod(submod(0, s, q), invmod((i + 1) % q, q), q);
  }
  return b;
}

// Same recursion specialised to a prime modulus p < 2^31: plain u64
// products never overflow and inverses come from a batch table, which is
// what keeps the whole-range scan at O(p^2) cheap operations per prime.
inline std::vector<u64> bernoulli_row_mod_p(u64 p) {
  if (p >= (u64(1) << 31)) throw std::overflow_error("bernoulli_row_mod_p: p too large");
  unsigned top = p >= 3 ? unsigned(p - 3) : 0;
  std::vector<u64> inv(top + 2);
  inv[1] = 1;
  for (u64 i = 2; i <= top + 1; ++i) inv[i] = (p - (p / i) * inv[p % i] % p) % p;
  std::vector<u64> b(top + 1, 0);
  b[0] = 1;
  std::vector<u64> binom(top + 2, 0);
  binom[0] = 1;
  binom[1] = 1;
  for (unsigned i = 1; i <= top; ++i) {
    for (unsigned j = i + 1; j >= 1; --j) {
      u64 t = binom[j] + binom[j - 1];
      binom[j] = t >= p ? t - p : t;
    }
    u64 s = 0;
    for (unsigned j = 0; j < i; ++j)
      if (b[j]) s = (s + binom[j] * b[j]) % p;
    b[i] = (p - s) * inv[i + 1] % p;
  }
  return b;
}

}  // namespace detail

// B_m mod p^N.  m must be even and not a multiple of p-1 (von
// Staudt-Clausen pole: B_m is not p-integral there).
inline u64 bernoulli_mod(u64 p, unsigned N, u64 m) {
  if (p < 3 || !is_prime_u64(p)) throw std::invalid_argument("bernoulli_mod: p must be an odd prime");
  if (N == 0) throw std::invalid_argument("bernoulli_mod: N must be positive");
  if (m % 2 != 0) throw std::invalid_argument("bernoulli_mod: m must be even");
  if (m % (p - 1) == 0) throw std::domain_error("bernoulli_mod: non-p-integral Bernoulli (p-1 divides m)");
  u64 q = ipow(p, N);
  if (m <= p - 3) return detail::bernoulli_row_mod(unsigned(m), q)[m];
  return rational_mod(bernoulli_exact(unsigned(m)), p, N);
}

inline IrregularityRecord irregular_indices(u64 p) {
  if (p < 3 || !is_prime_u64(p)) throw std::invalid_argument("irregular_indices: p must be an odd prime");
  IrregularityRecord rec;
  rec.p = p;
  if (p == 3) return rec;  // no even k in [2, p-3]
  std::vector<u64> b = detail::bernoulli_row_mod_p(p);
  for (u64 k = 2; k <= p - 3; k += 2)
    if (b[k] == 0) rec.indices.push_back(k);
  return rec;
}

struct RegularScan {
  u64 regular_count = 0;
  u64 total = 0;  // odd primes up to the bound
  double fraction() const { return total ? double(regular_count) / double(total) : 0.0; }
};

inline std::vector<u64> odd_primes_upto(u64 bound) {
  std::vector<u64> out;
  if (bound < 3) return out;
  std::vector<bool> comp(bound + 1, false);
  for (u64 i = 2; i * i <= bound; ++i)
    if (!comp[i])
      for (u64 j = i * i; j <= bound; j += i) comp[j] = true;
  for (u64 i = 3; i <= bound; ++i)
    if (!comp[i]) out.push_back(i);
  return out;
}

inline RegularScan scan_regular_fraction(u64 p_max) {
  if (p_max < 37) throw std::invalid_argument("scan_regular_fraction: bound must be at least 37");
  RegularScan s;
  for (u64 p : odd_primes_upto(p_max)) {
    ++s.total;
    if (irregular_indices(p).regular()) ++s.regular_count;
  }
  return s;
}

}  // namespace pnull
