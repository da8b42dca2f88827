#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <vector>

#include "pnull/residue.hpp"

// Exact big-rational Bernoulli numbers.  This is the oracle the fast
// mod-p^N paths are tested against, so it stays as close to the defining
// recursion as possible: sum_{j<=m} C(m+1,j) B_j = 0 with B_0 = 1.

namespace pnull {

// B_0 .. B_m as exact rationals.  O(m^2) bignum operations; fine for the
// desk scale (m up to ~1200).
inline std::vector<mpq_class> bernoulli_table(unsigned m) {
  std::vector<mpq_class> B(m + 1);
  B[0] = 1;
  std::vector<mpz_class> binom(m + 2);  // row of C(i+1, j)
  binom[0] = 1;
  binom[1] = 1;  // row C(1, *); each pass below advances it once
  for (unsigned i = 1; i <= m; ++i) {
    // build row C(i+1, *) incrementally from the previous row
    for (unsigned j = i + 1; j >= 1; --j) binom[j] += binom[j - 1];
    mpq_class s = 0;
    for (unsigned j = 0; j < i; ++j) s += B[j] * binom[j];
    B[i] = -s / binom[i];  // binom[i] = C(i+1, i) = i+1
  }
  return B;
}

inline mpq_class bernoulli_exact(unsigned m) { return bernoulli_table(m)[m]; }

// Reduce an exact rational mod p^N.  Requires the denominator to be a
// p-unit (i.e. the rational is p-integral).
inline u64 rational_mod(const mpq_class& x, u64 p, unsigned N) {
  u64 q = ipow(p, N);
  mpz_class num = x.get_num(), den = x.get_den();
  mpz_class qz(static_cast<unsigned long>(q));
  mpz_class nr = num % qz, dr = den % qz;
  if (nr < 0) nr += qz;
  if (dr < 0) dr += qz;
  u64 n = nr.get_ui(), d = dr.get_ui();
  if (d % p == 0) throw std::domain_error("rational_mod: denominator is not a p-unit");
  return mulmod(n, invmod(d, q), q);
}

}  // namespace pnull
