#pragma once

#include <stdexcept>
#include <vector>

#include "pnull/bernoulli.hpp"
#include "pnull/residue.hpp"

// One-variable characteristic series of the omega^k eigenspace at a
// finite Galois level, in the T-coordinate normalized by gamma acting
// as 1+p on p-power roots of unity.  Correctness is defined by the
// interpolation contract
//   g((1+p)^{1-m} - 1) = -(1 - p^{m-1}) B_m / m   (mod p^{n+1})
// for every m = k (mod p-1) with B_m p-integral; the construction
// below (Stickelberger partial sums at level n, regularized by an
// auxiliary unit b) is one way to produce such a g and is tested
// against that contract, not trusted on its own.
//
// Precision ladder: the level-n construction certifies evaluations and
// the constant term mod p^{n+1}; individual higher coefficients are
// only pinned down mod p^n (they shift between levels by multiples of
// p^n).  Callers asking for N > n+1 are rejected.

namespace pnull {

enum class Tristate { YES, NO, INDETERMINATE };

struct WeierstrassData {
  unsigned mu = 0;
  unsigned lambda = 0;
};

struct CharSeries {
  u64 p = 0, k = 0;
  unsigned n = 0;  // Galois level
  unsigned N = 0;  // p-adic precision of the stored coefficients
  unsigned D = 0;  // degree cap
  std::vector<u64> g;  // coefficients of g(T) mod p^N, size D
  unsigned mu = 0, lambda = 0;
  bool c_defined = false;
  u64 c_mod_p = 0;  // -a_0/(p a_1) mod p, defined when (mu, lambda) = (0, 1)
};

// mu = least coefficient valuation (capped at N), lambda = least index
// attaining it.  Both are honest only because every valuation below the
// cap is exact; a series vanishing to the full working precision has no
// certifiable invariants and is an error.
inline WeierstrassData weierstrass_data(const std::vector<u64>& g, u64 p, unsigned N) {
  unsigned best = N;
  std::size_t arg = g.size();
  for (std::size_t i = 0; i < g.size(); ++i) {
    unsigned v = vp_capped(g[i], p, N);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  if (arg == g.size())
    throw std::domain_error("weierstrass_data: series vanishes to working precision");
  return {best, unsigned(arg)};
}

namespace detail {

// p^e with an overflow guard keeping the modulus inside mulmod's range.
inline u64 checked_pow(u64 p, unsigned e) {
  u64 q = 1;
  for (unsigned i = 0; i < e; ++i) {
    if (q > (u64(1) << 62) / p) throw std::overflow_error("checked_pow: p^e too large");
    q *= p;
  }
  return q;
}

// Stickelberger partial sums at level n over Z/q, q = p^{n+1}, walked
// along the unit group as powers of g0 and bucketed by the gamma-digit:
//   acc[e] = sum of w(a) omega(a)^{k-1} over a = g0^i with e = -i e0 mod p^n,
// where w(a) = (b (b^{-1}a mod q) - a)/q and e0 is the gamma-digit of
// <g0>.  Since g0^i = (b ap mod q) for ap = b^{-1} g0^i, the weight is
// just the carry floor(b ap / q).
struct WalkSetup {
  u64 pn = 0, e0 = 0, ap0 = 0;
  std::vector<u64> om_tab;  // omega(g0)^{(k-1) j} for j < p-1
};

inline WalkSetup walk_setup(u64 p, u64 k, unsigned n, u64 b, u64 g0, u64 q) {
  WalkSetup s;
  s.pn = q / p;
  u64 om_g = teichmuller(g0, p, q);
  s.om_tab.assign(p - 1, 1);
  u64 tw = powmod(om_g, k - 1, q);
  for (u64 j = 1; j + 1 < p; ++j) s.om_tab[j] = mulmod(s.om_tab[j - 1], tw, q);
  s.e0 = dlog_one_plus_p(mulmod(g0 % q, invmod(om_g, q), q), p, n);
  s.ap0 = invmod(b % q, q);
  return s;
}

// Width-agnostic reference loop; works for any modulus mulmod accepts.
inline std::vector<u64> stickelberger_buckets_generic(u64 p, u64 k, unsigned n, u64 b, u64 g0,
                                                      u64 q) {
  WalkSetup s = walk_setup(p, k, n, b, g0, q);
  u64 estep = (s.pn - s.e0 % s.pn) % s.pn;  // -e0 mod p^n
  std::vector<u64> acc(s.pn, 0);
  u64 order = (p - 1) * s.pn;
  u64 ap = s.ap0, ti = 0, ebar = 0;
  for (u64 i = 0; i < order; ++i) {
    u128 t = u128(b) * ap;
    acc[ebar] = addmod(acc[ebar], mulmod(u64(t / q), s.om_tab[ti], q), q);
    ap = mulmod(ap, g0 % q, q);
    if (++ti == p - 1) ti = 0;
    ebar += estep;
    if (ebar >= s.pn) ebar -= s.pn;
  }
  return acc;
}

inline std::vector<u64> stickelberger_buckets(u64 p, u64 k, unsigned n, u64 b, u64 g0, u64 q) {
  if (q >= (u64(1) << 32) || b >= q || g0 >= q)
    return stickelberger_buckets_generic(p, k, n, b, g0, q);
  // everything fits in u64 products; this is the scan's hot loop
  WalkSetup s = walk_setup(p, k, n, b, g0, q);
  u64 estep = (s.pn - s.e0 % s.pn) % s.pn;
  std::vector<u64> acc(s.pn, 0);
  u64 order = (p - 1) * s.pn;
  u64 ap = s.ap0, ti = 0, ebar = 0;
  for (u64 i = 0; i < order; ++i) {
    u64 t = b * ap;
    acc[ebar] = (acc[ebar] + (t / q) * s.om_tab[ti]) % q;
    ap = ap * g0 % q;
    if (++ti == p - 1) ti = 0;
    ebar += estep;
    if (ebar >= s.pn) ebar -= s.pn;
  }
  return acc;
}

// out[i] += s C(e, i) mod q for i < D, i.e. s (1+T)^e truncated.  The
// incremental step divides by i+1 <= D, a p-unit because D <= p-1;
// inv_tab[i] = (i mod q)^{-1}.
inline void add_binomial_row(std::vector<u64>& out, u64 s, u64 e, u64 q,
                             const std::vector<u64>& inv_tab) {
  u64 c = 1;  // C(e, i) mod q
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = addmod(out[i], mulmod(s, c, q), q);
    c = mulmod(c, submod(e % q, i % q, q), q);
    c = mulmod(c, inv_tab[i + 1], q);
  }
}

}  // namespace detail

inline CharSeries char_series(u64 p, u64 k, unsigned n, unsigned N, unsigned D) {
  if (p < 3 || !is_prime_u64(p)) throw std::invalid_argument("char_series: p must be an odd prime");
  if (k % 2 != 0 || k < 2 || k > p - 3) throw std::invalid_argument("char_series: k must be even in [2, p-3]");
  if (n < 1) throw std::invalid_argument("char_series: level must be at least 1");
  if (N < 1) throw std::invalid_argument("char_series: precision must be at least 1");
  if (N > n + 1) throw std::domain_error("char_series: precision exhausted (N > n+1)");
  if (D < 2 || D > p - 1) throw std::invalid_argument("char_series: degree cap must lie in [2, p-1]");
  if (bernoulli_mod(p, 1, k) != 0) throw std::domain_error("char_series: (p, k) is not an irregular pair");

  u64 q = detail::checked_pow(p, n + 1);
  u64 pn = q / p;
  u64 b = primitive_root(p);
  u64 g0 = unit_group_generator(p, 2);
  std::vector<u64> acc = detail::stickelberger_buckets(p, k, n, b, g0, q);

  std::vector<u64> inv_tab(D + 1);
  for (unsigned i = 1; i <= D; ++i) inv_tab[i] = invmod(i % q, q);

  // G(T) = sum_e acc[e] (1+T)^e
  std::vector<u64> G(D, 0);
  for (u64 e = 0; e < pn; ++e)
    if (acc[e]) detail::add_binomial_row(G, acc[e], e, q, inv_tab);

  // regularizer F(T) = omega(b)^k <b> (1+T)^{-e(b)} - 1; its constant
  // term is b^k - 1 mod p, a unit since b generates mod p and k is not
  // a multiple of p-1
  u64 om_b = teichmuller(b, p, q);
  u64 bb = mulmod(b % q, invmod(om_b, q), q);
  u64 eb = dlog_one_plus_p(bb, p, n);
  u64 ebb = (pn - eb % pn) % pn;
  u64 lead = mulmod(powmod(om_b, k, q), bb, q);
  std::vector<u64> F(D, 0);
  detail::add_binomial_row(F, lead, ebb, q, inv_tab);
  F[0] = submod(F[0], 1, q);
  if (F[0] % p == 0) throw std::logic_error("char_series: regularizer is not a unit");

  // g = -G / F by power-series division
  u64 inv0 = invmod(F[0], q);
  std::vector<u64> h(D, 0);
  for (unsigned i = 0; i < D; ++i) {
    u64 s = G[i];
    for (unsigned j = 1; j <= i; ++j) s = submod(s, mulmod(F[j], h[i - j], q), q);
    h[i] = mulmod(s, inv0, q);
  }

  CharSeries cs;
  cs.p = p;
  cs.k = k;
  cs.n = n;
  cs.N = N;
  cs.D = D;
  u64 qN = ipow(p, N);
  cs.g.resize(D);
  for (unsigned i = 0; i < D; ++i) cs.g[i] = submod(0, h[i], q) % qN;

  WeierstrassData w = weierstrass_data(cs.g, p, N);
  cs.mu = w.mu;
  cs.lambda = w.lambda;
  if (cs.mu == 0 && cs.lambda == 1 && N >= 2) {
    u64 a0 = cs.g[0] % (p * p);  // evaluation-grade: stable mod p^2 from level 1 on
    u64 a1 = cs.g[1] % p;
    cs.c_mod_p = submod(0, mulmod(a0 / p, invmod(a1, p), p), p);
    cs.c_defined = true;
  }
  return cs;
}

struct Condition2Index {
  u64 k = 0;
  unsigned mu = 0, lambda = 0;
  bool c_defined = false;
  u64 c_mod_p = 0;
  Tristate satisfied = Tristate::INDETERMINATE;
};

struct Condition2Result {
  u64 p = 0;
  std::vector<Condition2Index> per_index;
  Tristate value = Tristate::INDETERMINATE;
};

// c != 1 (mod p) across the irregular eigenspaces of p.  Each index is
// judged on its own: YES needs the certified shape (mu, lambda) = (0, 1)
// and c != 1; a certified shape violation is NO; only precision
// exhaustion is INDETERMINATE.  N = 0 picks the largest precision the
// interpolation supports at this level.
inline Condition2Result condition2(u64 p, unsigned level = 1, unsigned D = 12, unsigned N = 0) {
  IrregularityRecord rec = irregular_indices(p);
  if (rec.regular()) throw std::domain_error("condition2: no irregular eigenspace");
  if (N == 0) N = level + 1;
  Condition2Result out;
  out.p = p;
  bool any_no = false, any_indet = false;
  for (u64 k : rec.indices) {
    Condition2Index idx;
    idx.k = k;
    try {
      CharSeries cs = char_series(p, k, level, N, D);
      idx.mu = cs.mu;
      idx.lambda = cs.lambda;
      idx.c_defined = cs.c_defined;
      idx.c_mod_p = cs.c_mod_p;
      if (cs.mu == 0 && cs.lambda == 1 && cs.c_defined)
        idx.satisfied = cs.c_mod_p != 1 ? Tristate::YES : Tristate::NO;
      else
        idx.satisfied = Tristate::NO;  // certified shape other than (T - cp) unit
    } catch (const std::domain_error&) {
      idx.satisfied = Tristate::INDETERMINATE;
    }
    any_no |= idx.satisfied == Tristate::NO;
    any_indet |= idx.satisfied == Tristate::INDETERMINATE;
    out.per_index.push_back(idx);
  }
  out.value = any_no ? Tristate::NO : any_indet ? Tristate::INDETERMINATE : Tristate::YES;
  return out;
}

}  // namespace pnull
