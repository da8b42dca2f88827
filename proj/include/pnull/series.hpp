#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pnull/residue.hpp"

// Truncated multivariate power series: elements of (Z/p^N)[T_1..T_r]
// with all monomials of total degree >= D discarded.  Coefficients are
// stored densely over a per-context monomial table (graded order, lex
// within a degree), so a series is just a vector indexed by that table.

namespace pnull {

struct SeriesCtx {
  u64 p;
  unsigned N;
  u64 q;  // p^N
  unsigned r;
  unsigned D;
  std::vector<std::vector<unsigned>> mons;       // index -> exponent vector
  std::unordered_map<u64, unsigned> mon_index;   // packed exponents -> index

  static u64 pack(const std::vector<unsigned>& e) {
    u64 k = 0;
    for (unsigned x : e) k = (k << 8) | (x & 0xff);
    return k;
  }

  unsigned dim() const { return static_cast<unsigned>(mons.size()); }
  unsigned degree_of(unsigned i) const {
    unsigned d = 0;
    for (unsigned x : mons[i]) d += x;
    return d;
  }
  // index of mons[i] * mons[j], or -1 when the product falls off the cap
  int prod_index(unsigned i, unsigned j) const {
    std::vector<unsigned> e(r);
    unsigned d = 0;
    for (unsigned v = 0; v < r; ++v) {
      e[v] = mons[i][v] + mons[j][v];
      d += e[v];
    }
    if (d >= D) return -1;
    return static_cast<int>(mon_index.at(pack(e)));
  }
};

using Ctx = std::shared_ptr<const SeriesCtx>;

namespace detail {
inline void enumerate_mons(unsigned r, unsigned D, std::vector<unsigned>& cur, unsigned pos, unsigned left,
                           std::vector<std::vector<unsigned>>& out) {
  if (pos == r) {
    if (left == 0) out.push_back(cur);
    return;
  }
  for (unsigned e = 0; e <= left; ++e) {
    cur[pos] = e;
    enumerate_mons(r, D, cur, pos + 1, left - e, out);
  }
  cur[pos] = 0;
}
}  // namespace detail

inline Ctx make_ctx(u64 p, unsigned N, unsigned r, unsigned D) {
  if (p < 3 || !is_prime_u64(p)) throw std::invalid_argument("make_ctx: p must be an odd prime");
  if (N < 1 || r < 1 || D < 1) throw std::invalid_argument("make_ctx: N, r, D must be positive");
  auto c = std::make_shared<SeriesCtx>();
  c->p = p;
  c->N = N;
  c->q = ipow(p, N);
  c->r = r;
  c->D = D;
  std::vector<unsigned> cur(r, 0);
  for (unsigned d = 0; d < D; ++d) detail::enumerate_mons(r, D, cur, 0, d, c->mons);
  for (unsigned i = 0; i < c->mons.size(); ++i) c->mon_index[SeriesCtx::pack(c->mons[i])] = i;
  return c;
}

struct Series {
  Ctx ctx;
  std::vector<u64> c;  // c[i] = coefficient of ctx->mons[i]

  explicit Series(Ctx cx) : ctx(std::move(cx)), c(ctx->dim(), 0) {}
};

inline void check_same_ctx(const Series& a, const Series& b) {
  if (a.ctx.get() != b.ctx.get()) {
    const auto& x = *a.ctx;
    const auto& y = *b.ctx;
    if (x.p != y.p || x.N != y.N || x.r != y.r || x.D != y.D)
      throw std::invalid_argument("series: mismatched ring parameters");
  }
}

inline Series series_zero(Ctx cx) { return Series(std::move(cx)); }

inline Series series_const(Ctx cx, u64 v) {
  Series s(std::move(cx));
  s.c[0] = v % s.ctx->q;
  return s;
}

inline Series series_one(Ctx cx) { return series_const(std::move(cx), 1); }

// T_i, 1-based to match the T_1..T_r naming
inline Series series_var(Ctx cx, unsigned i) {
  if (i < 1 || i > cx->r) throw std::invalid_argument("series_var: variable index out of range");
  Series s(cx);
  if (cx->D < 2) throw std::invalid_argument("series_var: degree cap too small to hold T_i");
  std::vector<unsigned> e(cx->r, 0);
  e[i - 1] = 1;
  s.c[cx->mon_index.at(SeriesCtx::pack(e))] = 1;
  return s;
}

inline Series series_monomial(Ctx cx, const std::vector<unsigned>& exps, u64 coeff) {
  Series s(cx);
  unsigned d = 0;
  for (unsigned x : exps) d += x;
  if (exps.size() != cx->r) throw std::invalid_argument("series_monomial: wrong exponent count");
  if (d < cx->D) s.c[cx->mon_index.at(SeriesCtx::pack(exps))] = coeff % cx->q;
  return s;
}

inline Series series_add(const Series& a, const Series& b) {
  check_same_ctx(a, b);
  Series s(a.ctx);
  for (unsigned i = 0; i < s.c.size(); ++i) s.c[i] = addmod(a.c[i], b.c[i], a.ctx->q);
  return s;
}

inline Series series_sub(const Series& a, const Series& b) {
  check_same_ctx(a, b);
  Series s(a.ctx);
  for (unsigned i = 0; i < s.c.size(); ++i) s.c[i] = submod(a.c[i], b.c[i], a.ctx->q);
  return s;
}

inline Series series_neg(const Series& a) {
  Series s(a.ctx);
  for (unsigned i = 0; i < s.c.size(); ++i) s.c[i] = a.c[i] ? a.ctx->q - a.c[i] : 0;
  return s;
}

inline Series series_scale(const Series& a, u64 v) {
  Series s(a.ctx);
  v %= a.ctx->q;
  for (unsigned i = 0; i < s.c.size(); ++i) s.c[i] = mulmod(a.c[i], v, a.ctx->q);
  return s;
}

inline Series series_mul(const Series& a, const Series& b) {
  check_same_ctx(a, b);
  const auto& cx = *a.ctx;
  Series s(a.ctx);
  for (unsigned i = 0; i < cx.dim(); ++i) {
    if (a.c[i] == 0) continue;
    for (unsigned j = 0; j < cx.dim(); ++j) {
      if (b.c[j] == 0) continue;
      int k = cx.prod_index(i, j);
      if (k >= 0) s.c[k] = addmod(s.c[k], mulmod(a.c[i], b.c[j], cx.q), cx.q);
    }
  }
  return s;
}

inline bool series_is_zero(const Series& a) {
  for (u64 v : a.c)
    if (v) return false;
  return true;
}

inline bool series_equal(const Series& a, const Series& b) {
  check_same_ctx(a, b);
  return a.c == b.c;
}

inline u64 series_eval(const Series& a, const std::vector<u64>& point) {
  const auto& cx = *a.ctx;
  if (point.size() != cx.r) throw std::invalid_argument("series_eval: wrong point arity");
  u64 acc = 0;
  for (unsigned i = 0; i < cx.dim(); ++i) {
    if (a.c[i] == 0) continue;
    u64 t = a.c[i];
    for (unsigned v = 0; v < cx.r; ++v)
      if (cx.mons[i][v]) t = mulmod(t, powmod(point[v] % cx.q, cx.mons[i][v], cx.q), cx.q);
    acc = addmod(acc, t, cx.q);
  }
  return acc;
}

// omega_n(T_i) = (1+T_i)^{p^n} - 1, coefficients from exact binomials so
// no unit-division is ever needed.
inline Series series_omega(Ctx cx, unsigned var, unsigned n) {
  Series s(cx);
  mpz_class pn;
  mpz_ui_pow_ui(pn.get_mpz_t(), static_cast<unsigned long>(cx->p), n);
  std::vector<unsigned> e(cx->r, 0);
  for (unsigned j = 1; j < cx->D; ++j) {
    mpz_class bin;
    if (pn < j) break;
    mpz_bin_ui(bin.get_mpz_t(), pn.get_mpz_t(), j);
    mpz_class red = bin % static_cast<unsigned long>(cx->q);
    e[var - 1] = j;
    s.c[cx->mon_index.at(SeriesCtx::pack(e))] = red.get_ui();
  }
  return s;
}

// nu_n(T_i) = omega_n(T_i)/T_i: shift the binomial expansion down once.
inline Series series_nu(Ctx cx, unsigned var, unsigned n) {
  Series s(cx);
  mpz_class pn;
  mpz_ui_pow_ui(pn.get_mpz_t(), static_cast<unsigned long>(cx->p), n);
  std::vector<unsigned> e(cx->r, 0);
  for (unsigned j = 1; j <= cx->D; ++j) {
    if (pn < j) break;
    mpz_class bin;
    mpz_bin_ui(bin.get_mpz_t(), pn.get_mpz_t(), j);
    mpz_class red = bin % static_cast<unsigned long>(cx->q);
    if (j - 1 < cx->D) {
      e[var - 1] = j - 1;
      s.c[cx->mon_index.at(SeriesCtx::pack(e))] = red.get_ui();
    }
  }
  return s;
}

// Matrix of multiplication by f on the monomial basis (row convention:
// row index = input monomial, column = output monomial).
inline std::vector<u64> mult_matrix(const Series& f) {
  const auto& cx = *f.ctx;
  unsigned d = cx.dim();
  std::vector<u64> m(static_cast<size_t>(d) * d, 0);
  for (unsigned i = 0; i < d; ++i)
    for (unsigned j = 0; j < d; ++j) {
      if (f.c[j] == 0) continue;
      int k = cx.prod_index(i, j);
      if (k >= 0) m[static_cast<size_t>(i) * d + k] = addmod(m[static_cast<size_t>(i) * d + k], f.c[j], cx.q);
    }
  return m;
}

inline std::string series_to_string(const Series& a) {
  const auto& cx = *a.ctx;
  std::string out;
  for (unsigned i = 0; i < cx.dim(); ++i) {
    if (a.c[i] == 0) continue;
    if (!out.empty()) out += " + ";
    out += std::to_string(a.c[i]);
    for (unsigned v = 0; v < cx.r; ++v) {
      if (cx.mons[i][v] == 0) continue;
      out += "*T" + std::to_string(v + 1);
      if (cx.mons[i][v] > 1) out += "^" + std::to_string(cx.mons[i][v]);
    }
  }
  return out.empty() ? "0" : out;
}

}  // namespace pnull
