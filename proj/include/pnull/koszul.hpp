#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pnull/matrix.hpp"
#include "pnull/series.hpp"

// Koszul complexes over the truncated algebra (Z/p^N)[T_1..T_r]/(deg >= D),
// cohomology of finitely presented modules, the omega/nu tower sequences,
// the adjoint construction, Ext^1 of elementary cyclic modules, pseudo-null
// classification, and the lattice invariant e = index/exponent.
//
// Two computation paths share the Howell-form engine from matrix.hpp:
//   * cyclic modules Lambda/(f) against an omega or nu tower sequence are
//     handled on the exact quotient-ring carrier (companion matrices of the
//     tower modulus), which stays faithful even when the module is infinite;
//   * everything else is flattened to Z/p^N-linear algebra on the monomial
//     basis, and is only trusted when the module carries an explicit
//     annihilator certificate within the truncation safety margin.

namespace pnull {

enum class SequenceFlavor { OMEGA, NU, CUSTOM };

struct Sequence {
  Ctx ctx;
  SequenceFlavor flavor = SequenceFlavor::CUSTOM;
  unsigned level = 0;
  std::vector<Series> x;

  // full sequences have r+1 entries (leading scalar p^n), primed ones r
  bool full() const { return x.size() == ctx->r + 1; }
};

struct ModulePresentation {
  Ctx ctx;
  unsigned generators = 0;
  // one row per relation, each row has `generators` entries
  std::vector<std::vector<Series>> relations;
};

struct CohomologyGroup {
  u64 p = 0;
  std::vector<unsigned> exps;  // invariant factors p^{e_1} <= ... <= p^{e_t}

  bool trivial() const { return exps.empty(); }
  unsigned order_exp() const {
    unsigned s = 0;
    for (unsigned e : exps) s += e;
    return s;
  }
  u64 order() const {
    u64 v = 1;
    for (unsigned i = 0, s = order_exp(); i < s; ++i) {
      if (v > UINT64_MAX / p) throw std::overflow_error("cohomology order overflows");
      v *= p;
    }
    return v;
  }
  // v_p of |G/p^n G| = v_p of |G[p^n]|
  unsigned layer_exp(unsigned n) const {
    unsigned s = 0;
    for (unsigned e : exps) s += std::min(e, n);
    return s;
  }
};

// ---------------------------------------------------------------------
// Koszul complex, cochain convention.  K^j is free on the j-subsets of
// {0..s-1} (bitmasks in increasing numeric order) and d^j sends e_S to
// sum over t not in S of (-1)^{#{u in S : u < t}} x_t e_{S+t}, so H^0 is
// the joint annihilator and H^s the full quotient.

struct KoszulComplex {
  Ctx ctx;
  unsigned len = 0;
  std::vector<std::vector<uint32_t>> wedges;        // wedges[j]: masks with popcount j
  std::vector<std::vector<std::vector<Series>>> d;  // d[j][a][b]: K^j wedge a -> K^{j+1} wedge b
};

inline KoszulComplex koszul_complex(const std::vector<Series>& x) {
  if (x.empty()) throw std::invalid_argument("koszul_complex: empty sequence");
  if (x.size() > 20) throw std::invalid_argument("koszul_complex: sequence too long");
  for (size_t i = 1; i < x.size(); ++i) check_same_ctx(x[0], x[i]);
  KoszulComplex K;
  K.ctx = x[0].ctx;
  K.len = static_cast<unsigned>(x.size());
  unsigned s = K.len;
  K.wedges.resize(s + 1);
  for (uint32_t m = 0; m < (1u << s); ++m) K.wedges[__builtin_popcount(m)].push_back(m);
  K.d.resize(s);
  for (unsigned j = 0; j < s; ++j) {
    size_t na = K.wedges[j].size(), nb = K.wedges[j + 1].size();
    K.d[j].assign(na, std::vector<Series>(nb, series_zero(K.ctx)));
    for (size_t a = 0; a < na; ++a) {
      uint32_t ma = K.wedges[j][a];
      for (unsigned t = 0; t < s; ++t) {
        if (ma & (1u << t)) continue;
        uint32_t mb = ma | (1u << t);
        size_t b = std::lower_bound(K.wedges[j + 1].begin(), K.wedges[j + 1].end(), mb) - K.wedges[j + 1].begin();
        bool neg = __builtin_popcount(ma & ((1u << t) - 1)) & 1;
        K.d[j][a][b] = neg ? series_neg(x[t]) : x[t];
      }
    }
  }
  return K;
}

inline bool koszul_d2_is_zero(const KoszulComplex& K) {
  for (unsigned j = 0; j + 1 < K.len; ++j) {
    size_t na = K.wedges[j].size(), nc = K.wedges[j + 2].size();
    for (size_t a = 0; a < na; ++a)
      for (size_t c = 0; c < nc; ++c) {
        Series acc = series_zero(K.ctx);
        for (size_t b = 0; b < K.wedges[j + 1].size(); ++b)
          acc = series_add(acc, series_mul(K.d[j][a][b], K.d[j + 1][b][c]));
        if (!series_is_zero(acc)) return false;
      }
  }
  return true;
}

// ---------------------------------------------------------------------
// Flattened presentation machinery.

namespace detail {

constexpr size_t kExactModelCap = 4096;  // largest quotient-ring rank we build

struct FlatModule {
  unsigned g = 0;
  unsigned M = 0;  // monomial count of the carrier algebra
  Mod R;
  HowellForm rel_hf;  // Howell form of all monomial multiples of the relations

  FlatModule(u64 p, unsigned N) : R(p, N) {}
};

// row (rho, m) of the relation matrix is the flat vector of m * rho
inline Mat relation_flat(const ModulePresentation& X) {
  const auto& cx = *X.ctx;
  unsigned M = cx.dim(), g = X.generators;
  Mat A(X.relations.size() * M, static_cast<size_t>(g) * M);
  for (size_t ri = 0; ri < X.relations.size(); ++ri) {
    if (X.relations[ri].size() != g) throw std::invalid_argument("presentation: relation arity mismatch");
    for (unsigned e = 0; e < g; ++e) {
      auto mm = mult_matrix(X.relations[ri][e]);
      for (unsigned mi = 0; mi < M; ++mi)
        for (unsigned mo = 0; mo < M; ++mo)
          A.at(ri * M + mi, static_cast<size_t>(e) * M + mo) = mm[static_cast<size_t>(mi) * M + mo];
    }
  }
  return A;
}

inline FlatModule flatten_module(const ModulePresentation& X) {
  const auto& cx = *X.ctx;
  FlatModule F(cx.p, cx.N);
  F.g = X.generators;
  F.M = cx.dim();
  F.rel_hf = howell_form(relation_flat(X), F.R);
  return F;
}

inline bool module_is_zero(const ModulePresentation& X, const FlatModule& F) {
  if (X.generators == 0) return true;
  for (unsigned j = 0; j < F.g; ++j) {
    std::vector<u64> v(static_cast<size_t>(F.g) * F.M, 0);
    v[static_cast<size_t>(j) * F.M] = 1;
    if (!in_rowspace(F.rel_hf, v, F.R)) return false;
  }
  return true;
}

// Certificate that (p^a, T_1^{b_1}, ..., T_r^{b_r}) annihilates the module.
// The exponent windows exclude the vacuous certificates p^N and T^{D-1}...;
// the degree condition D >= a + sum(b_i - 1) + 1 promotes the certificate to
// the untruncated module (every discarded monomial already lies inside the
// certified ideal, so annihilation survives lifting).
struct AnnCert {
  unsigned a = 0;
  std::vector<unsigned> b;
  unsigned bmax = 0;
  unsigned bsum = 0;
};

inline std::optional<AnnCert> annihilator_certificate(const ModulePresentation& X, const FlatModule& F) {
  const auto& cx = *X.ctx;
  if (F.g == 0) return AnnCert{1, std::vector<unsigned>(cx.r, 1), 1, cx.r};
  AnnCert cert;
  for (unsigned a = 1; a < cx.N && !cert.a; ++a) {
    bool all = true;
    u64 pa = ipow(cx.p, a);
    for (unsigned j = 0; j < F.g && all; ++j) {
      std::vector<u64> v(static_cast<size_t>(F.g) * F.M, 0);
      v[static_cast<size_t>(j) * F.M] = pa;
      all = in_rowspace(F.rel_hf, v, F.R);
    }
    if (all) cert.a = a;
  }
  if (!cert.a) return std::nullopt;
  cert.b.assign(cx.r, 0);
  for (unsigned var = 0; var < cx.r; ++var) {
    for (unsigned b = 1; b < cx.D && !cert.b[var]; ++b) {
      std::vector<unsigned> exps(cx.r, 0);
      exps[var] = b;
      unsigned mi = cx.mon_index.at(SeriesCtx::pack(exps));
      bool all = true;
      for (unsigned j = 0; j < F.g && all; ++j) {
        std::vector<u64> v(static_cast<size_t>(F.g) * F.M, 0);
        v[static_cast<size_t>(j) * F.M + mi] = 1;
        all = in_rowspace(F.rel_hf, v, F.R);
      }
      if (all) cert.b[var] = b;
    }
    if (!cert.b[var]) return std::nullopt;
    cert.bmax = std::max(cert.bmax, cert.b[var]);
    cert.bsum += cert.b[var];
  }
  if (cx.D < cert.a + (cert.bsum - cx.r) + 1) return std::nullopt;
  return cert;
}

// safety margin for a flattened computation at tower level n
inline bool margin_ok(const SeriesCtx& cx, const AnnCert& cert, unsigned n) {
  if (cert.a + n > cx.N) return false;
  u64 pn = 1;
  for (unsigned i = 0; i < n; ++i) {
    pn *= cx.p;
    if (pn > cx.D) return false;
  }
  return cert.bmax * pn <= cx.D;
}

// block-diagonal action of a scalar series on the flat carrier X^g
inline Mat flat_scalar_mult(const Series& f, unsigned g) {
  const auto& cx = *f.ctx;
  unsigned M = cx.dim();
  auto mm = mult_matrix(f);
  Mat A(static_cast<size_t>(g) * M, static_cast<size_t>(g) * M);
  for (unsigned e = 0; e < g; ++e)
    for (unsigned mi = 0; mi < M; ++mi)
      for (unsigned mo = 0; mo < M; ++mo)
        A.at(static_cast<size_t>(e) * M + mi, static_cast<size_t>(e) * M + mo) = mm[static_cast<size_t>(mi) * M + mo];
  return A;
}

inline Mat stack_rows(const Mat& a, const Mat& b) {
  if (a.rows == 0) return b;
  if (b.rows == 0) return a;
  if (a.cols != b.cols) throw std::invalid_argument("stack_rows: width mismatch");
  Mat s(a.rows + b.rows, a.cols);
  std::copy(a.a.begin(), a.a.end(), s.a.begin());
  std::copy(b.a.begin(), b.a.end(), s.a.begin() + a.a.size());
  return s;
}

// differential K^j -> K^{j+1} flattened to the monomial basis of X^{g * C(s,j)}
inline Mat flat_delta(const KoszulComplex& K, const FlatModule& F, unsigned j) {
  size_t na = K.wedges[j].size(), nb = K.wedges[j + 1].size();
  size_t block = static_cast<size_t>(F.g) * F.M;
  Mat A(na * block, nb * block);
  for (size_t a = 0; a < na; ++a)
    for (size_t b = 0; b < nb; ++b) {
      const Series& e = K.d[j][a][b];
      if (series_is_zero(e)) continue;
      auto mm = mult_matrix(e);
      for (unsigned g = 0; g < F.g; ++g)
        for (unsigned mi = 0; mi < F.M; ++mi)
          for (unsigned mo = 0; mo < F.M; ++mo)
            A.at(a * block + g * F.M + mi, b * block + g * F.M + mo) = mm[static_cast<size_t>(mi) * F.M + mo];
    }
  return A;
}

// relation subspace of the flattened K^j (one copy per wedge)
inline Mat flat_relations(const KoszulComplex& K, const FlatModule& F, unsigned j) {
  size_t na = K.wedges[j].size();
  size_t block = static_cast<size_t>(F.g) * F.M;
  size_t t = F.rel_hf.H.rows;
  Mat L(na * t, na * block);
  for (size_t a = 0; a < na; ++a)
    for (size_t ri = 0; ri < t; ++ri)
      for (size_t c = 0; c < block; ++c) L.at(a * t + ri, a * block + c) = F.rel_hf.H.at(ri, c);
  return L;
}

inline std::vector<unsigned> flat_cohomology(const KoszulComplex& K, const FlatModule& F, unsigned i) {
  unsigned s = K.len;
  size_t block = static_cast<size_t>(F.g) * F.M;
  size_t dim_i = K.wedges[i].size() * block;
  Mat numer;
  if (i == s) {
    numer = Mat::identity(dim_i);
  } else {
    Mat S = stack_rows(flat_delta(K, F, i), flat_relations(K, F, i + 1));
    Mat ker = left_kernel(S, F.R);
    numer = Mat(ker.rows, dim_i);
    for (size_t ri = 0; ri < ker.rows; ++ri)
      for (size_t c = 0; c < dim_i; ++c) numer.at(ri, c) = ker.at(ri, c);
  }
  Mat denom = flat_relations(K, F, i);
  if (i > 0) denom = stack_rows(denom, flat_delta(K, F, i - 1));
  return subquotient_invariants(numer, denom, F.R);
}

// ---------------------------------------------------------------------
// Exact quotient-ring carriers for the tower sequences on cyclic modules.
// The modulus is omega_n(T) = (1+T)^{p^n} - 1 (monic of degree p^n) or
// nu_n = omega_n/T (monic of degree p^n - 1); the carrier is the tensor
// basis with per-variable degree below the modulus degree.

// degree of the level-n modulus, clamped past the carrier cap
inline size_t tower_degree(u64 p, unsigned n, bool nu) {
  u64 d = 1;
  for (unsigned i = 0; i < n; ++i) {
    d *= p;
    if (d > kExactModelCap + 1) return kExactModelCap + 2;
  }
  return static_cast<size_t>(nu ? d - 1 : d);
}

inline size_t tensor_rank(size_t d, unsigned r) {
  size_t rank = 1;
  for (unsigned i = 0; i < r; ++i) {
    if (d == 0) return 0;
    if (rank > kExactModelCap / d) return kExactModelCap + 1;
    rank *= d;
  }
  return rank;
}

// coefficients c[0..d-1] with modulus T^d + sum c[j] T^j, reduced mod qm
inline std::vector<u64> tower_modulus(u64 p, unsigned n, bool nu, u64 qm) {
  mpz_class pn;
  mpz_ui_pow_ui(pn.get_mpz_t(), static_cast<unsigned long>(p), n);
  unsigned d = static_cast<unsigned>(nu ? pn.get_ui() - 1 : pn.get_ui());
  std::vector<u64> c(d, 0);
  for (unsigned j = 0; j < d; ++j) {
    unsigned k = nu ? j + 1 : j;
    if (k == 0) continue;  // omega has zero constant term
    mpz_class bin;
    mpz_bin_ui(bin.get_mpz_t(), pn.get_mpz_t(), k);
    mpz_class red = bin % mpz_class(static_cast<unsigned long>(qm));
    c[j] = red.get_ui();
  }
  return c;
}

// multiplication by T_var on the rank-d^r tensor carrier
inline Mat tensor_shift(unsigned r, unsigned var, const std::vector<u64>& mod_c, const Mod& Rm) {
  unsigned d = static_cast<unsigned>(mod_c.size());
  size_t rank = 1;
  for (unsigned i = 0; i < r; ++i) rank *= d;
  size_t stride = 1;
  for (unsigned i = 0; i < var; ++i) stride *= d;
  Mat A(rank, rank);
  for (size_t idx = 0; idx < rank; ++idx) {
    unsigned a = static_cast<unsigned>(idx / stride % d);
    if (a + 1 < d) {
      A.at(idx, idx + stride) = 1;
    } else {
      size_t base = idx - static_cast<size_t>(a) * stride;
      for (unsigned j = 0; j < d; ++j) {
        if (!mod_c[j]) continue;
        A.at(idx, base + static_cast<size_t>(j) * stride) = Rm.q - mod_c[j];
      }
    }
  }
  return A;
}

inline Mat mat_add(const Mat& a, const Mat& b, const Mod& R) {
  Mat c(a.rows, a.cols);
  for (size_t i = 0; i < a.a.size(); ++i) c.a[i] = addmod(a.a[i], b.a[i], R.q);
  return c;
}

inline Mat mat_scale(const Mat& a, u64 v, const Mod& R) {
  Mat c(a.rows, a.cols);
  v %= R.q;
  for (size_t i = 0; i < a.a.size(); ++i) c.a[i] = mulmod(a.a[i], v, R.q);
  return c;
}

// f evaluated at the per-variable shift matrices (coefficients reduced mod Rm)
inline Mat tensor_eval(const Series& f, const std::vector<Mat>& shifts, const Mod& Rm) {
  const auto& cx = *f.ctx;
  size_t rank = shifts.empty() ? 1 : shifts[0].rows;
  std::vector<unsigned> maxe(cx.r, 0);
  for (unsigned i = 0; i < cx.dim(); ++i)
    if (f.c[i])
      for (unsigned v = 0; v < cx.r; ++v) maxe[v] = std::max(maxe[v], cx.mons[i][v]);
  std::vector<std::vector<Mat>> pow(cx.r);
  for (unsigned v = 0; v < cx.r; ++v) {
    pow[v].push_back(Mat::identity(rank));
    for (unsigned e = 1; e <= maxe[v]; ++e) pow[v].push_back(mat_mul(pow[v].back(), shifts[v], Rm));
  }
  Mat acc(rank, rank);
  for (unsigned i = 0; i < cx.dim(); ++i) {
    u64 cv = f.c[i] % Rm.q;
    if (cv == 0) continue;
    Mat term = mat_scale(Mat::identity(rank), cv, Rm);
    for (unsigned v = 0; v < cx.r; ++v)
      if (cx.mons[i][v]) term = mat_mul(term, pow[v][cx.mons[i][v]], Rm);
    acc = mat_add(acc, term, Rm);
  }
  return acc;
}

// invariant factors of the subgroup generated by the rows of K
inline std::vector<unsigned> subgroup_invariants(const Mat& K, const Mod& R) {
  return subquotient_invariants(K, Mat(0, K.cols), R);
}

inline unsigned max_exponent_u64(u64 p) {
  unsigned b = 0;
  u64 v = 1;
  while (v <= UINT64_MAX / p) {
    v *= p;
    ++b;
  }
  return b;
}

}  // namespace detail

// ---------------------------------------------------------------------
// Sequence constructors.

inline Sequence sequence_omega(Ctx cx, unsigned n) {
  Sequence s;
  s.ctx = cx;
  s.flavor = SequenceFlavor::OMEGA;
  s.level = n;
  s.x.push_back(series_const(cx, powmod(cx->p, n, cx->q)));
  for (unsigned v = 1; v <= cx->r; ++v) s.x.push_back(series_omega(cx, v, n));
  return s;
}

inline Sequence sequence_omega_primed(Ctx cx, unsigned n) {
  Sequence s;
  s.ctx = cx;
  s.flavor = SequenceFlavor::OMEGA;
  s.level = n;
  for (unsigned v = 1; v <= cx->r; ++v) s.x.push_back(series_omega(cx, v, n));
  return s;
}

inline Sequence sequence_nu(Ctx cx, unsigned n) {
  Sequence s;
  s.ctx = cx;
  s.flavor = SequenceFlavor::NU;
  s.level = n;
  s.x.push_back(series_const(cx, powmod(cx->p, n, cx->q)));
  for (unsigned v = 1; v <= cx->r; ++v) s.x.push_back(series_nu(cx, v, n));
  return s;
}

inline Sequence sequence_nu_primed(Ctx cx, unsigned n) {
  Sequence s;
  s.ctx = cx;
  s.flavor = SequenceFlavor::NU;
  s.level = n;
  for (unsigned v = 1; v <= cx->r; ++v) s.x.push_back(series_nu(cx, v, n));
  return s;
}

inline ModulePresentation cyclic_module(const Series& f) {
  ModulePresentation X;
  X.ctx = f.ctx;
  X.generators = 1;
  X.relations = {{f}};
  return X;
}

inline ModulePresentation quotient_module(Ctx cx, const std::vector<Series>& ideal) {
  ModulePresentation X;
  X.ctx = std::move(cx);
  X.generators = 1;
  for (const auto& f : ideal) X.relations.push_back({f});
  return X;
}

inline ModulePresentation free_module(Ctx cx, unsigned g) {
  ModulePresentation X;
  X.ctx = std::move(cx);
  X.generators = g;
  return X;
}

// A full-length custom sequence must generate an ideal of definition: the
// quotient by it has to be certifiably of finite colength at this truncation.
inline Sequence sequence_custom(std::vector<Series> elems, unsigned level = 0) {
  if (elems.empty()) throw std::invalid_argument("sequence: empty");
  for (size_t i = 1; i < elems.size(); ++i) check_same_ctx(elems[0], elems[i]);
  Sequence s;
  s.ctx = elems[0].ctx;
  s.flavor = SequenceFlavor::CUSTOM;
  s.level = level;
  s.x = std::move(elems);
  if (s.full()) {
    ModulePresentation Q = quotient_module(s.ctx, s.x);
    auto F = detail::flatten_module(Q);
    if (!detail::module_is_zero(Q, F) && !detail::annihilator_certificate(Q, F))
      throw std::invalid_argument("sequence: ideal not certifiably of finite colength");
  }
  return s;
}

inline KoszulComplex koszul_complex(const Sequence& x) { return koszul_complex(x.x); }

// ---------------------------------------------------------------------
// Cohomology: exact carrier for cyclic modules against tower sequences,
// flattened linear algebra with an annihilator certificate otherwise.

namespace detail {

// H^i of a tower sequence on Lambda/(f) on the exact carrier.  Full
// sequences work over Z/p^n (the scalar entry kills p^n); primed ones over
// Z/p^B with headroom B > N, certifying every reported exponent below N.
inline std::vector<unsigned> cyclic_tower_cohomology(const Series& f, bool nu, unsigned n, bool full, unsigned i) {
  const auto& cx = *f.ctx;
  unsigned r = cx.r;
  if (full) {
    if (i < r || i > r + 1 || n == 0) return {};
    if (n > cx.N) throw std::domain_error("koszul_cohomology: precision exhausted");
    size_t d = tower_degree(cx.p, n, nu);
    if (d == 0) return {};
    size_t rank = tensor_rank(d, r);
    if (rank > kExactModelCap)
      throw std::invalid_argument("koszul_cohomology: exact carrier too large at this level");
    Mod Rm(cx.p, n);
    auto mod_c = tower_modulus(cx.p, n, nu, Rm.q);
    std::vector<Mat> shifts;
    for (unsigned v = 0; v < r; ++v) shifts.push_back(tensor_shift(r, v, mod_c, Rm));
    Mat Mf = tensor_eval(f, shifts, Rm);
    if (i == r) return subgroup_invariants(left_kernel(Mf, Rm), Rm);
    return coker_invariants(Mf, Rm);
  }
  // primed: the top index is r, the annihilator sits at r-1
  if (i + 1 < r || i > r) return {};
  unsigned maxB = max_exponent_u64(cx.p);
  unsigned B = std::min(cx.N + n + 2, maxB);
  if (B < cx.N + 1) throw std::domain_error("koszul_cohomology: precision exhausted");
  size_t d = tower_degree(cx.p, n, nu);
  if (d == 0) return {};  // the level-0 nu carrier is the zero ring
  size_t rank = tensor_rank(d, r);
  if (rank > kExactModelCap)
    throw std::invalid_argument("koszul_cohomology: exact carrier too large at this level");
  Mod Rm(cx.p, B);
  auto mod_c = tower_modulus(cx.p, n, nu, Rm.q);
  std::vector<Mat> shifts;
  for (unsigned v = 0; v < r; ++v) shifts.push_back(tensor_shift(r, v, mod_c, Rm));
  Mat Mf = tensor_eval(f, shifts, Rm);
  auto exps = diag_exponents(Mf, Rm);
  if (exps.size() < rank)
    throw std::domain_error("koszul_cohomology: module not finite against this sequence within precision");
  if (i + 1 == r) return {};  // certified injective, so the kernel vanishes
  std::vector<unsigned> out;
  for (unsigned e : exps)
    if (e > 0) out.push_back(e);
  std::sort(out.begin(), out.end());
  for (unsigned e : out)
    if (e >= cx.N) throw std::domain_error("koszul_cohomology: precision exhausted");
  return out;
}

}  // namespace detail

inline CohomologyGroup koszul_cohomology(const Sequence& x, const ModulePresentation& X, unsigned i) {
  if (x.ctx.get() != X.ctx.get()) {
    const auto& a = *x.ctx;
    const auto& b = *X.ctx;
    if (a.p != b.p || a.N != b.N || a.r != b.r || a.D != b.D)
      throw std::invalid_argument("koszul_cohomology: sequence and module live over different rings");
  }
  const auto& cx = *X.ctx;
  CohomologyGroup H;
  H.p = cx.p;
  unsigned s = static_cast<unsigned>(x.x.size());
  if (i > s || X.generators == 0) return H;

  auto F = detail::flatten_module(X);
  if (detail::module_is_zero(X, F)) return H;

  bool cyclic = X.generators == 1 && X.relations.size() == 1 && !series_is_zero(X.relations[0][0]);
  bool tower = x.flavor == SequenceFlavor::OMEGA || x.flavor == SequenceFlavor::NU;
  if (cyclic && tower && (x.full() || s == cx.r)) {
    H.exps =
        detail::cyclic_tower_cohomology(X.relations[0][0], x.flavor == SequenceFlavor::NU, x.level, x.full(), i);
    return H;
  }

  auto cert = detail::annihilator_certificate(X, F);
  if (!cert || !detail::margin_ok(cx, *cert, x.level))
    throw std::domain_error("koszul_cohomology: precision exhausted");
  KoszulComplex K = koszul_complex(x.x);
  H.exps = detail::flat_cohomology(K, F, i);
  for (unsigned e : H.exps)
    if (e > cert->a) throw std::logic_error("koszul_cohomology: invariant factor exceeds the annihilator bound");
  return H;
}

// ---------------------------------------------------------------------
// The cardinality identity linking the full and primed tower sequences:
//   0 -> H^{i-1}(x', X)/p^n -> H^i(x, X) -> H^i(x', X)[p^n] -> 0.

struct ExactSequenceCheck {
  u64 sub_size = 1;     // |H^{i-1}(x', X) / p^n|
  u64 middle_size = 1;  // |H^i(x, X)|
  u64 quot_size = 1;    // |H^i(x', X)[p^n]|
  bool ok = false;
};

inline ExactSequenceCheck exact_sequence_check(const Sequence& xn, const Sequence& xpn, const ModulePresentation& X,
                                               unsigned i) {
  const auto& cx = *X.ctx;
  if (xn.x.size() != xpn.x.size() + 1)
    throw std::invalid_argument("exact_sequence_check: sequences are not a full/primed pair");
  if (xn.flavor != xpn.flavor || xn.level != xpn.level)
    throw std::invalid_argument("exact_sequence_check: mismatched flavor or level");
  if (!series_equal(xn.x[0], series_const(X.ctx, powmod(cx.p, xn.level, cx.q))))
    throw std::invalid_argument("exact_sequence_check: full sequence must start with p^n");
  for (size_t k = 0; k < xpn.x.size(); ++k)
    if (!series_equal(xn.x[k + 1], xpn.x[k]))
      throw std::invalid_argument("exact_sequence_check: primed sequence is not the tail of the full one");

  unsigned n = xn.level;
  CohomologyGroup sub;
  sub.p = cx.p;
  if (i > 0) sub = koszul_cohomology(xpn, X, i - 1);
  CohomologyGroup mid = koszul_cohomology(xn, X, i);
  CohomologyGroup quot = koszul_cohomology(xpn, X, i);

  unsigned sub_e = sub.layer_exp(n), quot_e = quot.layer_exp(n), mid_e = mid.order_exp();
  auto power = [&cx](unsigned e) {
    u64 v = 1;
    for (unsigned k = 0; k < e; ++k) {
      if (v > UINT64_MAX / cx.p) throw std::overflow_error("exact_sequence_check: cardinality overflows");
      v *= cx.p;
    }
    return v;
  };
  ExactSequenceCheck out;
  out.sub_size = power(sub_e);
  out.middle_size = power(mid_e);
  out.quot_size = power(quot_e);
  out.ok = (mid_e == sub_e + quot_e);
  return out;
}

// ---------------------------------------------------------------------
// Adjoint: the limit of the top primed cohomology along the omega tower,
// reported as invariant factors capped at the working precision.  The
// limit is taken as the stable image of the two-step transition maps; a
// level whose top cohomology cannot be certified finite raises.

struct AdjointResult {
  CohomologyGroup invariants;
  bool stabilized = false;
  unsigned levels_used = 0;
};

namespace detail {

// coefficients of the cyclotomic layer omega_k/omega_{k-1} evaluated at
// 1+T: sum over i < p of (1+T)^{i p^{k-1}}
inline std::vector<u64> tower_ratio_coeffs(u64 p, unsigned k, u64 qm) {
  mpz_class pk1;
  mpz_ui_pow_ui(pk1.get_mpz_t(), static_cast<unsigned long>(p), k - 1);
  unsigned deg = static_cast<unsigned>((p - 1) * pk1.get_ui());
  std::vector<u64> c(deg + 1, 0);
  for (unsigned long i = 0; i < p; ++i) {
    mpz_class e = pk1 * static_cast<unsigned long>(i);
    for (unsigned j = 0; j <= deg; ++j) {
      if (e < j) break;
      mpz_class bin;
      mpz_bin_ui(bin.get_mpz_t(), e.get_mpz_t(), j);
      mpz_class red = bin % mpz_class(static_cast<unsigned long>(qm));
      c[j] = (c[j] + red.get_ui()) % qm;
    }
  }
  return c;
}

inline Mat eval_poly_at(const std::vector<u64>& c, const Mat& S, const Mod& Rm) {
  size_t rank = S.rows;
  Mat acc(rank, rank);
  Mat power = Mat::identity(rank);
  for (size_t j = 0; j < c.size(); ++j) {
    if (c[j] % Rm.q) acc = mat_add(acc, mat_scale(power, c[j], Rm), Rm);
    if (j + 1 < c.size()) power = mat_mul(power, S, Rm);
  }
  return acc;
}

inline std::vector<unsigned> capped(std::vector<unsigned> exps, unsigned N) {
  for (auto& e : exps) e = std::min(e, N);
  std::sort(exps.begin(), exps.end());
  return exps;
}

}  // namespace detail

inline AdjointResult adjoint_E(const ModulePresentation& X, unsigned max_level) {
  const auto& cx = *X.ctx;
  AdjointResult out;
  out.invariants.p = cx.p;

  auto F = detail::flatten_module(X);
  if (X.generators == 0 || detail::module_is_zero(X, F)) {
    out.stabilized = true;
    return out;
  }

  bool cyclic = X.generators == 1 && X.relations.size() == 1;
  std::optional<std::vector<unsigned>> prev;
  if (cyclic) {
    const Series& f = X.relations[0][0];
    unsigned maxB = detail::max_exponent_u64(cx.p);
    for (unsigned n = 2; n <= max_level; ++n) {
      unsigned B = std::min(cx.N + n + 2, maxB);
      if (B < cx.N + 1) break;
      size_t d = detail::tower_degree(cx.p, n, false);
      size_t rank = detail::tensor_rank(d, cx.r);
      if (rank > detail::kExactModelCap) break;
      Mod Rm(cx.p, B);
      auto mod_c = detail::tower_modulus(cx.p, n, false, Rm.q);
      std::vector<Mat> shifts;
      for (unsigned v = 0; v < cx.r; ++v) shifts.push_back(detail::tensor_shift(cx.r, v, mod_c, Rm));
      Mat Mf = detail::tensor_eval(f, shifts, Rm);
      auto exps = diag_exponents(Mf, Rm);
      if (exps.size() < rank)
        throw std::domain_error("adjoint_E: top cohomology not finite at level " + std::to_string(n) +
                                " within precision");
      // image of the level-(n-2) group: multiply by prod_j (omega_n/omega_{n-2})(T_j)
      Mat Mc = Mat::identity(rank);
      for (unsigned v = 0; v < cx.r; ++v)
        for (unsigned k = n - 1; k <= n; ++k)
          Mc = mat_mul(Mc, detail::eval_poly_at(detail::tower_ratio_coeffs(cx.p, k, Rm.q), shifts[v], Rm), Rm);
      auto inv = subquotient_invariants(detail::stack_rows(Mc, Mf), Mf, Rm);
      auto img = detail::capped(inv, cx.N);
      out.levels_used = n;
      if (prev && *prev == img) {
        out.invariants.exps = img;
        out.stabilized = true;
        return out;
      }
      prev = img;
    }
    if (prev) out.invariants.exps = *prev;
    return out;
  }

  auto cert = detail::annihilator_certificate(X, F);
  if (!cert) throw std::domain_error("adjoint_E: precision exhausted");
  for (unsigned n = 2; n <= max_level; ++n) {
    if (!detail::margin_ok(cx, *cert, n)) break;
    Mat denom = F.rel_hf.H;
    for (unsigned v = 1; v <= cx.r; ++v)
      denom = detail::stack_rows(denom, detail::flat_scalar_mult(series_omega(X.ctx, v, n), F.g));
    Series c = series_one(X.ctx);
    for (unsigned v = 1; v <= cx.r; ++v)
      for (unsigned k = n - 1; k <= n; ++k) {
        auto coeffs = detail::tower_ratio_coeffs(cx.p, k, cx.q);
        Series layer = series_zero(X.ctx);
        std::vector<unsigned> e(cx.r, 0);
        for (unsigned j = 0; j < coeffs.size() && j < cx.D; ++j) {
          e[v - 1] = j;
          if (coeffs[j]) layer = series_add(layer, series_monomial(X.ctx, e, coeffs[j]));
        }
        c = series_mul(c, layer);
      }
    Mat numer = detail::stack_rows(detail::flat_scalar_mult(c, F.g), denom);
    auto inv = subquotient_invariants(numer, denom, F.R);
    auto img = detail::capped(inv, cx.N);
    out.levels_used = n;
    if (prev && *prev == img) {
      out.invariants.exps = img;
      out.stabilized = true;
      return out;
    }
    prev = img;
  }
  if (prev) out.invariants.exps = *prev;
  return out;
}

// ---------------------------------------------------------------------
// Ext^1 of an elementary cyclic module: from the two-term resolution of
// Lambda/(f), Ext^1 is the cokernel of multiplication by f.

inline CohomologyGroup ext1_elementary(const Series& f) {
  if (series_is_zero(f)) throw std::invalid_argument("ext1_elementary: f = 0");
  const auto& cx = *f.ctx;
  unsigned M = cx.dim();
  Mat A(M, M);
  A.a = mult_matrix(f);
  CohomologyGroup H;
  H.p = cx.p;
  H.exps = coker_invariants(A, Mod(cx.p, cx.N));
  return H;
}

// ---------------------------------------------------------------------
// Pseudo-null classification.

enum class PseudoNull { PSEUDO_NULL, NOT_PSEUDO_NULL, INDETERMINATE };

// elementary flavor: a direct sum of Lambda/(f_i) is pseudo-null exactly
// when it is zero, i.e. every f_i is a unit
inline PseudoNull pseudo_null_test(const std::vector<Series>& elementary) {
  for (const auto& f : elementary) {
    if (series_is_zero(f)) throw std::invalid_argument("pseudo_null_test: elementary factor with f = 0");
    if (f.c[0] % f.ctx->p == 0) return PseudoNull::NOT_PSEUDO_NULL;
  }
  return PseudoNull::PSEUDO_NULL;
}

namespace detail {

inline Series series_det(const ModulePresentation& X, const std::vector<unsigned>& rows,
                         const std::vector<unsigned>& cols) {
  if (rows.size() == 1) return X.relations[rows[0]][cols[0]];
  Series acc = series_zero(X.ctx);
  for (size_t k = 0; k < cols.size(); ++k) {
    std::vector<unsigned> rows2(rows.begin() + 1, rows.end());
    std::vector<unsigned> cols2;
    for (size_t m = 0; m < cols.size(); ++m)
      if (m != k) cols2.push_back(cols[m]);
    Series term = series_mul(X.relations[rows[0]][cols[k]], series_det(X, rows2, cols2));
    acc = (k % 2 == 0) ? series_add(acc, term) : series_sub(acc, term);
  }
  return acc;
}

// nonzero g x g minors of the relation matrix.  These generate the
// (truncated) initial Fitting ideal of the presentation; a minor of any
// lift of the matrix differs from the truncated minor by an element of
// (p^N, m^D), which is what the coprimality certificate below absorbs.
inline std::vector<Series> fitting_minors(const ModulePresentation& X) {
  std::vector<Series> out;
  unsigned g = X.generators, s = static_cast<unsigned>(X.relations.size());
  if (g > 3 || s < g) return out;
  std::vector<unsigned> cols(g);
  for (unsigned i = 0; i < g; ++i) cols[i] = i;
  std::vector<unsigned> pick(g);
  for (unsigned i = 0; i < g; ++i) pick[i] = i;
  unsigned tried = 0;
  while (tried < 64 && out.size() < 16) {
    ++tried;
    Series d = series_det(X, pick, cols);
    if (!series_is_zero(d)) out.push_back(std::move(d));
    int i = static_cast<int>(g) - 1;
    while (i >= 0 && pick[i] == s - g + static_cast<unsigned>(i)) --i;
    if (i < 0) break;
    ++pick[i];
    for (unsigned j = static_cast<unsigned>(i) + 1; j < g; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

// The span of all monomial multiples of the given scalars, as flat
// vectors over the carrier algebra.
inline HowellForm scalar_span(Ctx cx, const std::vector<Series>& elems, const Mod& R) {
  unsigned M = cx->dim();
  Mat rows(elems.size() * M, M);
  for (size_t ei = 0; ei < elems.size(); ++ei) {
    auto mm = mult_matrix(elems[ei]);
    for (unsigned mi = 0; mi < M; ++mi)
      for (unsigned mo = 0; mo < M; ++mo) rows.at(ei * M + mi, mo) = mm[static_cast<size_t>(mi) * M + mo];
  }
  return howell_form(rows, R);
}

// Coprime-pair certificate on an ideal span: a pure p-power p^a with
// a < N together with a pure monomial T^w with deg w < D, or two pure
// monomials in disjoint variable sets.  Any lift of the span contains
// p^a + h and T^w + h' with h, h' in (p^N, m^D); under integer weights
// v(T_j) = N, v(p) = deg(w) + 1 the perturbations sit strictly above the
// pure terms (a (deg w + 1) <= (N-1) D < N D), so the leading forms in
// the associated graded ring are unit multiples of P^a and X^w.
// A common irreducible divisor of the pair would have a leading form
// dividing both, hence be a unit.  So the lifted ideal has two coprime
// elements and height at least two.
inline bool coprime_pair_in_span(Ctx cx, const HowellForm& span, const Mod& R) {
  unsigned M = cx->dim();
  bool have_p = false;
  for (unsigned a = 1; a < cx->N && !have_p; ++a) {
    std::vector<u64> v(M, 0);
    v[0] = ipow(cx->p, a);
    have_p = in_rowspace(span, v, R);
  }
  std::vector<const std::vector<unsigned>*> hits;
  for (unsigned mi = 1; mi < M; ++mi) {
    std::vector<u64> v(M, 0);
    v[mi] = 1;
    if (in_rowspace(span, v, R)) hits.push_back(&cx->mons[mi]);
  }
  if (have_p && !hits.empty()) return true;
  for (size_t i = 0; i < hits.size(); ++i)
    for (size_t j = i + 1; j < hits.size(); ++j) {
      bool disjoint = true;
      for (unsigned v = 0; v < cx->r && disjoint; ++v) disjoint = (*hits[i])[v] == 0 || (*hits[j])[v] == 0;
      if (disjoint) return true;
    }
  return false;
}

}  // namespace detail

// General flavor.  Zero and certified-finite modules are pseudo-null; a
// presentation with fewer (nonzero) relations than generators has free
// rank and is not; a cyclic module on one nonunit relation has height-1
// support and is not.  The rest are decided by a coprime pair in the
// span of the Fitting minors, which certifies annihilator height >= 2
// for every lift of the presentation; when no pair is found the answer
// is indeterminate.  (Brute-force Ext^1 over the truncated ring is no
// good here: both the p^N and the degree truncation create kernel
// classes with no untruncated counterpart, e.g. (0, p^{N-1} T_2) against
// the relations (p, T_1), so a nonvanishing truncated Ext^1 says nothing
// about the module.)
inline PseudoNull pseudo_null_test(const ModulePresentation& X) {
  const auto& cx = *X.ctx;
  if (X.generators == 0) return PseudoNull::PSEUDO_NULL;
  auto F = detail::flatten_module(X);
  if (detail::module_is_zero(X, F)) return PseudoNull::PSEUDO_NULL;

  ModulePresentation Xnz;
  Xnz.ctx = X.ctx;
  Xnz.generators = X.generators;
  for (const auto& row : X.relations) {
    bool zero = true;
    for (const auto& e : row) zero = zero && series_is_zero(e);
    if (!zero) Xnz.relations.push_back(row);
  }
  if (Xnz.relations.size() < X.generators) return PseudoNull::NOT_PSEUDO_NULL;
  if (X.generators == 1 && Xnz.relations.size() == 1) return PseudoNull::NOT_PSEUDO_NULL;
  if (detail::annihilator_certificate(X, F)) return PseudoNull::PSEUDO_NULL;
  auto minors = detail::fitting_minors(Xnz);
  if (minors.empty()) return PseudoNull::INDETERMINATE;
  Mod R(cx.p, cx.N);
  auto span = detail::scalar_span(X.ctx, minors, R);
  if (detail::coprime_pair_in_span(X.ctx, span, R)) return PseudoNull::PSEUDO_NULL;
  return PseudoNull::INDETERMINATE;
}

// ---------------------------------------------------------------------
// Lattice invariant e = index / exponent via integer Smith normal form.
// With p > 0 only the p-parts are reported (inside Z_p^r the prime-to-p
// factors are invisible anyway).

struct LatticeInvariant {
  long long index = 1;
  long long exponent = 1;
  long long e = 1;
};

inline LatticeInvariant lattice_e(const std::vector<std::vector<long long>>& basis, u64 p = 0) {
  size_t r = basis.size();
  if (r == 0) throw std::invalid_argument("lattice_e: empty basis");
  for (const auto& row : basis)
    if (row.size() != r) throw std::invalid_argument("lattice_e: basis must be square");
  auto snf = smith_form(basis);
  std::vector<long long> d;
  for (long long v : snf.d) {
    if (v == 0) throw std::invalid_argument("lattice_e: singular basis");
    long long a = v < 0 ? -v : v;
    if (p > 0) {
      long long part = 1;
      while (a % static_cast<long long>(p) == 0) {
        part *= static_cast<long long>(p);
        a /= static_cast<long long>(p);
      }
      a = part;
    }
    d.push_back(a);
  }
  LatticeInvariant out;
  __int128 idx = 1;
  for (long long v : d) {
    idx *= v;
    if (idx > static_cast<__int128>(INT64_MAX)) throw std::overflow_error("lattice_e: index overflows");
  }
  out.index = static_cast<long long>(idx);
  out.exponent = d.back();
  out.e = out.index / out.exponent;
  return out;
}

}  // namespace pnull
