#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pnull/residue.hpp"

// Linear algebra over the chain ring Z/p^N.  Everything reduces to the
// Howell normal form: a row-echelon form whose pivots are plain powers
// of p, closed under the "shadow" rows p^{N-e} * row, with entries above
// a pivot reduced modulo it.  Unlike echelon over a field, the Howell
// form's rows canonically represent the whole row module, which is what
// makes kernels and membership tests work over Z/p^N.

namespace pnull {

struct Mod {
  u64 p;
  unsigned N;
  u64 q;  // p^N

  Mod(u64 p_, unsigned N_) : p(p_), N(N_), q(ipow(p_, N_)) {}
};

struct Mat {
  size_t rows = 0, cols = 0;
  std::vector<u64> a;

  Mat() = default;
  Mat(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0) {}

  u64& at(size_t i, size_t j) { return a[i * cols + j]; }
  u64 at(size_t i, size_t j) const { return a[i * cols + j]; }

  static Mat identity(size_t n) {
    Mat m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }
};

inline Mat mat_mul(const Mat& a, const Mat& b, const Mod& R) {
  if (a.cols != b.rows) throw std::invalid_argument("mat_mul: shape mismatch");
  Mat c(a.rows, b.cols);
  for (size_t i = 0; i < a.rows; ++i)
    for (size_t k = 0; k < a.cols; ++k) {
      u64 v = a.at(i, k);
      if (!v) continue;
      for (size_t j = 0; j < b.cols; ++j)
        if (b.at(k, j)) c.at(i, j) = addmod(c.at(i, j), mulmod(v, b.at(k, j), R.q), R.q);
    }
  return c;
}

struct HowellForm {
  Mat H;                                           // canonical form, zero rows trimmed
  std::vector<std::pair<size_t, size_t>> pivots;   // (row in H, column), pivot value p^e
  std::vector<unsigned> pivot_exp;                 // e per pivot
  Mat U, Uinv;                                     // square invertible, U * [M; 0pad] = [H; 0pad]
  size_t padded_rows = 0;
};

// Row-based Howell reduction with full transform tracking.  The input
// is padded with `cols` zero rows so shadow-row insertion is an
// elementary operation and U stays square invertible.  Rows are never
// physically swapped; a final permutation sorts pivot rows first, so the
// pad region stays pristine until a shadow row is written into it.
inline HowellForm howell_form(const Mat& M, const Mod& R) {
  size_t m = M.rows, n = M.cols;
  size_t mm = m + n;
  Mat W(mm, n);
  std::copy(M.a.begin(), M.a.end(), W.a.begin());
  Mat U = Mat::identity(mm), Uinv = Mat::identity(mm);
  size_t next_pad = m;  // first untouched reserve row

  auto row_addmul = [&](size_t dst, size_t src, u64 c) {
    // row dst += c * row src, mirrored in U; Uinv gets the inverse op
    c %= R.q;
    if (c == 0) return;
    for (size_t j = 0; j < n; ++j) W.at(dst, j) = addmod(W.at(dst, j), mulmod(c, W.at(src, j), R.q), R.q);
    for (size_t j = 0; j < mm; ++j) U.at(dst, j) = addmod(U.at(dst, j), mulmod(c, U.at(src, j), R.q), R.q);
    u64 nc = R.q - c;
    for (size_t i = 0; i < mm; ++i) Uinv.at(i, src) = addmod(Uinv.at(i, src), mulmod(nc, Uinv.at(i, dst), R.q), R.q);
  };
  auto row_scale = [&](size_t i, u64 u) {
    for (size_t j = 0; j < n; ++j) W.at(i, j) = mulmod(W.at(i, j), u, R.q);
    for (size_t j = 0; j < mm; ++j) U.at(i, j) = mulmod(U.at(i, j), u, R.q);
    u64 ui = invmod(u, R.q);
    for (size_t k = 0; k < mm; ++k) Uinv.at(k, i) = mulmod(Uinv.at(k, i), ui, R.q);
  };

  std::vector<size_t> pivot_rows;       // physical row per pivot
  std::vector<size_t> pivot_cols;
  std::vector<unsigned> pivot_exp;
  std::vector<char> used(mm, 0);
  for (size_t col = 0; col < n; ++col) {
    size_t best = mm;
    unsigned best_v = R.N;
    for (size_t i = 0; i < mm; ++i) {
      if (used[i] || W.at(i, col) == 0) continue;
      unsigned v = vp_capped(W.at(i, col), R.p, R.N);
      if (v < best_v) {
        best_v = v;
        best = i;
      }
    }
    if (best == mm) continue;
    size_t t = best;
    unsigned e = best_v;
    u64 pe = ipow(R.p, e);
    row_scale(t, invmod(W.at(t, col) / pe, R.q));  // pivot becomes exactly p^e
    for (size_t i = 0; i < mm; ++i) {
      if (i == t || used[i]) continue;
      u64 v = W.at(i, col);
      if (v) row_addmul(i, t, R.q - v / pe);  // v has valuation >= e by minimality
    }
    if (e > 0) {
      // shadow row: p^{N-e} * pivot row annihilates the pivot but keeps
      // the tail information a plain echelon form would lose
      if (next_pad >= mm) throw std::logic_error("howell_form: pad region exhausted");
      row_addmul(next_pad, t, ipow(R.p, R.N - e));
      ++next_pad;
    }
    for (size_t k = 0; k < pivot_rows.size(); ++k) {
      u64 v = W.at(pivot_rows[k], col);
      if (v >= pe) row_addmul(pivot_rows[k], t, R.q - v / pe);  // reduce above-pivot entries mod p^e
    }
    used[t] = 1;
    pivot_rows.push_back(t);
    pivot_cols.push_back(col);
    pivot_exp.push_back(e);
  }

  // sort pivot rows to the top, everything else (now all zero) after
  std::vector<size_t> order = pivot_rows;
  for (size_t i = 0; i < mm; ++i)
    if (!used[i]) order.push_back(i);
  size_t t = pivot_rows.size();

  HowellForm out;
  out.H = Mat(t, n);
  for (size_t k = 0; k < t; ++k)
    for (size_t j = 0; j < n; ++j) out.H.at(k, j) = W.at(order[k], j);
  out.pivots.reserve(t);
  for (size_t k = 0; k < t; ++k) out.pivots.emplace_back(k, pivot_cols[k]);
  out.pivot_exp = std::move(pivot_exp);
  out.U = Mat(mm, mm);
  out.Uinv = Mat(mm, mm);
  for (size_t k = 0; k < mm; ++k)
    for (size_t j = 0; j < mm; ++j) {
      out.U.at(k, j) = U.at(order[k], j);
      out.Uinv.at(j, k) = Uinv.at(j, order[k]);
    }
  out.padded_rows = mm;
  return out;
}

// Left kernel {v : v A = 0} as Howell-canonical rows.
inline Mat left_kernel(const Mat& A, const Mod& R) {
  size_t m = A.rows, n = A.cols;
  Mat aug(m, n + m);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) aug.at(i, j) = A.at(i, j);
    aug.at(i, n + i) = 1;
  }
  HowellForm hf = howell_form(aug, R);
  std::vector<size_t> krows;
  for (size_t i = 0; i < hf.H.rows; ++i) {
    bool zero = true;
    for (size_t j = 0; j < n && zero; ++j) zero = hf.H.at(i, j) == 0;
    if (zero) krows.push_back(i);
  }
  Mat K(krows.size(), m);
  for (size_t i = 0; i < krows.size(); ++i)
    for (size_t j = 0; j < m; ++j) K.at(i, j) = hf.H.at(krows[i], n + j);
  // canonicalize as a standalone matrix
  HowellForm kf = howell_form(K, R);
  return kf.H;
}

// Reduce b against the pivots of H; returns the residual and, when
// `coeffs` is given, accumulates the combination used.
inline std::vector<u64> reduce_against(const HowellForm& hf, std::vector<u64> b, const Mod& R,
                                       std::vector<u64>* coeffs = nullptr) {
  if (coeffs) coeffs->assign(hf.H.rows, 0);
  for (size_t k = 0; k < hf.pivots.size(); ++k) {
    auto [row, col] = hf.pivots[k];
    u64 pe = ipow(R.p, hf.pivot_exp[k]);
    u64 c = b[col] / pe;  // reduce what divisibility allows; remainder < p^e stays
    if (c == 0) continue;
    for (size_t j = 0; j < hf.H.cols; ++j) b[j] = submod(b[j], mulmod(c, hf.H.at(row, j), R.q), R.q);
    if (coeffs) (*coeffs)[row] = addmod((*coeffs)[row], c, R.q);
  }
  return b;
}

inline bool in_rowspace(const HowellForm& hf, const std::vector<u64>& b, const Mod& R) {
  auto rem = reduce_against(hf, b, R);
  for (u64 v : rem)
    if (v) return false;
  return true;
}

// Solve u * A = b; returns nullopt when b is outside the row module.
inline std::optional<std::vector<u64>> solve_left(const Mat& A, const std::vector<u64>& b, const Mod& R) {
  HowellForm hf = howell_form(A, R);
  std::vector<u64> coeffs;
  auto rem = reduce_against(hf, b, R, &coeffs);
  for (u64 v : rem)
    if (v) return std::nullopt;
  // map combination-of-H-rows back through U to combination-of-A-rows
  std::vector<u64> u(A.rows, 0);
  for (size_t t = 0; t < hf.H.rows; ++t) {
    if (coeffs[t] == 0) continue;
    for (size_t i = 0; i < A.rows; ++i) u[i] = addmod(u[i], mulmod(coeffs[t], hf.U.at(t, i), R.q), R.q);
  }
  return u;
}

// Diagonalization exponents over Z/p^N via global minimum-valuation
// pivoting (valid because Z/p^N is a chain ring: the minimum-valuation
// entry divides every other entry).  Row and column operations are both
// allowed, so no shadow rows are needed.
inline std::vector<unsigned> diag_exponents(Mat W, const Mod& R) {
  size_t m = W.rows, n = W.cols;
  std::vector<unsigned> exps;
  size_t t = 0;
  while (t < m && t < n) {
    size_t bi = m, bj = n;
    unsigned best = R.N;
    for (size_t i = t; i < m; ++i)
      for (size_t j = t; j < n; ++j) {
        if (W.at(i, j) == 0) continue;
        unsigned v = vp_capped(W.at(i, j), R.p, R.N);
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    if (bi == m) break;  // all remaining entries are zero
    for (size_t j = 0; j < n; ++j) std::swap(W.at(t, j), W.at(bi, j));
    for (size_t i = 0; i < m; ++i) std::swap(W.at(i, t), W.at(i, bj));
    u64 pe = ipow(R.p, best);
    u64 ui = invmod(W.at(t, t) / pe, R.q);
    for (size_t j = t; j < n; ++j) W.at(t, j) = mulmod(W.at(t, j), ui, R.q);
    for (size_t i = t + 1; i < m; ++i) {
      u64 v = W.at(i, t);
      if (!v) continue;
      u64 c = R.q - v / pe;
      for (size_t j = t; j < n; ++j) W.at(i, j) = addmod(W.at(i, j), mulmod(c, W.at(t, j), R.q), R.q);
    }
    for (size_t j = t + 1; j < n; ++j) {
      u64 v = W.at(t, j);
      if (!v) continue;
      u64 c = R.q - v / pe;
      for (size_t i = t; i < m; ++i) W.at(i, j) = addmod(W.at(i, j), mulmod(c, W.at(i, t), R.q), R.q);
    }
    exps.push_back(best);
    ++t;
  }
  return exps;
}

// Invariant factors (as p-exponents, ascending) of R^cols / rowspace(A).
// Diagonal entry p^e contributes Z/p^e; columns beyond the diagonal
// contribute full Z/p^N factors.
inline std::vector<unsigned> coker_invariants(const Mat& A, const Mod& R) {
  std::vector<unsigned> d = diag_exponents(A, R);
  std::vector<unsigned> out;
  for (unsigned e : d)
    if (e > 0) out.push_back(e);
  for (size_t j = d.size(); j < A.cols; ++j) out.push_back(R.N);
  std::sort(out.begin(), out.end());
  return out;
}

// Invariant factors of span(K)/span(L) inside R^d.  Throws when a row of
// L is not in span(K).
inline std::vector<unsigned> subquotient_invariants(const Mat& K, const Mat& L, const Mod& R) {
  HowellForm hk = howell_form(K, R);
  size_t t = hk.H.rows;
  if (t == 0) {
    for (size_t i = 0; i < L.rows; ++i)
      for (size_t j = 0; j < L.cols; ++j)
        if (L.at(i, j)) throw std::invalid_argument("subquotient: L not contained in span(K)");
    return {};
  }
  // rows expressing L and the syzygies of H present the quotient on H's rows
  std::vector<std::vector<u64>> rel;
  for (size_t i = 0; i < L.rows; ++i) {
    std::vector<u64> b(L.cols);
    for (size_t j = 0; j < L.cols; ++j) b[j] = L.at(i, j);
    std::vector<u64> coeffs;
    auto rem = reduce_against(hk, b, R, &coeffs);
    for (u64 v : rem)
      if (v) throw std::invalid_argument("subquotient: L not contained in span(K)");
    rel.push_back(coeffs);
  }
  Mat syz = left_kernel(hk.H, R);
  for (size_t i = 0; i < syz.rows; ++i) {
    std::vector<u64> row(t);
    for (size_t j = 0; j < t; ++j) row[j] = syz.at(i, j);
    rel.push_back(row);
  }
  Mat Rel(rel.size(), t);
  for (size_t i = 0; i < rel.size(); ++i)
    for (size_t j = 0; j < t; ++j) Rel.at(i, j) = rel[i][j];
  return coker_invariants(Rel, R);
}

// ---------------------------------------------------------------------
// Integer Smith normal form (for lattices; dimensions and entries are
// desk-scale, arithmetic in __int128 to dodge intermediate overflow).

struct SnfResult {
  std::vector<long long> d;  // diagonal, d_i >= 0, d_i | d_{i+1}
  std::vector<std::vector<long long>> A, B;  // unimodular, A * M * B = diag(d)
};

inline SnfResult smith_form(std::vector<std::vector<long long>> M) {
  using ll = long long;
  using lll = __int128;
  size_t m = M.size(), n = m ? M[0].size() : 0;
  auto ident = [](size_t k) {
    std::vector<std::vector<ll>> I(k, std::vector<ll>(k, 0));
    for (size_t i = 0; i < k; ++i) I[i][i] = 1;
    return I;
  };
  SnfResult out;
  out.A = ident(m);
  out.B = ident(n);
  auto& A = out.A;
  auto& B = out.B;

  auto row_op = [&](size_t i, size_t j, ll c) {  // row i -= c * row j
    for (size_t k = 0; k < n; ++k) M[i][k] = static_cast<ll>(static_cast<lll>(M[i][k]) - static_cast<lll>(c) * M[j][k]);
    for (size_t k = 0; k < m; ++k) A[i][k] = static_cast<ll>(static_cast<lll>(A[i][k]) - static_cast<lll>(c) * A[j][k]);
  };
  auto col_op = [&](size_t i, size_t j, ll c) {  // col i -= c * col j
    for (size_t k = 0; k < m; ++k) M[k][i] = static_cast<ll>(static_cast<lll>(M[k][i]) - static_cast<lll>(c) * M[k][j]);
    for (size_t k = 0; k < n; ++k) B[k][i] = static_cast<ll>(static_cast<lll>(B[k][i]) - static_cast<lll>(c) * B[k][j]);
  };

  size_t t = 0;
  while (t < m && t < n) {
    // pivot: smallest nonzero absolute value in the trailing block
    size_t bi = m, bj = n;
    ll best = 0;
    for (size_t i = t; i < m; ++i)
      for (size_t j = t; j < n; ++j)
        if (M[i][j] != 0 && (best == 0 || std::abs(M[i][j]) < best)) {
          best = std::abs(M[i][j]);
          bi = i;
          bj = j;
        }
    if (bi == m) break;
    std::swap(M[t], M[bi]);
    std::swap(A[t], A[bi]);
    if (bj != t) {
      for (size_t k = 0; k < m; ++k) std::swap(M[k][t], M[k][bj]);
      for (size_t k = 0; k < n; ++k) std::swap(B[k][t], B[k][bj]);
    }
    bool clean = true;
    for (size_t i = t + 1; i < m; ++i) {
      ll c = M[i][t] / M[t][t];
      if (c) row_op(i, t, c);
      if (M[i][t] != 0) clean = false;
    }
    for (size_t j = t + 1; j < n; ++j) {
      ll c = M[t][j] / M[t][t];
      if (c) col_op(j, t, c);
      if (M[t][j] != 0) clean = false;
    }
    if (!clean) continue;  // remainders became new, smaller pivot candidates
    // divisibility fix-up: pivot must divide the whole trailing block
    bool fixed = true;
    for (size_t i = t + 1; i < m && fixed; ++i)
      for (size_t j = t + 1; j < n && fixed; ++j)
        if (M[i][j] % M[t][t] != 0) {
          row_op(t, i, -1);  // fold row i into the pivot row, then redo
          fixed = false;
        }
    if (!fixed) continue;
    ++t;
  }
  if (t > 0) {
    // sign normalization
    for (size_t i = 0; i < t; ++i)
      if (M[i][i] < 0) {
        M[i][i] = -M[i][i];
        for (size_t k = 0; k < n; ++k) B[k][i] = -B[k][i];
      }
  }
  size_t k = std::min(m, n);
  out.d.assign(k, 0);
  for (size_t i = 0; i < t; ++i) out.d[i] = M[i][i];
  return out;
}

}  // namespace pnull
