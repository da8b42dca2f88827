#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Modular arithmetic kernels on uint64 residues.  Every modulus in this
// project fits in 63 bits (p^N with p < 10^5 and small N), so products are
// done through unsigned __int128 and never overflow.

namespace pnull {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i64 = std::int64_t;

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(u128(a) * b % m); }

inline u64 addmod(u64 a, u64 b, u64 m) {
  u64 s = a + b;  // a,b < m <= 2^63 so no wrap
  return s >= m ? s - m : s;
}

inline u64 submod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + m - b; }

inline u64 powmod(u64 base, u64 exp, u64 m) {
  if (m == 1) return 0;
  u64 r = 1;
  base %= m;
  while (exp) {
    if (exp & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return r;
}

// Inverse of a mod m for gcd(a, m) = 1; throws otherwise.  Extended
// Euclid on signed 128-bit intermediates.
inline u64 invmod(u64 a, u64 m) {
  i64 t = 0, nt = 1;
  i64 r = static_cast<i64>(m), nr = static_cast<i64>(a % m);
  while (nr != 0) {
    i64 q = r / nr;
    i64 tmp = t - q * nt;
    t = nt;
    nt = tmp;
    tmp = r - q * nr;
    r = nr;
    nr = tmp;
  }
  if (r != 1) throw std::domain_error("invmod: argument is not a unit (gcd " + std::to_string(r) + ")");
  if (t < 0) t += static_cast<i64>(m);
  return static_cast<u64>(t);
}

// p-adic valuation of a with respect to p; by convention vp(0) = cap.
inline unsigned vp_capped(u64 a, u64 p, unsigned cap) {
  if (a == 0) return cap;
  unsigned v = 0;
  while (v < cap && a % p == 0) {
    a /= p;
    ++v;
  }
  return v;
}

inline u64 ipow(u64 base, unsigned exp) {
  u64 r = 1;
  while (exp--) r *= base;
  return r;
}

// Deterministic Miller-Rabin, valid for all n < 2^64 with this base set.
inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n == q) return true;
    if (n % q == 0) return false;
  }
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (unsigned i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

inline std::vector<u64> prime_factors(u64 n) {
  std::vector<u64> fs;
  for (u64 d = 2; d * d <= n; d += (d == 2 ? 1 : 2)) {
    if (n % d == 0) {
      fs.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) fs.push_back(n);
  return fs;
}

// Least primitive root mod prime p.
inline u64 primitive_root(u64 p) {
  if (p == 2) return 1;
  auto fs = prime_factors(p - 1);
  for (u64 g = 2; g < p; ++g) {
    bool ok = true;
    for (u64 q : fs) {
      if (powmod(g, (p - 1) / q, p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  throw std::logic_error("primitive_root: none found (p not prime?)");
}

// Generator of (Z/p^e)^* for odd p: the least primitive root mod p,
// bumped by p when it fails to generate mod p^2.
inline u64 unit_group_generator(u64 p, unsigned e) {
  u64 g = primitive_root(p);
  if (e == 1) return g;
  u64 p2 = p * p;
  if (powmod(g, p - 1, p2) == 1) g += p;
  return g;
}

// Fixed-point iteration for the Teichmuller lift of a mod p^e:
// start from a^{p^{e-1}} and square-free-iterate x -> x^p until stable.
inline u64 teichmuller(u64 a, u64 p, u64 pe) {
  u64 x = a % pe;
  for (;;) {
    u64 y = powmod(x, p, pe);
    if (y == x) return x;
    x = y;
  }
}

// Discrete log of u in the pro-p part: writes u = (1+p)^e mod p^{n+1}
// for u = 1 mod p, returns e mod p^n.  Digit peeling: the i-th digit of
// e is read off from u / (1+p)^{digits so far} mod p^{i+2}.
inline u64 dlog_one_plus_p(u64 u, u64 p, unsigned n) {
  u64 q = ipow(p, n + 1);
  if (u % p != 1) throw std::domain_error("dlog_one_plus_p: argument is not a 1-unit");
  u64 e = 0;
  u64 cur = u % q;
  u64 base = (1 + p) % q;
  u64 pk = 1;  // p^i
  for (unsigned i = 0; i < n; ++i) {
    u64 pi2 = ipow(p, i + 2);
    // cur = (1+p)^{remaining e} with remaining e divisible by p^i
    u64 c = cur % pi2;
    // (1+p)^{d p^i} = 1 + d p^{i+1} mod p^{i+2}
    u64 d = ((c + pi2 - 1) % pi2) / ipow(p, i + 1) % p;
    e += d * pk;
    cur = mulmod(cur, powmod(invmod(base, q), d * pk, q), q);
    pk *= p;
  }
  if (cur != 1) throw std::domain_error("dlog_one_plus_p: argument is not a 1-unit power of 1+p");
  return e;
}

}  // namespace pnull
