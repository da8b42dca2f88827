#pragma once

#include <stdexcept>
#include <vector>

#include "pnull/bernoulli.hpp"
#include "pnull/residue.hpp"

// Probabilistic certification that the cyclotomic test unit at an
// irregular index is not a p-th power.  The test reduces the unit
// u_k = prod_{a<=(p-1)/2} (1 - zeta^a)^(a^(p-1-k)) modulo a prime
// q = 1 (mod p) and raises it to (q-1)/p; a value other than 1 proves
// u_k is not a p-th power, certifying the index.  The test is strictly
// one-sided: a 1 at one embedding proves nothing either way.

namespace pnull {

enum class VandiverStatus { HOLDS, INCONCLUSIVE };

struct VandiverWitness {
  u64 q = 0;
  bool certified = false;
};

struct VandiverOutcome {
  u64 p = 0;
  u64 k = 0;
  std::vector<VandiverWitness> witnesses;
  VandiverStatus status = VandiverStatus::INCONCLUSIVE;
};

// One witness test.  zeta is fixed deterministically as g^((q-1)/p) for
// g the least primitive root mod q; exponents are reduced mod p up
// front since only the p-th-power class of u_k matters.
inline bool vandiver_test(u64 p, u64 k, u64 q) {
  if (p < 3 || !is_prime_u64(p)) throw std::invalid_argument("vandiver_test: p must be an odd prime");
  if (k % 2 != 0 || k < 2 || k > p - 3) throw std::invalid_argument("vandiver_test: k must be even in [2, p-3]");
  if (!is_prime_u64(q)) throw std::invalid_argument("vandiver_test: q must be prime");
  if (q % p != 1) throw std::invalid_argument("vandiver_test: q must be 1 mod p");
  u64 e = (q - 1) / p;
  u64 zeta = powmod(primitive_root(q), e, q);
  u64 u = 1, za = 1;
  for (u64 a = 1; a <= (p - 1) / 2; ++a) {
    za = mulmod(za, zeta, q);
    u64 ca = powmod(a, p - 1 - k, p);
    u = mulmod(u, powmod(submod(1, za, q), ca, q), q);
  }
  return powmod(u, e, q) != 1;
}

// First `count` primes of the form q = 2mp + 1, scanning m upward.
inline std::vector<u64> vandiver_witness_schedule(u64 p, unsigned count) {
  std::vector<u64> qs;
  for (u64 m = 1; qs.size() < count; ++m) {
    u64 q = 2 * m * p + 1;
    if (is_prime_u64(q)) qs.push_back(q);
  }
  return qs;
}

// Run witnesses for one irregular index until one certifies or the
// budget runs out.  INCONCLUSIVE is an ordinary outcome, not an error.
inline VandiverOutcome vandiver_outcome(u64 p, u64 k, unsigned witness_budget = 8) {
  VandiverOutcome out;
  out.p = p;
  out.k = k;
  for (u64 q : vandiver_witness_schedule(p, witness_budget)) {
    bool ok = vandiver_test(p, k, q);
    out.witnesses.push_back({q, ok});
    if (ok) {
      out.status = VandiverStatus::HOLDS;
      return out;
    }
  }
  out.status = VandiverStatus::INCONCLUSIVE;
  return out;
}

inline std::vector<VandiverOutcome> vandiver_status(u64 p, unsigned witness_budget = 8) {
  std::vector<VandiverOutcome> outs;
  for (u64 k : irregular_indices(p).indices) outs.push_back(vandiver_outcome(p, k, witness_budget));
  return outs;
}

}  // namespace pnull
