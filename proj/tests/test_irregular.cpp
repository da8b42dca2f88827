#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <vector>

#include "pnull/bernoulli.hpp"
#include "pnull/rational.hpp"

using namespace pnull;

namespace {

// Shared exact-rational oracle table, large enough for the Kummer checks
// below (k + p - 1 <= 197 + 196 = 393).
const std::vector<mpq_class>& btab() {
  static const std::vector<mpq_class> B = bernoulli_table(394);
  return B;
}

std::vector<u64> oracle_irregular_set(u64 p) {
  std::vector<u64> out;
  for (u64 k = 2; p >= 5 && k <= p - 3; k += 2)
    if (rational_mod(btab()[k], p, 1) == 0) out.push_back(k);
  return out;
}

}  // namespace

TEST_CASE("bernoulli residues: pinned values") {
  CHECK(bernoulli_mod(7, 1, 2) == 6);    // B_2 = 1/6 and 6*6 = 36 = 1 mod 7
  CHECK(bernoulli_mod(7, 1, 4) == 3);    // B_4 = -1/30 = -1/2 = -4 = 3 mod 7
  CHECK(bernoulli_mod(37, 1, 32) == 0);  // the irregular pair (37, 32)
  CHECK(bernoulli_mod(5, 2, 2) == rational_mod(mpq_class(1, 6), 5, 2));
  // exact-rational fallback path (m > p - 3)
  CHECK(bernoulli_mod(7, 2, 8) == rational_mod(btab()[8], 7, 2));
  CHECK(bernoulli_mod(7, 3, 44) == rational_mod(btab()[44], 7, 3));
}

TEST_CASE("bernoulli residues: rejected inputs") {
  CHECK_THROWS_AS(bernoulli_mod(7, 1, 6), std::domain_error);    // (p-1) | m
  CHECK_THROWS_AS(bernoulli_mod(7, 1, 12), std::domain_error);   // (p-1) | m
  CHECK_THROWS_AS(bernoulli_mod(5, 1, 4), std::domain_error);    // (p-1) | m
  CHECK_THROWS_AS(bernoulli_mod(7, 1, 0), std::domain_error);    // (p-1) | 0
  CHECK_THROWS_AS(bernoulli_mod(7, 1, 3), std::invalid_argument);  // odd m
  CHECK_THROWS_AS(bernoulli_mod(9, 1, 2), std::invalid_argument);  // composite p
  CHECK_THROWS_AS(bernoulli_mod(2, 1, 2), std::invalid_argument);  // even p
  CHECK_THROWS_AS(bernoulli_mod(7, 0, 2), std::invalid_argument);  // N = 0
}

TEST_CASE("mod-p^N recursion agrees with the exact oracle") {
  for (u64 p : odd_primes_upto(97))
    for (u64 m = 2; p >= 5 && m <= p - 3; m += 2)
      for (unsigned N = 1; N <= 3; ++N)
        CHECK(bernoulli_mod(p, N, m) == rational_mod(btab()[m], p, N));
}

TEST_CASE("Kummer congruence across one period") {
  // For even k with (p-1) not dividing k, B_k / k = B_{k+p-1} / (k+p-1)
  // mod p (the Euler factors 1 - p^{m-1} are 1 mod p here).
  for (u64 p : odd_primes_upto(199)) {
    if (p < 5) continue;
    for (u64 k = 2; k <= p - 3; k += 2) {
      u64 lhs = mulmod(bernoulli_mod(p, 1, k), invmod(k % p, p), p);
      u64 rhs = mulmod(rational_mod(btab()[k + p - 1], p, 1), invmod((k + p - 1) % p, p), p);
      REQUIRE(lhs == rhs);
      // in particular p | B_k iff p | B_{k+p-1}
      REQUIRE((bernoulli_mod(p, 1, k) == 0) == (rational_mod(btab()[k + p - 1], p, 1) == 0));
    }
  }
}

TEST_CASE("irregular indices: pinned records") {
  CHECK(irregular_indices(3).indices.empty());
  CHECK(irregular_indices(7).indices.empty());
  CHECK(irregular_indices(7).regular());

  const std::map<u64, std::vector<u64>> pinned = {
      {37, {32}}, {59, {44}}, {67, {58}}, {101, {68}},
      {103, {24}}, {131, {22}}, {149, {130}}, {157, {62, 110}},
  };
  for (const auto& [p, ks] : pinned) {
    IrregularityRecord rec = irregular_indices(p);
    CHECK(rec.p == p);
    CHECK(rec.indices == ks);
    CHECK(rec.index_of_irregularity() == ks.size());
    CHECK_FALSE(rec.regular());
  }
  CHECK(irregular_indices(157).index_of_irregularity() == 2);
}

TEST_CASE("irregular indices: oracle agreement and record invariants") {
  for (u64 p : odd_primes_upto(199)) {
    IrregularityRecord rec = irregular_indices(p);
    CHECK(rec.indices == oracle_irregular_set(p));
    for (u64 k : rec.indices) {
      CHECK(k % 2 == 0);
      CHECK(k >= 2);
      CHECK(k <= p - 3);
    }
  }
}

TEST_CASE("irregularity is a mod-p fact, stable under extra precision") {
  for (u64 p : {u64(37), u64(59), u64(157)}) {
    IrregularityRecord rec = irregular_indices(p);
    CHECK(irregular_indices(p).indices == rec.indices);  // deterministic
    for (u64 k = 2; k <= p - 3; k += 2) {
      bool in = std::find(rec.indices.begin(), rec.indices.end(), k) != rec.indices.end();
      CHECK((bernoulli_mod(p, 2, k) % p == 0) == in);
    }
  }
}

TEST_CASE("regular-prime scan") {
  CHECK_THROWS_AS(scan_regular_fraction(36), std::invalid_argument);

  std::vector<u64> irregular_upto_150;
  for (u64 p : odd_primes_upto(150))
    if (!irregular_indices(p).regular()) irregular_upto_150.push_back(p);
  CHECK(irregular_upto_150 == std::vector<u64>{37, 59, 67, 101, 103, 131, 149});

  RegularScan s40 = scan_regular_fraction(40);
  CHECK(s40.total == 11);  // odd primes 3..37
  CHECK(s40.regular_count == 10);  // all but 37

  RegularScan s150 = scan_regular_fraction(150);
  CHECK(s150.total == 34);
  CHECK(s150.regular_count == 27);
  CHECK(s150.fraction() == Catch::Approx(27.0 / 34.0));
}
