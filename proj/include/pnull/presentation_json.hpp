#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnull/koszul.hpp"

// JSON front end for the module engine: parse a presentation, run the
// omega-tower cohomology with exact-sequence checks, and report the
// result as JSON or CSV.
//
// Presentation schema:
//   { "p": int, "precision": int, "r": int, "degree_cap": int,
//     "generators": int,
//     "relations": [ [ [ [coeff, e1, ..., er], ... ], ... ], ... ] }
// A relation is one polynomial per generator; a polynomial is a list of
// terms [coeff, exponents...].  Negative coefficients are reduced mod
// p^precision; terms of total degree >= degree_cap fall off the
// truncation, matching the ring itself.

namespace pnull {

namespace detail {

inline long long require_int(const nlohmann::json& j, const char* key, long long lo, long long hi) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw std::invalid_argument(std::string("presentation: missing integer field '") + key + "'");
  long long v = j.at(key).get<long long>();
  if (v < lo || v > hi)
    throw std::invalid_argument(std::string("presentation: field '") + key + "' out of range [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

}  // namespace detail

inline ModulePresentation load_presentation(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("presentation: top level must be an object");
  u64 p = u64(detail::require_int(j, "p", 3, 1000003));
  if (!is_prime_u64(p) || p == 2) throw std::invalid_argument("presentation: p must be an odd prime");
  unsigned N = unsigned(detail::require_int(j, "precision", 1, 62));
  u64 q = 1;
  for (unsigned i = 0; i < N; ++i) {
    if (q > (u64(1) << 62) / p) throw std::invalid_argument("presentation: p^precision exceeds the 62-bit modulus");
    q *= p;
  }
  unsigned r = unsigned(detail::require_int(j, "r", 1, 6));
  unsigned D = unsigned(detail::require_int(j, "degree_cap", 2, 200));
  double dim = 1.0;
  for (unsigned v = 1; v <= r; ++v) dim = dim * double(D - 1 + v) / double(v);
  if (dim > 100000.0) throw std::invalid_argument("presentation: monomial basis too large (cap 100000)");
  unsigned g = unsigned(detail::require_int(j, "generators", 0, 64));
  if (!j.contains("relations") || !j.at("relations").is_array())
    throw std::invalid_argument("presentation: missing 'relations' array");

  Ctx cx = make_ctx(p, N, r, D);
  ModulePresentation X;
  X.ctx = cx;
  X.generators = g;
  for (const auto& rel : j.at("relations")) {
    if (!rel.is_array() || rel.size() != g)
      throw std::invalid_argument("presentation: each relation needs one polynomial per generator");
    std::vector<Series> row;
    for (const auto& poly : rel) {
      if (!poly.is_array()) throw std::invalid_argument("presentation: polynomial must be a list of terms");
      Series f = series_zero(cx);
      for (const auto& term : poly) {
        if (!term.is_array() || term.size() != std::size_t(r) + 1)
          throw std::invalid_argument("presentation: term must be [coeff, e1, ..., e" + std::to_string(r) + "]");
        for (const auto& x : term)
          if (!x.is_number_integer()) throw std::invalid_argument("presentation: term entries must be integers");
        long long raw = term[0].get<long long>();
        u64 coeff = u64(((raw % (long long)q) + (long long)q) % (long long)q);
        std::vector<unsigned> exps(r);
        for (unsigned v = 0; v < r; ++v) {
          long long e = term[v + 1].get<long long>();
          if (e < 0 || e > 255) throw std::invalid_argument("presentation: exponent out of range [0, 255]");
          exps[v] = unsigned(e);
        }
        f = series_add(f, series_monomial(cx, exps, coeff));
      }
      row.push_back(std::move(f));
    }
    X.relations.push_back(std::move(row));
  }
  return X;
}

inline ModulePresentation load_presentation_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("presentation: cannot open " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw std::invalid_argument("presentation: " + file.filename().string() + " is not valid JSON: " + e.what());
  }
  return load_presentation(j);
}

// ---------------------------------------------------------------------
// Cohomology report against the omega tower at one level.  Groups that
// cannot be certified at this truncation are reported indeterminate with
// the failing stage's message, never silently skipped.

struct KoszulReport {
  u64 p = 0;
  unsigned N = 0, r = 0, D = 0, level = 1;
  unsigned generators = 0;
  std::size_t relation_count = 0;

  struct Group {
    unsigned i = 0;
    bool ok = false;
    std::vector<unsigned> exps;  // invariant factors p^e, ascending
    std::string note;            // failure message when !ok
  };
  std::vector<Group> full;    // H^i(x_n, X), i = 0..r+1
  std::vector<Group> primed;  // H^i(x'_n, X), i = 0..r

  struct SeqRow {
    unsigned i = 0;
    bool ok = false;        // identity checked and it held
    bool computed = false;  // all three groups were available
    u64 sub_size = 0, middle_size = 0, quot_size = 0;
    std::string note;
  };
  std::vector<SeqRow> sequence;  // i = 0..r+1

  std::string pseudo_null;  // "pseudo_null" | "not_pseudo_null" | "indeterminate"
};

inline const char* to_string(PseudoNull v) {
  switch (v) {
    case PseudoNull::PSEUDO_NULL: return "pseudo_null";
    case PseudoNull::NOT_PSEUDO_NULL: return "not_pseudo_null";
    default: return "indeterminate";
  }
}

inline KoszulReport koszul_report(const ModulePresentation& X, unsigned level = 1) {
  const auto& cx = *X.ctx;
  KoszulReport rep;
  rep.p = cx.p;
  rep.N = cx.N;
  rep.r = cx.r;
  rep.D = cx.D;
  rep.level = level;
  rep.generators = X.generators;
  rep.relation_count = X.relations.size();

  Sequence full = sequence_omega(X.ctx, level);
  Sequence primed = sequence_omega_primed(X.ctx, level);

  auto group = [&](const Sequence& x, unsigned i) {
    KoszulReport::Group g;
    g.i = i;
    try {
      g.exps = koszul_cohomology(x, X, i).exps;
      g.ok = true;
    } catch (const std::exception& e) {
      g.note = e.what();
    }
    return g;
  };
  for (unsigned i = 0; i <= cx.r + 1; ++i) rep.full.push_back(group(full, i));
  for (unsigned i = 0; i <= cx.r; ++i) rep.primed.push_back(group(primed, i));

  for (unsigned i = 0; i <= cx.r + 1; ++i) {
    KoszulReport::SeqRow row;
    row.i = i;
    try {
      ExactSequenceCheck chk = exact_sequence_check(full, primed, X, i);
      row.computed = true;
      row.ok = chk.ok;
      row.sub_size = chk.sub_size;
      row.middle_size = chk.middle_size;
      row.quot_size = chk.quot_size;
    } catch (const std::exception& e) {
      row.note = e.what();
    }
    rep.sequence.push_back(row);
  }

  rep.pseudo_null = to_string(pseudo_null_test(X));
  return rep;
}

namespace detail {

inline nlohmann::ordered_json group_json(u64 p, const KoszulReport::Group& g) {
  nlohmann::ordered_json e;
  e["i"] = g.i;
  e["status"] = g.ok ? "ok" : "indeterminate";
  if (g.ok) {
    nlohmann::ordered_json fac = nlohmann::ordered_json::array();
    for (unsigned x : g.exps) fac.push_back(ipow(p, x));
    e["invariant_factors"] = std::move(fac);
    unsigned s = 0;
    for (unsigned x : g.exps) s += x;
    e["order_exp"] = s;
  } else {
    e["note"] = g.note;
  }
  return e;
}

}  // namespace detail

inline nlohmann::ordered_json koszul_json(const KoszulReport& rep) {
  nlohmann::ordered_json j;
  j["p"] = rep.p;
  j["precision"] = rep.N;
  j["r"] = rep.r;
  j["degree_cap"] = rep.D;
  j["generators"] = rep.generators;
  j["relations"] = rep.relation_count;
  j["level"] = rep.level;
  nlohmann::ordered_json full = nlohmann::ordered_json::array(), primed = nlohmann::ordered_json::array();
  for (const auto& g : rep.full) full.push_back(detail::group_json(rep.p, g));
  for (const auto& g : rep.primed) primed.push_back(detail::group_json(rep.p, g));
  j["full"] = std::move(full);
  j["primed"] = std::move(primed);
  nlohmann::ordered_json seq = nlohmann::ordered_json::array();
  for (const auto& row : rep.sequence) {
    nlohmann::ordered_json e;
    e["i"] = row.i;
    if (row.computed) {
      e["sub_size"] = row.sub_size;
      e["middle_size"] = row.middle_size;
      e["quot_size"] = row.quot_size;
      e["ok"] = row.ok;
    } else {
      e["status"] = "indeterminate";
      e["note"] = row.note;
    }
    seq.push_back(std::move(e));
  }
  j["exact_sequence"] = std::move(seq);
  j["pseudo_null"] = rep.pseudo_null;
  return j;
}

inline std::string koszul_text(const KoszulReport& rep) { return koszul_json(rep).dump(2) + "\n"; }

// Flat CSV rendering: group rows carry the invariant factors, exact rows
// the three cardinalities.
inline std::string koszul_csv(const KoszulReport& rep) {
  std::ostringstream os;
  os << "section,i,status,invariant_factors,order_exp,sub_size,middle_size,quot_size,ok\n";
  auto emit_group = [&](const char* section, const KoszulReport::Group& g) {
    os << section << ',' << g.i << ',' << (g.ok ? "ok" : "indeterminate") << ',';
    if (g.ok) {
      for (std::size_t k = 0; k < g.exps.size(); ++k) os << (k ? ";" : "") << ipow(rep.p, g.exps[k]);
      unsigned s = 0;
      for (unsigned x : g.exps) s += x;
      os << ',' << s << ",,,,\n";
    } else {
      os << ",,,,,\n";
    }
  };
  for (const auto& g : rep.full) emit_group("full", g);
  for (const auto& g : rep.primed) emit_group("primed", g);
  for (const auto& row : rep.sequence) {
    os << "exact," << row.i << ',' << (row.computed ? "ok" : "indeterminate") << ",,,";
    if (row.computed)
      os << row.sub_size << ',' << row.middle_size << ',' << row.quot_size << ',' << (row.ok ? "true" : "false");
    else
      os << ",,,";
    os << '\n';
  }
  os << "pseudo_null,," << rep.pseudo_null << ",,,,,,\n";
  return os.str();
}

}  // namespace pnull
