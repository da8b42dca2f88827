#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnull/bernoulli.hpp"
#include "pnull/charseries.hpp"
#include "pnull/vandiver.hpp"

// Per-prime certificates.  A certificate bundles the irregularity data,
// the Vandiver witness search, and the characteristic-series conditions
// into one immutable record together with every parameter that went into
// it, because the verdict is meaningless without its precision.

namespace pnull {

inline constexpr const char* kToolVersion = "1.0.0";

struct CheckParams {
  unsigned level = 1;      // Galois level n
  unsigned prec = 0;       // coefficient precision N; 0 means level + 1
  unsigned deg = 12;       // series degree cap D
  unsigned witnesses = 8;  // Vandiver witness budget

  unsigned precision() const { return prec ? prec : level + 1; }

  bool operator==(const CheckParams& o) const {
    return level == o.level && precision() == o.precision() && deg == o.deg && witnesses == o.witnesses;
  }
};

enum class Verdict { REGULAR_TRIVIAL, CERTIFIED_BY_THEOREM_1, NOT_COVERED, INDETERMINATE };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::REGULAR_TRIVIAL: return "REGULAR_TRIVIAL";
    case Verdict::CERTIFIED_BY_THEOREM_1: return "CERTIFIED_BY_THEOREM_1";
    case Verdict::NOT_COVERED: return "NOT_COVERED";
    default: return "INDETERMINATE";
  }
}

inline const char* to_string(Tristate t) {
  switch (t) {
    case Tristate::YES: return "true";
    case Tristate::NO: return "false";
    default: return "indeterminate";
  }
}

inline const char* to_string(VandiverStatus s) {
  return s == VandiverStatus::HOLDS ? "HOLDS" : "INCONCLUSIVE";
}

struct PrimeCertificate {
  u64 p = 0;
  bool regular = false;
  std::vector<u64> irregular_indices;  // even k with p | B_k, ascending
  std::size_t index_of_irregularity = 0;
  std::vector<VandiverOutcome> vandiver;    // one entry per irregular index
  std::vector<Condition2Index> per_index;   // lambda, mu, c mod p per irregular index
  bool condition1 = false;                  // index 1 and Vandiver certified there
  Tristate condition2 = Tristate::INDETERMINATE;
  Verdict verdict = Verdict::INDETERMINATE;
  std::string notes;  // names the failing stage when the verdict is INDETERMINATE
  std::string tool_version = kToolVersion;
  CheckParams params;
};

// Runs the whole per-prime pipeline.  Regular primes short-circuit:
// condition 2 is an empty conjunction there, so it is reported true.
// The INDETERMINATE verdict is reserved for resource limits (witness
// budget, precision); everything the hypotheses actually rule out is
// NOT_COVERED.
inline PrimeCertificate make_certificate(u64 p, const CheckParams& par = {}) {
  PrimeCertificate c;
  c.p = p;
  c.params = par;

  IrregularityRecord rec = irregular_indices(p);
  c.regular = rec.regular();
  c.irregular_indices = rec.indices;
  c.index_of_irregularity = rec.index_of_irregularity();

  if (c.regular) {
    c.condition2 = Tristate::YES;
    c.verdict = Verdict::REGULAR_TRIVIAL;
    return c;
  }

  c.vandiver = vandiver_status(p, par.witnesses);
  Condition2Result c2 = condition2(p, par.level, par.deg, par.precision());
  c.per_index = c2.per_index;
  c.condition2 = c2.value;

  bool unique_index = c.index_of_irregularity == 1;
  bool vandiver_ok = unique_index && c.vandiver[0].status == VandiverStatus::HOLDS;
  c.condition1 = vandiver_ok;

  if (!unique_index) {
    c.verdict = Verdict::NOT_COVERED;
  } else if (!vandiver_ok) {
    c.verdict = Verdict::INDETERMINATE;
    c.notes = "vandiver witness budget exhausted";
  } else if (c.condition2 == Tristate::YES) {
    c.verdict = Verdict::CERTIFIED_BY_THEOREM_1;
  } else if (c.condition2 == Tristate::NO) {
    c.verdict = Verdict::NOT_COVERED;
  } else {
    c.verdict = Verdict::INDETERMINATE;
    c.notes = "characteristic series precision exhausted";
  }
  return c;
}

// ---------------------------------------------------------------------
// Serialization.  Key order is fixed and emitted through ordered_json so
// identical inputs give byte-identical certificates.  Residues mod p are
// decimal strings; an index whose c is undefined gets null.

inline nlohmann::ordered_json certificate_json(const PrimeCertificate& c) {
  nlohmann::ordered_json j;
  j["p"] = c.p;
  j["regular"] = c.regular;
  j["irregular_indices"] = c.irregular_indices;
  j["index_of_irregularity"] = c.index_of_irregularity;
  nlohmann::ordered_json vd = nlohmann::ordered_json::array();
  for (const auto& v : c.vandiver) {
    nlohmann::ordered_json e;
    e["k"] = v.k;
    e["status"] = to_string(v.status);
    if (v.status == VandiverStatus::HOLDS)
      e["witness"] = v.witnesses.back().q;
    else
      e["witness"] = nullptr;
    vd.push_back(std::move(e));
  }
  j["vandiver"] = std::move(vd);
  nlohmann::ordered_json lam = nlohmann::ordered_json::array(), mu = nlohmann::ordered_json::array(),
                         cmp = nlohmann::ordered_json::array();
  for (const auto& ix : c.per_index) {
    lam.push_back(ix.lambda);
    mu.push_back(ix.mu);
    if (ix.c_defined)
      cmp.push_back(std::to_string(ix.c_mod_p));
    else
      cmp.push_back(nullptr);
  }
  j["lambda"] = std::move(lam);
  j["mu"] = std::move(mu);
  j["c_mod_p"] = std::move(cmp);
  j["condition1"] = c.condition1;
  j["condition2"] = to_string(c.condition2);
  j["verdict"] = to_string(c.verdict);
  j["tool_version"] = c.tool_version;
  nlohmann::ordered_json par;
  par["level"] = c.params.level;
  par["precision"] = c.params.precision();
  par["degree_cap"] = c.params.deg;
  par["witnesses"] = c.params.witnesses;
  j["parameters"] = std::move(par);
  j["notes"] = c.notes;
  return j;
}

inline std::string certificate_text(const PrimeCertificate& c) { return certificate_json(c).dump(2) + "\n"; }

inline Tristate tristate_from_string(const std::string& s) {
  if (s == "true") return Tristate::YES;
  if (s == "false") return Tristate::NO;
  if (s == "indeterminate") return Tristate::INDETERMINATE;
  throw std::invalid_argument("certificate: bad tristate '" + s + "'");
}

inline Verdict verdict_from_string(const std::string& s) {
  if (s == "REGULAR_TRIVIAL") return Verdict::REGULAR_TRIVIAL;
  if (s == "CERTIFIED_BY_THEOREM_1") return Verdict::CERTIFIED_BY_THEOREM_1;
  if (s == "NOT_COVERED") return Verdict::NOT_COVERED;
  if (s == "INDETERMINATE") return Verdict::INDETERMINATE;
  throw std::invalid_argument("certificate: bad verdict '" + s + "'");
}

inline PrimeCertificate certificate_from_json(const nlohmann::ordered_json& j) {
  PrimeCertificate c;
  c.p = j.at("p").get<u64>();
  c.regular = j.at("regular").get<bool>();
  c.irregular_indices = j.at("irregular_indices").get<std::vector<u64>>();
  c.index_of_irregularity = j.at("index_of_irregularity").get<std::size_t>();
  for (const auto& e : j.at("vandiver")) {
    VandiverOutcome v;
    v.p = c.p;
    v.k = e.at("k").get<u64>();
    std::string st = e.at("status").get<std::string>();
    if (st != "HOLDS" && st != "INCONCLUSIVE") throw std::invalid_argument("certificate: bad vandiver status");
    v.status = st == "HOLDS" ? VandiverStatus::HOLDS : VandiverStatus::INCONCLUSIVE;
    if (!e.at("witness").is_null()) v.witnesses.push_back({e.at("witness").get<u64>(), true});
    c.vandiver.push_back(std::move(v));
  }
  const auto& lam = j.at("lambda");
  const auto& mu = j.at("mu");
  const auto& cmp = j.at("c_mod_p");
  if (lam.size() != mu.size() || lam.size() != cmp.size())
    throw std::invalid_argument("certificate: per-index arrays disagree");
  for (std::size_t i = 0; i < lam.size(); ++i) {
    Condition2Index ix;
    ix.k = i < c.irregular_indices.size() ? c.irregular_indices[i] : 0;
    ix.lambda = lam[i].get<unsigned>();
    ix.mu = mu[i].get<unsigned>();
    if (!cmp[i].is_null()) {
      ix.c_defined = true;
      ix.c_mod_p = std::stoull(cmp[i].get<std::string>());
    }
    c.per_index.push_back(ix);
  }
  c.condition1 = j.at("condition1").get<bool>();
  c.condition2 = tristate_from_string(j.at("condition2").get<std::string>());
  c.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  c.tool_version = j.at("tool_version").get<std::string>();
  const auto& par = j.at("parameters");
  c.params.level = par.at("level").get<unsigned>();
  c.params.prec = par.at("precision").get<unsigned>();
  c.params.deg = par.at("degree_cap").get<unsigned>();
  c.params.witnesses = par.at("witnesses").get<unsigned>();
  c.notes = j.at("notes").get<std::string>();
  return c;
}

// ---------------------------------------------------------------------
// CSV.  Multi-valued cells join with ';'; an undefined residue is '-';
// cells that do not apply to a regular prime stay empty.

inline std::string scan_csv_header() {
  return "p,regular,index_of_irregularity,irregular_indices,vandiver,lambda,mu,c_mod_p,condition1,condition2,verdict";
}

namespace detail {

template <class T, class F>
std::string join_cells(const std::vector<T>& xs, F render) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ';';
    out += render(xs[i]);
  }
  return out;
}

}  // namespace detail

inline std::string certificate_csv_row(const PrimeCertificate& c) {
  std::string row = std::to_string(c.p);
  row += c.regular ? ",true," : ",false,";
  row += std::to_string(c.index_of_irregularity);
  row += ',';
  row += detail::join_cells(c.irregular_indices, [](u64 k) { return std::to_string(k); });
  row += ',';
  row += detail::join_cells(c.vandiver, [](const VandiverOutcome& v) { return std::string(to_string(v.status)); });
  row += ',';
  row += detail::join_cells(c.per_index, [](const Condition2Index& ix) { return std::to_string(ix.lambda); });
  row += ',';
  row += detail::join_cells(c.per_index, [](const Condition2Index& ix) { return std::to_string(ix.mu); });
  row += ',';
  row += detail::join_cells(c.per_index, [](const Condition2Index& ix) {
    return ix.c_defined ? std::to_string(ix.c_mod_p) : std::string("-");
  });
  row += c.condition1 ? ",true," : ",false,";
  row += to_string(c.condition2);
  row += ',';
  row += to_string(c.verdict);
  return row;
}

}  // namespace pnull
