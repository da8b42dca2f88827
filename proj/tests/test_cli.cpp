#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pnull/cache.hpp"
#include "pnull/presentation_json.hpp"
#include "pnull/scan.hpp"

using namespace pnull;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pnull_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("certificate for 37 certifies through both conditions") {
  PrimeCertificate c = make_certificate(37);
  CHECK_FALSE(c.regular);
  CHECK(c.irregular_indices == std::vector<u64>{32});
  CHECK(c.index_of_irregularity == 1);
  REQUIRE(c.vandiver.size() == 1);
  CHECK(c.vandiver[0].status == VandiverStatus::HOLDS);
  REQUIRE(c.per_index.size() == 1);
  CHECK(c.per_index[0].mu == 0);
  CHECK(c.per_index[0].lambda == 1);
  CHECK(c.per_index[0].c_defined);
  CHECK(c.per_index[0].c_mod_p == 13);
  CHECK(c.condition1);
  CHECK(c.condition2 == Tristate::YES);
  CHECK(c.verdict == Verdict::CERTIFIED_BY_THEOREM_1);
  CHECK(c.notes.empty());
}

TEST_CASE("regular primes short-circuit to the trivial verdict") {
  PrimeCertificate c = make_certificate(7);
  CHECK(c.regular);
  CHECK(c.irregular_indices.empty());
  CHECK(c.vandiver.empty());
  CHECK(c.per_index.empty());
  CHECK_FALSE(c.condition1);
  CHECK(c.condition2 == Tristate::YES);  // empty conjunction
  CHECK(c.verdict == Verdict::REGULAR_TRIVIAL);

  CHECK(make_certificate(3).verdict == Verdict::REGULAR_TRIVIAL);
  CHECK_THROWS_AS(make_certificate(4), std::invalid_argument);
  CHECK_THROWS_AS(make_certificate(2), std::invalid_argument);
}

TEST_CASE("index of irregularity two is excluded, not indeterminate") {
  PrimeCertificate c = make_certificate(157);
  CHECK(c.index_of_irregularity == 2);
  CHECK(c.irregular_indices == std::vector<u64>{62, 110});
  CHECK_FALSE(c.condition1);
  CHECK(c.verdict == Verdict::NOT_COVERED);
}

TEST_CASE("certificate JSON is byte deterministic and round-trips") {
  const std::string golden =
      "{\n"
      "  \"p\": 7,\n"
      "  \"regular\": true,\n"
      "  \"irregular_indices\": [],\n"
      "  \"index_of_irregularity\": 0,\n"
      "  \"vandiver\": [],\n"
      "  \"lambda\": [],\n"
      "  \"mu\": [],\n"
      "  \"c_mod_p\": [],\n"
      "  \"condition1\": false,\n"
      "  \"condition2\": \"true\",\n"
      "  \"verdict\": \"REGULAR_TRIVIAL\",\n"
      "  \"tool_version\": \"1.0.0\",\n"
      "  \"parameters\": {\n"
      "    \"level\": 1,\n"
      "    \"precision\": 2,\n"
      "    \"degree_cap\": 12,\n"
      "    \"witnesses\": 8\n"
      "  },\n"
      "  \"notes\": \"\"\n"
      "}\n";
  CHECK(certificate_text(make_certificate(7)) == golden);

  for (u64 p : {u64(37), u64(101), u64(157), u64(7)}) {
    std::string a = certificate_text(make_certificate(p));
    std::string b = certificate_text(make_certificate(p));
    CHECK(a == b);
    PrimeCertificate back = certificate_from_json(nlohmann::ordered_json::parse(a));
    CHECK(certificate_text(back) == a);
  }
}

TEST_CASE("certificate JSON spells residues as decimal strings") {
  nlohmann::ordered_json j = certificate_json(make_certificate(37));
  REQUIRE(j.at("c_mod_p").size() == 1);
  CHECK(j.at("c_mod_p")[0].is_string());
  CHECK(j.at("c_mod_p")[0].get<std::string>() == "13");
  CHECK(j.at("vandiver")[0].at("status").get<std::string>() == "HOLDS");
  CHECK(j.at("vandiver")[0].at("witness").is_number());
}

TEST_CASE("certificate CSV rows are frozen") {
  CHECK(scan_csv_header() ==
        "p,regular,index_of_irregularity,irregular_indices,vandiver,lambda,mu,c_mod_p,"
        "condition1,condition2,verdict");
  CHECK(certificate_csv_row(make_certificate(37)) ==
        "37,false,1,32,HOLDS,1,0,13,true,true,CERTIFIED_BY_THEOREM_1");
  CHECK(certificate_csv_row(make_certificate(7)) == "7,true,0,,,,,,false,true,REGULAR_TRIVIAL");
  CHECK(certificate_csv_row(make_certificate(157)) ==
        "157,false,2,62;110,HOLDS;HOLDS,1;1,0;0,136;121,false,true,NOT_COVERED");
}

TEST_CASE("scan to 150 certifies exactly the known seven") {
  ScanResult res = scan_range(150);
  std::vector<u64> certified;
  for (const auto& c : res.certificates) {
    if (c.verdict == Verdict::CERTIFIED_BY_THEOREM_1)
      certified.push_back(c.p);
    else
      CHECK(c.verdict == Verdict::REGULAR_TRIVIAL);
  }
  CHECK(certified == std::vector<u64>{37, 59, 67, 101, 103, 131, 149});
  CHECK(res.summary.total == 34);
  CHECK(res.summary.regular_count == 27);
  CHECK(res.summary.irregular_count == 7);
  CHECK(res.summary.condition1_count == 7);
  CHECK(res.summary.certified_count == 7);
  CHECK(res.summary.indeterminate_count == 0);

  for (std::size_t i = 1; i < res.certificates.size(); ++i)
    CHECK(res.certificates[i - 1].p < res.certificates[i].p);

  CHECK_THROWS_AS(scan_range(4), std::invalid_argument);
}

TEST_CASE("parallel scan output matches the serial one") {
  ScanResult serial = scan_range(200, {}, 1);
  ScanResult parallel = scan_range(200, {}, 4);
  REQUIRE(serial.certificates.size() == parallel.certificates.size());
  for (std::size_t i = 0; i < serial.certificates.size(); ++i)
    CHECK(certificate_text(serial.certificates[i]) == certificate_text(parallel.certificates[i]));
}

TEST_CASE("cache filenames encode the parameters and parse back") {
  CheckParams par;
  CHECK(cache_filename(37, par) == "cert_p37_n1_N2_D12_W8.json");
  par.level = 2;
  par.deg = 20;
  par.witnesses = 16;
  auto e = parse_cache_filename(fs::path("x") / cache_filename(101, par));
  REQUIRE(e.has_value());
  CHECK(e->p == 101);
  CHECK(e->params.level == 2);
  CHECK(e->params.precision() == 3);
  CHECK(e->params.deg == 20);
  CHECK(e->params.witnesses == 16);

  CHECK_FALSE(parse_cache_filename("cert_p37_n1_N2_D12_W8.json.tmp").has_value());
  CHECK_FALSE(parse_cache_filename("notes.txt").has_value());
  CHECK_FALSE(parse_cache_filename("cert_p37.json").has_value());
}

TEST_CASE("cache stores atomically and never overwrites silently") {
  TempDir dir;
  PrimeCertificate c = make_certificate(37);
  cache_store(dir.path, c);
  auto text = cache_load_text(dir.path, 37, c.params);
  REQUIRE(text.has_value());
  CHECK(*text == certificate_text(c));

  // identical re-store is a no-op
  cache_store(dir.path, c);

  // same key, different bytes: refused
  PrimeCertificate evil = c;
  evil.notes = "edited";
  CHECK_THROWS_AS(cache_store(dir.path, evil), std::runtime_error);
  CHECK(*cache_load_text(dir.path, 37, c.params) == certificate_text(c));

  // different parameters live side by side
  CheckParams par2;
  par2.witnesses = 4;
  cache_store(dir.path, make_certificate(37, par2));
  CHECK(cache_list(dir.path).size() == 2);
}

TEST_CASE("cache verify recomputes the sample and flags tampering") {
  TempDir dir;
  for (u64 p : {u64(7), u64(11), u64(37), u64(59)}) cache_store(dir.path, make_certificate(p));

  CacheVerifyReport rep = cache_verify(dir.path, 1.0);
  CHECK(rep.entries == 4);
  CHECK(rep.checked == 4);
  CHECK(rep.matched == 4);
  CHECK(rep.clean());

  // flip a residue inside a stored certificate
  fs::path target = dir.path / cache_filename(37, {});
  std::string text = *cache_load_text(dir.path, 37, {});
  auto pos = text.find("\"13\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 4, "\"14\"");
  write_file(target, text);

  rep = cache_verify(dir.path, 1.0);
  CHECK(rep.checked == 4);
  CHECK(rep.matched == 3);
  REQUIRE(rep.mismatched.size() == 1);
  CHECK(rep.mismatched[0] == "cert_p37_n1_N2_D12_W8.json");
  CHECK_FALSE(rep.clean());
}

TEST_CASE("cache verify reports corrupt entries without touching them") {
  TempDir dir;
  cache_store(dir.path, make_certificate(7));
  write_file(dir.path / cache_filename(11, {}), "this is not json\n");
  // a well-formed certificate filed under the wrong prime
  write_file(dir.path / cache_filename(41, {}), certificate_text(make_certificate(13)));

  CacheVerifyReport rep = cache_verify(dir.path, 1.0);
  CHECK(rep.entries == 3);
  CHECK(rep.corrupt.size() == 2);
  CHECK(rep.checked == 1);
  CHECK(rep.matched == 1);
  CHECK_FALSE(rep.clean());

  // the corrupt files are reported, not repaired or removed
  CHECK(*cache_load_text(dir.path, 11, {}) == "this is not json\n");
}

TEST_CASE("cache verify sampling is deterministic") {
  TempDir dir;
  for (u64 p : odd_primes_upto(60)) cache_store(dir.path, make_certificate(p));
  CacheVerifyReport a = cache_verify(dir.path, 0.2);
  CacheVerifyReport b = cache_verify(dir.path, 0.2);
  CHECK(a.entries == 16);
  CHECK(a.checked == 3);
  CHECK(a.checked == b.checked);
  CHECK(a.matched == b.matched);
  CHECK(a.clean());
  CHECK_THROWS_AS(cache_verify(dir.path, 0.0), std::invalid_argument);
}

TEST_CASE("cache clear removes entries and spares foreign files") {
  TempDir dir;
  cache_store(dir.path, make_certificate(7));
  cache_store(dir.path, make_certificate(11));
  write_file(dir.path / "notes.txt", "keep me\n");
  CHECK(cache_clear(dir.path) == 2);
  CHECK(cache_list(dir.path).empty());
  CHECK(fs::exists(dir.path / "notes.txt"));
  CHECK(cache_clear(dir.path) == 0);
}

TEST_CASE("presentation loader builds the module it reads") {
  nlohmann::json j = nlohmann::json::parse(R"({
    "p": 3, "precision": 3, "r": 2, "degree_cap": 6, "generators": 2,
    "relations": [
      [ [[3, 0, 0]], [[0, 0, 0]] ],
      [ [[1, 1, 0], [-3, 0, 0]], [[2, 0, 2]] ]
    ]
  })");
  ModulePresentation X = load_presentation(j);
  CHECK(X.ctx->p == 3);
  CHECK(X.ctx->N == 3);
  CHECK(X.ctx->r == 2);
  CHECK(X.ctx->D == 6);
  CHECK(X.generators == 2);
  REQUIRE(X.relations.size() == 2);
  CHECK(series_equal(X.relations[0][0], series_const(X.ctx, 3)));
  CHECK(series_is_zero(X.relations[0][1]));
  // T1 - 3 with the negative coefficient reduced mod 27
  Series t1m3 = series_sub(series_var(X.ctx, 1), series_const(X.ctx, 3));
  CHECK(series_equal(X.relations[1][0], t1m3));
  CHECK(series_equal(X.relations[1][1], series_monomial(X.ctx, {0, 2}, 2)));
}

TEST_CASE("presentation loader truncates terms past the degree cap") {
  nlohmann::json j = nlohmann::json::parse(R"({
    "p": 3, "precision": 2, "r": 1, "degree_cap": 4, "generators": 1,
    "relations": [ [ [[1, 1], [5, 7]] ] ]
  })");
  ModulePresentation X = load_presentation(j);
  CHECK(series_equal(X.relations[0][0], series_var(X.ctx, 1)));
}

TEST_CASE("presentation loader rejects malformed input") {
  auto parse = [](const char* text) { return load_presentation(nlohmann::json::parse(text)); };
  // missing field
  CHECK_THROWS_AS(parse(R"({"p": 3, "precision": 2, "r": 1, "degree_cap": 4})"), std::invalid_argument);
  // composite and even p
  CHECK_THROWS_AS(parse(R"({"p": 9, "precision": 2, "r": 1, "degree_cap": 4, "generators": 1, "relations": []})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"p": 2, "precision": 2, "r": 1, "degree_cap": 4, "generators": 1, "relations": []})"),
                  std::invalid_argument);
  // modulus overflow
  CHECK_THROWS_AS(parse(R"({"p": 3, "precision": 62, "r": 1, "degree_cap": 4, "generators": 1, "relations": []})"),
                  std::invalid_argument);
  // relation arity mismatch
  CHECK_THROWS_AS(parse(R"({"p": 3, "precision": 2, "r": 1, "degree_cap": 4, "generators": 2,
                            "relations": [ [ [[1, 0]] ] ]})"),
                  std::invalid_argument);
  // term with the wrong exponent count
  CHECK_THROWS_AS(parse(R"({"p": 3, "precision": 2, "r": 2, "degree_cap": 4, "generators": 1,
                            "relations": [ [ [[1, 1]] ] ]})"),
                  std::invalid_argument);
  // negative exponent
  CHECK_THROWS_AS(parse(R"({"p": 3, "precision": 2, "r": 1, "degree_cap": 4, "generators": 1,
                            "relations": [ [ [[1, -1]] ] ]})"),
                  std::invalid_argument);
  // non-integer entries
  CHECK_THROWS_AS(parse(R"({"p": 3, "precision": 2, "r": 1, "degree_cap": 4, "generators": 1,
                            "relations": [ [ [[1.5, 0]] ] ]})"),
                  std::invalid_argument);
}

TEST_CASE("presentation file loader reports unreadable and invalid files") {
  TempDir dir;
  CHECK_THROWS_AS(load_presentation_file(dir.path / "missing.json"), std::runtime_error);
  write_file(dir.path / "broken.json", "{ not json");
  CHECK_THROWS_AS(load_presentation_file(dir.path / "broken.json"), std::invalid_argument);
  write_file(dir.path / "ok.json",
             R"({"p": 3, "precision": 2, "r": 1, "degree_cap": 4, "generators": 1,
                 "relations": [ [ [[1, 1]] ] ]})");
  ModulePresentation X = load_presentation_file(dir.path / "ok.json");
  CHECK(X.generators == 1);
}

TEST_CASE("koszul report: residue field ranks and exactness") {
  Ctx cx = make_ctx(3, 3, 1, 8);
  ModulePresentation X = quotient_module(cx, {series_const(cx, 3), series_var(cx, 1)});
  KoszulReport rep = koszul_report(X, 1);
  REQUIRE(rep.full.size() == 3);
  REQUIRE(rep.primed.size() == 2);
  CHECK(rep.full[0].exps == std::vector<unsigned>{1});
  CHECK(rep.full[1].exps == std::vector<unsigned>{1, 1});
  CHECK(rep.full[2].exps == std::vector<unsigned>{1});
  for (const auto& g : rep.full) CHECK(g.ok);
  for (const auto& g : rep.primed) CHECK(g.ok);
  for (const auto& row : rep.sequence) {
    CHECK(row.computed);
    CHECK(row.ok);
  }
  CHECK(rep.pseudo_null == "pseudo_null");

  nlohmann::ordered_json j = koszul_json(rep);
  CHECK(j.at("full")[1].at("invariant_factors") == nlohmann::ordered_json::array({3, 3}));
  CHECK(j.at("full")[1].at("order_exp") == 2);
  CHECK(j.at("pseudo_null") == "pseudo_null");
}

TEST_CASE("koszul report: cyclic tower growth across levels") {
  Ctx cx = make_ctx(3, 4, 1, 4);
  ModulePresentation X = cyclic_module(series_sub(series_var(cx, 1), series_const(cx, 3)));
  for (unsigned n = 1; n <= 2; ++n) {
    KoszulReport rep = koszul_report(X, n);
    REQUIRE(rep.full.size() == 3);
    CHECK(rep.full[0].exps.empty());
    CHECK(rep.full[1].exps == std::vector<unsigned>{n});  // |H^1| = p^n
    CHECK(rep.full[2].exps == std::vector<unsigned>{n});
    for (const auto& row : rep.sequence) {
      CHECK(row.computed);
      CHECK(row.ok);
    }
    CHECK(rep.pseudo_null == "not_pseudo_null");
  }
}

TEST_CASE("koszul report: the zero module is trivial everywhere") {
  Ctx cx = make_ctx(3, 2, 1, 4);
  ModulePresentation X = free_module(cx, 0);
  KoszulReport rep = koszul_report(X, 1);
  for (const auto& g : rep.full) {
    CHECK(g.ok);
    CHECK(g.exps.empty());
  }
  for (const auto& g : rep.primed) {
    CHECK(g.ok);
    CHECK(g.exps.empty());
  }
  for (const auto& row : rep.sequence) {
    CHECK(row.computed);
    CHECK(row.ok);
    CHECK(row.middle_size == 1);
  }
  CHECK(rep.pseudo_null == "pseudo_null");
}

TEST_CASE("koszul report marks uncertified groups indeterminate") {
  // Lambda itself is not finite over the tower quotient, so the report
  // must surface failures instead of inventing numbers.
  Ctx cx = make_ctx(3, 3, 2, 6);
  ModulePresentation X = free_module(cx, 1);
  KoszulReport rep = koszul_report(X, 1);
  bool any_indet = false;
  for (const auto& g : rep.full)
    if (!g.ok) {
      any_indet = true;
      CHECK_FALSE(g.note.empty());
    }
  CHECK(any_indet);
  CHECK(rep.pseudo_null == "not_pseudo_null");

  std::string csv = koszul_csv(rep);
  CHECK(csv.find("indeterminate") != std::string::npos);
  CHECK(csv.rfind("section,i,status,", 0) == 0);
}
