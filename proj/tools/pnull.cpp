#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pnull/cache.hpp"
#include "pnull/presentation_json.hpp"
#include "pnull/scan.hpp"

// Command-line front end: per-prime certificates, range scans with a
// persistent cache, and cohomology reports for presented modules.

namespace {

struct Flags {
  pnull::CheckParams params;
  unsigned jobs = 1;
  std::string format;
  std::string cache_dir = ".pnull_cache";
};

void add_param_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--level", f.params.level, "Galois level n")->check(CLI::Range(1u, 30u));
  cmd->add_option("--prec", f.params.prec, "coefficient precision N (0 = level + 1)")->check(CLI::Range(0u, 62u));
  cmd->add_option("--deg", f.params.deg, "series degree cap D")->check(CLI::Range(2u, 200u));
  cmd->add_option("--witnesses", f.params.witnesses, "Vandiver witness budget")->check(CLI::Range(1u, 1000u));
}

void add_format_flag(CLI::App* cmd, Flags& f, const char* dflt) {
  f.format = dflt;
  cmd->add_option("--format", f.format, std::string("output format (default ") + dflt + ")")
      ->check(CLI::IsMember({"json", "csv"}));
}

void add_cache_flag(CLI::App* cmd, Flags& f) {
  cmd->add_option("--cache-dir", f.cache_dir, "certificate cache directory (default .pnull_cache)");
}

int run_check(pnull::u64 p, const Flags& f) {
  pnull::PrimeCertificate cert = pnull::make_certificate(p, f.params);
  if (f.format == "csv")
    std::cout << pnull::scan_csv_header() << '\n' << pnull::certificate_csv_row(cert) << '\n';
  else
    std::cout << pnull::certificate_text(cert);
  pnull::cache_store(f.cache_dir, cert);
  return 0;
}

int run_scan(pnull::u64 p_max, const Flags& f) {
  pnull::ScanResult res = pnull::scan_range(p_max, f.params, f.jobs);
  if (f.format == "json") {
    nlohmann::ordered_json j;
    j["summary"] = pnull::scan_summary_json(res.summary);
    nlohmann::ordered_json certs = nlohmann::ordered_json::array();
    for (const auto& c : res.certificates) certs.push_back(pnull::certificate_json(c));
    j["certificates"] = std::move(certs);
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << pnull::scan_csv_header() << '\n';
    for (const auto& c : res.certificates) std::cout << pnull::certificate_csv_row(c) << '\n';
    const auto& s = res.summary;
    std::printf("# p_max=%llu total=%zu regular=%zu irregular=%zu condition1=%zu certified=%zu indeterminate=%zu\n",
                (unsigned long long)s.p_max, s.total, s.regular_count, s.irregular_count, s.condition1_count,
                s.certified_count, s.indeterminate_count);
    std::printf("# regular_fraction=%.6f condition1_fraction=%.6f certified_fraction=%.6f\n", s.regular_fraction(),
                s.condition1_fraction(), s.certified_fraction());
  }
  for (const auto& c : res.certificates) pnull::cache_store(f.cache_dir, c);
  return 0;
}

int run_koszul(const std::string& file, unsigned level, const Flags& f) {
  pnull::ModulePresentation X = pnull::load_presentation_file(file);
  pnull::KoszulReport rep = pnull::koszul_report(X, level);
  if (f.format == "csv")
    std::cout << pnull::koszul_csv(rep);
  else
    std::cout << pnull::koszul_text(rep);
  return 0;
}

int run_cache(const std::string& subcmd, const Flags& f) {
  if (subcmd == "list") {
    std::cout << "p,level,precision,degree_cap,witnesses,file\n";
    for (const auto& e : pnull::cache_list(f.cache_dir)) {
      std::cout << e.p << ',' << e.params.level << ',' << e.params.precision() << ',' << e.params.deg << ','
                << e.params.witnesses << ',' << e.file.filename().string() << '\n';
    }
    return 0;
  }
  if (subcmd == "verify") {
    pnull::CacheVerifyReport rep = pnull::cache_verify(f.cache_dir);
    std::printf("entries=%zu checked=%zu matched=%zu mismatched=%zu corrupt=%zu\n", rep.entries, rep.checked,
                rep.matched, rep.mismatched.size(), rep.corrupt.size());
    for (const auto& m : rep.mismatched) std::printf("mismatch: %s\n", m.c_str());
    for (const auto& c : rep.corrupt) std::printf("corrupt: %s\n", c.c_str());
    return rep.clean() ? 0 : 1;
  }
  if (subcmd == "clear") {
    std::printf("removed=%zu\n", pnull::cache_clear(f.cache_dir));
    return 0;
  }
  throw CLI::ValidationError("cache", "unknown subcommand '" + subcmd + "' (expected list, verify, or clear)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prime certificates and Iwasawa-module cohomology reports"};
  app.require_subcommand(1);

  Flags check_f, scan_f, koszul_f, cache_f;
  pnull::u64 check_p = 0, scan_max = 0;
  unsigned koszul_level = 1;
  std::string koszul_file, cache_sub;

  CLI::App* check = app.add_subcommand("check", "certificate for one odd prime");
  check->add_option("p", check_p, "odd prime to check")->required();
  add_param_flags(check, check_f);
  add_format_flag(check, check_f, "json");
  add_cache_flag(check, check_f);

  CLI::App* scan = app.add_subcommand("scan", "certificates for every odd prime up to a bound");
  scan->add_option("p_max", scan_max, "scan bound (at least 5)")->required();
  add_param_flags(scan, scan_f);
  add_format_flag(scan, scan_f, "csv");
  add_cache_flag(scan, scan_f);
  scan->add_option("--jobs", scan_f.jobs, "worker threads")->check(CLI::Range(1u, 256u));

  CLI::App* koszul = app.add_subcommand("koszul", "cohomology report for a presented module");
  koszul->add_option("file", koszul_file, "presentation JSON file")->required();
  koszul->add_option("--level", koszul_level, "tower level n")->check(CLI::Range(0u, 30u));
  add_format_flag(koszul, koszul_f, "json");

  CLI::App* cache = app.add_subcommand("cache", "cache maintenance: list, verify, clear");
  cache->add_option("subcmd", cache_sub, "list | verify | clear")->required();
  add_cache_flag(cache, cache_f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return run_check(check_p, check_f);
    if (scan->parsed()) return run_scan(scan_max, scan_f);
    if (koszul->parsed()) return run_koszul(koszul_file, koszul_level, koszul_f);
    return run_cache(cache_sub, cache_f);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pnull: %s\n", e.what());
    return 1;
  }
}
