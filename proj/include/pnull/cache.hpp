#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnull/certificate.hpp"

// Certificate cache: one JSON file per (prime, parameters) pair,
// content-addressed through the filename.  Writes go through a temp file
// and a rename so readers never see a partial certificate, and an
// existing entry is never silently replaced.

namespace pnull {

struct CacheEntry {
  u64 p = 0;
  CheckParams params;
  std::filesystem::path file;
};

inline std::string cache_filename(u64 p, const CheckParams& par) {
  std::ostringstream os;
  os << "cert_p" << p << "_n" << par.level << "_N" << par.precision() << "_D" << par.deg << "_W" << par.witnesses
     << ".json";
  return os.str();
}

// Inverse of cache_filename; anything else in the directory is ignored.
inline std::optional<CacheEntry> parse_cache_filename(const std::filesystem::path& file) {
  std::string name = file.filename().string();
  unsigned long long p = 0, n = 0, N = 0, D = 0, W = 0;
  int used = 0;
  if (std::sscanf(name.c_str(), "cert_p%llu_n%llu_N%llu_D%llu_W%llu.jso%n", &p, &n, &N, &D, &W, &used) != 5)
    return std::nullopt;
  if (name.substr(used) != "n") return std::nullopt;
  CacheEntry e;
  e.p = p;
  e.params.level = unsigned(n);
  e.params.prec = unsigned(N);
  e.params.deg = unsigned(D);
  e.params.witnesses = unsigned(W);
  e.file = file;
  return e;
}

inline std::optional<std::string> cache_load_text(const std::filesystem::path& dir, u64 p, const CheckParams& par) {
  std::ifstream in(dir / cache_filename(p, par), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Atomic, immutable store.  Re-storing identical bytes is a no-op;
// storing different bytes for an existing entry is an error, because a
// certificate that changes under fixed parameters means either a version
// skew or a corrupted file, and both deserve a loud failure.
inline void cache_store(const std::filesystem::path& dir, const PrimeCertificate& c) {
  std::filesystem::create_directories(dir);
  std::string text = certificate_text(c);
  std::filesystem::path target = dir / cache_filename(c.p, c.params);
  if (std::filesystem::exists(target)) {
    auto existing = cache_load_text(dir, c.p, c.params);
    if (existing && *existing == text) return;
    throw std::runtime_error("cache_store: " + target.filename().string() +
                             " already exists with different content; refusing to overwrite");
  }
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cache_store: cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, target);
}

inline std::vector<CacheEntry> cache_list(const std::filesystem::path& dir) {
  std::vector<CacheEntry> out;
  if (!std::filesystem::exists(dir)) return out;
  for (const auto& de : std::filesystem::directory_iterator(dir)) {
    if (!de.is_regular_file()) continue;
    if (auto e = parse_cache_filename(de.path())) out.push_back(std::move(*e));
  }
  std::sort(out.begin(), out.end(), [](const CacheEntry& a, const CacheEntry& b) {
    if (a.p != b.p) return a.p < b.p;
    return a.file.filename().string() < b.file.filename().string();
  });
  return out;
}

struct CacheVerifyReport {
  std::size_t entries = 0;
  std::size_t checked = 0;  // entries recomputed from scratch
  std::size_t matched = 0;
  std::vector<std::string> mismatched;
  std::vector<std::string> corrupt;

  bool clean() const { return mismatched.empty() && corrupt.empty(); }
};

namespace detail {

// FNV-1a over the sorted entry names: the sample depends only on the
// cache contents, not on directory iteration order or the clock.
inline std::uint64_t cache_sample_seed(const std::vector<CacheEntry>& entries) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& e : entries) {
    std::string name = e.file.filename().string();
    for (unsigned char ch : name) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    h ^= '\n';
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

// Every entry is parsed and sanity-checked; a deterministic `fraction`
// sample (at least one entry) is recomputed from scratch and byte-diffed
// against the stored certificate.
inline CacheVerifyReport cache_verify(const std::filesystem::path& dir, double fraction = 0.05) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("cache_verify: fraction must be in (0, 1]");
  CacheVerifyReport rep;
  std::vector<CacheEntry> entries = cache_list(dir);
  rep.entries = entries.size();
  if (entries.empty()) return rep;

  std::vector<std::size_t> sound;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const CacheEntry& e = entries[i];
    auto text = cache_load_text(dir, e.p, e.params);
    if (!text) {
      rep.corrupt.push_back(e.file.filename().string() + ": unreadable");
      continue;
    }
    try {
      PrimeCertificate c = certificate_from_json(nlohmann::ordered_json::parse(*text));
      if (c.p != e.p || !(c.params == e.params))
        throw std::invalid_argument("certificate does not match its filename");
      sound.push_back(i);
    } catch (const std::exception& ex) {
      rep.corrupt.push_back(e.file.filename().string() + ": " + ex.what());
    }
  }

  std::size_t want = std::size_t(fraction * double(sound.size()));
  if (want == 0 && !sound.empty()) want = 1;
  std::mt19937 rng(std::uint32_t(detail::cache_sample_seed(entries)));
  std::shuffle(sound.begin(), sound.end(), rng);
  sound.resize(want);
  std::sort(sound.begin(), sound.end());

  for (std::size_t i : sound) {
    const CacheEntry& e = entries[i];
    ++rep.checked;
    std::string fresh = certificate_text(make_certificate(e.p, e.params));
    if (fresh == *cache_load_text(dir, e.p, e.params))
      ++rep.matched;
    else
      rep.mismatched.push_back(e.file.filename().string());
  }
  return rep;
}

// Removes cache entries only; foreign files in the directory survive.
inline std::size_t cache_clear(const std::filesystem::path& dir) {
  std::size_t removed = 0;
  for (const auto& e : cache_list(dir)) removed += std::filesystem::remove(e.file) ? 1 : 0;
  return removed;
}

}  // namespace pnull
