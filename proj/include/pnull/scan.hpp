#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pnull/certificate.hpp"

// Range scans: one certificate per odd prime up to the bound, computed by
// a small work-stealing pool but always reported in prime order.

namespace pnull {

struct ScanSummary {
  u64 p_max = 0;
  std::size_t total = 0;  // odd primes scanned
  std::size_t regular_count = 0;
  std::size_t irregular_count = 0;
  std::size_t condition1_count = 0;
  std::size_t certified_count = 0;
  std::size_t indeterminate_count = 0;

  double regular_fraction() const { return total ? double(regular_count) / double(total) : 0.0; }
  double condition1_fraction() const { return total ? double(condition1_count) / double(total) : 0.0; }
  double certified_fraction() const { return total ? double(certified_count) / double(total) : 0.0; }
};

struct ScanResult {
  std::vector<PrimeCertificate> certificates;  // ascending p
  ScanSummary summary;
};

inline ScanResult scan_range(u64 p_max, const CheckParams& par = {}, unsigned jobs = 1) {
  if (p_max < 5) throw std::invalid_argument("scan_range: bound must be at least 5");
  if (jobs == 0) jobs = 1;
  std::vector<u64> primes = odd_primes_upto(p_max);

  ScanResult res;
  res.certificates.resize(primes.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= primes.size() || failed.load()) return;
      try {
        res.certificates[i] = make_certificate(primes[i], par);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  if (jobs <= 1 || primes.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    unsigned count = jobs;
    if (count > primes.size()) count = unsigned(primes.size());
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  res.summary.p_max = p_max;
  res.summary.total = primes.size();
  for (const auto& c : res.certificates) {
    if (c.regular)
      ++res.summary.regular_count;
    else
      ++res.summary.irregular_count;
    if (c.condition1) ++res.summary.condition1_count;
    if (c.verdict == Verdict::CERTIFIED_BY_THEOREM_1) ++res.summary.certified_count;
    if (c.verdict == Verdict::INDETERMINATE) ++res.summary.indeterminate_count;
  }
  return res;
}

inline nlohmann::ordered_json scan_summary_json(const ScanSummary& s) {
  nlohmann::ordered_json j;
  j["p_max"] = s.p_max;
  j["total"] = s.total;
  j["regular_count"] = s.regular_count;
  j["irregular_count"] = s.irregular_count;
  j["condition1_count"] = s.condition1_count;
  j["certified_count"] = s.certified_count;
  j["indeterminate_count"] = s.indeterminate_count;
  j["regular_fraction"] = s.regular_fraction();
  j["condition1_fraction"] = s.condition1_fraction();
  j["certified_fraction"] = s.certified_fraction();
  return j;
}

}  // namespace pnull
