#pragma once
// Shared plumbing: error taxonomy, log-space arithmetic, deterministic
// formatting, and a chunk-ordered parallel loop.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fakedist {

// Mathematical precondition failures (parabolic model, divergent kernel,
// indeterminate tail, degenerate capacitor, non-convergence). CLI exit 2.
struct math_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: schema, ranges, missing files, invalid profiles. CLI exit 3.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double NEG_INF = -std::numeric_limits<double>::infinity();
inline constexpr double POS_INF = std::numeric_limits<double>::infinity();

// log(e^a + e^b), safe for -inf arguments.
inline double logaddexp(double a, double b) {
  if (a == NEG_INF) return b;
  if (b == NEG_INF) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

// log(e^a - e^b) for a > b; returns -inf when a == b.
inline double logsubexp(double a, double b) {
  if (b == NEG_INF) return a;
  if (a < b) throw math_error("logsubexp: negative difference");
  if (a == b) return NEG_INF;
  return a + std::log1p(-std::exp(b - a));
}

// Fixed 15-significant-digit formatting for every floating value we emit.
inline std::string fmt_g15(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

inline int env_threads() {
  const char* s = std::getenv("FAKEDIST_THREADS");
  if (!s) return 1;
  int n = std::atoi(s);
  return n > 0 ? n : 1;
}

// Runs fn(i) for i in [0,n). Work is split into fixed chunks regardless of
// thread count; per-chunk results must be combined by the caller in chunk
// order if a reduction is needed, keeping output independent of threads.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         int threads = 0) {
  if (threads <= 0) threads = env_threads();
  if (threads <= 1 || n < 2048) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t nchunks = 64;
  std::size_t chunk = (n + nchunks - 1) / nchunks;
  std::vector<std::thread> pool;
  std::size_t next = 0;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s < n; s += chunk) starts.push_back(s);
  (void)next;
  std::size_t per = (starts.size() + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    std::size_t lo = t * per, hi = std::min(starts.size(), lo + per);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::size_t c = lo; c < hi; ++c) {
        std::size_t e = std::min(n, starts[c] + chunk);
        for (std::size_t i = starts[c]; i < e; ++i) fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

// One audited estimate: identity audits pass when |lhs-rhs| <= tol,
// inequality audits when lhs <= rhs + tol.
struct EstimateAudit {
  std::string name;
  double lhs = 0, rhs = 0, tol = 0;
  bool pass = false;
  bool hard = true;        // hard failures gate exit codes; soft ones warn
  bool identity = false;   // identity vs one-sided inequality
  std::string location;    // worst vertex/cell/level description

  static EstimateAudit inequality(std::string name, double lhs, double rhs,
                                  double tol, std::string loc = "") {
    EstimateAudit a;
    a.name = std::move(name);
    a.lhs = lhs;
    a.rhs = rhs;
    a.tol = tol;
    a.pass = lhs <= rhs + tol;
    a.location = std::move(loc);
    return a;
  }
  static EstimateAudit identity_check(std::string name, double lhs, double rhs,
                                      double tol, std::string loc = "") {
    EstimateAudit a;
    a.name = std::move(name);
    a.lhs = lhs;
    a.rhs = rhs;
    a.tol = tol;
    a.identity = true;
    a.pass = std::fabs(lhs - rhs) <= tol;
    a.location = std::move(loc);
    return a;
  }
};

}  // namespace fakedist
