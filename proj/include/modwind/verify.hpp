#pragma once

// Oracle suite behind the `verify` command: brute-force counting and
// classification, dual geometric-length routes, exact moment identities
// and shard determinism.

#include <gmpxx.h>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "modwind/cfcore.hpp"
#include "modwind/invariants.hpp"
#include "modwind/io.hpp"
#include "modwind/necklace.hpp"
#include "modwind/pipeline.hpp"
#include "modwind/stats.hpp"

namespace modwind {

struct VerifyHooks {
  // Primitivity rule under test; replaced by negative-control tests.
  std::function<bool(std::span<const Digit>)> is_primitive = [](std::span<const Digit> w) {
    return modwind::is_primitive(w);
  };
};

struct VerifyCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct VerifyReport {
  int A = 0;
  int N = 0;
  std::vector<VerifyCheck> checks;
  std::map<int, mpz_class> min_period_counts;  // f(n)

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

namespace oracle {

inline std::string word_string(std::span<const Digit> w) {
  std::string s = "(";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(int(w[i]));
  return s + ")";
}

// Smallest r > 0 with rotate(w, r) == w.
inline std::size_t rotation_period(std::span<const Digit> w) {
  const std::size_t n = w.size();
  for (std::size_t r = 1; r < n; ++r) {
    bool same = true;
    for (std::size_t i = 0; i < n && same; ++i) same = w[i] == w[(i + r) % n];
    if (same) return r;
  }
  return n;
}

inline bool primitive_by_definition(std::span<const Digit> w) {
  const std::size_t n = w.size(), mp = rotation_period(w);
  return mp == n || (2 * mp == n && mp % 2 == 1);
}

// Calls f(word) for every word of [A]^n.
template <typename F>
void for_each_word(int A, std::size_t n, F&& f) {
  Word w(n, 1);
  while (true) {
    f(std::span<const Digit>(w));
    auto it = w.rbegin();
    for (; it != w.rend() && *it == A; ++it) *it = 1;
    if (it == w.rend()) return;
    ++*it;
  }
}

}  // namespace oracle

inline VerifyReport run_verification(int A, int N, const VerifyHooks& hooks = {}, unsigned threads = 1,
                                     double brute_budget = 2e7) {
  require_bound(A);
  require_even_bound(N);
  VerifyReport report{A, N, {}, {}};
  auto fits = [&](int n) { return std::pow(double(A), n) <= brute_budget; };

  {
    VerifyCheck check{"min_period_counts", true, ""};
    for (int n = 1; n <= N; ++n) {
      const mpz_class f = count_min_period(A, n);
      report.min_period_counts[n] = f;
      mpz_class divisor_sum = 0;
      for (int k = 1; k <= n; ++k) {
        if (n % k == 0) divisor_sum += count_min_period(A, k);
      }
      if (divisor_sum != ipow(A, n)) {
        check.passed = false;
        check.detail += "sum_{k|" + std::to_string(n) + "} f(k) != A^n; ";
      }
      if (!fits(n)) continue;
      mpz_class brute = 0;
      oracle::for_each_word(A, n, [&](std::span<const Digit> w) {
        if (oracle::rotation_period(w) == w.size()) ++brute;
      });
      if (brute != f) {
        check.passed = false;
        check.detail += "f(" + std::to_string(n) + ") = " + f.get_str() + " but scan gives " + brute.get_str() + "; ";
      }
    }
    report.checks.push_back(check);
  }

  std::map<std::size_t, std::set<Word>> enumerated;
  enumerate(A, N, [&](std::span<const Digit> rep) { enumerated[rep.size()].insert(Word(rep.begin(), rep.end())); });

  {
    VerifyCheck check{"necklace_classes", true, ""};
    for (int n = 2; n <= N; n += 2) {
      if (!fits(n)) continue;
      std::set<Word> classes;
      mpz_class primitive_under_test = 0;
      oracle::for_each_word(A, n, [&](std::span<const Digit> w) {
        if (hooks.is_primitive(w)) ++primitive_under_test;
        if (!oracle::primitive_by_definition(w)) return;
        Word best(w.begin(), w.end());
        for (int s = 2; s < n; s += 2) {
          Word rotated(n);
          for (int i = 0; i < n; ++i) rotated[i] = w[(i + s) % n];
          best = std::min(best, rotated);
        }
        classes.insert(best);
      });
      const mpz_class pn = count_Pn(A, n);
      if (pn != classes.size()) {
        check.passed = false;
        check.detail += "|P_" + std::to_string(n) + "| = " + pn.get_str() + " but brute force finds " +
                        std::to_string(classes.size()) + "; ";
      }
      if (pn * (n / 2) != primitive_under_test) {
        check.passed = false;
        check.detail += "n = " + std::to_string(n) + ": " + primitive_under_test.get_str() +
                        " words pass the primitivity rule, expected " + mpz_class(pn * (n / 2)).get_str() + "; ";
      }
      if (enumerated[n] != classes) {
        check.passed = false;
        check.detail += "enumerated representatives differ from brute-force classes at n = " + std::to_string(n) + "; ";
      }
    }
    report.checks.push_back(check);
  }

  {
    VerifyCheck check{"pi_exact", true, ""};
    std::size_t visited = 0;
    for (const auto& [n, reps] : enumerated) visited += reps.size();
    if (pi_exact(A, N) != visited) {
      check.passed = false;
      check.detail = "enumeration visits " + std::to_string(visited) + " necklaces, closed form gives " +
                     pi_exact(A, N).get_str();
    }
    report.checks.push_back(check);
  }

  {
    VerifyCheck check{"dual_geometric_length", true, ""};
    std::size_t total = 0;
    for (const auto& [n, reps] : enumerated) total += reps.size();
    const std::size_t stride = total > 200000 ? total / 200000 + 1 : 1;
    double worst = 0.0;
    std::size_t index = 0;
    for (const auto& [n, reps] : enumerated) {
      for (const auto& rep : reps) {
        const bool full = index++ % stride == 0;
        const double eigen = geodesic_length_eigen(rep).to_double();
        const double fast = compute_invariants(rep).lg;
        double rel = std::abs(fast - eigen) / eigen;
        if (full) rel = std::max(rel, std::abs(geodesic_length_logsum(rep).to_double() - eigen) / eigen);
        if (rel > worst) worst = rel;
        if (rel >= 1e-9 && check.passed) {
          check.passed = false;
          check.detail = "counterexample " + oracle::word_string(rep) + " ";
        }
      }
    }
    check.detail += "max relative error " + format_number(worst);
    report.checks.push_back(check);
  }

  {
    VerifyCheck check{"winding_moments", true, ""};
    for (int n = 2; n <= N; n += 2) {
      if (!fits(n)) continue;
      mpz_class first = 0, second = 0;
      oracle::for_each_word(A, n, [&](std::span<const Digit> w) {
        const long psi = winding(w);
        first += psi;
        second += psi * psi;
      });
      const mpz_class expected = ipow(A, n) * n * (A * A - 1) / 12;
      if (first != 0 || second != expected) {
        check.passed = false;
        check.detail += "n = " + std::to_string(n) + ": sum psi = " + first.get_str() + ", sum psi^2 = " +
                        second.get_str() + " (expected " + expected.get_str() + "); ";
      }
    }
    report.checks.push_back(check);
  }

  {
    VerifyCheck check{"even_shift_invariance", true, ""};
    for (int n = 2; n <= std::min(N, 8); n += 2) {
      if (!fits(n)) continue;
      oracle::for_each_word(A, n, [&](std::span<const Digit> w) {
        const GeodesicInvariants base = compute_invariants(w);
        for (int s = 2; s < n && check.passed; s += 2) {
          const Word shifted = gauss_shift(w, s);
          const GeodesicInvariants other = compute_invariants(shifted);
          if (other.psi != base.psi || other.lw != base.lw || std::abs(other.lg - base.lg) > 1e-10 * base.lg) {
            check.passed = false;
            check.detail = "counterexample " + oracle::word_string(w) + " shifted by " + std::to_string(s);
          }
        }
      });
    }
    report.checks.push_back(check);
  }

  {
    VerifyCheck check{"shard_determinism", true, ""};
    if (enumeration_work(A, N) <= brute_budget) {
      RunOptions opts;
      opts.A = A;
      opts.N = N;
      opts.threads = threads;
      opts.hist = {64, 4.0};
      opts.cross_check_every = 0;
      std::vector<RunResult> runs;
      for (std::size_t depth : {0, 1, 2}) {
        opts.shard_depth = depth;
        runs.push_back(run_exhaustive(opts));
      }
      for (std::size_t i = 1; i < runs.size(); ++i) {
        const auto& x = runs[0].counts;
        const auto& y = runs[i].counts;
        if (x.cells().size() != y.cells().size() || x.bins() != y.bins() || x.total() != y.total()) {
          check.passed = false;
        } else {
          const auto cx = x.cells(), cy = y.cells();
          for (std::size_t j = 0; j < cx.size(); ++j) {
            if (cx[j].n != cy[j].n || cx[j].psi != cy[j].psi || cx[j].lw != cy[j].lw || cx[j].count != cy[j].count) {
              check.passed = false;
            }
          }
        }
        if (!check.passed) check.detail = "tables differ between shard depth 0 and " + std::to_string(i);
      }
    } else {
      check.detail = "skipped: beyond brute-force budget";
    }
    report.checks.push_back(check);
  }

  return report;
}

}  // namespace modwind
