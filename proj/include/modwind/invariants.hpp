#pragma once

// Winding number, period/word/geometric length of a necklace, and the
// variance constants of the three normalizations.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>

#include "modwind/cfcore.hpp"
#include "modwind/error.hpp"
#include "modwind/necklace.hpp"
#include "modwind/real.hpp"

namespace modwind {

// a1 - a2 + a3 - ... - an
inline int winding(std::span<const Digit> word) {
  require_even_length(word, "winding");
  int psi = 0;
  for (std::size_t i = 0; i < word.size(); i += 2) psi += int(word[i]) - int(word[i + 1]);
  return psi;
}

inline int word_length(std::span<const Digit> word) {
  require_even_length(word, "word_length");
  int sum = 0;
  for (Digit d : word) sum += d;
  return 2 * sum;
}

// 2 * sum_{j=1..n} log(T^j of the periodic value), each term from the exact
// fixed point of the rotated word's matrix.
inline Real geodesic_length_logsum(std::span<const Digit> word, mpfr_prec_t bits = kDefaultPrecision) {
  require_even_length(word, "geodesic_length_logsum");
  const mpfr_prec_t work = bits + 16;
  Real sum(work);
  for (std::size_t j = 1; j <= word.size(); ++j) {
    const Word shifted = gauss_shift(word, j);
    sum += log(fixed_points(matrix_of_word(shifted)).first.value(work));
  }
  Real out(bits);
  mpfr_mul_ui(out.get(), sum.get(), 2, MPFR_RNDN);
  return out;
}

// 2 * log(lambda) for the larger eigenvalue of the word's matrix.
inline Real geodesic_length_eigen(std::span<const Digit> word, mpfr_prec_t bits = kDefaultPrecision) {
  require_even_length(word, "geodesic_length_eigen");
  Real lambda = eigenvalue_max(matrix_of_word(word), bits + 16);
  Real out(bits);
  mpfr_log(out.get(), lambda.get(), MPFR_RNDN);
  mpfr_mul_ui(out.get(), out.get(), 2, MPFR_RNDN);
  return out;
}

namespace detail {

inline bool mul_add(std::uint64_t x, std::uint64_t m, std::uint64_t y, std::uint64_t& out) {
  std::uint64_t prod;
  return !__builtin_mul_overflow(x, m, &prod) && !__builtin_add_overflow(prod, y, &out);
}

}  // namespace detail

// Log-sum route on exact 64-bit matrices. The matrix of rotation j+1 is the
// conjugate (x 1; 1 0)^-1 M (x 1; 1 0) of rotation j, so all rotations share
// one trace and one square root. Returns nullopt when an entry would not fit.
inline std::optional<double> geodesic_length_fast(std::span<const Digit> word) {
  std::uint64_t a = 1, b = 0, c = 0, d = 1;
  for (Digit x : word) {
    std::uint64_t na, nc;
    if (!detail::mul_add(a, x, b, na) || !detail::mul_add(c, x, d, nc)) return std::nullopt;
    b = a;
    d = c;
    a = na;
    c = nc;
  }
  std::uint64_t trace;
  if (__builtin_add_overflow(a, d, &trace)) return std::nullopt;
  const long double t = static_cast<long double>(trace);
  const long double root = std::sqrt((t - 2.0L) * (t + 2.0L));
  long double sum = 0.0L;
  for (Digit x : word) {
    // (x 1; 1 0)^-1 = (0 1; 1 -x); every intermediate is a nonnegative entry
    // of a shorter product
    const std::uint64_t low_left = a - x * c;
    const std::uint64_t low_right = b - x * d;
    std::uint64_t na, nc;
    if (!detail::mul_add(c, x, d, na) || !detail::mul_add(low_left, x, low_right, nc)) return std::nullopt;
    b = c;
    d = low_left;
    a = na;
    c = nc;
    const long double w = (static_cast<long double>(a) - static_cast<long double>(d) + root) /
                          (2.0L * static_cast<long double>(c));
    sum += std::log(w);
  }
  return static_cast<double>(2.0L * sum);
}

struct GeodesicInvariants {
  int psi = 0;
  int lp = 0;
  int lw = 0;
  double lg = 0.0;
};

struct GeodesicRecord {
  Necklace necklace;
  int psi = 0;
  int lp = 0;
  int lw = 0;
  double lg = 0.0;

  GeodesicInvariants invariants() const { return {psi, lp, lw, lg}; }
};

inline GeodesicInvariants compute_invariants(std::span<const Digit> rep) {
  require_even_length(rep, "compute_invariants");
  GeodesicInvariants out;
  out.psi = winding(rep);
  out.lp = static_cast<int>(rep.size());
  out.lw = word_length(rep);
  if (auto fast = geodesic_length_fast(rep)) {
    out.lg = *fast;
  } else {
    out.lg = geodesic_length_logsum(rep).to_double();
  }
  return out;
}

// Bulk invariant computation with a deterministic sampled cross-check of
// the log-sum length against 2*log(lambda) at kDefaultPrecision.
class RecordBuilder {
 public:
  explicit RecordBuilder(std::uint64_t cross_check_every = 1024) : every_(cross_check_every) {}

  GeodesicInvariants operator()(std::span<const Digit> rep) {
    GeodesicInvariants inv = compute_invariants(rep);
    if (every_ != 0 && built_ % every_ == 0) {
      // fast path and per-shift log sum, both against 2 log(lambda)
      const double eigen = geodesic_length_eigen(rep).to_double();
      const double logsum = geodesic_length_logsum(rep).to_double();
      const double rel = std::max(std::abs(inv.lg - eigen), std::abs(logsum - eigen)) / eigen;
      ++checked_;
      if (rel > max_relative_error_) max_relative_error_ = rel;
    }
    ++built_;
    return inv;
  }

  std::uint64_t built() const { return built_; }
  std::uint64_t checked() const { return checked_; }
  double max_relative_error() const { return max_relative_error_; }

  void merge(const RecordBuilder& other) {
    built_ += other.built_;
    checked_ += other.checked_;
    max_relative_error_ = std::max(max_relative_error_, other.max_relative_error_);
  }

 private:
  std::uint64_t every_;
  std::uint64_t built_ = 0;
  std::uint64_t checked_ = 0;
  double max_relative_error_ = 0.0;
};

inline GeodesicRecord build_record(const Necklace& necklace) {
  const GeodesicInvariants inv = compute_invariants(necklace.rep());
#ifndef NDEBUG
  const double eigen = geodesic_length_eigen(necklace.rep()).to_double();
  if (std::abs(inv.lg - eigen) > 1e-9 * eigen) throw std::logic_error("build_record: length routes disagree");
#endif
  return {necklace, inv.psi, inv.lp, inv.lw, inv.lg};
}

inline Rational sigma_p2(int A) {
  if (A <= 1) throw DomainError("sigma_p2: A must be > 1");
  Rational out(A * A - 1, 12);
  out.canonicalize();
  return out;
}

inline Rational sigma_w2(int A) {
  if (A <= 1) throw DomainError("sigma_w2: A must be > 1");
  Rational out(A - 1, 12);
  out.canonicalize();
  return out;
}

// F_1 = F_2 = 1.
inline double fibonacci(int k) {
  if (k < 1) throw DomainError("fibonacci: k must be >= 1");
  double prev = 0.0, cur = 1.0;
  for (int i = 1; i < k; ++i) {
    const double next = prev + cur;
    prev = cur;
    cur = next;
  }
  return cur;
}

inline double fibonacci_bound(int k) {
  const double f = fibonacci(k);
  return 2.0 / (f * f);
}

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

  friend bool operator==(const CompensatedSum&, const CompensatedSum&) = default;

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr double kDefaultCkBudget = 1e8;

// c_k = (2 / A^k) * sum over [A]^k of log([a1, ..., ak]).
inline double ck_constant(int A, int k, double budget = kDefaultCkBudget) {
  require_bound(A);
  if (k < 1) throw DomainError("ck_constant: k must be >= 1");
  const double words = std::pow(double(A), k);
  if (words > budget) throw ResourceError("ck_constant: A^k exceeds the enumeration budget");

  // the all-A continuant bounds every numerator and denominator
  {
    std::uint64_t prev = 1, cur = static_cast<std::uint64_t>(A);
    for (int i = 1; i < k; ++i) {
      std::uint64_t next;
      if (!detail::mul_add(cur, A, prev, next)) throw ResourceError("ck_constant: k too large for 64-bit convergents");
      prev = cur;
      cur = next;
    }
  }

  // h/g convergent recurrences, offset by two: h[0..1] = (0, 1), g[0..1] = (1, 0)
  std::vector<std::uint64_t> h(k + 2), g(k + 2);
  std::vector<int> digits(k, 1);
  h[0] = 0;
  h[1] = 1;
  g[0] = 1;
  g[1] = 0;
  const int prefix = k - 1;
  int dirty = 0;
  CompensatedSum sum;
  while (true) {
    for (int i = dirty; i < prefix; ++i) {
      h[i + 2] = digits[i] * h[i + 1] + h[i];
      g[i + 2] = digits[i] * g[i + 1] + g[i];
    }
    for (int last = 1; last <= A; ++last) {
      const std::uint64_t num = last * h[prefix + 1] + h[prefix];
      const std::uint64_t den = last * g[prefix + 1] + g[prefix];
      sum.add(std::log(double(num) / double(den)));
    }
    int i = prefix;
    while (i > 0 && digits[i - 1] == A) digits[--i] = 1;
    if (i == 0) break;
    ++digits[i - 1];
    dirty = i - 1;
  }
  return 2.0 * sum.value() / words;
}

struct ChatEstimate {
  int A = 0;
  int k = 0;
  double c_k = 0.0;
  double error_bound = 0.0;  // 2 / F_k^2
  double sigma_g2 = 0.0;     // sigma_p^2 / c_k
  double sigma_g2_low = 0.0;
  double sigma_g2_high = 0.0;  // +inf when c_k <= error_bound
};

inline ChatEstimate chat_estimate_at_depth(int A, int k, double budget = kDefaultCkBudget) {
  const double ck = ck_constant(A, k, budget);
  const double bound = fibonacci_bound(k);
  const double sp2 = sigma_p2(A).get_d();
  ChatEstimate out{A, k, ck, bound, sp2 / ck, sp2 / (ck + bound), 0.0};
  out.sigma_g2_high = ck > bound ? sp2 / (ck - bound) : std::numeric_limits<double>::infinity();
  return out;
}

// Deepest k whose enumeration fits in the budget.
inline int max_ck_depth(int A, double budget = kDefaultCkBudget) {
  require_bound(A);
  int best = 1;
  while (std::pow(double(A), best + 1) <= budget) ++best;
  return best;
}

// Smallest depth k with 2/F_k^2 <= tol.
inline ChatEstimate chat_estimate(int A, double tol, double budget = kDefaultCkBudget) {
  require_bound(A);
  if (!(tol > 0.0)) throw DomainError("chat_estimate: tol must be > 0");
  int k = 1;
  while (fibonacci_bound(k) > tol) ++k;
  if (std::pow(double(A), k) > budget) {
    throw ResourceError("chat_estimate: depth " + std::to_string(k) + " exceeds the enumeration budget",
                        fibonacci_bound(max_ck_depth(A, budget)));
  }
  return chat_estimate_at_depth(A, k, budget);
}

}  // namespace modwind
