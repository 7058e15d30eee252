#pragma once

// Primitive words modulo even cyclic shifts ("necklaces"): primitivity,
// canonical representatives, exact and asymptotic counts, and a
// prefix-shardable enumerator.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "modwind/cfcore.hpp"
#include "modwind/error.hpp"
#include "modwind/real.hpp"

namespace modwind {

inline void require_bound(int A) {
  if (A <= 1) throw DomainError("digit bound A must be > 1");
  if (A > 255) throw DomainError("digit bound A must be <= 255");
}

inline void require_even_bound(int N) {
  if (N < 2 || N % 2 != 0) throw DomainError("N must be even and >= 2");
}

inline std::size_t minimal_period(std::span<const Digit> word) {
  if (word.empty()) throw DomainError("minimal_period: empty word");
  const std::size_t n = word.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool periodic = true;
    for (std::size_t i = p; i < n && periodic; ++i) periodic = word[i] == word[i - p];
    if (periodic) return p;
  }
  return n;
}

// mp == n, or mp == n/2 when n/2 is odd.
inline bool is_primitive(std::span<const Digit> word) {
  require_even_length(word, "is_primitive");
  const std::size_t n = word.size();
  const std::size_t mp = minimal_period(word);
  return mp == n || (mp == n / 2 && (n / 2) % 2 == 1);
}

// True iff the word is <= each of its even rotations.
inline bool is_even_shift_minimal(std::span<const Digit> word) {
  const std::size_t n = word.size();
  for (std::size_t s = 2; s < n; s += 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const Digit rotated = word[(i + s) % n];
      if (rotated < word[i]) return false;
      if (rotated > word[i]) break;
    }
  }
  return true;
}

inline Word canonical_even_shift(std::span<const Digit> word) {
  require_even_length(word, "canonical_even_shift");
  Word best(word.begin(), word.end());
  for (std::size_t s = 2; s < word.size(); s += 2) {
    Word candidate = gauss_shift(word, s);
    if (candidate < best) best = std::move(candidate);
  }
  return best;
}

// Canonical representative of a primitive even-length word class.
class Necklace {
 public:
  static Necklace from_word(std::span<const Digit> word) {
    require_even_length(word, "Necklace");
    if (!is_primitive(word)) throw DomainError("Necklace: word is not primitive");
    return Necklace(canonical_even_shift(word));
  }

  const Word& rep() const { return rep_; }
  std::size_t length() const { return rep_.size(); }

  friend bool operator==(const Necklace&, const Necklace&) = default;
  friend auto operator<=>(const Necklace&, const Necklace&) = default;

 private:
  explicit Necklace(Word rep) : rep_(std::move(rep)) {}
  Word rep_;
};

inline int mobius(std::uint64_t k) {
  if (k < 1) throw DomainError("mobius: k must be >= 1");
  int sign = 1;
  for (std::uint64_t p = 2; p * p <= k; ++p) {
    if (k % p != 0) continue;
    k /= p;
    if (k % p == 0) return 0;
    sign = -sign;
  }
  if (k > 1) sign = -sign;
  return sign;
}

inline mpz_class ipow(int base, unsigned long exponent) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(base), exponent);
  return out;
}

// Number of words in [A]^n with minimal period exactly n.
inline mpz_class count_min_period(int A, std::uint64_t n) {
  require_bound(A);
  if (n < 1) throw DomainError("count_min_period: n must be >= 1");
  mpz_class total = 0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    if (n % k != 0) continue;
    const int mu = mobius(k);
    if (mu != 0) total += mu * ipow(A, n / k);
  }
  return total;
}

// |P_n|: each class of a period-n word has n/2 members, and so does each
// class of a word with odd minimal period n/2.
inline mpz_class count_Pn(int A, std::uint64_t n) {
  require_bound(A);
  if (n < 2 || n % 2 != 0) throw DomainError("count_Pn: n must be even and >= 2");
  mpz_class primitive_words = count_min_period(A, n);
  if ((n / 2) % 2 == 1) primitive_words += count_min_period(A, n / 2);
  return primitive_words / (n / 2);
}

inline mpz_class pi_exact(int A, int N) {
  require_bound(A);
  require_even_bound(N);
  mpz_class total = 0;
  for (int n = 2; n <= N; n += 2) total += count_Pn(A, n);
  return total;
}

struct CountReport {
  int A = 0;
  int N = 0;
  mpz_class exact;
  double asymptotic = 0.0;
  double relative_error = 0.0;
};

// c_A * A^N / N with c_A = 2A^2 / (A^2 - 1).
inline CountReport pi_asymptotic(int A, int N, const mpz_class& exact) {
  require_bound(A);
  require_even_bound(N);
  constexpr mpfr_prec_t bits = 128;
  Rational c_over_n(2 * A * A, (A * A - 1) * mpz_class(N));
  c_over_n.canonicalize();
  Real asym = Real(c_over_n, bits) * Real(ipow(A, N), bits);
  Real rel = abs(Real(exact, bits) - asym) / asym;
  return {A, N, exact, asym.to_double(), rel.to_double()};
}

inline CountReport pi_asymptotic(int A, int N) { return pi_asymptotic(A, N, pi_exact(A, N)); }

// Digit prefix that a canonical representative must start with. Necklaces
// shorter than the prefix belong to no shard of that depth.
struct Shard {
  Word prefix;
};

// All prefixes of the given depth, in lexicographic order.
inline std::vector<Shard> shard_cover(int A, std::size_t depth) {
  require_bound(A);
  std::vector<Shard> out;
  Word prefix(depth, 1);
  while (true) {
    out.push_back({prefix});
    std::size_t i = depth;
    while (i > 0 && prefix[i - 1] == A) prefix[--i] = 1;
    if (i == 0) break;
    ++prefix[i - 1];
  }
  return out;
}

// Calls visitor(std::span<const Digit>) once per necklace of every even
// length n <= N whose canonical representative starts with shard.prefix.
// Lengths ascend; within a length, representatives are visited in
// lexicographic order. The span is only valid during the call.
template <typename Visitor>
void enumerate(int A, int N, const Shard& shard, Visitor&& visitor) {
  require_bound(A);
  require_even_bound(N);
  check_digits(shard.prefix, A);
  const std::size_t fixed = shard.prefix.size();
  const Digit top = static_cast<Digit>(A);
  Word word;
  for (std::size_t n = 2; n <= static_cast<std::size_t>(N); n += 2) {
    if (fixed > n) continue;
    word.assign(n, 1);
    std::copy(shard.prefix.begin(), shard.prefix.end(), word.begin());
    const std::span<const Digit> view(word);
    while (true) {
      if (is_even_shift_minimal(view) && is_primitive(view)) visitor(view);
      std::size_t i = n;
      while (i > fixed && word[i - 1] == top) word[--i] = 1;
      if (i == fixed) break;
      ++word[i - 1];
    }
  }
}

template <typename Visitor>
void enumerate(int A, int N, Visitor&& visitor) {
  enumerate(A, N, Shard{}, std::forward<Visitor>(visitor));
}

// Uniform over P_n: every class has exactly n/2 primitive preimages, so
// rejection sampling of uniform words is exact.
template <typename Rng>
Necklace sample_uniform(int A, std::size_t n, Rng& rng) {
  require_bound(A);
  if (n < 2 || n % 2 != 0) throw DomainError("sample_uniform: n must be even and >= 2");
  std::uniform_int_distribution<int> digit(1, A);
  Word word(n);
  while (true) {
    for (auto& d : word) d = static_cast<Digit>(digit(rng));
    if (is_primitive(word)) return Necklace::from_word(word);
  }
}

inline Necklace sample_uniform(int A, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_uniform(A, n, rng);
}

}  // namespace modwind
