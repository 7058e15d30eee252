#pragma once

// Continued fractions with bounded positive partial quotients, the integer
// matrices they generate, and the quadratic surds fixed by those matrices.
//
// Convention: [a1, a2, ..., an] = a1 + 1/(a2 + 1/(... + 1/an)) with every
// digit >= 1, so every value is >= 1 and the digit matrix of a is (a 1; 1 0).

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modwind/error.hpp"
#include "modwind/real.hpp"

namespace modwind {

using Digit = std::uint8_t;
using Word = std::vector<Digit>;
using Rational = mpq_class;

inline constexpr mpfr_prec_t kDefaultPrecision = 128;

// Throws unless every digit lies in [1, bound].
inline void check_digits(std::span<const Digit> word, int bound) {
  for (Digit d : word) {
    if (d < 1 || d > bound) {
      throw DomainError("digit " + std::to_string(int(d)) + " outside [1, " + std::to_string(bound) + "]");
    }
  }
}

inline void require_even_length(std::span<const Digit> word, const char* who) {
  if (word.empty() || word.size() % 2 != 0) {
    throw DomainError(std::string(who) + ": word length must be even and positive");
  }
}

struct MatrixZ {
  mpz_class a{1}, b{0}, c{0}, d{1};

  mpz_class trace() const { return a + d; }
  mpz_class determinant() const { return a * d - b * c; }

  friend MatrixZ operator*(const MatrixZ& x, const MatrixZ& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  friend bool operator==(const MatrixZ& x, const MatrixZ& y) {
    return x.a == y.a && x.b == y.b && x.c == y.c && x.d == y.d;
  }
};

// (a1 1; 1 0)(a2 1; 1 0)...(an 1; 1 0).
inline MatrixZ matrix_of_word(std::span<const Digit> word) {
  if (word.empty()) throw DomainError("matrix_of_word: empty word");
  MatrixZ m;
  for (Digit digit : word) {
    if (digit == 0) throw DomainError("matrix_of_word: digits must be >= 1");
    // right-multiplying by (x 1; 1 0) maps columns (u, v) to (x*u + v, u)
    mpz_class na = m.a * digit + m.b;
    mpz_class nc = m.c * digit + m.d;
    m.b = std::move(m.a);
    m.d = std::move(m.c);
    m.a = std::move(na);
    m.c = std::move(nc);
  }
  return m;
}

inline Rational cf_eval_finite(std::span<const Digit> word) {
  if (word.empty()) throw DomainError("cf_eval_finite: empty word");
  MatrixZ m = matrix_of_word(word);
  Rational value(m.a, m.c);
  value.canonicalize();
  return value;
}

// Value of the first k digits.
inline Rational convergent(std::span<const Digit> word, std::size_t k) {
  if (k < 1 || k > word.size()) throw DomainError("convergent: k out of range");
  return cf_eval_finite(word.first(k));
}

// Euclidean expansion of a rational >= 1. The last digit is >= 2 unless the
// value is exactly 1. Digits larger than 255 are rejected.
inline Word cf_expand(const Rational& value) {
  if (value < 1) throw DomainError("cf_expand: value must be >= 1");
  Word digits;
  mpz_class num = value.get_num();
  mpz_class den = value.get_den();
  while (den != 0) {
    mpz_class quotient = num / den;
    if (quotient > 255) throw DomainError("cf_expand: partial quotient exceeds digit range");
    digits.push_back(static_cast<Digit>(quotient.get_ui()));
    mpz_class rest = num - quotient * den;
    num = std::move(den);
    den = std::move(rest);
  }
  return digits;
}

// Cyclic left rotation by j (mod n); the digit expansion of T^j applied to
// the periodic value.
inline Word gauss_shift(std::span<const Digit> word, std::size_t j) {
  if (word.empty()) throw DomainError("gauss_shift: empty word");
  const std::size_t n = word.size();
  j %= n;
  Word out;
  out.reserve(n);
  out.insert(out.end(), word.begin() + j, word.end());
  out.insert(out.end(), word.begin(), word.begin() + j);
  return out;
}

// (p + r*sqrt(D)) / q.
class QuadraticSurd {
 public:
  QuadraticSurd(mpz_class p, mpz_class r, mpz_class D, mpz_class q)
      : p_(std::move(p)), r_(std::move(r)), D_(std::move(D)), q_(std::move(q)) {
    if (q_ == 0) throw DomainError("QuadraticSurd: zero denominator");
    if (D_ < 0) throw DomainError("QuadraticSurd: negative radicand");
    canonicalize();
  }

  const mpz_class& p() const { return p_; }
  const mpz_class& r() const { return r_; }
  const mpz_class& D() const { return D_; }
  const mpz_class& q() const { return q_; }

  // value = rational_part() + irrational_part() * sqrt(D())
  Rational rational_part() const {
    Rational x(p_, q_);
    x.canonicalize();
    return x;
  }
  Rational irrational_part() const {
    Rational y(r_, q_);
    y.canonicalize();
    return y;
  }

  Real value(mpfr_prec_t bits = kDefaultPrecision) const {
    Real root = sqrt(Real(D_, bits + 16));
    Real num = Real(p_, bits + 16) + Real(r_, bits + 16) * root;
    Real out(bits);
    mpfr_div_z(out.get(), num.get(), q_.get_mpz_t(), MPFR_RNDN);
    return out;
  }

  std::string str() const {
    return "(" + p_.get_str() + (r_ < 0 ? "-" : "+") + mpz_class(abs(r_)).get_str() + "*sqrt(" + D_.get_str() +
           "))/" + q_.get_str();
  }

  // Decided exactly without requiring square-free radicands: for irrational
  // roots the representation x + y*sqrt(D) is unique once x and y*sqrt(D)
  // are separated, and y1*sqrt(D1) == y2*sqrt(D2) iff signs agree and
  // y1^2*D1 == y2^2*D2.
  friend bool operator==(const QuadraticSurd& u, const QuadraticSurd& v) {
    if (u.rational_part() != v.rational_part()) return false;
    Rational yu = u.irrational_part(), yv = v.irrational_part();
    if (sgn(yu) != sgn(yv)) return false;
    return Rational(yu * yu * u.D_) == Rational(yv * yv * v.D_);
  }

 private:
  void canonicalize() {
    if (r_ == 0 || D_ == 0) {
      r_ = 0;
      D_ = 0;
    } else if (mpz_perfect_square_p(D_.get_mpz_t())) {
      mpz_class root;
      mpz_sqrt(root.get_mpz_t(), D_.get_mpz_t());
      p_ += r_ * root;
      r_ = 0;
      D_ = 0;
    } else {
      // pull small square factors out of the radicand
      static constexpr unsigned long kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                                  43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
      for (unsigned long f : kPrimes) {
        const unsigned long f2 = f * f;
        if (D_ < f2) break;
        while (mpz_divisible_ui_p(D_.get_mpz_t(), f2)) {
          mpz_divexact_ui(D_.get_mpz_t(), D_.get_mpz_t(), f2);
          r_ *= f;
        }
      }
    }
    if (q_ < 0) {
      p_ = -p_;
      r_ = -r_;
      q_ = -q_;
    }
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), p_.get_mpz_t(), r_.get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), q_.get_mpz_t());
    if (g > 1) {
      p_ /= g;
      r_ /= g;
      q_ /= g;
    }
  }

  mpz_class p_, r_, D_, q_;
};

// Roots of c*w^2 + (d - a)*w - b = 0, larger root first.
inline std::pair<QuadraticSurd, QuadraticSurd> fixed_points(const MatrixZ& m) {
  const mpz_class t = m.trace();
  if (abs(t) <= 2) throw DomainError("fixed_points: matrix is not hyperbolic (|tr| <= 2)");
  if (m.c == 0) throw DomainError("fixed_points: c = 0");
  const mpz_class disc = t * t - 4;
  QuadraticSurd plus(m.a - m.d, 1, disc, 2 * m.c);
  QuadraticSurd minus(m.a - m.d, -1, disc, 2 * m.c);
  if (m.c > 0) return {plus, minus};
  return {minus, plus};
}

// Purely periodic value [overline(a1..an)], the attracting fixed point of
// matrix_of_word. Odd periods must be doubled by the caller.
inline Real periodic_value(std::span<const Digit> word, mpfr_prec_t bits = kDefaultPrecision) {
  require_even_length(word, "periodic_value");
  return fixed_points(matrix_of_word(word)).first.value(bits);
}

// (t + sqrt(t^2 - 4)) / 2 for the trace t > 2.
inline Real eigenvalue_max(const MatrixZ& m, mpfr_prec_t bits = kDefaultPrecision) {
  const mpz_class t = m.trace();
  if (t <= 2) throw DomainError("eigenvalue_max: requires trace > 2");
  const mpfr_prec_t work = bits + 16;
  Real root = sqrt(Real(mpz_class(t * t - 4), work));
  Real sum = Real(t, work) + root;
  Real out(bits);
  mpfr_div_ui(out.get(), sum.get(), 2, MPFR_RNDN);
  return out;
}

}  // namespace modwind
