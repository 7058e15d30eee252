#pragma once

#include <mpfr.h>
#include <gmpxx.h>

#include <string>
#include <utility>

namespace modwind {

// Owning wrapper around an mpfr_t with an explicit bit precision.
// Binary operations round to the larger of the two operand precisions.
class Real {
 public:
  explicit Real(mpfr_prec_t bits = 128) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }

  Real(long value, mpfr_prec_t bits) : Real(bits) { mpfr_set_si(v_, value, MPFR_RNDN); }

  Real(const mpz_class& value, mpfr_prec_t bits) : Real(bits) {
    mpfr_set_z(v_, value.get_mpz_t(), MPFR_RNDN);
  }

  Real(const mpq_class& value, mpfr_prec_t bits) : Real(bits) {
    mpfr_set_q(v_, value.get_mpq_t(), MPFR_RNDN);
  }

  Real(const Real& other) : Real(mpfr_get_prec(other.v_)) { mpfr_set(v_, other.v_, MPFR_RNDN); }

  Real(Real&& other) noexcept : Real(mpfr_get_prec(other.v_)) { mpfr_swap(v_, other.v_); }

  Real& operator=(const Real& other) {
    if (this != &other) {
      mpfr_set_prec(v_, mpfr_get_prec(other.v_));
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }

  Real& operator=(Real&& other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }

  ~Real() { mpfr_clear(v_); }

  mpfr_prec_t bits() const { return mpfr_get_prec(v_); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long double to_long_double() const { return mpfr_get_ld(v_, MPFR_RNDN); }

  // Decimal rendering with the given number of significant digits.
  std::string str(int digits = 30) const {
    char* raw = nullptr;
    mpfr_asprintf(&raw, "%.*Rg", digits, v_);
    std::string out(raw);
    mpfr_free_str(raw);
    return out;
  }

  mpfr_srcptr get() const { return v_; }
  mpfr_ptr get() { return v_; }

  friend Real operator+(const Real& x, const Real& y) { return binary(x, y, mpfr_add); }
  friend Real operator-(const Real& x, const Real& y) { return binary(x, y, mpfr_sub); }
  friend Real operator*(const Real& x, const Real& y) { return binary(x, y, mpfr_mul); }
  friend Real operator/(const Real& x, const Real& y) { return binary(x, y, mpfr_div); }

  Real& operator+=(const Real& y) { return *this = *this + y; }

  friend Real sqrt(const Real& x) { return unary(x, mpfr_sqrt); }
  friend Real log(const Real& x) { return unary(x, mpfr_log); }
  friend Real abs(const Real& x) { return unary(x, mpfr_abs); }

  friend int compare(const Real& x, const Real& y) { return mpfr_cmp(x.v_, y.v_); }
  friend bool operator<(const Real& x, const Real& y) { return compare(x, y) < 0; }
  friend bool operator>(const Real& x, const Real& y) { return compare(x, y) > 0; }

 private:
  template <typename Op>
  static Real binary(const Real& x, const Real& y, Op op) {
    Real out(std::max(x.bits(), y.bits()));
    op(out.v_, x.v_, y.v_, MPFR_RNDN);
    return out;
  }

  template <typename Op>
  static Real unary(const Real& x, Op op) {
    Real out(x.bits());
    op(out.v_, x.v_, MPFR_RNDN);
    return out;
  }

  mpfr_t v_;
};

}  // namespace modwind
