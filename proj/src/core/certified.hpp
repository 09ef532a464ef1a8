#pragma once

#include <mpfr.h>

#include <string>

#include "rational.hpp"

namespace soe {

// A real number enclosed by directed-rounding bounds.  Every comparison
// against an exact rational (or another enclosure) is certified: it answers
// true only when the bounds prove it, so verdicts never depend on digits
// inside the radius.
class CertifiedReal {
 public:
  static constexpr mpfr_prec_t kPrec = 256;

  CertifiedReal();                       // exactly zero
  explicit CertifiedReal(const Rat& q);  // exact endpoints
  CertifiedReal(const CertifiedReal& o);
  CertifiedReal(CertifiedReal&& o) noexcept;
  CertifiedReal& operator=(CertifiedReal o);
  ~CertifiedReal();

  CertifiedReal operator+(const CertifiedReal& o) const;
  CertifiedReal operator-(const CertifiedReal& o) const;
  CertifiedReal operator*(const CertifiedReal& o) const;
  CertifiedReal operator-() const;

  // Natural log of a positive rational.
  static CertifiedReal log_rat(const Rat& q);
  static CertifiedReal log2();
  // -q ln q with the 0 log 0 = 0 convention; requires 0 <= q.
  static CertifiedReal minus_x_log_x(const Rat& q);

  bool certainly_le(const CertifiedReal& o) const;  // hi <= o.lo
  bool certainly_lt(const CertifiedReal& o) const;
  bool certainly_le(const Rat& q) const;
  bool certainly_lt(const Rat& q) const;
  bool certainly_ge(const Rat& q) const;
  bool certainly_gt(const CertifiedReal& o) const { return o.certainly_lt(*this); }

  double lower_double() const;  // rounded down
  double upper_double() const;  // rounded up
  // "0.6931471... +/- 2.1e-70"
  std::string to_string(int digits = 50) const;

 private:
  mpfr_t lo_, hi_;
  friend CertifiedReal mul_rat(const Rat&, const CertifiedReal&);
};

// q * v for q >= 0 (used for rational mass times a log enclosure).
CertifiedReal mul_rat(const Rat& q, const CertifiedReal& v);

}  // namespace soe
