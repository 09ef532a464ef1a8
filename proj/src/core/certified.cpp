#include "certified.hpp"

#include <algorithm>
#include <stdexcept>

namespace soe {

CertifiedReal::CertifiedReal() {
  mpfr_init2(lo_, kPrec);
  mpfr_init2(hi_, kPrec);
  mpfr_set_zero(lo_, 1);
  mpfr_set_zero(hi_, 1);
}

CertifiedReal::CertifiedReal(const Rat& q) : CertifiedReal() {
  mpfr_set_q(lo_, q.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(hi_, q.get_mpq_t(), MPFR_RNDU);
}

CertifiedReal::CertifiedReal(const CertifiedReal& o) : CertifiedReal() {
  mpfr_set(lo_, o.lo_, MPFR_RNDD);
  mpfr_set(hi_, o.hi_, MPFR_RNDU);
}

CertifiedReal::CertifiedReal(CertifiedReal&& o) noexcept : CertifiedReal() {
  mpfr_swap(lo_, o.lo_);
  mpfr_swap(hi_, o.hi_);
}

CertifiedReal& CertifiedReal::operator=(CertifiedReal o) {
  mpfr_swap(lo_, o.lo_);
  mpfr_swap(hi_, o.hi_);
  return *this;
}

CertifiedReal::~CertifiedReal() {
  mpfr_clear(lo_);
  mpfr_clear(hi_);
}

CertifiedReal CertifiedReal::operator+(const CertifiedReal& o) const {
  CertifiedReal r;
  mpfr_add(r.lo_, lo_, o.lo_, MPFR_RNDD);
  mpfr_add(r.hi_, hi_, o.hi_, MPFR_RNDU);
  return r;
}

CertifiedReal CertifiedReal::operator-(const CertifiedReal& o) const {
  CertifiedReal r;
  mpfr_sub(r.lo_, lo_, o.hi_, MPFR_RNDD);
  mpfr_sub(r.hi_, hi_, o.lo_, MPFR_RNDU);
  return r;
}

CertifiedReal CertifiedReal::operator-() const {
  CertifiedReal r;
  mpfr_neg(r.lo_, hi_, MPFR_RNDD);
  mpfr_neg(r.hi_, lo_, MPFR_RNDU);
  return r;
}

CertifiedReal CertifiedReal::operator*(const CertifiedReal& o) const {
  CertifiedReal r;
  mpfr_t c[8];
  for (auto& x : c) mpfr_init2(x, kPrec);
  mpfr_mul(c[0], lo_, o.lo_, MPFR_RNDD);
  mpfr_mul(c[1], lo_, o.hi_, MPFR_RNDD);
  mpfr_mul(c[2], hi_, o.lo_, MPFR_RNDD);
  mpfr_mul(c[3], hi_, o.hi_, MPFR_RNDD);
  mpfr_mul(c[4], lo_, o.lo_, MPFR_RNDU);
  mpfr_mul(c[5], lo_, o.hi_, MPFR_RNDU);
  mpfr_mul(c[6], hi_, o.lo_, MPFR_RNDU);
  mpfr_mul(c[7], hi_, o.hi_, MPFR_RNDU);
  mpfr_set(r.lo_, c[0], MPFR_RNDD);
  for (int i = 1; i < 4; ++i) mpfr_min(r.lo_, r.lo_, c[i], MPFR_RNDD);
  mpfr_set(r.hi_, c[4], MPFR_RNDU);
  for (int i = 5; i < 8; ++i) mpfr_max(r.hi_, r.hi_, c[i], MPFR_RNDU);
  for (auto& x : c) mpfr_clear(x);
  return r;
}

CertifiedReal CertifiedReal::log_rat(const Rat& q) {
  if (q <= 0) throw std::domain_error("log of a nonpositive rational");
  CertifiedReal r(q);
  mpfr_log(r.lo_, r.lo_, MPFR_RNDD);
  mpfr_log(r.hi_, r.hi_, MPFR_RNDU);
  return r;
}

CertifiedReal CertifiedReal::log2() { return log_rat(Rat(2)); }

CertifiedReal CertifiedReal::minus_x_log_x(const Rat& q) {
  if (q < 0) throw std::domain_error("mass must be nonnegative");
  if (q == 0 || q == 1) return CertifiedReal();
  return mul_rat(q, -log_rat(q));
}

bool CertifiedReal::certainly_le(const CertifiedReal& o) const {
  return mpfr_cmp(hi_, o.lo_) <= 0;
}
bool CertifiedReal::certainly_lt(const CertifiedReal& o) const {
  return mpfr_cmp(hi_, o.lo_) < 0;
}
bool CertifiedReal::certainly_le(const Rat& q) const { return mpfr_cmp_q(hi_, q.get_mpq_t()) <= 0; }
bool CertifiedReal::certainly_lt(const Rat& q) const { return mpfr_cmp_q(hi_, q.get_mpq_t()) < 0; }
bool CertifiedReal::certainly_ge(const Rat& q) const { return mpfr_cmp_q(lo_, q.get_mpq_t()) >= 0; }

double CertifiedReal::lower_double() const { return mpfr_get_d(lo_, MPFR_RNDD); }
double CertifiedReal::upper_double() const { return mpfr_get_d(hi_, MPFR_RNDU); }

std::string CertifiedReal::to_string(int digits) const {
  mpfr_t mid, rad;
  mpfr_init2(mid, kPrec);
  mpfr_init2(rad, kPrec);
  mpfr_add(mid, lo_, hi_, MPFR_RNDN);
  mpfr_div_ui(mid, mid, 2, MPFR_RNDN);
  mpfr_sub(rad, hi_, lo_, MPFR_RNDU);
  mpfr_div_ui(rad, rad, 2, MPFR_RNDU);
  char* ms = nullptr;
  char* rs = nullptr;
  mpfr_asprintf(&ms, "%.*Rg", digits, mid);
  mpfr_asprintf(&rs, "%.3Rg", rad);
  std::string out = std::string(ms) + " +/- " + rs;
  mpfr_free_str(ms);
  mpfr_free_str(rs);
  mpfr_clear(mid);
  mpfr_clear(rad);
  return out;
}

CertifiedReal mul_rat(const Rat& q, const CertifiedReal& v) {
  if (q < 0) throw std::domain_error("mul_rat expects a nonnegative rational");
  return CertifiedReal(q) * v;
}

}  // namespace soe
