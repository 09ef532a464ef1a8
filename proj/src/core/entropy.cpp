#include "entropy.hpp"

#include <algorithm>

namespace soe {

CertifiedReal shannon_entropy(const std::vector<Rat>& masses) {
  CertifiedReal h;
  for (const Rat& m : masses) h = h + CertifiedReal::minus_x_log_x(m);
  return h;
}

CertifiedReal shannon_entropy(const DistributionVector& d) {
  std::vector<Rat> m;
  m.reserve(d.entries.size());
  for (const auto& e : d.entries) m.push_back(e.mass);
  return shannon_entropy(m);
}

CertifiedReal shannon_entropy(const LabeledPartition& p) {
  std::vector<Rat> m;
  m.reserve(p.size());
  for (const auto& a : p.atoms()) m.push_back(a.set.measure());
  return shannon_entropy(m);
}

CocyclePartitionResult cocycle_partition(const StageCocycle& stage, long k) {
  const std::size_t n = stage.stages();
  const StepFunction last = cocycle_value_map(stage, n, k).canonicalized();
  IntervalSet stab = IntervalSet::unit();
  if (n >= 1) stab = step_equal_set(cocycle_value_map(stage, n - 1, k), last);

  CocyclePartitionResult out;
  std::vector<LabeledPartition::Atom> atoms;
  for (const auto& c : last.cells) {
    IntervalSet s = set_intersect(c.set, stab);
    if (!s.is_empty()) atoms.push_back({"h=" + std::to_string(c.value), std::move(s)});
  }
  out.partition = LabeledPartition(std::move(atoms));
  out.residual_mass = 1 - stab.measure();
  return out;
}

std::vector<CertifiedReal> ledger_partial_sums(const EntropyLedger& ledger) {
  std::vector<CertifiedReal> sums;
  CertifiedReal acc;
  for (const auto& r : ledger.rows) {
    if (r.mass < 0 || r.mass > 1) throw std::invalid_argument("group mass outside [0,1]");
    if (r.size < 1) throw std::invalid_argument("group size must be positive");
    acc = acc + CertifiedReal::minus_x_log_x(r.mass) +
          mul_rat(r.mass, CertifiedReal::log_rat(Rat(r.size)));
    sums.push_back(acc);
  }
  return sums;
}

CertifiedReal ledger_sum(const EntropyLedger& ledger) {
  auto s = ledger_partial_sums(ledger);
  return s.empty() ? CertifiedReal() : s.back();
}

namespace {

// Exact tails sum_{n>N} n^j x^j for 0 < x < 1, j <= 3.
Rat series_tail(const Rat& x, int j, long N) {
  const Rat one_minus = 1 - x;
  Rat full;
  switch (j) {
    case 0: full = x / one_minus; break;
    case 1: full = x / (one_minus * one_minus); break;
    case 2: full = x * (1 + x) / (one_minus * one_minus * one_minus); break;
    case 3:
      full = x * (1 + 4 * x + x * x) / (one_minus * one_minus * one_minus * one_minus);
      break;
    default: throw std::invalid_argument("series_tail supports exponents 0..3");
  }
  Rat partial = 0, p = 1;
  for (long n = 1; n <= N; ++n) {
    p *= x;
    Rat nj = 1;
    for (int i = 0; i < j; ++i) nj *= n;
    partial += nj * p;
  }
  Rat tail = full - partial;
  tail.canonicalize();
  return tail;
}

Rat pow_rat(const Rat& x, long e) {
  Rat p = 1;
  for (long i = 0; i < e; ++i) p *= x;
  return p;
}

mpz_class two_pow(long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e));
  return p;
}

}  // namespace

Prop22Result prop22_check(const EntropyLedger& ledger, const TailMajorant& schedule) {
  if (schedule.ratio <= 0 || schedule.ratio >= 1 || schedule.coeff <= 0)
    throw std::invalid_argument("tail schedule needs 0 < ratio < 1 and coeff > 0");
  if (schedule.size_exp < 1 || schedule.size_exp > 3)
    throw std::invalid_argument("size exponent must be 1, 2, or 3");

  Prop22Result out;
  out.partial_sums = ledger_partial_sums(ledger);

  long N = 0;
  for (const auto& r : ledger.rows) {
    N = std::max(N, r.n);
    long ne = 1;
    for (long i = 0; i < schedule.size_exp; ++i) ne *= r.n;
    if (r.mass > schedule.coeff * pow_rat(schedule.ratio, r.n) ||
        mpz_class(r.size) > two_pow(ne)) {
      out.verdict = Prop22Result::Verdict::violated;
      out.violating_stage = r.n;
      return out;
    }
  }
  out.tail_from = N;

  // The per-stage majorant m(A - ln m) is monotone in m only while the mass
  // bound stays below 2/e; require it from the first tail stage on.
  if (schedule.coeff * pow_rat(schedule.ratio, N + 1) > Rat(1, 2)) {
    out.verdict = Prop22Result::Verdict::inconclusive;
    return out;
  }

  const Rat te = series_tail(schedule.ratio, static_cast<int>(schedule.size_exp), N);
  const Rat t1 = series_tail(schedule.ratio, 1, N);
  const Rat t0 = series_tail(schedule.ratio, 0, N);
  CertifiedReal tail = mul_rat(te, CertifiedReal::log2()) +
                       mul_rat(t1, CertifiedReal::log_rat(1 / schedule.ratio));
  if (schedule.coeff < 1)
    tail = tail + mul_rat(t0, -CertifiedReal::log_rat(schedule.coeff));
  out.tail_value = mul_rat(schedule.coeff, tail);
  out.verdict = Prop22Result::Verdict::finite;
  return out;
}

}  // namespace soe
