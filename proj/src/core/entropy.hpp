#pragma once

#include "block_cocycle.hpp"
#include "certified.hpp"

namespace soe {

// Sum of -m ln m over the masses, certified.
CertifiedReal shannon_entropy(const std::vector<Rat>& masses);
CertifiedReal shannon_entropy(const DistributionVector& d);
CertifiedReal shannon_entropy(const LabeledPartition& p);

// Level sets of x -> alpha_n(x,k) at the last built stage, restricted to the
// set where the value already agreed at the previous stage; residual_mass is
// the measure of the remainder (points whose value still moved at the last
// built stage, so the horizon does not certify them).
struct CocyclePartitionResult {
  LabeledPartition partition;  // labels "h=<value>"
  Rat residual_mass;
};
CocyclePartitionResult cocycle_partition(const StageCocycle& stage, long k);

// Group rows for the entropy criterion: stage n contributes the mass of the
// union of its fixed-value cells and the window size the values range over.
struct EntropyLedger {
  struct Row {
    long n;
    Rat mass;
    long size;
  };
  std::vector<Row> rows;
};

// Cumulative sums of -mass * ln(mass/size) (zero-mass rows contribute 0).
std::vector<CertifiedReal> ledger_partial_sums(const EntropyLedger& ledger);
CertifiedReal ledger_sum(const EntropyLedger& ledger);

// Tail schedule: mass_n <= coeff * ratio^n and size_n <= 2^(n^size_exp).
struct TailMajorant {
  Rat coeff = 16;
  Rat ratio = Rat(1, 2);
  long size_exp = 2;
};

struct Prop22Result {
  enum class Verdict { finite, violated, inconclusive } verdict;
  long violating_stage = -1;      // for verdict == violated
  std::vector<CertifiedReal> partial_sums;
  CertifiedReal tail_value;       // certified upper enclosure of the tail sum
  long tail_from = 0;             // tail covers stages n > tail_from
};

// Checks each ledger row against the schedule, then certifies the tail
// sum_{n>N} -mass log(mass/size) finite by the convergent majorant
//   sum coeff * ratio^n * (n^e ln 2 + n ln(1/ratio) + max(0, -ln coeff))
// with exact rational series tails.  Requires ratio < 1.
Prop22Result prop22_check(const EntropyLedger& ledger, const TailMajorant& schedule);

}  // namespace soe
