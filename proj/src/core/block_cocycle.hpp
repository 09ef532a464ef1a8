#pragma once

#include "tower.hpp"

namespace soe {

// A (J,K,L)-permutation of the positions {0..L-1}: translation by v on the
// rigid block {u..u+J-1}, an explicit bijection on the complement.  |v| <= K
// and both the rigid block and its translate lie inside {0..L-1}.
struct JKLPermutation {
  long J = 0, K = 0, L = 0;
  long u = 0;  // rigid block start
  long v = 0;  // translation vector
  std::vector<long> table;  // table[w] = image position

  long apply(long w) const { return table.at(static_cast<std::size_t>(w)); }
  bool in_rigid(long w) const { return w >= u && w < u + J; }
};

// Cyclic filler: every complement position w maps to (w + v) mod L, the
// order-preserving rotation of the complement.
JKLPermutation make_jkl_permutation(long J, long K, long L, long u, long v);

// Explicit filler: images of the complement positions, listed in increasing
// domain order; must biject onto the complement of the translated rigid
// block.
JKLPermutation make_jkl_permutation(long J, long K, long L, long u, long v,
                                    const std::vector<long>& filler_images);

// Integer-valued piecewise-constant function on [0,1); cells disjoint.
struct StepFunction {
  struct Cell {
    IntervalSet set;
    long value;
  };
  std::vector<Cell> cells;

  long value_at(const Rat& x) const;  // throws std::domain_error off carrier
  IntervalSet carrier() const;
  bool is_total() const;
  // Merges cells with equal values; cells sorted by value.
  StepFunction canonicalized() const;
};

StepFunction step_constant(long v);
StepFunction step_sum(const StepFunction& a, const StepFunction& b);
// g after f: (x -> g(f(x))).
StepFunction step_pullback(const PiecewiseTranslation& f, const StepFunction& g);
StepFunction step_negate(const StepFunction& a);
IntervalSet step_equal_set(const StepFunction& a, const StepFunction& b);
IntervalSet step_level_set(const StepFunction& a, long v);

// sigma: one permutation tuple (one entry per block, bottom to top) for each
// cell of a subdivision of the carrier tower base.
struct SigmaAssignment {
  struct Cell {
    IntervalSet set;
    std::vector<JKLPermutation> perms;
  };
  std::vector<Cell> cells;
};

class EpsilonViolationError : public std::runtime_error {
 public:
  EpsilonViolationError(const Rat& excess)
      : std::runtime_error("off-block measure exceeds the declared epsilon by " +
                           to_string(excess)),
        excess(excess) {}
  Rat excess;
};

// One stage factor: a blocked cocycle over the carrier tower of the previous
// action.  psi permutes the tower levels column-by-column according to the
// assembled per-cell position permutation pi and is the identity off the
// tower; the next action is psi^{-1} o prev o psi.
struct BlockedCocycle {
  long stage_index = 0;
  long J = 0, K = 0, L = 0;
  Rat epsilon;
  Tower carrier;
  SigmaAssignment sigma;
  std::vector<std::vector<long>> pi;  // pi[cell][t], t over tower heights
  PiecewiseTranslation psi;
  Rat off_block_measure;

  long block_count() const { return carrier.height / L; }
};

BlockedCocycle build_blocked_cocycle(long stage_index, Tower carrier, long K, long L,
                                     const Rat& epsilon, SigmaAssignment sigma);

// beta(x,k): the unique j with next^j(x) = prev^k(x), where next is the
// action derived from this factor.  Used by tests as a direct evaluation
// path; the stage machinery below never calls it.
long beta_value(const BlockedCocycle& beta, const PiecewiseTranslation& prev,
                const PiecewiseTranslation& next, const Rat& x, long k, long scan_cap);

class InversionWindowError : public std::runtime_error {
 public:
  explicit InversionWindowError(const std::string& m) : std::runtime_error(m) {}
};

// alpha_n = beta_n o ... o beta_1 with (beta o alpha)(x,k) = beta(x, alpha(x,k)).
// actions[n] = S_n; gen[n] = alpha_n(.,1) (a cocycle of S over S-steps);
// gen_inv[n] = alpha_n^{-1}(.,1) (a cocycle of S_n).
struct StageCocycle {
  std::shared_ptr<const PiecewiseTranslation> base;
  std::vector<BlockedCocycle> factors;
  std::vector<PiecewiseTranslation> actions;
  std::vector<StepFunction> gen;
  std::vector<StepFunction> gen_inv;

  std::size_t stages() const { return factors.size(); }
  const PiecewiseTranslation& action() const { return actions.back(); }
  const PiecewiseTranslation& action_at(std::size_t n) const { return actions.at(n); }
};

StageCocycle make_stage_cocycle(std::shared_ptr<const PiecewiseTranslation> base);

// Appends a factor built over actions.back(); derives the next action and
// caches both generator value maps.  scan_cap bounds the offset scan when
// recovering the generators; exceeding it throws InversionWindowError.
void push_factor(StageCocycle& stage, BlockedCocycle beta, long scan_cap = 0);

// alpha_n(x,k), exact, via the cocycle identity along the S-orbit of x.
long evaluate_at_stage(const StageCocycle& stage, std::size_t n, const Rat& x, long k);
long evaluate(const StageCocycle& stage, const Rat& x, long k);

// alpha_n^{-1}(x,k) along the S_n-orbit.
long evaluate_inverse_at_stage(const StageCocycle& stage, std::size_t n, const Rat& x, long k);
long evaluate_inverse(const StageCocycle& stage, const Rat& x, long k);

// x -> alpha_n(x,k) and x -> alpha_n^{-1}(x,k) as exact step functions.
StepFunction cocycle_value_map(const StageCocycle& stage, std::size_t n, long k);
StepFunction inverse_value_map(const StageCocycle& stage, std::size_t n, long k);

// D_n^k: cocycle value for k fixed at stage n (stability certified only
// through the built stages); E_n^l the same for the inverse cocycle.
struct FixedStageSets {
  long k = 0;
  long through_stage = 0;
  long certified_horizon = 0;  // last stage the stability check saw
  std::vector<IntervalSet> d;  // d[n-1] = D_n^k
  std::vector<IntervalSet> e;  // e[n-1] = E_n^k
};

FixedStageSets fixed_stage_sets(const StageCocycle& stage, long k, long through_stage);

// eps_i = 2^{-i-eps_offset}; L_i = L1 * ratio^{i-1}; K_i = K1 + (i-1).
struct GeometricSchedule {
  long eps_offset = 0;
  long L1 = 8;
  long ratio = 4;
  long K1 = 2;

  Rat eps(long i) const;
  Rat length(long i) const;       // L_i
  long kparam(long i) const;      // K_i
  Rat eps_tail(long from) const;  // sum_{i>=from} eps_i
  Rat inv_length_tail(long from) const;  // sum_{i>=from} 1/L_i
  Rat drift(long n) const;        // B_n = 2 sum_{j<=n} L_j; B_n = 0 for n < 1
};

struct BoundVerdict {
  std::string name;
  Rat lhs;
  Rat rhs_lower;  // certified lower bound on the stated right-hand side
  Rat rhs_upper;  // certified upper bound
  enum class State { pass, fail, inconclusive } state;
};

// Lemma checks for the fixed-stage measures:
//   mu(D_n^k) < 2 sum_{i>=n-1} eps_i + sum_{i>=n-1} (|k|+B_{n-2})/L_i
//   mu(E_n^l) < 2 sum_{i>=n-1} eps_i + sum_{i>=n-1} |l|/(L_i-K_i)
// Tails are exact geometric sums where available; the E tail uses a partial
// sum as rhs_lower and a geometric majorant as rhs_upper.
std::vector<BoundVerdict> bound_check6(const FixedStageSets& sets,
                                       const GeometricSchedule& schedule);

}  // namespace soe
