#pragma once

#include <random>

#include "block_cocycle.hpp"

namespace soe {

// Per-stage parameters of the staged construction.
struct StageParams {
  long n = 0;  // stage index, 1-based
  long K = 0, L = 0, M = 0;
  Rat epsilon;
  bool designated = false;  // stage joined the mixing subsequence
};

struct ScheduleConstraint {
  std::string name;
  Rat lhs, rhs;  // the verified inequality lhs < rhs (or divisibility, lhs == 0)
  bool ok = false;
};

class ScaleCapError : public std::runtime_error {
 public:
  ScaleCapError(std::string binding, long cap)
      : std::runtime_error("tower height exceeds the resource cap " + std::to_string(cap) +
                           "; binding constraint: " + binding),
        binding(std::move(binding)) {}
  std::string binding;
};

struct NextParams {
  long K = 0, L = 0, M = 0;
  std::vector<ScheduleConstraint> constraints;
};

// Minimal parameters for the next stage.  Both cases share the constraint
// shapes; k_cube is the K whose cube bounds the block length (the next K for
// a designated stage, the designated subsequence's K otherwise).  Every
// inequality is re-verified exactly and listed.  M beyond m_cap throws
// ScaleCapError naming the binding constraint.
NextParams schedule_next(const std::vector<StageParams>& history, int which_case, long k_cube,
                         const Rat& eps_next, long m_cap);

// The set of points whose look-back name distribution over the window
// {-K..-1} under s is within epsilon of the global distribution of p, as an
// exact interval set.
struct ErgodicWindowResult {
  IntervalSet e;
  Rat deficiency;  // mu(X \ E)
  bool pass = false;
};
ErgodicWindowResult ergodic_window_set(const PiecewiseTranslation& s, const LabeledPartition& p,
                                       long K, const Rat& epsilon);

enum class SigmaMode { exact_uniform, seeded_iid };

class CellBudgetError : public std::runtime_error {
 public:
  CellBudgetError(long need, long budget)
      : std::runtime_error("exact-uniform sigma needs " + std::to_string(need) +
                           " cells, over the budget " + std::to_string(budget) +
                           "; consider seeded-iid mode") {}
};

struct SigmaReport {
  SigmaMode mode = SigmaMode::exact_uniform;
  long tuple_count = 0;                 // K^blockCount (exact-uniform)
  long cell_count = 0;
  std::vector<std::vector<long>> v_counts;  // [block][v-1] realized draws
};

// One permutation tuple per cell.  Exact-uniform subdivides each atom into
// K^blockCount equal-measure cells, one per tuple of translation vectors in
// {1..K}^blockCount; seeded-iid draws one tuple per atom from rng and reports
// the realized empirical distribution.
SigmaAssignment assign_sigma(const std::vector<PureAtom>& atoms, long K, long L, long block_count,
                             SigmaMode mode, std::mt19937_64& rng, long cell_budget,
                             SigmaReport* report = nullptr);

// A power of a map tracked only on a fixed carrier: parts partition the
// carrier and each part translates rigidly.
struct TrackedOrbit {
  struct Part {
    IntervalSet set;
    Rat offset;
  };
  std::vector<Part> parts;

  static TrackedOrbit identity_on(const IntervalSet& carrier);
  void advance(const PiecewiseTranslation& s);  // compose s on the outside
  IntervalSet image() const;
};

// {x in the common carrier : a and b translate x by the same offset}.
IntervalSet tracked_agreement(const TrackedOrbit& a, const TrackedOrbit& b);

// {x in the carrier : the tracked image of x lies in t}.
IntervalSet tracked_preimage(const TrackedOrbit& a, const IntervalSet& t);

struct GoodPositionRow {
  long m = 0;
  bool rigid_ok = false;  // both look-back windows sit at rigid positions
  Rat gap_back, gap_fwd;  // valid only when rigid_ok
  bool good = false;
};

struct QCellReport {
  long m = 0;
  std::vector<Rat> masses;  // K*K entries, row k, column k'
  bool equal = false;       // every mass == mu(bar atom)/K^2
  Rat gap;                  // joint-distribution gap at this position
  bool gap_ok = false;      // gap < 2 epsilon
};

// Per-atom stage analysis: good positions (rigid windows plus two
// distribution conditions, exact), and optionally the Q cells and the joint
// distribution gap at every good position.
struct AtomStageAnalysis {
  std::string name;
  Rat atom_mass, bar_mass;
  std::vector<GoodPositionRow> rows;
  std::vector<long> good;  // good heights
  Rat good_fraction;
  Rat good_threshold;  // 1 - (8 eps_prev + 4 eps)
  bool good_ok = false;
  bool q_checked = false;
  bool q_all_equal = true;
  bool q_all_gap_ok = true;
  std::vector<QCellReport> q_rows;
  Rat column_gap;  // joint-distribution gap over the whole permuted column
};

AtomStageAnalysis analyze_atom(const BlockedCocycle& beta, const PiecewiseTranslation& cur,
                               const IntervalSet& atom, const std::string& atom_name,
                               const LabeledPartition& p, long ell, const Rat& epsilon,
                               const Rat& eps_prev, bool check_q_cells);

struct DeltaMixingReport {
  Rat gap;    // exact max-metric gap to the product distribution
  Rat delta;  // scheduled threshold (may exceed 1)
  bool vacuous = false;
  bool pass = false;  // gap < delta
};

DeltaMixingReport delta_mixing_report(const PiecewiseTranslation& s, long ell,
                                      const LabeledPartition& p, const Rat& delta);

// Fraction of heights m at which the look-back window names of the atom's
// level agree under the two actions; offsets where a window image straddles
// an atom of p are flagged and counted as disagreement.
struct NameAgreementReport {
  Rat fraction;
  Rat threshold;  // 1 - 4 eps_prev
  bool pass = false;
  long flagged = 0;
};
NameAgreementReport name_agreement(const PiecewiseTranslation& prev,
                                   const PiecewiseTranslation& older, const IntervalSet& atom,
                                   const LabeledPartition& p, long M, long K,
                                   const Rat& threshold);

struct WeakMixConfig {
  unsigned grid_depth = 11;  // base system: dyadic odometer truncation
  long stage_count = 2;
  long eps_offset = 2;  // eps_n = 2^{-n-eps_offset}; must be >= 1
  long k1 = 2;
  std::vector<long> block_lengths;   // L_n; default dyadic schedule 8,32,128,...
  std::vector<long> tower_heights;   // M_n; default 32,128,512,...
  // Partition depth (dyadic) per subsequence position j, 1-based; default j.
  // Depths must be nondecreasing so the partitions refine.
  std::vector<unsigned> partition_depths;
  // When nonempty, these stages are designated regardless of the measured
  // ergodic window condition (which is still reported); empty means greedy.
  std::vector<long> force_designated;
  SigmaMode sigma_mode = SigmaMode::seeded_iid;
  unsigned long long seed = 1;
  long cell_budget = 1 << 12;
  bool check_q_cells = false;  // exhaustive Q-cell checks at good positions
  long orbit_budget = 1 << 20;
  long scan_cap = 0;

  Rat eps(long n) const;
  long kparam(long n) const { return k1 + n - 1; }
  long block_length(long n) const;
  long tower_height(long n) const;
};

struct StageReport {
  StageParams params;
  long subsequence_index = 0;  // j when designated
  Rat e_deficiency;
  bool e_ok = false;
  Rat o_mass;  // mu(O_{j-1}) at this stage
  StrongTowerReport tower;
  SigmaReport sigma;
  std::size_t atom_count = 0;
  // Designated stages only.
  std::vector<AtomStageAnalysis> atoms;
  std::vector<NameAgreementReport> name_rows;
  bool delta_present = false;
  DeltaMixingReport delta;
  Rat measured_threshold;  // 8 eps_prev + 7 eps
  bool measured_ok = false;
  Rat column_gap_max;
  bool aggregation_ok = true;  // global gap <= max column gap + eps
};

struct AgreementRow {
  long m = 0, nj = 0, ell = 0;
  Rat disagreement;  // mu({x : S_m^ell x != S_nj^ell x}), exact
  Rat bound;
  bool pass = false;
};

struct ConstructionResult {
  std::vector<StageParams> params;
  std::vector<long> designated;  // n_j, 1-based stage indices
  std::vector<StageReport> stages;
  std::vector<AgreementRow> agreement;
  StageCocycle cocycle;
  bool aborted = false;
  bool abort_budget = false;  // aborted on a resource budget, not a defect
  std::string abort_reason;
};

// The staged driver: for each stage, verify the ergodic window condition
// (greedy designation), build the strong tower over the previous action with
// every side condition measured, assign sigma, derive the next action, and
// run the designated-stage certificates.
ConstructionResult run_construction(const WeakMixConfig& config);

}  // namespace soe
