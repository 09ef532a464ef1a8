#pragma once

#include <memory>
#include <optional>

#include "piecewise_map.hpp"

namespace soe {

class NotATowerError : public std::runtime_error {
 public:
  NotATowerError(long h1, long h2)
      : std::runtime_error("levels " + std::to_string(h1) + " and " + std::to_string(h2) +
                           " intersect with positive measure"),
        height_a(h1),
        height_b(h2) {}
  long height_a, height_b;
};

class MixedNameError : public std::runtime_error {
 public:
  explicit MixedNameError(long h)
      : std::runtime_error("set is not name-constant at window offset " + std::to_string(h)),
        height(h) {}
  long height;
};

// A Rokhlin tower: heights T = {0..height-1} over a base B with pairwise
// disjoint levels map^t(B).  achieved_epsilon is the exact uncovered mass.
struct Tower {
  std::shared_ptr<const PiecewiseTranslation> map;
  IntervalSet base;
  long height = 0;
  std::vector<IntervalSet> levels;  // levels[t] = map^t(base)
  Rat achieved_epsilon;

  IntervalSet covered() const;
  // Height of the level containing x, or -1.
  long level_of(const Rat& x) const;
};

// Builds the tower and verifies level disjointness exactly; throws
// NotATowerError naming the first colliding pair.
Tower tower_from_levels(std::shared_ptr<const PiecewiseTranslation> map, const IntervalSet& base,
                        long height);

// An atom of a pure partition, labeled by its name over the tower heights.
struct PureAtom {
  std::string name;  // partition labels joined by ','
  std::vector<std::size_t> name_indices;
  IntervalSet set;
};

// The coarsest partition of the tower base such that every level over every
// atom lies inside a single atom of p.  Atoms are ordered lexicographically
// by name.
std::vector<PureAtom> pure_partition(const Tower& tower, const LabeledPartition& p);

// Exact max-metric gap between the empirical p-name distribution of `set`
// over the window {from..from+len-1} and `reference`.  The set must be
// name-constant at every window offset (pure-partition atoms are); throws
// MixedNameError otherwise.
Rat name_distribution_gap(const PiecewiseTranslation& map, const IntervalSet& set,
                          const LabeledPartition& p, long from, long len,
                          const DistributionVector& reference);

// Requested side conditions for a strong tower.
struct StrongTowerRequest {
  long height = 0;                  // M; must be a multiple of block_length
  long block_length = 1;            // L
  Rat epsilon;                      // requested tower quality
  std::optional<IntervalSet> good_set;              // E
  Rat good_fraction_epsilon;                        // condition (2) tolerance
  std::optional<LabeledPartition> aux_partition;    // {O, X\O}
  Rat aux_name_epsilon;                             // condition (3) tolerance
  // Conditions are evaluated per atom of the pure partition w.r.t. this
  // partition; absent, the whole base is one evaluation unit.
  std::optional<LabeledPartition> atom_partition;
  std::vector<IntervalSet> seeds;   // candidate base cells to march from
  long orbit_budget = 1 << 20;      // max marching steps per seed
};

struct StrongTowerReport {
  Rat achieved_epsilon;
  Rat requested_epsilon;
  bool epsilon_ok = false;

  struct AtomRow {
    std::string name;
    Rat value;          // level fraction (cond 2) or name gap (cond 3)
    bool constant = true;  // E membership level-constant on the atom
    bool pass = false;
  };
  std::vector<AtomRow> good_set_rows;   // empty when no good_set requested
  std::vector<AtomRow> aux_name_rows;   // empty when no aux partition
  bool good_set_ok = true;
  bool aux_ok = true;

  bool all_green() const { return epsilon_ok && good_set_ok && aux_ok; }
};

class TowerSearchError : public std::runtime_error {
 public:
  explicit TowerSearchError(const std::string& m) : std::runtime_error(m) {}
};

// Best-effort search: marches each seed cell along the orbit, takes the
// longest run of pairwise disjoint images, and stacks floor(run/M) base
// copies.  Returns the best tower found with an exact report of every
// requested condition; the tower is returned even when conditions fail.
// Throws TowerSearchError only when no candidate reaches epsilon 1/2.
std::pair<Tower, StrongTowerReport> search_strong_tower(
    std::shared_ptr<const PiecewiseTranslation> map, const StrongTowerRequest& request);

}  // namespace soe
