#pragma once

#include <string>
#include <vector>

#include "interval_set.hpp"

namespace soe {

// Ordered labeled partition.  Atom order is part of identity; labels are
// unique.  Atoms must be pairwise disjoint; the carrier is their union
// (the whole of [0,1) for partitions of X).
class LabeledPartition {
 public:
  struct Atom {
    std::string label;
    IntervalSet set;
  };

  LabeledPartition() = default;
  explicit LabeledPartition(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  const Atom& at(std::size_t i) const { return atoms_[i]; }

  IntervalSet carrier() const;
  bool partitions_unit() const;

  // Index of the atom containing x, or npos.
  std::size_t atom_of(const Rat& x) const;
  // Index of the unique atom containing A (positive-measure containment),
  // or npos if A straddles atoms.
  std::size_t atom_containing(const IntervalSet& a) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  // Dyadic equipartition of [0,1) into 2^k atoms labeled "0".."2^k-1".
  static LabeledPartition dyadic(unsigned k);
  // Equipartition into n atoms.
  static LabeledPartition equipartition(std::size_t n);

 private:
  std::vector<Atom> atoms_;
};

// Common refinement; atom (i,j) gets label "<li>|<lj>" and inherits the
// lexicographic order of index pairs.  Empty intersections are kept so the
// label set matches the full product (distributions over joins compare
// against product distributions entrywise).
LabeledPartition join(const LabeledPartition& p, const LabeledPartition& q);

struct DistributionVector {
  struct Entry {
    std::string label;
    Rat mass;
  };
  std::vector<Entry> entries;

  bool same_shape(const DistributionVector& o) const;
};

// dist_A(P)(i) = mu(A cap P_i) / mu(A).  Throws std::invalid_argument on a
// zero-measure carrier.
DistributionVector distribution(const IntervalSet& carrier, const LabeledPartition& p);

// Global distribution (carrier [0,1)).
DistributionVector distribution(const LabeledPartition& p);

// Product distribution over join labels "<li>|<lj>".
DistributionVector product(const DistributionVector& u, const DistributionVector& v);

// Max-metric distance; throws std::invalid_argument on label-set mismatch.
Rat dist_distance(const DistributionVector& u, const DistributionVector& v);

}  // namespace soe
