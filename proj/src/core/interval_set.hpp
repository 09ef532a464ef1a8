#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace soe {

// A finite union of half-open rational subintervals of [0,1), kept in
// canonical form: pairwise disjoint, sorted, non-adjacent.  Two sets that are
// equal mod null sets have identical representations, so structural equality
// is set equality.  Values are immutable after construction.
class IntervalSet {
 public:
  using Piece = std::pair<Rat, Rat>;  // [lo, hi)

  IntervalSet() = default;

  // Canonicalizes an arbitrary list of [lo, hi) pairs: drops empty pieces,
  // merges overlapping and adjacent ones.  Throws std::domain_error if an
  // endpoint lies outside [0,1] or lo > hi.
  static IntervalSet normalize(std::vector<Piece> raw);

  static IntervalSet interval(const Rat& lo, const Rat& hi);
  static IntervalSet unit();   // [0,1)
  static IntervalSet empty() { return IntervalSet(); }

  const std::vector<Piece>& pieces() const { return iv_; }
  bool is_empty() const { return iv_.empty(); }
  std::size_t piece_count() const { return iv_.size(); }

  Rat measure() const;
  bool contains(const Rat& x) const;

  bool operator==(const IntervalSet& o) const { return iv_ == o.iv_; }
  bool operator!=(const IntervalSet& o) const { return !(*this == o); }
  // Lexicographic on the canonical representation; usable as a map key.
  bool operator<(const IntervalSet& o) const { return iv_ < o.iv_; }

  // Translates every piece by d.  Throws if the image leaves [0,1).
  IntervalSet translated(const Rat& d) const;

  // Complement within [0,1).
  IntervalSet complement() const;

  // Cuts the set left-to-right into n chunks of equal measure.
  std::vector<IntervalSet> split_equal(std::size_t n) const;

 private:
  std::vector<Piece> iv_;
};

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_intersect(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_symdiff(const IntervalSet& a, const IntervalSet& b);

inline bool is_subset(const IntervalSet& a, const IntervalSet& b) {
  return set_difference(a, b).is_empty();
}
inline bool disjoint(const IntervalSet& a, const IntervalSet& b) {
  return set_intersect(a, b).is_empty();
}

}  // namespace soe
