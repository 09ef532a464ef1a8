#pragma once

#include <string>
#include <vector>

#include "partition.hpp"

namespace soe {

// An exact measure-preserving bijection of [0,1) given by finitely many
// (interval, translation offset) pieces.  Domains and images each partition
// [0,1) mod null sets; this is verified at construction.  Representation is
// canonical (sorted, adjacent equal-offset pieces merged), so operator==
// is equality as maps.
class PiecewiseTranslation {
 public:
  struct Piece {
    Rat lo, hi;   // domain [lo, hi)
    Rat offset;   // image [lo+offset, hi+offset)
  };

  static PiecewiseTranslation identity();
  static PiecewiseTranslation from_pieces(std::vector<Piece> pieces, std::string name = "");

  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::string& name() const { return name_; }

  Rat apply(const Rat& x) const;
  IntervalSet apply_set(const IntervalSet& a) const;

  PiecewiseTranslation inverse() const;
  // k-fold composition; negative k uses the inverse, k = 0 is the identity.
  PiecewiseTranslation power(long k) const;

  bool operator==(const PiecewiseTranslation& o) const { return pieces_ == o.pieces_; }
  bool operator!=(const PiecewiseTranslation& o) const { return !(*this == o); }

 private:
  std::vector<Piece> pieces_;
  std::string name_;
};

inline bool operator==(const PiecewiseTranslation::Piece& a, const PiecewiseTranslation::Piece& b) {
  return a.lo == b.lo && a.hi == b.hi && a.offset == b.offset;
}

// outer(inner(x)).
PiecewiseTranslation compose(const PiecewiseTranslation& outer, const PiecewiseTranslation& inner);

// f^{-1}P: same labels, atoms are exact preimages.
LabeledPartition pullback_partition(const PiecewiseTranslation& f, const LabeledPartition& p);

// The set {x : f(x) = g(x)}, exactly.
IntervalSet agreement_set(const PiecewiseTranslation& f, const PiecewiseTranslation& g);

// A finite-stage cutting-and-stacking transformation.  The final column's
// levels are kept: they are the canonical tower cells of the system.
struct RankOneSystem {
  PiecewiseTranslation map;
  std::vector<IntervalSet> levels;  // bottom to top; equal width
  Rat level_width;
};

// cuts[k] >= 2 subcolumns at stage k+1; spacers (optional) gives, per stage,
// the spacer counts stacked above each subcolumn (spacers[k].size() ==
// cuts[k]).  The base width is chosen so the final column fills [0,1)
// exactly; the top level wraps to the bottom.  All cuts = 2 with no spacers
// is the finite dyadic odometer.
RankOneSystem build_rank_one(const std::vector<unsigned>& cuts,
                             const std::vector<std::vector<unsigned>>& spacers = {});

inline RankOneSystem dyadic_odometer(unsigned depth) {
  return build_rank_one(std::vector<unsigned>(depth, 2));
}

struct ReturnStructure {
  IntervalSet base;
  std::vector<std::pair<IntervalSet, long>> cells;  // (subset of base, return time)
};

class IncompleteReturnError : public std::runtime_error {
 public:
  IncompleteReturnError(IntervalSet remainder, long max_steps)
      : std::runtime_error("first return not resolved within " + std::to_string(max_steps) +
                           " steps on a set of measure " + to_string(remainder.measure())),
        remainder(std::move(remainder)) {}
  IntervalSet remainder;
};

ReturnStructure first_return(const PiecewiseTranslation& f, const IntervalSet& base,
                             long max_steps);

}  // namespace soe
