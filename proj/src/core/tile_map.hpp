#pragma once

#include <array>
#include <optional>

#include "entropy.hpp"
#include "tower.hpp"

namespace soe {

struct LatticeVec {
  long x = 0, y = 0;

  friend bool operator==(const LatticeVec& a, const LatticeVec& b) {
    return a.x == b.x && a.y == b.y;
  }
  friend bool operator!=(const LatticeVec& a, const LatticeVec& b) { return !(a == b); }
  friend bool operator<(const LatticeVec& a, const LatticeVec& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  }
  friend LatticeVec operator+(const LatticeVec& a, const LatticeVec& b) {
    return {a.x + b.x, a.y + b.y};
  }
  friend LatticeVec operator-(const LatticeVec& a, const LatticeVec& b) {
    return {a.x - b.x, a.y - b.y};
  }
};

std::string to_string(const LatticeVec& v);

class TileGeometryError : public std::runtime_error {
 public:
  explicit TileGeometryError(const std::string& m) : std::runtime_error(m) {}
};

// The centered lattice square {-r..r}^2 with r = (side-1)/2; side must be
// odd and positive.
struct SquareTile {
  long side = 1;

  long radius() const { return (side - 1) / 2; }
  long size() const { return side * side; }
  bool contains(const LatticeVec& v) const {
    const long r = radius();
    return -r <= v.x && v.x <= r && -r <= v.y && v.y <= r;
  }
};

SquareTile make_square_tile(long side);  // throws TileGeometryError unless side is odd positive

// |F \ (g + F)| by exact lattice count.
long shifted_deficit(const SquareTile& f, const LatticeVec& g);

// |(F + F') \ F'| / |F'|, the relative boundary of the sumset.
Rat boundary_ratio(const SquareTile& f, const SquareTile& f_next);

struct TilingOffsets {
  std::vector<LatticeVec> offsets;
};

// The exact grid of (outer.side/inner.side)^2 translates of the inner square
// covering the outer square with multiplicity one; the cover is re-verified
// cell by cell.  Non-divisible sides throw TileGeometryError.
TilingOffsets tile_square(const SquareTile& outer, const SquareTile& inner);

enum class PhiOrder { boustrophedon, row_major };

// Full traversal of the tile: row by row bottom to top, left to right
// (row_major) or alternating direction (boustrophedon).
std::vector<LatticeVec> tile_traversal(const SquareTile& t, PhiOrder order);

class TileShapeError : public std::runtime_error {
 public:
  TileShapeError(long heights, long cells)
      : std::runtime_error("tower height " + std::to_string(heights) +
                           " does not match tile size " + std::to_string(cells)) {}
};

class NestingError : public std::runtime_error {
 public:
  NestingError(std::string atom, long occurrence, const std::string& what)
      : std::runtime_error("atom " + atom + ", occurrence " + std::to_string(occurrence) + ": " +
                           what),
        atom(std::move(atom)),
        occurrence(occurrence) {}
  std::string atom;
  long occurrence;
};

// A tower column-to-tile map: heights of the column over atom a go to
// lattice cells through the bijection phi[sigma[a]].
struct ColumnToTileMap {
  Tower tower;
  SquareTile tile;
  std::vector<PureAtom> atoms;
  std::vector<std::size_t> sigma;            // atom -> phi index, surjective
  std::vector<std::vector<LatticeVec>> phi;  // phi[i][t], each a bijection onto the tile

  LatticeVec alpha(long t, std::size_t atom) const { return phi[sigma[atom]][t]; }
  // Height mapped to f in the column over the atom, if any.
  std::optional<long> height_of(const LatticeVec& f, std::size_t atom) const;

  struct Position {
    std::size_t atom = 0;
    long level = 0;
  };
  // Atom and level of x inside the tower; nullopt outside.
  std::optional<Position> locate(const Rat& x) const;

  std::string to_json() const;
};

struct TileAssignment {
  PhiOrder order = PhiOrder::boustrophedon;
  // Explicit bijection tables; empty means construct from `order` (and, when
  // a previous map is supplied, from the nesting structure).
  std::vector<std::vector<LatticeVec>> phi;
  std::vector<std::size_t> sigma;  // empty means one index per atom
};

// Builds and verifies a column-to-tile map.  With a previous-stage map, the
// base-indicator word of every atom is checked level by level, occurrence
// windows are located, and the nesting identity
//   alpha_cur(i + j, b) = alpha_prev(j, S^i b) + c
// is re-verified exhaustively with the offsets c distinct per occurrence and
// drawn from the exact tiling of the current tile by the previous one.
ColumnToTileMap build_column_to_tile(const Tower& tower, std::vector<PureAtom> atoms,
                                     const SquareTile& tile, const TileAssignment& assignment = {},
                                     const ColumnToTileMap* previous = nullptr);

// The height-h tower of a rank-one system whose base is the union of final
// levels at heights divisible by h; h must divide the total height.
Tower rank_one_tower(const RankOneSystem& system, long height);

class UnstabilizedError : public std::runtime_error {
 public:
  explicit UnstabilizedError(const std::string& m) : std::runtime_error(m) {}
};

class HorizonError : public std::runtime_error {
 public:
  explicit HorizonError(const std::string& m) : std::runtime_error(m) {}
};

struct GeneratorMoveResult {
  Rat point;
  long stabilized_at_stage = 0;  // 1-based; agrees with every later built stage
};

// The partial generator move at the deepest built stage where it is defined:
// x = S^t b goes to S^{t'} b where the tile cell of t' is s plus the cell of
// t.  Throws UnstabilizedError when no built stage defines the move or a
// later built stage loses it.
GeneratorMoveResult generator_move(const std::vector<ColumnToTileMap>& maps, const LatticeVec& s,
                                   const Rat& x);

struct LambdaResult {
  LatticeVec value;
  long fixed_stage = 0;  // first stage from which every built stage agrees
};

struct KappaResult {
  long value = 0;
  long fixed_stage = 0;
};

// The lattice displacement matching the S-step k at x, with the stage at
// which it fixed; HorizonError when the last built stage does not define it.
LambdaResult lambda_cocycle(const std::vector<ColumnToTileMap>& maps, const Rat& x, long k);
// The S-step matching the lattice displacement g at x.
KappaResult kappa_cocycle(const std::vector<ColumnToTileMap>& maps, const Rat& x,
                          const LatticeVec& g);

// The stage-k exceptional set for generator s: points off the stage-k or
// stage-(k-1) tower, points whose shifted cell leaves the tile, and the top
// and bottom height(k-1)-1 levels; measured exactly, bounded by
// 4 eps_k + eps_prev.
struct ExceptionalReport {
  std::array<Rat, 4> part_mass;  // off-tower k, off-tower k-1, cell exits, rim
  Rat mass;                      // measure of the union
  Rat bound;
  bool pass = false;
};

ExceptionalReport exceptional_set(const std::vector<ColumnToTileMap>& maps, std::size_t stage,
                                  const LatticeVec& s, const Rat& eps_stage, const Rat& eps_prev);

// Geometric schedule closing the bound tails beyond the built horizon:
// eps_i = eps_coeff * eps_ratio^i, tower sizes grow by `growth` and tile
// sides by `side_growth` per stage after the last built one.
struct Z2Schedule {
  Rat eps_coeff = 1;
  Rat eps_ratio = Rat(1, 2);
  long growth = 9;
  long side_growth = 3;
};

struct BoundRow {
  long n = 0;
  Rat measured;
  Rat bound;
  bool pass = false;
};

struct Z2BoundReport {
  std::vector<BoundRow> d_rows;         // lambda value fixed at stage n, n >= 2
  std::vector<BoundRow> e_rows;         // kappa value fixed at stage n, n >= 2
  std::vector<BoundRow> boundary_rows;  // sumset boundary ratio vs eps_{n+1}
  Rat d_residual, e_residual;           // mass not fixed within the horizon
  Rat d_total;                          // total fixed mass, at most 1
  bool d_ok = false, e_ok = false;
  bool inconclusive = false;  // tail closed form unavailable at this schedule
  EntropyLedger lambda_ledger;  // row sizes 4|F_n|
  EntropyLedger kappa_ledger;   // row sizes 2|T_n|
};

// Measures the fixed-at-stage sets of both cocycles exactly across the built
// stages and checks each against its schedule bound with exact geometric
// tails; hands the per-stage masses to the entropy ledger with the sumset
// and difference-set sizes.
Z2BoundReport z2_bound_check(const std::vector<ColumnToTileMap>& maps, long k, const LatticeVec& g,
                             const Z2Schedule& schedule);

}  // namespace soe
