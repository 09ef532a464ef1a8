#pragma once

// Brute-force reference computations for small configurations: everything is
// evaluated point by point on an explicit cell decomposition, with no shared
// set algebra.  Cell boundaries may be collected from engine objects, but
// every value is recomputed here by direct orbit scans.

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "core/block_cocycle.hpp"

namespace oracle {

using soe::IntervalSet;
using soe::LabeledPartition;
using soe::PiecewiseTranslation;
using soe::Rat;
using soe::StageCocycle;
using soe::StepFunction;

// A decomposition of [0,1) into cells on which every collected object is
// constant, with one midpoint sample per cell.
struct CellGrid {
  std::vector<Rat> cuts;     // sorted, first 0, open at 1
  std::vector<Rat> samples;  // midpoint of cell i
  std::vector<Rat> widths;

  std::size_t size() const { return samples.size(); }
};

inline void add_cut(std::vector<Rat>& cuts, const Rat& c) {
  if (c >= 0 && c < 1) cuts.push_back(c);
}

inline void add_map_cuts(std::vector<Rat>& cuts, const PiecewiseTranslation& f) {
  for (const auto& p : f.pieces()) {
    add_cut(cuts, p.lo);
    add_cut(cuts, p.hi);
  }
}

inline void add_set_cuts(std::vector<Rat>& cuts, const IntervalSet& s) {
  for (const auto& [lo, hi] : s.pieces()) {
    add_cut(cuts, lo);
    add_cut(cuts, hi);
  }
}

inline void add_step_cuts(std::vector<Rat>& cuts, const StepFunction& f) {
  for (const auto& c : f.cells) add_set_cuts(cuts, c.set);
}

inline CellGrid make_grid(std::vector<Rat> cuts) {
  cuts.push_back(Rat(0));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  CellGrid g;
  g.cuts = cuts;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const Rat hi = i + 1 < cuts.size() ? cuts[i + 1] : Rat(1);
    g.samples.push_back((cuts[i] + hi) / 2);
    g.widths.push_back(hi - cuts[i]);
  }
  return g;
}

// Every breakpoint of the base, the derived actions, and the cached value
// maps of a stage cocycle, so each cocycle value is cell-constant.
inline CellGrid stage_grid(const StageCocycle& st, long kmax) {
  std::vector<Rat> cuts;
  add_map_cuts(cuts, *st.base);
  for (const auto& a : st.actions) add_map_cuts(cuts, a);
  for (std::size_t n = 1; n <= st.stages(); ++n)
    for (long k = -kmax; k <= kmax; ++k) {
      add_step_cuts(cuts, soe::cocycle_value_map(st, n, k));
      add_step_cuts(cuts, soe::inverse_value_map(st, n, k));
    }
  return make_grid(std::move(cuts));
}

// alpha_n(x,k) by scanning: the unique |j| <= cap with sn^j(x) = s^k(x),
// applying the maps one step at a time.
inline std::optional<long> cocycle_scan(const PiecewiseTranslation& s,
                                        const PiecewiseTranslation& sn, const Rat& x, long k,
                                        long cap) {
  Rat target = x;
  const PiecewiseTranslation step = k >= 0 ? s : s.inverse();
  for (long i = 0; i < std::abs(k); ++i) target = step.apply(target);
  Rat fwd = x, bwd = x;
  const PiecewiseTranslation inv = sn.inverse();
  if (fwd == target) return 0;
  for (long j = 1; j <= cap; ++j) {
    fwd = sn.apply(fwd);
    if (fwd == target) return j;
    bwd = inv.apply(bwd);
    if (bwd == target) return -j;
  }
  return std::nullopt;
}

// Stage at which the value sequence v_1..v_last settles: the smallest n with
// v_n = v_{n+1} = ... = v_last.
inline long settle_stage(const std::vector<long>& values) {
  long n = static_cast<long>(values.size());
  while (n >= 2 && values[static_cast<std::size_t>(n - 2)] ==
                       values[static_cast<std::size_t>(n - 1)])
    --n;
  return n;
}

// Per-cell fixed-stage masses for the forward cocycle at k and the inverse
// cocycle at l: mass[n-1] accumulates the cells settling at stage n.
struct FixedMasses {
  std::vector<Rat> d, e;
};

inline FixedMasses fixed_masses(const StageCocycle& st, const CellGrid& grid, long k, long l,
                                long cap) {
  FixedMasses out;
  out.d.assign(st.stages(), Rat(0));
  out.e.assign(st.stages(), Rat(0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<long> dv, ev;
    for (std::size_t n = 1; n <= st.stages(); ++n) {
      dv.push_back(cocycle_scan(*st.base, st.action_at(n), grid.samples[i], k, cap).value());
      ev.push_back(cocycle_scan(st.action_at(n), *st.base, grid.samples[i], l, cap).value());
    }
    out.d[static_cast<std::size_t>(settle_stage(dv) - 1)] += grid.widths[i];
    out.e[static_cast<std::size_t>(settle_stage(ev) - 1)] += grid.widths[i];
  }
  return out;
}

// Joint label distribution of (p at x, p at f^ell x) by per-cell counting.
inline std::map<std::pair<std::string, std::string>, Rat> joint_distribution(
    const PiecewiseTranslation& f, long ell, const LabeledPartition& p, const CellGrid& grid) {
  std::map<std::pair<std::string, std::string>, Rat> out;
  const PiecewiseTranslation step = ell >= 0 ? f : f.inverse();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Rat y = grid.samples[i];
    for (long j = 0; j < std::abs(ell); ++j) y = step.apply(y);
    const auto a = p.atom_of(grid.samples[i]);
    const auto b = p.atom_of(y);
    out[{p.at(a).label, p.at(b).label}] += grid.widths[i];
  }
  return out;
}

}  // namespace oracle
