#include "tower.hpp"

#include <algorithm>
#include <map>

namespace soe {

namespace {

// Sorted interval accumulator with exact overlap detection.
class DisjointAccumulator {
 public:
  // Inserts all pieces of s; returns false (without finishing) on overlap.
  bool try_insert(const IntervalSet& s) {
    for (const auto& [lo, hi] : s.pieces()) {
      auto next = m_.lower_bound(lo);
      if (next != m_.end() && next->first < hi) return false;
      if (next != m_.begin()) {
        auto prev = std::prev(next);
        if (prev->second > lo) return false;
      }
      m_.emplace(lo, hi);
    }
    return true;
  }

  IntervalSet to_set() const {
    std::vector<IntervalSet::Piece> v(m_.begin(), m_.end());
    return IntervalSet::normalize(std::move(v));
  }

 private:
  std::map<Rat, Rat> m_;
};

}  // namespace

IntervalSet Tower::covered() const {
  DisjointAccumulator acc;
  for (const auto& l : levels) acc.try_insert(l);
  return acc.to_set();
}

long Tower::level_of(const Rat& x) const {
  for (long t = 0; t < height; ++t)
    if (levels[t].contains(x)) return t;
  return -1;
}

Tower tower_from_levels(std::shared_ptr<const PiecewiseTranslation> map, const IntervalSet& base,
                        long height) {
  if (height < 1) throw std::invalid_argument("tower height must be >= 1");
  Tower tw;
  tw.map = std::move(map);
  tw.base = base;
  tw.height = height;
  tw.levels.reserve(height);
  DisjointAccumulator acc;
  IntervalSet cur = base;
  for (long t = 0; t < height; ++t) {
    if (t > 0) cur = tw.map->apply_set(cur);
    if (!acc.try_insert(cur)) {
      // Locate the first colliding pair for the error message.
      tw.levels.push_back(cur);
      for (long a = 0; a < t; ++a)
        if (!disjoint(tw.levels[a], cur)) throw NotATowerError(a, t);
      throw NotATowerError(t, t);  // self-overlap cannot happen for a bijection
    }
    tw.levels.push_back(cur);
  }
  tw.achieved_epsilon = 1 - acc.to_set().measure();
  return tw;
}

std::vector<PureAtom> pure_partition(const Tower& tower, const LabeledPartition& p) {
  std::vector<PureAtom> classes{{"", {}, tower.base}};
  LabeledPartition q = p;  // q = map^{-t} p
  const PiecewiseTranslation inv = tower.map->inverse();
  for (long t = 0; t < tower.height; ++t) {
    if (t > 0) {
      std::vector<LabeledPartition::Atom> atoms;
      atoms.reserve(q.size());
      for (const auto& a : q.atoms()) atoms.push_back({a.label, inv.apply_set(a.set)});
      q = LabeledPartition(std::move(atoms));
    }
    std::vector<PureAtom> next;
    for (auto& c : classes) {
      for (std::size_t i = 0; i < q.size(); ++i) {
        IntervalSet inter = set_intersect(c.set, q.at(i).set);
        if (inter.is_empty()) continue;
        PureAtom na;
        na.name = c.name.empty() ? q.at(i).label : c.name + "," + q.at(i).label;
        na.name_indices = c.name_indices;
        na.name_indices.push_back(i);
        na.set = std::move(inter);
        next.push_back(std::move(na));
      }
    }
    classes = std::move(next);
  }
  std::sort(classes.begin(), classes.end(),
            [](const PureAtom& a, const PureAtom& b) { return a.name < b.name; });
  return classes;
}

Rat name_distribution_gap(const PiecewiseTranslation& map, const IntervalSet& set,
                          const LabeledPartition& p, long from, long len,
                          const DistributionVector& reference) {
  if (len <= 0) throw std::invalid_argument("name window must be nonempty");
  if (reference.entries.size() != p.size())
    throw std::invalid_argument("reference shape does not match partition");
  std::vector<long> counts(p.size(), 0);
  IntervalSet cur = map.power(from).apply_set(set);
  for (long k = 0; k < len; ++k) {
    if (k > 0) cur = map.apply_set(cur);
    const std::size_t i = p.atom_containing(cur);
    if (i == LabeledPartition::npos) throw MixedNameError(from + k);
    ++counts[i];
  }
  Rat best = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    Rat d = abs(Rat(counts[i], len) - reference.entries[i].mass);
    if (d > best) best = d;
  }
  return best;
}

std::pair<Tower, StrongTowerReport> search_strong_tower(
    std::shared_ptr<const PiecewiseTranslation> map, const StrongTowerRequest& request) {
  const long M = request.height;
  if (M < 1 || request.block_length < 1 || M % request.block_length != 0)
    throw std::invalid_argument("tower height must be a positive multiple of the block length");
  if (request.seeds.empty()) throw std::invalid_argument("tower search needs seed cells");

  std::optional<Tower> best;
  for (const IntervalSet& seed : request.seeds) {
    if (seed.measure() == 0) continue;
    DisjointAccumulator acc;
    std::vector<IntervalSet> base_parts;
    IntervalSet cur = seed;
    long run = 0;
    while (run < request.orbit_budget) {
      if (!acc.try_insert(cur)) break;
      if (run % M == 0) base_parts.push_back(cur);
      ++run;
      cur = map->apply_set(cur);
    }
    const long copies = run / M;
    if (copies == 0) continue;
    base_parts.resize(static_cast<std::size_t>(copies));
    std::vector<IntervalSet::Piece> raw;
    for (const auto& b : base_parts)
      raw.insert(raw.end(), b.pieces().begin(), b.pieces().end());
    Tower tw = tower_from_levels(map, IntervalSet::normalize(std::move(raw)), M);
    if (!best || tw.achieved_epsilon < best->achieved_epsilon) best = std::move(tw);
    if (best->achieved_epsilon <= request.epsilon) break;
  }
  if (!best || best->achieved_epsilon >= Rat(1, 2))
    throw TowerSearchError("no tower candidate with uncovered mass below 1/2 within budget");

  StrongTowerReport rep;
  rep.achieved_epsilon = best->achieved_epsilon;
  rep.requested_epsilon = request.epsilon;
  rep.epsilon_ok = best->achieved_epsilon <= request.epsilon;

  std::vector<PureAtom> atoms;
  if (request.atom_partition)
    atoms = pure_partition(*best, *request.atom_partition);
  else
    atoms.push_back({"*", {}, best->base});

  if (request.good_set) {
    for (const auto& a : atoms) {
      StrongTowerReport::AtomRow row;
      row.name = a.name;
      long in_count = 0;
      IntervalSet cur = a.set;
      for (long t = 0; t < M; ++t) {
        if (t > 0) cur = map->apply_set(cur);
        if (is_subset(cur, *request.good_set))
          ++in_count;
        else if (!disjoint(cur, *request.good_set))
          row.constant = false;  // E membership straddles the atom at this level
      }
      row.value = Rat(in_count, M);
      row.pass = row.constant && row.value > 1 - request.good_fraction_epsilon;
      rep.good_set_ok = rep.good_set_ok && row.pass;
      rep.good_set_rows.push_back(std::move(row));
    }
  }

  if (request.aux_partition) {
    const DistributionVector ref = distribution(*request.aux_partition);
    for (const auto& a : atoms) {
      StrongTowerReport::AtomRow row;
      row.name = a.name;
      try {
        row.value = name_distribution_gap(*map, a.set, *request.aux_partition, 0, M, ref);
        row.pass = row.value < request.aux_name_epsilon;
      } catch (const MixedNameError&) {
        row.constant = false;
        row.value = 1;
        row.pass = false;
      }
      rep.aux_ok = rep.aux_ok && row.pass;
      rep.aux_name_rows.push_back(std::move(row));
    }
  }

  return {std::move(*best), std::move(rep)};
}

}  // namespace soe
