#include "tile_map.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"

namespace soe {

std::string to_string(const LatticeVec& v) {
  return "(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")";
}

SquareTile make_square_tile(long side) {
  if (side < 1 || side % 2 == 0)
    throw TileGeometryError("tile side must be odd and positive, got " + std::to_string(side));
  return SquareTile{side};
}

long shifted_deficit(const SquareTile& f, const LatticeVec& g) {
  const long s = f.side;
  const long w = std::max(0L, s - std::abs(g.x));
  const long h = std::max(0L, s - std::abs(g.y));
  return s * s - w * h;
}

Rat boundary_ratio(const SquareTile& f, const SquareTile& f_next) {
  const long s = f.side + f_next.side - 1;  // side of the sumset square
  return rat(s * s - f_next.size(), f_next.size());
}

TilingOffsets tile_square(const SquareTile& outer, const SquareTile& inner) {
  if (outer.side % inner.side != 0)
    throw TileGeometryError("side " + std::to_string(inner.side) + " does not divide side " +
                            std::to_string(outer.side));
  const long q = outer.side / inner.side;
  const long qr = (q - 1) / 2;
  TilingOffsets result;
  for (long b = -qr; b <= qr; ++b)
    for (long a = -qr; a <= qr; ++a) result.offsets.push_back({a * inner.side, b * inner.side});

  std::set<LatticeVec> seen;
  const long ir = inner.radius();
  for (const LatticeVec& c : result.offsets)
    for (long y = -ir; y <= ir; ++y)
      for (long x = -ir; x <= ir; ++x) {
        const LatticeVec p = c + LatticeVec{x, y};
        if (!outer.contains(p))
          throw TileGeometryError("translate escapes the outer square at " + to_string(p));
        if (!seen.insert(p).second)
          throw TileGeometryError("translates overlap at " + to_string(p));
      }
  if (static_cast<long>(seen.size()) != outer.size())
    throw TileGeometryError("translates leave the outer square uncovered");
  return result;
}

std::vector<LatticeVec> tile_traversal(const SquareTile& t, PhiOrder order) {
  const long r = t.radius();
  std::vector<LatticeVec> out;
  out.reserve(t.size());
  long row = 0;
  for (long y = -r; y <= r; ++y, ++row) {
    const bool flip = order == PhiOrder::boustrophedon && row % 2 == 1;
    for (long i = 0; i < t.side; ++i) {
      const long x = flip ? r - i : -r + i;
      out.push_back({x, y});
    }
  }
  return out;
}

std::optional<long> ColumnToTileMap::height_of(const LatticeVec& f, std::size_t atom) const {
  const auto& table = phi[sigma[atom]];
  for (long t = 0; t < static_cast<long>(table.size()); ++t)
    if (table[t] == f) return t;
  return std::nullopt;
}

std::optional<ColumnToTileMap::Position> ColumnToTileMap::locate(const Rat& x) const {
  const long t = tower.level_of(x);
  if (t < 0) return std::nullopt;
  const PiecewiseTranslation inv = tower.map->inverse();
  Rat b = x;
  for (long i = 0; i < t; ++i) b = inv.apply(b);
  for (std::size_t a = 0; a < atoms.size(); ++a)
    if (atoms[a].set.contains(b)) return Position{a, t};
  return std::nullopt;
}

std::string ColumnToTileMap::to_json() const {
  nlohmann::json j;
  j["side"] = tile.side;
  j["height"] = tower.height;
  j["atoms"] = nlohmann::json::array();
  for (std::size_t a = 0; a < atoms.size(); ++a)
    j["atoms"].push_back({{"name", atoms[a].name}, {"index", sigma[a]}});
  j["phi"] = nlohmann::json::array();
  for (const auto& table : phi) {
    nlohmann::json rows = nlohmann::json::array();
    for (const LatticeVec& v : table) rows.push_back({v.x, v.y});
    j["phi"].push_back(std::move(rows));
  }
  return j.dump();
}

Tower rank_one_tower(const RankOneSystem& system, long height) {
  const long total = static_cast<long>(system.levels.size());
  if (height < 1 || total % height != 0)
    throw std::invalid_argument("height " + std::to_string(height) + " does not divide " +
                                std::to_string(total));
  std::vector<IntervalSet::Piece> raw;
  for (long j = 0; j < total; j += height)
    for (const auto& p : system.levels[j].pieces()) raw.push_back(p);
  return tower_from_levels(std::make_shared<PiecewiseTranslation>(system.map),
                           IntervalSet::normalize(std::move(raw)), height);
}

namespace {

// Orbit images S^t(A) for t = 0..height-1.
std::vector<IntervalSet> column_cells(const Tower& tower, const IntervalSet& atom) {
  std::vector<IntervalSet> cells;
  cells.reserve(tower.height);
  cells.push_back(atom);
  for (long t = 1; t < tower.height; ++t) cells.push_back(tower.map->apply_set(cells.back()));
  return cells;
}

void verify_nesting(const ColumnToTileMap& cur, const ColumnToTileMap& prev) {
  const TilingOffsets tiling = tile_square(cur.tile, prev.tile);
  const long h_prev = prev.tower.height;
  for (std::size_t ai = 0; ai < cur.atoms.size(); ++ai) {
    const auto& atom = cur.atoms[ai];
    const std::vector<IntervalSet> cells = column_cells(cur.tower, atom.set);
    std::set<LatticeVec> used;
    for (long i = 0; i < cur.tower.height; ++i) {
      const IntervalSet hit = set_intersect(cells[i], prev.tower.base);
      if (hit.is_empty()) continue;
      if (hit != cells[i])
        throw NestingError(atom.name, i, "base indicator is not constant on the atom level");
      if (i + h_prev > cur.tower.height) continue;
      std::size_t pa = 0;
      bool found = false;
      for (std::size_t p = 0; p < prev.atoms.size(); ++p)
        if (is_subset(cells[i], prev.atoms[p].set)) {
          pa = p;
          found = true;
          break;
        }
      if (!found) throw NestingError(atom.name, i, "level straddles previous-stage atoms");
      const LatticeVec c = cur.alpha(i, ai) - prev.alpha(0, pa);
      if (std::find(tiling.offsets.begin(), tiling.offsets.end(), c) == tiling.offsets.end())
        throw NestingError(atom.name, i, "offset " + to_string(c) + " is not a tiling translate");
      if (!used.insert(c).second)
        throw NestingError(atom.name, i, "offset " + to_string(c) + " reused");
      for (long j = 0; j < h_prev; ++j)
        if (cur.alpha(i + j, ai) != prev.alpha(j, pa) + c)
          throw NestingError(atom.name, i,
                             "identity fails at window offset " + std::to_string(j));
    }
  }
}

std::vector<std::vector<LatticeVec>> nested_phi(const Tower& tower,
                                                const std::vector<PureAtom>& atoms,
                                                const SquareTile& tile, PhiOrder order,
                                                const ColumnToTileMap& prev) {
  const long h_prev = prev.tower.height;
  const SquareTile coarse = make_square_tile(tile.side / prev.tile.side);
  std::vector<LatticeVec> offset_order = tile_traversal(coarse, order);
  for (LatticeVec& c : offset_order) c = {c.x * prev.tile.side, c.y * prev.tile.side};
  const std::vector<LatticeVec> fill_order = tile_traversal(tile, order);

  std::vector<std::vector<LatticeVec>> phi;
  for (const auto& atom : atoms) {
    const std::vector<IntervalSet> cells = column_cells(tower, atom.set);
    std::vector<LatticeVec> table(tower.height);
    std::vector<bool> assigned(tower.height, false);
    std::set<LatticeVec> used;
    std::size_t next_offset = 0;
    for (long i = 0; i < tower.height; ++i) {
      if (i + h_prev > tower.height) break;
      const IntervalSet hit = set_intersect(cells[i], prev.tower.base);
      if (hit.is_empty()) continue;
      if (hit != cells[i])
        throw NestingError(atom.name, i, "base indicator is not constant on the atom level");
      std::size_t pa = 0;
      bool found = false;
      for (std::size_t p = 0; p < prev.atoms.size(); ++p)
        if (is_subset(cells[i], prev.atoms[p].set)) {
          pa = p;
          found = true;
          break;
        }
      if (!found) throw NestingError(atom.name, i, "level straddles previous-stage atoms");
      if (next_offset >= offset_order.size())
        throw NestingError(atom.name, i, "more occurrences than tiling translates");
      const LatticeVec c = offset_order[next_offset++];
      for (long j = 0; j < h_prev; ++j) {
        table[i + j] = prev.alpha(j, pa) + c;
        assigned[i + j] = true;
        used.insert(table[i + j]);
      }
      i += h_prev - 1;
    }
    std::size_t fi = 0;
    for (long t = 0; t < tower.height; ++t) {
      if (assigned[t]) continue;
      while (fi < fill_order.size() && used.count(fill_order[fi])) ++fi;
      if (fi == fill_order.size()) throw NestingError(atom.name, t, "tile cells exhausted");
      table[t] = fill_order[fi];
      used.insert(fill_order[fi]);
    }
    phi.push_back(std::move(table));
  }
  return phi;
}

}  // namespace

ColumnToTileMap build_column_to_tile(const Tower& tower, std::vector<PureAtom> atoms,
                                     const SquareTile& tile, const TileAssignment& assignment,
                                     const ColumnToTileMap* previous) {
  if (tower.height != tile.size()) throw TileShapeError(tower.height, tile.size());
  if (atoms.empty()) throw std::invalid_argument("empty base partition");
  if (previous && tile.side % previous->tile.side != 0)
    throw TileGeometryError("previous tile side does not divide the current side");

  ColumnToTileMap map;
  map.tower = tower;
  map.tile = tile;
  map.atoms = std::move(atoms);

  if (!assignment.phi.empty()) {
    map.phi = assignment.phi;
    map.sigma = assignment.sigma;
    if (map.sigma.empty() && map.phi.size() == map.atoms.size())
      for (std::size_t a = 0; a < map.atoms.size(); ++a) map.sigma.push_back(a);
  } else if (previous) {
    map.phi = nested_phi(tower, map.atoms, tile, assignment.order, *previous);
    for (std::size_t a = 0; a < map.atoms.size(); ++a) map.sigma.push_back(a);
  } else {
    map.phi = {tile_traversal(tile, assignment.order)};
    map.sigma.assign(map.atoms.size(), 0);
  }

  if (map.sigma.size() != map.atoms.size())
    throw std::invalid_argument("index assignment size does not match the atom count");
  if (map.atoms.size() < map.phi.size())
    throw std::invalid_argument("fewer atoms than tile-map indices");
  std::vector<bool> hit(map.phi.size(), false);
  for (std::size_t v : map.sigma) {
    if (v >= map.phi.size()) throw std::invalid_argument("index assignment out of range");
    hit[v] = true;
  }
  if (std::find(hit.begin(), hit.end(), false) != hit.end())
    throw std::invalid_argument("index assignment is not surjective");

  for (const auto& table : map.phi) {
    if (static_cast<long>(table.size()) != tower.height)
      throw TileShapeError(tower.height, static_cast<long>(table.size()));
    std::set<LatticeVec> seen;
    for (const LatticeVec& v : table) {
      if (!tile.contains(v))
        throw TileGeometryError("cell " + to_string(v) + " lies outside the tile");
      if (!seen.insert(v).second)
        throw TileGeometryError("cell " + to_string(v) + " assigned twice");
    }
  }

  if (previous) verify_nesting(map, *previous);
  return map;
}

namespace {

// Step x through |d| applications of the tower map or its inverse.
Rat walk(const Tower& tower, const Rat& x, long d) {
  Rat y = x;
  if (d >= 0) {
    for (long i = 0; i < d; ++i) y = tower.map->apply(y);
  } else {
    const PiecewiseTranslation inv = tower.map->inverse();
    for (long i = 0; i < -d; ++i) y = inv.apply(y);
  }
  return y;
}

// First 1-based stage from which every later defined value equals the final
// one; requires the last stage to be defined.
template <typename V>
long first_stable(const std::vector<std::optional<V>>& values) {
  const std::optional<V>& last = values.back();
  long first = -1;
  for (std::size_t m = 0; m < values.size(); ++m) {
    if (values[m] && *values[m] == *last) {
      if (first < 0) first = static_cast<long>(m) + 1;
    } else {
      first = -1;
    }
  }
  return first;
}

}  // namespace

GeneratorMoveResult generator_move(const std::vector<ColumnToTileMap>& maps, const LatticeVec& s,
                                   const Rat& x) {
  if (maps.empty()) throw std::invalid_argument("no stages built");
  std::vector<std::optional<Rat>> values;
  for (const ColumnToTileMap& m : maps) {
    std::optional<Rat> v;
    if (const auto pos = m.locate(x)) {
      const LatticeVec target = s + m.alpha(pos->level, pos->atom);
      if (m.tile.contains(target))
        if (const auto t2 = m.height_of(target, pos->atom))
          v = walk(m.tower, x, *t2 - pos->level);
    }
    values.push_back(std::move(v));
  }
  if (!values.back())
    throw UnstabilizedError("generator move undefined at the last built stage for x = " +
                            to_string(x));
  const long stage = first_stable(values);
  if (stage < 0) throw UnstabilizedError("generator move never settles for x = " + to_string(x));
  return {*values.back(), stage};
}

LambdaResult lambda_cocycle(const std::vector<ColumnToTileMap>& maps, const Rat& x, long k) {
  if (maps.empty()) throw std::invalid_argument("no stages built");
  std::vector<std::optional<LatticeVec>> values;
  for (const ColumnToTileMap& m : maps) {
    std::optional<LatticeVec> v;
    if (const auto pos = m.locate(x))
      if (0 <= pos->level + k && pos->level + k < m.tower.height)
        v = m.alpha(pos->level + k, pos->atom) - m.alpha(pos->level, pos->atom);
    values.push_back(v);
  }
  if (!values.back())
    throw HorizonError("lattice displacement for step " + std::to_string(k) +
                       " undefined at the last built stage");
  const long stage = first_stable(values);
  if (stage < 0) throw HorizonError("lattice displacement still moving at the horizon");
  return {*values.back(), stage};
}

KappaResult kappa_cocycle(const std::vector<ColumnToTileMap>& maps, const Rat& x,
                          const LatticeVec& g) {
  if (maps.empty()) throw std::invalid_argument("no stages built");
  std::vector<std::optional<long>> values;
  for (const ColumnToTileMap& m : maps) {
    std::optional<long> v;
    if (const auto pos = m.locate(x))
      if (const auto t2 = m.height_of(g + m.alpha(pos->level, pos->atom), pos->atom))
        v = *t2 - pos->level;
    values.push_back(v);
  }
  if (!values.back())
    throw HorizonError("step count for displacement " + to_string(g) +
                       " undefined at the last built stage");
  const long stage = first_stable(values);
  if (stage < 0) throw HorizonError("step count still moving at the horizon");
  return {*values.back(), stage};
}

ExceptionalReport exceptional_set(const std::vector<ColumnToTileMap>& maps, std::size_t stage,
                                  const LatticeVec& s, const Rat& eps_stage, const Rat& eps_prev) {
  if (stage < 2 || stage > maps.size())
    throw std::invalid_argument("stage must have a built predecessor");
  const ColumnToTileMap& cur = maps[stage - 1];
  const ColumnToTileMap& prev = maps[stage - 2];

  ExceptionalReport report;
  IntervalSet off_cur = cur.tower.covered().complement();
  IntervalSet off_prev = prev.tower.covered().complement();
  IntervalSet exits;
  for (std::size_t a = 0; a < cur.atoms.size(); ++a) {
    IntervalSet cell = cur.atoms[a].set;
    for (long t = 0; t < cur.tower.height; ++t) {
      if (t > 0) cell = cur.tower.map->apply_set(cell);
      if (!cur.tile.contains(s + cur.alpha(t, a))) exits = set_union(exits, cell);
    }
  }
  IntervalSet rim;
  const long m = prev.tower.height - 1;
  for (long t = 0; t < m; ++t) {
    rim = set_union(rim, cur.tower.levels[t]);
    rim = set_union(rim, cur.tower.levels[cur.tower.height - 1 - t]);
  }
  report.part_mass = {off_cur.measure(), off_prev.measure(), exits.measure(), rim.measure()};
  report.mass = set_union(set_union(off_cur, off_prev), set_union(exits, rim)).measure();
  report.bound = rat(4, 1) * eps_stage + eps_prev;
  report.pass = report.mass < report.bound;
  return report;
}

namespace {

Rat rat_pow(const Rat& base, long e) {
  Rat out = 1;
  for (long i = 0; i < e; ++i) out *= base;
  return out;
}

// Fixed-at-stage masses from per-stage value layers: the stage-n set is
// where every layer from n on is defined and matches the final one.
template <typename V>
std::vector<Rat> fixed_stage_masses(const std::vector<std::map<V, IntervalSet>>& layers,
                                    Rat* residual) {
  const std::size_t last = layers.size() - 1;
  std::vector<IntervalSet> match(layers.size());
  for (const auto& [v, set] : layers[last]) match[last] = set_union(match[last], set);
  for (std::size_t m = 0; m < last; ++m)
    for (const auto& [v, set] : layers[m]) {
      const auto it = layers[last].find(v);
      if (it != layers[last].end())
        match[m] = set_union(match[m], set_intersect(set, it->second));
    }
  std::vector<IntervalSet> agree(layers.size());
  agree[last] = match[last];
  for (std::size_t m = last; m-- > 0;) agree[m] = set_intersect(match[m], agree[m + 1]);
  std::vector<Rat> masses;
  masses.push_back(agree[0].measure());
  for (std::size_t n = 1; n < layers.size(); ++n)
    masses.push_back(set_difference(agree[n], agree[n - 1]).measure());
  *residual = Rat(1) - agree[last].measure();
  return masses;
}

}  // namespace

Z2BoundReport z2_bound_check(const std::vector<ColumnToTileMap>& maps, long k, const LatticeVec& g,
                             const Z2Schedule& schedule) {
  if (maps.empty()) throw std::invalid_argument("no stages built");
  const long last = static_cast<long>(maps.size());

  std::vector<std::map<LatticeVec, IntervalSet>> lambda_layers(maps.size());
  std::vector<std::map<long, IntervalSet>> kappa_layers(maps.size());
  for (long n = 0; n < last; ++n) {
    const ColumnToTileMap& m = maps[n];
    for (std::size_t a = 0; a < m.atoms.size(); ++a) {
      IntervalSet cell = m.atoms[a].set;
      for (long t = 0; t < m.tower.height; ++t) {
        if (t > 0) cell = m.tower.map->apply_set(cell);
        if (0 <= t + k && t + k < m.tower.height) {
          const LatticeVec v = m.alpha(t + k, a) - m.alpha(t, a);
          auto& slot = lambda_layers[n][v];
          slot = set_union(slot, cell);
        }
        if (const auto t2 = m.height_of(g + m.alpha(t, a), a)) {
          auto& slot = kappa_layers[n][*t2 - t];
          slot = set_union(slot, cell);
        }
      }
    }
  }

  Z2BoundReport report;
  const std::vector<Rat> d_mass = fixed_stage_masses(lambda_layers, &report.d_residual);
  const std::vector<Rat> e_mass = fixed_stage_masses(kappa_layers, &report.e_residual);
  report.d_total = 0;
  for (const Rat& m : d_mass) report.d_total += m;

  for (long n = 1; n <= last; ++n) {
    report.lambda_ledger.rows.push_back({n, d_mass[n - 1], 4 * maps[n - 1].tile.size()});
    report.kappa_ledger.rows.push_back({n, e_mass[n - 1], 2 * maps[n - 1].tower.height});
  }

  const Rat ratio = schedule.eps_ratio;
  const long a = std::abs(g.x), b = std::abs(g.y);
  const long side_last = maps[last - 1].tile.side;
  report.inconclusive = ratio >= 1 || schedule.growth < 2 || schedule.side_growth < 2 ||
                        side_last * schedule.side_growth <= std::max(a, b);

  const auto eps = [&](long n) -> Rat { return schedule.eps_coeff * rat_pow(ratio, n); };
  for (long n = 2; n <= last; ++n) {
    BoundRow d_row{n, d_mass[n - 1], 0, false};
    BoundRow e_row{n, e_mass[n - 1], 0, false};
    if (!report.inconclusive) {
      const Rat eps_tail = eps(n) / (Rat(1) - ratio);
      Rat t_sum = 0;
      for (long i = n - 1; i <= last; ++i) t_sum += rat(1, maps[i - 1].tower.height);
      t_sum += rat(1, maps[last - 1].tower.height * (schedule.growth - 1));
      d_row.bound = eps(n - 1) + 3 * eps_tail + std::abs(k) * t_sum;
      d_row.pass = d_row.measured < d_row.bound;

      Rat f_sum = 0;
      for (long i = n - 1; i <= last; ++i) {
        const SquareTile& f = maps[i - 1].tile;
        f_sum += rat(shifted_deficit(f, g), f.size());
      }
      const long sg = schedule.side_growth;
      f_sum += rat(a + b, side_last * (sg - 1)) -
               rat(a * b, side_last * side_last * (sg * sg - 1));
      e_row.bound = eps(n - 1) + 3 * eps_tail + f_sum;
      e_row.pass = e_row.measured < e_row.bound;
    }
    report.d_rows.push_back(d_row);
    report.e_rows.push_back(e_row);
  }

  for (long n = 1; n < last; ++n) {
    const Rat measured = boundary_ratio(maps[n - 1].tile, maps[n].tile);
    const Rat bound = eps(n + 1);
    report.boundary_rows.push_back({n, measured, bound, measured < bound});
  }

  report.d_ok = !report.inconclusive && report.d_total <= 1;
  report.e_ok = !report.inconclusive;
  for (const BoundRow& r : report.d_rows) report.d_ok = report.d_ok && r.pass;
  for (const BoundRow& r : report.e_rows) report.e_ok = report.e_ok && r.pass;
  return report;
}

}  // namespace soe
