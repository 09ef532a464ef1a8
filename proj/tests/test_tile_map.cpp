#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "json.hpp"

#include "core/tile_map.hpp"

using namespace soe;

namespace {

LabeledPartition trivial() { return LabeledPartition({{"X", IntervalSet::unit()}}); }

Rat midpoint(const IntervalSet& s) {
  REQUIRE(!s.is_empty());
  const auto& p = s.pieces().front();
  return (p.first + p.second) / 2;
}

// Independent lattice enumeration of |(F + F') \ F'|.
long sumset_excess_oracle(long side, long side_next) {
  const long r = (side - 1) / 2, rn = (side_next - 1) / 2;
  long count = 0;
  for (long y = -(r + rn); y <= r + rn; ++y)
    for (long x = -(r + rn); x <= r + rn; ++x)
      if (std::abs(x) > rn || std::abs(y) > rn) ++count;
  return count;
}

long deficit_oracle(long side, LatticeVec g) {
  const long r = (side - 1) / 2;
  long count = 0;
  for (long y = -r; y <= r; ++y)
    for (long x = -r; x <= r; ++x)
      if (std::abs(x - g.x) > r || std::abs(y - g.y) > r) ++count;
  return count;
}

}  // namespace

TEST_CASE("square tile basics and side validation") {
  const SquareTile t = make_square_tile(5);
  CHECK(t.radius() == 2);
  CHECK(t.size() == 25);
  CHECK(t.contains({-2, 2}));
  CHECK(!t.contains({3, 0}));
  CHECK_THROWS_AS(make_square_tile(4), TileGeometryError);
  CHECK_THROWS_AS(make_square_tile(0), TileGeometryError);
  CHECK_THROWS_AS(make_square_tile(-3), TileGeometryError);
}

TEST_CASE("tiling offsets: grid, identity, and divisibility") {
  const TilingOffsets grid = tile_square(make_square_tile(9), make_square_tile(3));
  REQUIRE(grid.offsets.size() == 9);
  for (long c : {-3L, 0L, 3L})
    for (long d : {-3L, 0L, 3L})
      CHECK(std::find(grid.offsets.begin(), grid.offsets.end(), LatticeVec{d, c}) !=
            grid.offsets.end());

  const TilingOffsets self = tile_square(make_square_tile(7), make_square_tile(7));
  REQUIRE(self.offsets.size() == 1);
  CHECK(self.offsets[0] == LatticeVec{0, 0});

  CHECK_THROWS_AS(tile_square(make_square_tile(9), make_square_tile(5)), TileGeometryError);
}

TEST_CASE("sumset boundary ratio against lattice enumeration") {
  CHECK(boundary_ratio(make_square_tile(3), make_square_tile(9)) == rat(40, 81));
  CHECK(sumset_excess_oracle(3, 9) == 40);
  for (long s : {3L, 5L, 9L})
    for (long sn : {9L, 27L})
      CHECK(boundary_ratio(make_square_tile(s), make_square_tile(sn)) ==
            rat(sumset_excess_oracle(s, sn), sn * sn));
}

TEST_CASE("shifted deficit against lattice enumeration") {
  for (long s : {3L, 5L, 9L}) {
    CHECK(shifted_deficit(make_square_tile(s), {1, 0}) == s);
    CHECK(rat(shifted_deficit(make_square_tile(s), {1, 0}), s * s) == rat(1, s));
    for (long gx = -4; gx <= 4; ++gx)
      for (long gy = -4; gy <= 4; ++gy)
        CHECK(shifted_deficit(make_square_tile(s), {gx, gy}) == deficit_oracle(s, {gx, gy}));
  }
}

TEST_CASE("tile traversals are bijections with the expected local order") {
  const SquareTile t = make_square_tile(3);
  const auto rm = tile_traversal(t, PhiOrder::row_major);
  REQUIRE(rm.size() == 9);
  CHECK(rm[0] == LatticeVec{-1, -1});
  CHECK(rm[2] == LatticeVec{1, -1});
  CHECK(rm[3] == LatticeVec{-1, 0});
  CHECK(rm[4] == LatticeVec{0, 0});
  const auto bo = tile_traversal(t, PhiOrder::boustrophedon);
  CHECK(bo[2] == LatticeVec{1, -1});
  CHECK(bo[3] == LatticeVec{1, 0});
  CHECK(bo[5] == LatticeVec{-1, 0});
  std::set<LatticeVec> seen(bo.begin(), bo.end());
  CHECK(seen.size() == 9);
}

TEST_CASE("rank-one stage towers are exact and nested") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3});
  REQUIRE(sys.levels.size() == 81);
  const Tower t1 = rank_one_tower(sys, 9);
  const Tower t2 = rank_one_tower(sys, 81);
  CHECK(t1.achieved_epsilon == 0);
  CHECK(t2.achieved_epsilon == 0);
  CHECK(t1.covered() == IntervalSet::unit());
  CHECK(is_subset(t2.base, t1.base));
  CHECK_THROWS_AS(rank_one_tower(sys, 7), std::invalid_argument);
}

TEST_CASE("single-stage map: explicit bijection, shape error, purity") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3});
  const Tower t1 = rank_one_tower(sys, 9);
  const auto atoms = pure_partition(t1, trivial());
  REQUIRE(atoms.size() == 1);

  const ColumnToTileMap map =
      build_column_to_tile(t1, atoms, make_square_tile(3), {PhiOrder::row_major});
  CHECK(map.phi.size() == 1);
  CHECK(map.phi[0] == tile_traversal(make_square_tile(3), PhiOrder::row_major));
  CHECK(map.alpha(0, 0) == LatticeVec{-1, -1});
  CHECK(map.alpha(4, 0) == LatticeVec{0, 0});
  CHECK(map.height_of({1, 0}, 0) == 5);

  CHECK_THROWS_AS(build_column_to_tile(t1, atoms, make_square_tile(5)), TileShapeError);

  const LabeledPartition p({{"a", IntervalSet::interval(0, rat(1, 3))},
                            {"b", IntervalSet::interval(rat(1, 3), 1)}});
  const auto pure = pure_partition(t1, p);
  const ColumnToTileMap pm = build_column_to_tile(t1, pure, make_square_tile(3));
  for (const auto& atom : pm.atoms) {
    IntervalSet cell = atom.set;
    for (long t = 0; t < t1.height; ++t) {
      if (t > 0) cell = t1.map->apply_set(cell);
      const bool in_a = is_subset(cell, p.at(0).set);
      const bool in_b = is_subset(cell, p.at(1).set);
      CHECK(in_a != in_b);
    }
  }
}

TEST_CASE("two-stage nest is built and verified; composition offsets are constant per window") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3});
  const Tower t1 = rank_one_tower(sys, 9);
  const Tower t2 = rank_one_tower(sys, 81);
  const ColumnToTileMap m1 = build_column_to_tile(t1, pure_partition(t1, trivial()),
                                                  make_square_tile(3));
  const ColumnToTileMap m2 = build_column_to_tile(t2, pure_partition(t2, trivial()),
                                                  make_square_tile(9), {}, &m1);
  CHECK(m2.phi.size() == 1);
  CHECK(m2.phi[0].size() == 81);

  // Pointwise oracle: walking the full stage-2 column, the offset between the
  // stage-2 cell and the stage-1 cell of the same point is constant on each
  // stage-1 window and changes across windows through tiling translates.
  Rat x = midpoint(t2.base);
  std::set<LatticeVec> window_offsets;
  LatticeVec current{0, 0};
  for (long t = 0; t < 81; ++t) {
    if (t > 0) x = t2.map->apply(x);
    const auto pos1 = m1.locate(x);
    REQUIRE(pos1.has_value());
    CHECK(pos1->level == t % 9);
    const LatticeVec c = m2.alpha(t, 0) - m1.alpha(pos1->level, pos1->atom);
    if (t % 9 == 0) {
      CHECK(window_offsets.insert(c).second);
      current = c;
    } else {
      CHECK(c == current);
    }
  }
  CHECK(window_offsets.size() == 9);
  const TilingOffsets tiling = tile_square(make_square_tile(9), make_square_tile(3));
  for (const LatticeVec& c : window_offsets)
    CHECK(std::find(tiling.offsets.begin(), tiling.offsets.end(), c) != tiling.offsets.end());
}

TEST_CASE("a flat serpentine table on the outer tower violates nesting") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3});
  const Tower t1 = rank_one_tower(sys, 9);
  const Tower t2 = rank_one_tower(sys, 81);
  const ColumnToTileMap m1 = build_column_to_tile(t1, pure_partition(t1, trivial()),
                                                  make_square_tile(3));
  TileAssignment flat;
  flat.phi = {tile_traversal(make_square_tile(9), PhiOrder::boustrophedon)};
  CHECK_THROWS_AS(build_column_to_tile(t2, pure_partition(t2, trivial()), make_square_tile(9),
                                       flat, &m1),
                  NestingError);
  try {
    build_column_to_tile(t2, pure_partition(t2, trivial()), make_square_tile(9), flat, &m1);
  } catch (const NestingError& e) {
    CHECK(e.occurrence == 0);
    CHECK(!e.atom.empty());
  }
}

TEST_CASE("generator moves on a single stage") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3});
  const Tower t1 = rank_one_tower(sys, 9);
  const ColumnToTileMap m1 = build_column_to_tile(t1, pure_partition(t1, trivial()),
                                                  make_square_tile(3), {PhiOrder::row_major});
  const std::vector<ColumnToTileMap> maps{m1};

  const Rat x = midpoint(t1.levels[4]);  // cell (0,0)
  const auto right = generator_move(maps, {1, 0}, x);
  CHECK(right.point == t1.map->apply(x));
  CHECK(right.stabilized_at_stage == 1);
  const auto up = generator_move(maps, {0, 1}, x);
  CHECK(up.point == t1.map->power(3).apply(x));

  const auto back = generator_move(maps, {-1, 0}, right.point);
  CHECK(back.point == x);
  CHECK(back.stabilized_at_stage == 1);

  const Rat corner = midpoint(t1.levels[8]);  // cell (1,1)
  CHECK_THROWS_AS(generator_move(maps, {1, 0}, corner), UnstabilizedError);
}

TEST_CASE("generator moves stabilize at stage one across a verified nest") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3});
  const Tower t1 = rank_one_tower(sys, 9);
  const Tower t2 = rank_one_tower(sys, 81);
  const ColumnToTileMap m1 = build_column_to_tile(t1, pure_partition(t1, trivial()),
                                                  make_square_tile(3));
  const ColumnToTileMap m2 = build_column_to_tile(t2, pure_partition(t2, trivial()),
                                                  make_square_tile(9), {}, &m1);
  const std::vector<ColumnToTileMap> both{m1, m2};
  const std::vector<ColumnToTileMap> only1{m1};

  long stabilized_early = 0, checked = 0;
  for (long j = 0; j < 81; ++j) {
    const Rat x = midpoint(sys.levels[j]);
    for (const LatticeVec s : {LatticeVec{1, 0}, LatticeVec{0, 1}}) {
      std::optional<Rat> v1;
      try {
        v1 = generator_move(only1, s, x).point;
      } catch (const UnstabilizedError&) {
      }
      std::optional<GeneratorMoveResult> v2;
      try {
        v2 = generator_move(both, s, x);
      } catch (const UnstabilizedError&) {
      }
      if (v1 && v2) {
        ++checked;
        CHECK(v2->point == *v1);
        CHECK(v2->stabilized_at_stage == 1);
        ++stabilized_early;
      }
    }
  }
  CHECK(checked > 80);
  CHECK(stabilized_early == checked);
}

TEST_CASE("cocycle queries: identities, table lookups, horizon") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3});
  const Tower t1 = rank_one_tower(sys, 9);
  const ColumnToTileMap m1 = build_column_to_tile(t1, pure_partition(t1, trivial()),
                                                  make_square_tile(3), {PhiOrder::row_major});
  const std::vector<ColumnToTileMap> maps{m1};

  const Rat x = midpoint(t1.levels[4]);
  CHECK(lambda_cocycle(maps, x, 0).value == LatticeVec{0, 0});
  CHECK(lambda_cocycle(maps, x, 0).fixed_stage == 1);
  CHECK(kappa_cocycle(maps, x, {0, 0}).value == 0);
  CHECK(kappa_cocycle(maps, x, {0, 0}).fixed_stage == 1);

  CHECK(lambda_cocycle(maps, x, 1).value == LatticeVec{1, 0});
  CHECK(lambda_cocycle(maps, x, -1).value == LatticeVec{-1, 0});
  CHECK(lambda_cocycle(maps, x, 3).value == LatticeVec{0, 1});
  CHECK(kappa_cocycle(maps, x, {1, 0}).value == 1);
  CHECK(kappa_cocycle(maps, x, {0, 1}).value == 3);

  const Rat top = midpoint(t1.levels[8]);
  CHECK_THROWS_AS(lambda_cocycle(maps, top, 1), HorizonError);
  CHECK_THROWS_AS(kappa_cocycle(maps, top, {1, 0}), HorizonError);
}

TEST_CASE("exceptional set measured part by part") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3});
  const Tower t1 = rank_one_tower(sys, 9);
  const Tower t2 = rank_one_tower(sys, 81);
  const ColumnToTileMap m1 = build_column_to_tile(t1, pure_partition(t1, trivial()),
                                                  make_square_tile(3));
  const ColumnToTileMap m2 = build_column_to_tile(t2, pure_partition(t2, trivial()),
                                                  make_square_tile(9), {}, &m1);
  const std::vector<ColumnToTileMap> maps{m1, m2};

  const auto report = exceptional_set(maps, 2, {1, 0}, rat(1, 4), rat(1, 2));
  CHECK(report.part_mass[0] == 0);
  CHECK(report.part_mass[1] == 0);
  CHECK(report.part_mass[2] == rat(1, 9));   // rightmost tile column exits
  CHECK(report.part_mass[3] == rat(16, 81));  // 8 top and 8 bottom levels
  CHECK(report.bound == rat(3, 2));
  CHECK(report.mass <= report.part_mass[2] + report.part_mass[3]);
  CHECK(report.pass);

  CHECK_THROWS_AS(exceptional_set(maps, 1, {1, 0}, rat(1, 4), rat(1, 2)), std::invalid_argument);
}

TEST_CASE("fixed-stage masses match a pointwise oracle and respect the bounds") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3});
  const Tower t1 = rank_one_tower(sys, 9);
  const Tower t2 = rank_one_tower(sys, 81);
  const ColumnToTileMap m1 = build_column_to_tile(t1, pure_partition(t1, trivial()),
                                                  make_square_tile(3));
  const ColumnToTileMap m2 = build_column_to_tile(t2, pure_partition(t2, trivial()),
                                                  make_square_tile(9), {}, &m1);
  const std::vector<ColumnToTileMap> maps{m1, m2};

  const long k = 1;
  const LatticeVec g{1, 0};
  Z2Schedule schedule;
  const auto report = z2_bound_check(maps, k, g, schedule);

  REQUIRE(report.lambda_ledger.rows.size() == 2);
  REQUIRE(report.kappa_ledger.rows.size() == 2);
  CHECK(report.lambda_ledger.rows[0].size == 36);
  CHECK(report.lambda_ledger.rows[1].size == 4 * 81);
  CHECK(report.kappa_ledger.rows[0].size == 18);
  CHECK(report.kappa_ledger.rows[1].size == 2 * 81);

  // Pointwise oracle over the 81 grid cells: classify each cell's fixed
  // stage by evaluating both stages directly.
  Rat d1 = 0, d2 = 0, dres = 0, e1 = 0, e2 = 0, eres = 0;
  const Rat w = rat(1, 81);
  for (long j = 0; j < 81; ++j) {
    const Rat x = midpoint(sys.levels[j]);
    std::vector<std::optional<LatticeVec>> lv;
    std::vector<std::optional<long>> kv;
    for (const ColumnToTileMap& m : maps) {
      const auto pos = m.locate(x);
      REQUIRE(pos.has_value());
      std::optional<LatticeVec> l;
      if (pos->level + k >= 0 && pos->level + k < m.tower.height)
        l = m.alpha(pos->level + k, pos->atom) - m.alpha(pos->level, pos->atom);
      lv.push_back(l);
      std::optional<long> kk;
      if (const auto t2q = m.height_of(g + m.alpha(pos->level, pos->atom), pos->atom))
        kk = *t2q - pos->level;
      kv.push_back(kk);
    }
    if (!lv[1]) dres += w;
    else if (lv[0] && *lv[0] == *lv[1]) d1 += w;
    else d2 += w;
    if (!kv[1]) eres += w;
    else if (kv[0] && *kv[0] == *kv[1]) e1 += w;
    else e2 += w;
  }
  CHECK(report.lambda_ledger.rows[0].mass == d1);
  CHECK(report.lambda_ledger.rows[1].mass == d2);
  CHECK(report.d_residual == dres);
  CHECK(report.kappa_ledger.rows[0].mass == e1);
  CHECK(report.kappa_ledger.rows[1].mass == e2);
  CHECK(report.e_residual == eres);

  CHECK(report.d_total <= 1);
  REQUIRE(report.d_rows.size() == 1);
  REQUIRE(report.e_rows.size() == 1);
  CHECK(!report.inconclusive);
  CHECK(report.d_rows[0].pass);
  CHECK(report.e_rows[0].pass);
  CHECK(report.d_ok);
  CHECK(report.e_ok);

  REQUIRE(report.boundary_rows.size() == 1);
  CHECK(report.boundary_rows[0].measured == rat(40, 81));
  CHECK(report.boundary_rows[0].bound == rat(1, 4));
  CHECK(!report.boundary_rows[0].pass);  // reported, expected red at this scale

  Z2Schedule bad = schedule;
  bad.eps_ratio = 1;
  const auto inc = z2_bound_check(maps, k, g, bad);
  CHECK(inc.inconclusive);
  CHECK(!inc.d_ok);
  CHECK(!inc.e_ok);
}

TEST_CASE("ledger handoff feeds the entropy tail check") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3});
  const Tower t1 = rank_one_tower(sys, 9);
  const Tower t2 = rank_one_tower(sys, 81);
  const ColumnToTileMap m1 = build_column_to_tile(t1, pure_partition(t1, trivial()),
                                                  make_square_tile(3));
  const ColumnToTileMap m2 = build_column_to_tile(t2, pure_partition(t2, trivial()),
                                                  make_square_tile(9), {}, &m1);
  const auto report = z2_bound_check({m1, m2}, 1, {1, 0}, {});

  const auto sums = ledger_partial_sums(report.lambda_ledger);
  REQUIRE(sums.size() == 2);
  CHECK(sums.back().lower_double() >= 0);
  const auto kappa_sum = ledger_sum(report.kappa_ledger);
  CHECK(kappa_sum.upper_double() < 20.0);
}

TEST_CASE("three nested stages: build, composition, and query stability") {
  const RankOneSystem sys = build_rank_one({3, 3, 3, 3, 3, 3});
  REQUIRE(sys.levels.size() == 729);
  const Tower t1 = rank_one_tower(sys, 9);
  const Tower t2 = rank_one_tower(sys, 81);
  const Tower t3 = rank_one_tower(sys, 729);
  const ColumnToTileMap m1 = build_column_to_tile(t1, pure_partition(t1, trivial()),
                                                  make_square_tile(3));
  const ColumnToTileMap m2 = build_column_to_tile(t2, pure_partition(t2, trivial()),
                                                  make_square_tile(9), {}, &m1);
  const ColumnToTileMap m3 = build_column_to_tile(t3, pure_partition(t3, trivial()),
                                                  make_square_tile(27), {}, &m2);
  const std::vector<ColumnToTileMap> maps{m1, m2, m3};

  // Composition across stages 1 and 3: within a stage-1 window, the offset
  // between the stage-3 and stage-1 cells of a point is a single constant.
  Rat x = midpoint(sys.levels[40]);
  const auto p3 = m3.locate(x);
  const auto p1 = m1.locate(x);
  REQUIRE(p3.has_value());
  REQUIRE(p1.has_value());
  const LatticeVec c = m3.alpha(p3->level, p3->atom) - m1.alpha(p1->level, p1->atom);
  Rat y = x;
  for (long step = 1; p1->level + step < 9; ++step) {
    y = t1.map->apply(y);
    const auto q3 = m3.locate(y);
    const auto q1 = m1.locate(y);
    REQUIRE(q3.has_value());
    REQUIRE(q1.has_value());
    CHECK(q1->level == p1->level + step);
    CHECK(m3.alpha(q3->level, q3->atom) - m1.alpha(q1->level, q1->atom) == c);
  }

  const auto l = lambda_cocycle(maps, x, 1);
  CHECK(l.fixed_stage == 1);
  const auto mv = generator_move(maps, {1, 0}, x);
  CHECK(mv.stabilized_at_stage >= 1);
  const auto back = generator_move(maps, {-1, 0}, mv.point);
  CHECK(back.point == x);
}

TEST_CASE("tile map serializes to a readable table") {
  const RankOneSystem sys = build_rank_one({3, 3});
  const Tower t1 = rank_one_tower(sys, 9);
  const ColumnToTileMap m1 = build_column_to_tile(t1, pure_partition(t1, trivial()),
                                                  make_square_tile(3), {PhiOrder::row_major});
  const auto j = nlohmann::json::parse(m1.to_json());
  CHECK(j["side"] == 3);
  CHECK(j["height"] == 9);
  REQUIRE(j["phi"].size() == 1);
  REQUIRE(j["phi"][0].size() == 9);
  CHECK(j["phi"][0][0] == nlohmann::json({-1, -1}));
  CHECK(j["atoms"][0]["index"] == 0);
}
