#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "core/weak_mixing.hpp"

using namespace soe;

namespace {

PiecewiseTranslation odo(unsigned depth) { return dyadic_odometer(depth).map; }

}  // namespace

TEST_CASE("schedule_next finds minimal parameters") {
  // K=2, eps=1/4: smallest L with 8/L < 1/4 is 33
  const auto np = schedule_next({}, 1, 2, rat(1, 4), 1 << 20);
  CHECK(np.K == 2);
  CHECK(np.L == 33);
  // M: multiple of 33 above 33/(1/4) = 132
  CHECK(np.M == 165);
  for (const auto& c : np.constraints) CHECK(c.ok);

  // case 2 with the same K has the identical constraint shape
  const auto np2 = schedule_next({}, 2, 2, rat(1, 4), 1 << 20);
  CHECK(np2.L == np.L);
  CHECK(np2.M == np.M);
}

TEST_CASE("schedule_next respects history") {
  std::vector<StageParams> hist;
  StageParams s1;
  s1.n = 1;
  s1.K = 2;
  s1.L = 33;
  s1.M = 165;
  s1.epsilon = rat(1, 4);
  hist.push_back(s1);
  const auto np = schedule_next(hist, 1, 3, rat(1, 8), 1 << 20);
  CHECK(np.K == 3);
  // L > 27*8 = 216 and L > 3 + (1+33)*8 = 275
  CHECK(np.L == 276);
  CHECK(np.M % np.L == 0);
  CHECK(np.M > hist[0].M);
  CHECK(Rat(np.M) > Rat(np.L) * 8);
}

TEST_CASE("schedule_next scale cap") {
  CHECK_THROWS_AS(schedule_next({}, 1, 2, rat(1, 4), 100), ScaleCapError);
  CHECK_THROWS_AS(schedule_next({}, 3, 2, rat(1, 4), 1 << 20), std::invalid_argument);
}

TEST_CASE("ergodic window set on the odometer") {
  const auto s = odo(9);
  // consecutive orbit points alternate halves exactly
  const auto h = ergodic_window_set(s, LabeledPartition::dyadic(1), 2, rat(1, 8));
  CHECK(h.deficiency == 0);
  CHECK(h.pass);
  CHECK(h.e == IntervalSet::unit());

  // a 4-window visits each quarter exactly once
  const auto q4 = ergodic_window_set(s, LabeledPartition::dyadic(2), 4, rat(1, 16));
  CHECK(q4.deficiency == 0);

  // a 3-window cannot approximate quarters better than 1/12
  const auto q3 = ergodic_window_set(s, LabeledPartition::dyadic(2), 3, rat(1, 20));
  CHECK(q3.deficiency == 1);
  CHECK_FALSE(q3.pass);
}

TEST_CASE("assign_sigma exact-uniform subdivides atoms evenly") {
  std::vector<PureAtom> atoms;
  atoms.push_back({"a", {}, IntervalSet::interval(Rat(0), rat(1, 4))});
  std::mt19937_64 rng(7);
  SigmaReport rep;
  const auto sg = assign_sigma(atoms, 2, 8, 2, SigmaMode::exact_uniform, rng, 64, &rep);
  REQUIRE(sg.cells.size() == 4);
  for (const auto& c : sg.cells) {
    CHECK(c.set.measure() == rat(1, 16));
    REQUIRE(c.perms.size() == 2);
    for (const auto& p : c.perms) {
      CHECK(p.v >= 1);
      CHECK(p.v <= 2);
    }
  }
  // joint translation-vector pairs uniform on 2x2
  CHECK(rep.tuple_count == 4);
  for (const auto& row : rep.v_counts) {
    REQUIRE(row.size() == 2);
    CHECK(row[0] == 2);
    CHECK(row[1] == 2);
  }
}

TEST_CASE("assign_sigma budget and empty block count") {
  std::vector<PureAtom> atoms;
  atoms.push_back({"a", {}, IntervalSet::interval(Rat(0), rat(1, 4))});
  std::mt19937_64 rng(7);
  CHECK_THROWS_AS(assign_sigma(atoms, 2, 8, 6, SigmaMode::exact_uniform, rng, 16, nullptr),
                  CellBudgetError);
  const auto sg = assign_sigma(atoms, 2, 8, 0, SigmaMode::exact_uniform, rng, 16, nullptr);
  REQUIRE(sg.cells.size() == 1);
  CHECK(sg.cells[0].perms.empty());
}

TEST_CASE("assign_sigma seeded draws are reproducible") {
  std::vector<PureAtom> atoms;
  for (int i = 0; i < 4; ++i)
    atoms.push_back({"a" + std::to_string(i),
                     {},
                     IntervalSet::interval(rat(i, 8), rat(i + 1, 8))});
  std::mt19937_64 r1(99), r2(99);
  SigmaReport rep1, rep2;
  const auto s1 = assign_sigma(atoms, 3, 8, 5, SigmaMode::seeded_iid, r1, 16, &rep1);
  const auto s2 = assign_sigma(atoms, 3, 8, 5, SigmaMode::seeded_iid, r2, 16, &rep2);
  REQUIRE(s1.cells.size() == s2.cells.size());
  long total = 0;
  for (std::size_t i = 0; i < s1.cells.size(); ++i) {
    CHECK(s1.cells[i].set == s2.cells[i].set);
    REQUIRE(s1.cells[i].perms.size() == 5);
    for (std::size_t b = 0; b < 5; ++b)
      CHECK(s1.cells[i].perms[b].v == s2.cells[i].perms[b].v);
  }
  for (const auto& row : rep1.v_counts)
    for (long c : row) total += c;
  CHECK(total == 20);
}

TEST_CASE("tracked orbit follows powers of the map") {
  const auto s = odo(6);
  const IntervalSet carrier = IntervalSet::interval(rat(1, 8), rat(5, 16));
  auto t = TrackedOrbit::identity_on(carrier);
  for (long k = 1; k <= 9; ++k) {
    t.advance(s);
    CHECK(t.image() == s.power(k).apply_set(carrier));
  }
  CHECK(tracked_agreement(t, t) == carrier);
  CHECK(tracked_preimage(t, t.image()) == carrier);
  CHECK(tracked_preimage(t, IntervalSet::empty()).is_empty());
}

TEST_CASE("delta mixing report on simple cases") {
  const auto id = PiecewiseTranslation::identity();
  const auto halves = LabeledPartition::dyadic(1);
  const auto r = delta_mixing_report(id, 5, halves, rat(1, 2));
  CHECK(r.gap == rat(1, 4));
  CHECK_FALSE(r.vacuous);
  CHECK(r.pass);

  LabeledPartition trivial({{"all", IntervalSet::unit()}});
  const auto r2 = delta_mixing_report(odo(6), 3, trivial, Rat(2));
  CHECK(r2.gap == 0);
  CHECK(r2.vacuous);
}

TEST_CASE("lemma 7.9 style convexity holds exactly") {
  std::mt19937_64 rng(11);
  const auto p = LabeledPartition::dyadic(2);
  const auto ref = distribution(p);
  std::uniform_int_distribution<long> cell(0, 63);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<IntervalSet::Piece> raw;
    for (int i = 0; i < 12; ++i) {
      const long c = cell(rng);
      raw.push_back({rat(c, 64), rat(c + 1, 64)});
    }
    const auto s = IntervalSet::normalize(std::move(raw));
    const auto halves = s.split_equal(2);
    const Rat ga = dist_distance(distribution(halves[0], p), ref);
    const Rat gb = dist_distance(distribution(halves[1], p), ref);
    const Rat gu = dist_distance(distribution(s, p), ref);
    CHECK(gu <= std::max(ga, gb));
  }
}

TEST_CASE("one stage construction with exhaustive q checks") {
  WeakMixConfig cfg;
  cfg.grid_depth = 9;
  cfg.stage_count = 1;
  cfg.eps_offset = 2;
  cfg.k1 = 2;
  cfg.block_lengths = {8};
  cfg.tower_heights = {32};
  cfg.partition_depths = {1};
  cfg.sigma_mode = SigmaMode::exact_uniform;
  cfg.cell_budget = 256;
  cfg.check_q_cells = true;

  const auto res = run_construction(cfg);
  REQUIRE_FALSE(res.aborted);
  REQUIRE(res.stages.size() == 1);
  REQUIRE(res.designated == std::vector<long>{1});

  const auto& st = res.stages[0];
  CHECK(st.e_deficiency == 0);
  CHECK(st.e_ok);
  CHECK(st.o_mass == 1);
  CHECK(st.tower.achieved_epsilon == 0);
  CHECK(st.tower.all_green());
  REQUIRE(st.atom_count == 1);
  REQUIRE(st.atoms.size() == 1);

  const auto& a = st.atoms[0];
  CHECK(a.atom_mass == rat(1, 32));
  CHECK(a.bar_mass == rat(1, 32));
  const std::vector<long> expected = {2,  3,  4,  5,  6,  10, 11, 12,
                                      13, 14, 18, 19, 20, 21, 22};
  CHECK(a.good == expected);
  CHECK(a.good_fraction == rat(15, 32));
  CHECK(a.good_ok);  // desk-scale threshold is vacuously negative here
  REQUIRE(a.q_checked);
  CHECK(a.q_all_equal);
  CHECK(a.q_all_gap_ok);
  REQUIRE(a.q_rows.size() == expected.size());
  for (const auto& q : a.q_rows) {
    REQUIRE(q.masses.size() == 4);
    for (const auto& m : q.masses) CHECK(m == rat(1, 128));
    CHECK(q.gap == 0);
  }

  REQUIRE(st.name_rows.size() == 1);
  CHECK(st.name_rows[0].fraction == 1);
  CHECK(st.name_rows[0].pass);

  REQUIRE(st.delta_present);
  CHECK(st.delta.vacuous);  // delta_1 = 3/2 + 2 + 7/8
  CHECK(st.delta.pass);
  CHECK(st.aggregation_ok);
  CHECK(res.agreement.empty());
}

TEST_CASE("no good positions when the shift reaches past the tower") {
  WeakMixConfig cfg;
  cfg.grid_depth = 9;
  cfg.stage_count = 1;
  cfg.block_lengths = {8};
  cfg.tower_heights = {32};
  cfg.partition_depths = {1};
  cfg.sigma_mode = SigmaMode::exact_uniform;
  cfg.cell_budget = 256;
  const auto res = run_construction(cfg);
  REQUIRE_FALSE(res.aborted);
  const auto& fac = res.cocycle.factors.back();
  const auto an =
      analyze_atom(fac, res.cocycle.action(), fac.carrier.base, "base",
                   LabeledPartition::dyadic(1), 32, cfg.eps(1), rat(1, 4), false);
  CHECK(an.good.empty());
  CHECK(an.good_fraction == 0);
}

TEST_CASE("two stage construction reports agreement rows") {
  WeakMixConfig cfg;
  cfg.grid_depth = 11;
  cfg.stage_count = 2;
  cfg.block_lengths = {8, 32};
  cfg.tower_heights = {32, 128};
  cfg.partition_depths = {1, 2};
  cfg.sigma_mode = SigmaMode::seeded_iid;
  cfg.seed = 5;

  const auto res = run_construction(cfg);
  REQUIRE_FALSE(res.aborted);
  REQUIRE(res.stages.size() == 2);
  REQUIRE(res.designated.size() >= 1);
  CHECK(res.designated[0] == 1);

  // both stage towers are exact
  for (const auto& st : res.stages) CHECK(st.tower.achieved_epsilon == 0);

  // stage agreement rows for the first designated stage
  REQUIRE_FALSE(res.agreement.empty());
  for (const auto& row : res.agreement) {
    CHECK(row.disagreement >= 0);
    CHECK(row.disagreement <= 1);
    CHECK(row.pass);
  }
}

TEST_CASE("invalid stage shape aborts with a partial report") {
  WeakMixConfig cfg;
  cfg.grid_depth = 9;
  cfg.stage_count = 1;
  cfg.block_lengths = {7};
  cfg.tower_heights = {32};  // 7 does not divide 32
  const auto res = run_construction(cfg);
  CHECK(res.aborted);
  CHECK_FALSE(res.abort_reason.empty());
  CHECK(res.stages.empty());
}

TEST_CASE("zero stages yields base diagnostics only") {
  WeakMixConfig cfg;
  cfg.grid_depth = 6;
  cfg.stage_count = 0;
  const auto res = run_construction(cfg);
  CHECK_FALSE(res.aborted);
  CHECK(res.stages.empty());
  CHECK(res.cocycle.stages() == 0);
  CHECK(res.cocycle.action() == odo(6));
}
