#include "block_cocycle.hpp"

#include <algorithm>
#include <map>

namespace soe {

namespace {

void check_jkl_geometry(long J, long K, long L, long u, long v) {
  if (J < 1 || K < 1 || L < 1) throw std::invalid_argument("J, K, L must be positive");
  if (u < 0 || u + J > L) throw std::invalid_argument("rigid block leaves {0..L-1}");
  if (v < -K || v > K) throw std::invalid_argument("translation vector exceeds K");
  if (u + v < 0 || u + J + v > L)
    throw std::invalid_argument("translated rigid block leaves {0..L-1}");
}

void check_permutation_table(const std::vector<long>& table, long L) {
  std::vector<bool> hit(static_cast<std::size_t>(L), false);
  for (long w = 0; w < L; ++w) {
    const long img = table[static_cast<std::size_t>(w)];
    if (img < 0 || img >= L || hit[static_cast<std::size_t>(img)])
      throw std::invalid_argument("assembled map is not a bijection of {0..L-1}");
    hit[static_cast<std::size_t>(img)] = true;
  }
}

}  // namespace

JKLPermutation make_jkl_permutation(long J, long K, long L, long u, long v) {
  check_jkl_geometry(J, K, L, u, v);
  JKLPermutation p{J, K, L, u, v, {}};
  p.table.resize(static_cast<std::size_t>(L));
  for (long w = 0; w < L; ++w)
    p.table[static_cast<std::size_t>(w)] = p.in_rigid(w) ? w + v : ((w + v) % L + L) % L;
  check_permutation_table(p.table, L);
  return p;
}

JKLPermutation make_jkl_permutation(long J, long K, long L, long u, long v,
                                    const std::vector<long>& filler_images) {
  check_jkl_geometry(J, K, L, u, v);
  if (filler_images.size() != static_cast<std::size_t>(L - J))
    throw std::invalid_argument("filler must cover exactly the complement of the rigid block");
  JKLPermutation p{J, K, L, u, v, {}};
  p.table.resize(static_cast<std::size_t>(L));
  std::size_t fi = 0;
  for (long w = 0; w < L; ++w)
    p.table[static_cast<std::size_t>(w)] = p.in_rigid(w) ? w + v : filler_images[fi++];
  check_permutation_table(p.table, L);
  for (long w = 0; w < L; ++w)
    if (!p.in_rigid(w) && p.table[static_cast<std::size_t>(w)] >= u + v &&
        p.table[static_cast<std::size_t>(w)] < u + J + v)
      throw std::invalid_argument("filler image hits the translated rigid block");
  return p;
}

long StepFunction::value_at(const Rat& x) const {
  for (const auto& c : cells)
    if (c.set.contains(x)) return c.value;
  throw std::domain_error("point outside the step function carrier");
}

IntervalSet StepFunction::carrier() const {
  std::vector<IntervalSet::Piece> raw;
  for (const auto& c : cells) raw.insert(raw.end(), c.set.pieces().begin(), c.set.pieces().end());
  return IntervalSet::normalize(std::move(raw));
}

bool StepFunction::is_total() const { return carrier().measure() == 1; }

StepFunction StepFunction::canonicalized() const {
  std::map<long, std::vector<IntervalSet::Piece>> byval;
  for (const auto& c : cells) {
    auto& v = byval[c.value];
    v.insert(v.end(), c.set.pieces().begin(), c.set.pieces().end());
  }
  StepFunction out;
  for (auto& [v, raw] : byval) {
    IntervalSet s = IntervalSet::normalize(std::move(raw));
    if (!s.is_empty()) out.cells.push_back({std::move(s), v});
  }
  return out;
}

StepFunction step_constant(long v) { return {{{IntervalSet::unit(), v}}}; }

StepFunction step_sum(const StepFunction& a, const StepFunction& b) {
  const StepFunction ca = a.canonicalized(), cb = b.canonicalized();
  StepFunction out;
  for (const auto& x : ca.cells)
    for (const auto& y : cb.cells) {
      IntervalSet inter = set_intersect(x.set, y.set);
      if (!inter.is_empty()) out.cells.push_back({std::move(inter), x.value + y.value});
    }
  return out.canonicalized();
}

StepFunction step_pullback(const PiecewiseTranslation& f, const StepFunction& g) {
  const PiecewiseTranslation finv = f.inverse();
  StepFunction out;
  out.cells.reserve(g.cells.size());
  for (const auto& c : g.cells) out.cells.push_back({finv.apply_set(c.set), c.value});
  return out;
}

StepFunction step_negate(const StepFunction& a) {
  StepFunction out = a;
  for (auto& c : out.cells) c.value = -c.value;
  return out;
}

IntervalSet step_equal_set(const StepFunction& a, const StepFunction& b) {
  const StepFunction ca = a.canonicalized(), cb = b.canonicalized();
  std::vector<IntervalSet::Piece> raw;
  auto it = cb.cells.begin();
  for (const auto& x : ca.cells) {
    while (it != cb.cells.end() && it->value < x.value) ++it;
    if (it == cb.cells.end()) break;
    if (it->value != x.value) continue;
    IntervalSet inter = set_intersect(x.set, it->set);
    raw.insert(raw.end(), inter.pieces().begin(), inter.pieces().end());
  }
  return IntervalSet::normalize(std::move(raw));
}

IntervalSet step_level_set(const StepFunction& a, long v) {
  std::vector<IntervalSet::Piece> raw;
  for (const auto& c : a.cells)
    if (c.value == v) raw.insert(raw.end(), c.set.pieces().begin(), c.set.pieces().end());
  return IntervalSet::normalize(std::move(raw));
}

namespace {

// Lazily materialized powers of a map.
class PowerCache {
 public:
  explicit PowerCache(const PiecewiseTranslation& f) : f_(f), finv_(f.inverse()) {}

  const PiecewiseTranslation& get(long d) {
    auto it = cache_.find(d);
    if (it != cache_.end()) return it->second;
    PiecewiseTranslation m = d == 0 ? PiecewiseTranslation::identity()
                             : d > 0 ? compose(f_, get(d - 1))
                                     : compose(finv_, get(d + 1));
    return cache_.emplace(d, std::move(m)).first->second;
  }

 private:
  const PiecewiseTranslation& f_;
  PiecewiseTranslation finv_;
  std::map<long, PiecewiseTranslation> cache_;
};

// Appends f restricted to a as explicit (domain, offset) pieces.
void append_restricted(const PiecewiseTranslation& f, const IntervalSet& a,
                       std::vector<PiecewiseTranslation::Piece>& out) {
  const auto& fp = f.pieces();
  for (const auto& [alo, ahi] : a.pieces()) {
    auto it = std::upper_bound(fp.begin(), fp.end(), alo,
                               [](const Rat& v, const PiecewiseTranslation::Piece& p) {
                                 return v < p.lo;
                               });
    std::size_t j = static_cast<std::size_t>(it - fp.begin());
    if (j > 0) --j;
    for (; j < fp.size() && fp[j].lo < ahi; ++j) {
      const Rat lo = std::max(alo, fp[j].lo);
      const Rat hi = std::min(ahi, fp[j].hi);
      if (lo < hi) out.push_back({lo, hi, fp[j].offset});
    }
  }
}

}  // namespace

BlockedCocycle build_blocked_cocycle(long stage_index, Tower carrier, long K, long L,
                                     const Rat& epsilon, SigmaAssignment sigma) {
  const long M = carrier.height;
  if (L < 2 || K < 1 || K >= L) throw std::invalid_argument("need 1 <= K < L, L >= 2");
  if (M % L != 0) throw std::invalid_argument("block length must divide the tower height");
  const long blocks = M / L;
  const long J = L - K;

  std::vector<IntervalSet::Piece> raw;
  for (const auto& c : sigma.cells) {
    if (c.perms.size() != static_cast<std::size_t>(blocks))
      throw std::invalid_argument("sigma must assign one permutation per block");
    for (const auto& p : c.perms)
      if (p.J != J || p.K != K || p.L != L)
        throw std::invalid_argument("assigned permutation has the wrong (J,K,L) shape");
    raw.insert(raw.end(), c.set.pieces().begin(), c.set.pieces().end());
  }
  Rat cell_total = 0;
  for (const auto& c : sigma.cells) cell_total += c.set.measure();
  const IntervalSet cell_union = IntervalSet::normalize(std::move(raw));
  if (cell_union.measure() != cell_total)
    throw std::invalid_argument("sigma cells overlap");
  if (!(cell_union == carrier.base))
    throw std::invalid_argument("sigma cells must partition the tower base");

  BlockedCocycle beta;
  beta.stage_index = stage_index;
  beta.J = J;
  beta.K = K;
  beta.L = L;
  beta.epsilon = epsilon;
  beta.off_block_measure = carrier.achieved_epsilon;
  if (beta.off_block_measure > epsilon)
    throw EpsilonViolationError(beta.off_block_measure - epsilon);

  beta.pi.reserve(sigma.cells.size());
  for (const auto& c : sigma.cells) {
    std::vector<long> pi(static_cast<std::size_t>(M));
    for (long t = 0; t < M; ++t) {
      const long b = t / L;
      pi[static_cast<std::size_t>(t)] =
          b * L + c.perms[static_cast<std::size_t>(b)].apply(t - b * L);
    }
    beta.pi.push_back(std::move(pi));
  }

  PowerCache powers(*carrier.map);
  std::vector<PiecewiseTranslation::Piece> psi_pieces;
  std::vector<IntervalSet::Piece> covered_raw;
  for (std::size_t ci = 0; ci < sigma.cells.size(); ++ci) {
    IntervalSet cur = sigma.cells[ci].set;
    for (long t = 0; t < M; ++t) {
      if (t > 0) cur = carrier.map->apply_set(cur);
      covered_raw.insert(covered_raw.end(), cur.pieces().begin(), cur.pieces().end());
      const long d = beta.pi[ci][static_cast<std::size_t>(t)] - t;
      append_restricted(powers.get(d), cur, psi_pieces);
    }
  }
  const IntervalSet uncovered =
      IntervalSet::normalize(std::move(covered_raw)).complement();
  for (const auto& [lo, hi] : uncovered.pieces()) psi_pieces.push_back({lo, hi, Rat(0)});
  beta.psi = PiecewiseTranslation::from_pieces(std::move(psi_pieces), "psi");
  beta.carrier = std::move(carrier);
  beta.sigma = std::move(sigma);
  return beta;
}

long beta_value(const BlockedCocycle& beta, const PiecewiseTranslation& prev,
                const PiecewiseTranslation& next, const Rat& x, long k, long scan_cap) {
  (void)beta;
  Rat y = x;
  const PiecewiseTranslation prev_inv = prev.inverse();
  for (long i = 0; i < (k >= 0 ? k : -k); ++i) y = (k >= 0 ? prev : prev_inv).apply(y);
  if (y == x) return 0;
  const PiecewiseTranslation next_inv = next.inverse();
  Rat fwd = x, bwd = x;
  for (long s = 1; s <= scan_cap; ++s) {
    fwd = next.apply(fwd);
    if (fwd == y) return s;
    bwd = next_inv.apply(bwd);
    if (bwd == y) return -s;
  }
  throw InversionWindowError("beta value not found within the scan window");
}

namespace {

// Recovers j(x) with lhs(x) = rhs^{j(x)}(x), scanning j = 1, 0, 2, -1, ...
StepFunction recover_generator(const PiecewiseTranslation& lhs, const PiecewiseTranslation& rhs,
                               long cap) {
  StepFunction out;
  IntervalSet rest = IntervalSet::unit();
  const auto consider = [&](long j, const PiecewiseTranslation& pj) {
    if (rest.is_empty()) return;
    IntervalSet hit = set_intersect(agreement_set(lhs, pj), rest);
    if (!hit.is_empty()) {
      rest = set_difference(rest, hit);
      out.cells.push_back({std::move(hit), j});
    }
  };
  const PiecewiseTranslation rinv = rhs.inverse();
  PiecewiseTranslation fwd = rhs;  // rhs^{1+t}
  PiecewiseTranslation bwd = PiecewiseTranslation::identity();  // rhs^{-t}
  consider(1, fwd);
  for (long t = 1; t <= cap && !rest.is_empty(); ++t) {
    consider(1 - t, bwd);
    if (rest.is_empty()) break;
    fwd = compose(rhs, fwd);
    consider(1 + t, fwd);
    bwd = compose(rinv, bwd);
  }
  if (!rest.is_empty())
    throw InversionWindowError("generator value not resolved on a set of measure " +
                               to_string(rest.measure()));
  return out.canonicalized();
}

}  // namespace

StageCocycle make_stage_cocycle(std::shared_ptr<const PiecewiseTranslation> base) {
  StageCocycle st;
  st.actions.push_back(*base);
  st.base = std::move(base);
  st.gen.push_back(step_constant(1));
  st.gen_inv.push_back(step_constant(1));
  return st;
}

void push_factor(StageCocycle& stage, BlockedCocycle beta, long scan_cap) {
  const PiecewiseTranslation& prev = stage.actions.back();
  const PiecewiseTranslation psi_inv = beta.psi.inverse();
  PiecewiseTranslation next = compose(psi_inv, compose(prev, beta.psi));
  if (scan_cap == 0) {
    scan_cap = 4;
    for (const auto& f : stage.factors) scan_cap += 2 * f.L;
    scan_cap += 2 * beta.L;
  }
  stage.gen.push_back(recover_generator(*stage.base, next, scan_cap));
  stage.gen_inv.push_back(recover_generator(next, *stage.base, scan_cap));
  stage.actions.push_back(std::move(next));
  stage.factors.push_back(std::move(beta));
}

namespace {

long evaluate_with(const StepFunction& gen, const PiecewiseTranslation& walk, const Rat& x,
                   long k) {
  long res = 0;
  Rat cur = x;
  if (k >= 0) {
    for (long i = 0; i < k; ++i) {
      res += gen.value_at(cur);
      cur = walk.apply(cur);
    }
  } else {
    const PiecewiseTranslation winv = walk.inverse();
    for (long i = 0; i < -k; ++i) {
      cur = winv.apply(cur);
      res -= gen.value_at(cur);
    }
  }
  return res;
}

StepFunction value_map_with(const StepFunction& gen, const PiecewiseTranslation& walk, long k) {
  StepFunction total = step_constant(0);
  if (k >= 0) {
    StepFunction h = gen;  // gen o walk^i
    for (long i = 0; i < k; ++i) {
      total = step_sum(total, h);
      if (i + 1 < k) h = step_pullback(walk, h);
    }
  } else {
    const PiecewiseTranslation winv = walk.inverse();
    StepFunction h = step_pullback(winv, gen);  // gen o walk^{-i-1}
    for (long i = 0; i < -k; ++i) {
      total = step_sum(total, step_negate(h));
      if (i + 1 < -k) h = step_pullback(winv, h);
    }
  }
  return total;
}

}  // namespace

long evaluate_at_stage(const StageCocycle& stage, std::size_t n, const Rat& x, long k) {
  return evaluate_with(stage.gen.at(n), *stage.base, x, k);
}

long evaluate(const StageCocycle& stage, const Rat& x, long k) {
  return evaluate_at_stage(stage, stage.stages(), x, k);
}

long evaluate_inverse_at_stage(const StageCocycle& stage, std::size_t n, const Rat& x, long k) {
  return evaluate_with(stage.gen_inv.at(n), stage.actions.at(n), x, k);
}

long evaluate_inverse(const StageCocycle& stage, const Rat& x, long k) {
  return evaluate_inverse_at_stage(stage, stage.stages(), x, k);
}

StepFunction cocycle_value_map(const StageCocycle& stage, std::size_t n, long k) {
  return value_map_with(stage.gen.at(n), *stage.base, k);
}

StepFunction inverse_value_map(const StageCocycle& stage, std::size_t n, long k) {
  return value_map_with(stage.gen_inv.at(n), stage.actions.at(n), k);
}

FixedStageSets fixed_stage_sets(const StageCocycle& stage, long k, long through_stage) {
  const long built = static_cast<long>(stage.stages());
  if (through_stage < 1 || through_stage > built)
    throw std::invalid_argument("through_stage must be within the built stages");

  FixedStageSets out;
  out.k = k;
  out.through_stage = through_stage;
  out.certified_horizon = built;

  const auto sets_for = [&](bool inverse) {
    std::vector<StepFunction> g;
    g.reserve(static_cast<std::size_t>(built));
    for (long n = 1; n <= built; ++n)
      g.push_back(inverse ? inverse_value_map(stage, static_cast<std::size_t>(n), k)
                          : cocycle_value_map(stage, static_cast<std::size_t>(n), k));
    std::vector<IntervalSet> agree(static_cast<std::size_t>(built));
    agree[static_cast<std::size_t>(built - 1)] = IntervalSet::unit();
    for (long n = built - 1; n >= 1; --n)
      agree[static_cast<std::size_t>(n - 1)] =
          set_intersect(step_equal_set(g[static_cast<std::size_t>(n - 1)],
                                       g[static_cast<std::size_t>(n)]),
                        agree[static_cast<std::size_t>(n)]);
    std::vector<IntervalSet> d;
    d.reserve(static_cast<std::size_t>(through_stage));
    for (long n = 1; n <= through_stage; ++n)
      d.push_back(n == 1 ? agree[0]
                         : set_difference(agree[static_cast<std::size_t>(n - 1)],
                                          agree[static_cast<std::size_t>(n - 2)]));
    return d;
  };

  out.d = sets_for(false);
  out.e = sets_for(true);
  return out;
}

namespace {

Rat int_pow(long base, long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(base),
                static_cast<unsigned long>(e >= 0 ? e : -e));
  if (e >= 0) return Rat(p);
  Rat r(1, p);
  r.canonicalize();
  return r;
}

}  // namespace

Rat GeometricSchedule::eps(long i) const { return int_pow(2, -(i + eps_offset)); }

Rat GeometricSchedule::length(long i) const { return L1 * int_pow(ratio, i - 1); }

long GeometricSchedule::kparam(long i) const { return K1 + (i - 1); }

Rat GeometricSchedule::eps_tail(long from) const { return 2 * eps(from); }

Rat GeometricSchedule::inv_length_tail(long from) const {
  Rat r = Rat(ratio, ratio - 1) / length(from);
  r.canonicalize();
  return r;
}

Rat GeometricSchedule::drift(long n) const {
  Rat b = 0;
  for (long j = 1; j <= n; ++j) b += length(j);
  return 2 * b;
}

std::vector<BoundVerdict> bound_check6(const FixedStageSets& sets,
                                       const GeometricSchedule& schedule) {
  std::vector<BoundVerdict> out;
  const long ak = sets.k >= 0 ? sets.k : -sets.k;
  for (std::size_t idx = 0; idx < sets.d.size(); ++idx) {
    const long n = static_cast<long>(idx) + 1;
    {
      BoundVerdict v;
      v.name = "D n=" + std::to_string(n) + " k=" + std::to_string(sets.k);
      v.lhs = sets.d[idx].measure();
      const Rat rhs = 2 * schedule.eps_tail(n - 1) +
                      (Rat(ak) + schedule.drift(n - 2)) * schedule.inv_length_tail(n - 1);
      v.rhs_lower = rhs;
      v.rhs_upper = rhs;
      v.state = v.lhs < rhs ? BoundVerdict::State::pass : BoundVerdict::State::fail;
      out.push_back(std::move(v));
    }
    {
      BoundVerdict v;
      v.name = "E n=" + std::to_string(n) + " l=" + std::to_string(sets.k);
      v.lhs = sets.e[idx].measure();
      const long terms = 48;
      Rat partial = 2 * schedule.eps_tail(n - 1);
      bool ok = true;
      for (long i = n - 1 >= 1 ? n - 1 : 1; i < n - 1 + terms; ++i) {
        const Rat gap = schedule.length(i) - schedule.kparam(i);
        if (gap <= 0) {
          ok = false;
          break;
        }
        partial += Rat(ak) / gap;
      }
      const long tail_start = (n - 1 >= 1 ? n - 1 : 1) + terms;
      v.rhs_lower = partial;
      if (ok && schedule.length(tail_start) > 2 * schedule.kparam(tail_start) &&
          schedule.ratio >= 2)
        v.rhs_upper = partial + 2 * ak * schedule.inv_length_tail(tail_start);
      else
        v.rhs_upper = partial;  // no certified upper bound; fail is unreachable
      if (!ok)
        v.state = BoundVerdict::State::inconclusive;
      else if (v.lhs < v.rhs_lower)
        v.state = BoundVerdict::State::pass;
      else if (v.lhs >= v.rhs_upper)
        v.state = BoundVerdict::State::fail;
      else
        v.state = BoundVerdict::State::inconclusive;
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace soe
