#include "weak_mixing.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace soe {

namespace {

long floor_rat(const Rat& q) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (!f.fits_slong_p()) throw std::overflow_error("schedule parameter does not fit a long");
  return f.get_si();
}

mpz_class two_pow(unsigned long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, e);
  return p;
}

}  // namespace

NextParams schedule_next(const std::vector<StageParams>& history, int which_case, long k_cube,
                         const Rat& eps_next, long m_cap) {
  if (which_case != 1 && which_case != 2)
    throw std::invalid_argument("case must be 1 or 2");
  if (eps_next <= 0 || eps_next >= 1)
    throw std::invalid_argument("epsilon must lie in (0,1)");
  if (k_cube < 1) throw std::invalid_argument("K must be positive");

  NextParams out;
  out.K = history.empty() ? k_cube : history.back().K + 1;
  const long n = static_cast<long>(history.size());
  Rat sum_l = 0;
  long m_prev = 0;
  for (const auto& h : history) {
    sum_l += h.L;
    m_prev = std::max(m_prev, h.M);
  }

  const Rat kc = Rat(k_cube) * k_cube * k_cube;
  const Rat c1 = kc / eps_next;
  const Rat c2 = (Rat(n) + sum_l) / eps_next;
  if (c1 > m_cap || c2 > m_cap)
    throw ScaleCapError("block length lower bound", m_cap);
  long L = std::max(floor_rat(c1) + 1, out.K + floor_rat(c2) + 1);
  while (kc / L >= eps_next || (Rat(n) + sum_l) / (L - out.K) >= eps_next) ++L;
  out.L = L;

  long t = floor_rat(1 / eps_next) + 1;
  long M = L * t;
  if (M > m_cap) throw ScaleCapError("M > L / eps", m_cap);
  while (M <= m_prev) {
    M += L;
    if (M > m_cap) throw ScaleCapError("M > M_prev", m_cap);
  }
  out.M = M;

  out.constraints.push_back(
      {"K^3 / L < eps", kc / L, eps_next, kc / L < eps_next});
  out.constraints.push_back({"(n + sum L_i) / (L - K) < eps",
                             (Rat(n) + sum_l) / (L - out.K), eps_next,
                             (Rat(n) + sum_l) / (L - out.K) < eps_next});
  out.constraints.push_back({"L / eps < M", Rat(L) / eps_next, Rat(M), Rat(L) / eps_next < M});
  out.constraints.push_back({"M_prev < M", Rat(m_prev), Rat(M), m_prev < M});
  out.constraints.push_back({"M mod L == 0", Rat(M % L), Rat(0), M % L == 0});
  for (const auto& c : out.constraints)
    if (!c.ok) throw std::logic_error("schedule constraint failed after scan: " + c.name);
  return out;
}

ErgodicWindowResult ergodic_window_set(const PiecewiseTranslation& s, const LabeledPartition& p,
                                       long K, const Rat& epsilon) {
  if (K < 1) throw std::invalid_argument("window length must be positive");
  if (!p.partitions_unit()) throw std::invalid_argument("partition must cover [0,1)");

  struct Cl {
    IntervalSet set;
    std::vector<long> counts;
  };
  std::vector<Cl> classes{{IntervalSet::unit(), std::vector<long>(p.size(), 0)}};
  PiecewiseTranslation pw = PiecewiseTranslation::identity();
  for (long k = 1; k <= K; ++k) {
    pw = compose(s, pw);
    std::vector<IntervalSet> images;
    images.reserve(p.size());
    for (const auto& a : p.atoms()) images.push_back(pw.apply_set(a.set));
    std::vector<Cl> next;
    for (const auto& c : classes) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        IntervalSet hit = set_intersect(c.set, images[i]);
        if (hit.is_empty()) continue;
        auto counts = c.counts;
        ++counts[i];
        next.push_back({std::move(hit), std::move(counts)});
      }
    }
    classes = std::move(next);
  }

  ErgodicWindowResult out;
  std::vector<IntervalSet::Piece> raw;
  for (const auto& c : classes) {
    Rat gap = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Rat d = abs(rat(c.counts[i], K) - p.at(i).set.measure());
      if (d > gap) gap = d;
    }
    if (gap < epsilon)
      raw.insert(raw.end(), c.set.pieces().begin(), c.set.pieces().end());
  }
  out.e = IntervalSet::normalize(std::move(raw));
  out.deficiency = 1 - out.e.measure();
  out.pass = out.deficiency < epsilon;
  return out;
}

SigmaAssignment assign_sigma(const std::vector<PureAtom>& atoms, long K, long L, long block_count,
                             SigmaMode mode, std::mt19937_64& rng, long cell_budget,
                             SigmaReport* report) {
  if (K < 1 || L <= K) throw std::invalid_argument("need 0 < K < L");
  if (block_count < 0) throw std::invalid_argument("block count must be nonnegative");
  std::vector<JKLPermutation> pis;
  for (long k = 1; k <= K; ++k) pis.push_back(make_jkl_permutation(L - K, K, L, 0, k));

  SigmaAssignment out;
  SigmaReport rep;
  rep.mode = mode;
  rep.v_counts.assign(static_cast<std::size_t>(block_count), std::vector<long>(K, 0));

  if (mode == SigmaMode::exact_uniform) {
    long tuples = 1;
    for (long b = 0; b < block_count; ++b) {
      if (tuples > cell_budget) throw CellBudgetError(tuples, cell_budget);
      tuples *= K;
    }
    const long need = tuples * static_cast<long>(atoms.size());
    if (need > cell_budget) throw CellBudgetError(need, cell_budget);
    rep.tuple_count = tuples;
    for (const auto& atom : atoms) {
      auto cells = atom.set.split_equal(static_cast<std::size_t>(tuples));
      for (long t = 0; t < tuples; ++t) {
        std::vector<JKLPermutation> perms;
        long idx = t;
        for (long b = 0; b < block_count; ++b) {
          const long d = idx % K;
          idx /= K;
          perms.push_back(pis[static_cast<std::size_t>(d)]);
          ++rep.v_counts[static_cast<std::size_t>(b)][static_cast<std::size_t>(d)];
        }
        out.cells.push_back({std::move(cells[static_cast<std::size_t>(t)]), std::move(perms)});
      }
    }
  } else {
    std::uniform_int_distribution<long> draw(0, K - 1);
    for (const auto& atom : atoms) {
      std::vector<JKLPermutation> perms;
      for (long b = 0; b < block_count; ++b) {
        const long d = draw(rng);
        perms.push_back(pis[static_cast<std::size_t>(d)]);
        ++rep.v_counts[static_cast<std::size_t>(b)][static_cast<std::size_t>(d)];
      }
      out.cells.push_back({atom.set, std::move(perms)});
    }
  }
  rep.cell_count = static_cast<long>(out.cells.size());
  if (report) *report = rep;
  return out;
}

TrackedOrbit TrackedOrbit::identity_on(const IntervalSet& carrier) {
  TrackedOrbit t;
  if (!carrier.is_empty()) t.parts.push_back({carrier, Rat(0)});
  return t;
}

void TrackedOrbit::advance(const PiecewiseTranslation& s) {
  const auto& sp = s.pieces();
  std::map<Rat, std::vector<IntervalSet::Piece>> grouped;
  for (const auto& part : parts) {
    for (const auto& [plo, phi] : part.set.pieces()) {
      const Rat lo = plo + part.offset;
      const Rat hi = phi + part.offset;
      auto it = std::upper_bound(
          sp.begin(), sp.end(), lo,
          [](const Rat& v, const PiecewiseTranslation::Piece& pc) { return v < pc.hi; });
      for (; it != sp.end() && it->lo < hi; ++it) {
        const Rat a = std::max(lo, it->lo);
        const Rat b = std::min(hi, it->hi);
        if (a < b)
          grouped[part.offset + it->offset].push_back({a - part.offset, b - part.offset});
      }
    }
  }
  parts.clear();
  for (auto& [off, raw] : grouped) parts.push_back({IntervalSet::normalize(std::move(raw)), off});
}

IntervalSet TrackedOrbit::image() const {
  std::vector<IntervalSet::Piece> raw;
  for (const auto& part : parts)
    for (const auto& [lo, hi] : part.set.pieces())
      raw.push_back({lo + part.offset, hi + part.offset});
  return IntervalSet::normalize(std::move(raw));
}

IntervalSet tracked_preimage(const TrackedOrbit& a, const IntervalSet& t) {
  std::vector<IntervalSet::Piece> raw;
  for (const auto& part : a.parts) {
    const IntervalSet hit = set_intersect(part.set.translated(part.offset), t);
    for (const auto& [lo, hi] : hit.pieces())
      raw.push_back({lo - part.offset, hi - part.offset});
  }
  return IntervalSet::normalize(std::move(raw));
}

IntervalSet tracked_agreement(const TrackedOrbit& a, const TrackedOrbit& b) {
  std::vector<IntervalSet::Piece> raw;
  for (const auto& pa : a.parts)
    for (const auto& pb : b.parts) {
      if (pa.offset != pb.offset) continue;
      const IntervalSet hit = set_intersect(pa.set, pb.set);
      raw.insert(raw.end(), hit.pieces().begin(), hit.pieces().end());
    }
  return IntervalSet::normalize(std::move(raw));
}

AtomStageAnalysis analyze_atom(const BlockedCocycle& beta, const PiecewiseTranslation& cur,
                               const IntervalSet& atom, const std::string& atom_name,
                               const LabeledPartition& p, long ell, const Rat& epsilon,
                               const Rat& eps_prev, bool check_q_cells) {
  const Tower& tw = beta.carrier;
  const PiecewiseTranslation& prev = *tw.map;
  const PiecewiseTranslation prev_inv = prev.inverse();
  const long M = tw.height, K = beta.K, L = beta.L, J = beta.J;
  if (ell < K) throw std::invalid_argument("window length must be at least K");

  AtomStageAnalysis out;
  out.name = atom_name;
  out.atom_mass = atom.measure();
  const IntervalSet bar = beta.psi.inverse().apply_set(atom);
  out.bar_mass = bar.measure();
  const DistributionVector ref = distribution(p);
  const LabeledPartition join_p = join(p, pullback_partition(cur.power(ell), p));
  const DistributionVector prod_ref = product(ref, ref);

  const auto rigid_pos = [&](long q) { return q >= 0 && q < M && q % L < J; };

  std::deque<IntervalSet> back, fwd;
  {
    IntervalSet x = atom;
    std::vector<IntervalSet> neg;
    for (long k = 1; k <= K; ++k) {
      x = prev_inv.apply_set(x);
      neg.push_back(x);
    }
    for (long k = K; k >= 1; --k) back.push_back(neg[static_cast<std::size_t>(k - 1)]);
    x = atom;
    for (long d = 0; d < ell - K; ++d) x = prev.apply_set(x);
    for (long k = 0; k < K; ++k) {
      fwd.push_back(x);
      x = prev.apply_set(x);
    }
  }

  TrackedOrbit cm, cml;
  if (check_q_cells) {
    cm = TrackedOrbit::identity_on(bar);
    cml = cm;
    for (long d = 0; d < ell; ++d) cml.advance(cur);
  }

  IntervalSet col;
  IntervalSet a_img = atom;
  long good_count = 0;
  for (long m = 0; m < M; ++m) {
    col = set_union(col, a_img);
    GoodPositionRow row;
    row.m = m;
    bool rigid = true;
    for (long k = 1; k <= K; ++k)
      rigid = rigid && rigid_pos(m - k) && rigid_pos(m + ell - k);
    row.rigid_ok = rigid;
    if (rigid) {
      IntervalSet ub, uf;
      for (const auto& s : back) ub = set_union(ub, s);
      for (const auto& s : fwd) uf = set_union(uf, s);
      row.gap_back = dist_distance(distribution(ub, p), ref);
      row.gap_fwd = dist_distance(distribution(uf, p), ref);
      row.good = row.gap_back < epsilon && row.gap_fwd < epsilon;
    }
    if (row.good) {
      out.good.push_back(m);
      ++good_count;
      if (check_q_cells) {
        QCellReport q;
        q.m = m;
        const Rat uniform = out.bar_mass / (Rat(K) * K);
        // Q cell for offset k: points of the permuted atom whose m-th
        // iterate lands in the (m-k)-th level over the atom.
        std::vector<IntervalSet> ba, fa;
        for (long k = 1; k <= K; ++k)
          ba.push_back(tracked_preimage(cm, back[static_cast<std::size_t>(K - k)]));
        for (long k = 1; k <= K; ++k)
          fa.push_back(tracked_preimage(cml, fwd[static_cast<std::size_t>(K - k)]));
        q.equal = true;
        for (long k = 0; k < K; ++k)
          for (long kp = 0; kp < K; ++kp) {
            Rat mass = set_intersect(ba[static_cast<std::size_t>(k)],
                                     fa[static_cast<std::size_t>(kp)])
                           .measure();
            if (mass != uniform) q.equal = false;
            q.masses.push_back(std::move(mass));
          }
        q.gap = dist_distance(distribution(cm.image(), join_p), prod_ref);
        q.gap_ok = q.gap < 2 * epsilon;
        out.q_all_equal = out.q_all_equal && q.equal;
        out.q_all_gap_ok = out.q_all_gap_ok && q.gap_ok;
        out.q_rows.push_back(std::move(q));
      }
    }
    out.rows.push_back(std::move(row));

    a_img = prev.apply_set(a_img);
    IntervalSet nb = prev.apply_set(back.back());
    back.pop_front();
    back.push_back(std::move(nb));
    IntervalSet nf = prev.apply_set(fwd.back());
    fwd.pop_front();
    fwd.push_back(std::move(nf));
    if (check_q_cells) {
      cm.advance(cur);
      cml.advance(cur);
    }
  }

  out.good_fraction = rat(good_count, M);
  out.good_threshold = 1 - (8 * eps_prev + 4 * epsilon);
  out.good_ok = out.good_fraction >= out.good_threshold;
  out.q_checked = check_q_cells;
  out.column_gap = dist_distance(distribution(col, join_p), prod_ref);
  return out;
}

DeltaMixingReport delta_mixing_report(const PiecewiseTranslation& s, long ell,
                                      const LabeledPartition& p, const Rat& delta) {
  if (!p.partitions_unit()) throw std::invalid_argument("partition must cover [0,1)");
  const LabeledPartition jp = join(p, pullback_partition(s.power(ell), p));
  const DistributionVector ref = distribution(p);
  DeltaMixingReport out;
  out.gap = dist_distance(distribution(jp), product(ref, ref));
  out.delta = delta;
  out.vacuous = delta >= 1;
  out.pass = out.gap < delta;
  return out;
}

NameAgreementReport name_agreement(const PiecewiseTranslation& prev,
                                   const PiecewiseTranslation& older, const IntervalSet& atom,
                                   const LabeledPartition& p, long M, long K,
                                   const Rat& threshold) {
  const PiecewiseTranslation prev_inv = prev.inverse();
  const PiecewiseTranslation older_inv = older.inverse();
  NameAgreementReport out;
  out.threshold = threshold;
  long agree = 0;
  IntervalSet y = atom;
  for (long m = 0; m < M; ++m) {
    bool ok = true;
    IntervalSet a = y, b = y;
    for (long k = 1; k <= K; ++k) {
      a = prev_inv.apply_set(a);
      b = older_inv.apply_set(b);
      const std::size_t ia = p.atom_containing(a);
      const std::size_t ib = p.atom_containing(b);
      if (ia == LabeledPartition::npos || ib == LabeledPartition::npos) {
        ++out.flagged;
        ok = false;
        break;
      }
      if (ia != ib) {
        ok = false;
        break;
      }
    }
    if (ok) ++agree;
    y = prev.apply_set(y);
  }
  out.fraction = rat(agree, M);
  out.pass = out.fraction >= threshold;
  return out;
}

Rat WeakMixConfig::eps(long n) const {
  return Rat(1, 1) / Rat(two_pow(static_cast<unsigned long>(n + eps_offset)));
}

long WeakMixConfig::block_length(long n) const {
  if (static_cast<std::size_t>(n) <= block_lengths.size())
    return block_lengths[static_cast<std::size_t>(n - 1)];
  long l = 8;
  for (long i = 1; i < n; ++i) l *= 4;
  return l;
}

long WeakMixConfig::tower_height(long n) const {
  if (static_cast<std::size_t>(n) <= tower_heights.size())
    return tower_heights[static_cast<std::size_t>(n - 1)];
  return 4 * block_length(n);
}

ConstructionResult run_construction(const WeakMixConfig& cfg) {
  if (cfg.eps_offset < 1)
    throw std::invalid_argument("eps offset must be >= 1 so that eps_n < 2^-n");
  if (cfg.k1 < 1 || cfg.stage_count < 0 || cfg.grid_depth < 1)
    throw std::invalid_argument("bad construction parameters");

  ConstructionResult res;
  auto base =
      std::make_shared<const PiecewiseTranslation>(dyadic_odometer(cfg.grid_depth).map);
  res.cocycle = make_stage_cocycle(base);
  std::mt19937_64 rng(cfg.seed);
  const Rat w = Rat(1, 1) / Rat(two_pow(cfg.grid_depth));

  const auto partition_depth = [&](std::size_t j) -> unsigned {
    if (j <= cfg.partition_depths.size()) return cfg.partition_depths[j - 1];
    return static_cast<unsigned>(j);
  };
  const auto forced = [&](long n) {
    return std::find(cfg.force_designated.begin(), cfg.force_designated.end(), n) !=
           cfg.force_designated.end();
  };

  try {
    for (long n = 1; n <= cfg.stage_count; ++n) {
      StageParams sp;
      sp.n = n;
      sp.K = cfg.kparam(n);
      sp.L = cfg.block_length(n);
      sp.M = cfg.tower_height(n);
      sp.epsilon = cfg.eps(n);
      if (sp.L <= sp.K || sp.M % sp.L != 0)
        throw std::invalid_argument("stage " + std::to_string(n) +
                                    " needs K < L and L | M");

      const std::size_t j = res.designated.size();
      const PiecewiseTranslation prev = res.cocycle.action();

      StageReport rep;
      const LabeledPartition pcand = LabeledPartition::dyadic(partition_depth(j + 1));
      const auto erg = ergodic_window_set(prev, pcand, sp.K, sp.epsilon);
      rep.e_deficiency = erg.deficiency;
      rep.e_ok = erg.pass;
      sp.designated = cfg.force_designated.empty() ? erg.pass : forced(n);
      rep.params = sp;

      const long nj = res.designated.empty() ? 0 : res.designated.back();
      const IntervalSet O = agreement_set(res.cocycle.action_at(static_cast<std::size_t>(nj)), prev);
      rep.o_mass = O.measure();
      const LabeledPartition opart({{"agree", O}, {"drift", O.complement()}});
      const LabeledPartition purity =
          sp.designated ? join(pcand, opart)
                        : LabeledPartition({{"all", IntervalSet::unit()}});

      StrongTowerRequest req;
      req.height = sp.M;
      req.block_length = sp.L;
      req.epsilon = sp.epsilon / (Rat(sp.K) * sp.K);
      if (sp.designated) {
        req.good_set = erg.e;
        req.good_fraction_epsilon = sp.epsilon;
        req.aux_partition = opart;
        req.aux_name_epsilon = sp.epsilon / sp.K;
      }
      req.atom_partition = purity;
      req.seeds = {IntervalSet::interval(Rat(0), w)};
      req.orbit_budget = cfg.orbit_budget;
      auto prev_ptr = std::make_shared<const PiecewiseTranslation>(prev);
      auto [tower, trep] = search_strong_tower(prev_ptr, req);
      rep.tower = trep;

      const auto atoms = pure_partition(tower, purity);
      rep.atom_count = atoms.size();
      SigmaReport srep;
      auto sigma = assign_sigma(atoms, sp.K, sp.L, sp.M / sp.L, cfg.sigma_mode, rng,
                                cfg.cell_budget, &srep);
      rep.sigma = srep;

      const Rat achieved = tower.achieved_epsilon;
      push_factor(res.cocycle,
                  build_blocked_cocycle(n, std::move(tower), sp.K, sp.L, achieved,
                                        std::move(sigma)),
                  cfg.scan_cap);
      const PiecewiseTranslation& cur = res.cocycle.action();
      const BlockedCocycle& fac = res.cocycle.factors.back();

      if (sp.designated) {
        res.designated.push_back(n);
        rep.subsequence_index = static_cast<long>(res.designated.size());
        const Rat eps_prev =
            res.designated.size() >= 2
                ? cfg.eps(res.designated[res.designated.size() - 2])
                : Rat(1, 1) / Rat(two_pow(static_cast<unsigned long>(cfg.eps_offset)));
        const long ell = sp.L;
        const PiecewiseTranslation& older =
            res.cocycle.action_at(static_cast<std::size_t>(nj));
        Rat col_max = 0;
        for (const auto& a : atoms) {
          auto an = analyze_atom(fac, cur, a.set, a.name, pcand, ell, sp.epsilon, eps_prev,
                                 cfg.check_q_cells);
          col_max = std::max(col_max, an.column_gap);
          rep.atoms.push_back(std::move(an));
          rep.name_rows.push_back(
              name_agreement(prev, older, a.set, pcand, sp.M, sp.K, 1 - 4 * eps_prev));
        }
        const Rat delta_i =
            Rat(3) / Rat(two_pow(static_cast<unsigned long>(n))) + 8 * eps_prev +
            7 * sp.epsilon;
        rep.delta_present = true;
        rep.delta = delta_mixing_report(cur, ell, pcand, delta_i);
        rep.measured_threshold = 8 * eps_prev + 7 * sp.epsilon;
        rep.measured_ok = rep.delta.gap < rep.measured_threshold;
        rep.column_gap_max = col_max;
        rep.aggregation_ok = rep.delta.gap <= col_max + sp.epsilon;
      }

      res.params.push_back(sp);
      res.stages.push_back(std::move(rep));
    }

    for (std::size_t idx = 0; idx < res.designated.size(); ++idx) {
      const long nj = res.designated[idx];
      const long hi = idx + 1 < res.designated.size() ? res.designated[idx + 1]
                                                      : cfg.stage_count;
      const long kcap = idx + 1 < res.designated.size()
                            ? res.params[static_cast<std::size_t>(res.designated[idx + 1] - 1)].K
                            : res.params.back().K;
      const long ell = res.params[static_cast<std::size_t>(nj - 1)].L;
      const PiecewiseTranslation snj =
          res.cocycle.action_at(static_cast<std::size_t>(nj)).power(ell);
      for (long m = nj + 1; m <= hi; ++m) {
        AgreementRow row;
        row.m = m;
        row.nj = nj;
        row.ell = ell;
        row.disagreement =
            1 - agreement_set(res.cocycle.action_at(static_cast<std::size_t>(m)).power(ell),
                              snj)
                    .measure();
        Rat b = 0;
        for (long i = nj + 1; i <= m; ++i) {
          const auto& pi = res.params[static_cast<std::size_t>(i - 1)];
          b += pi.epsilon / (Rat(kcap) * kcap) + rat(pi.K, pi.L) + rat(ell, pi.L);
        }
        row.bound = b;
        row.pass = row.disagreement <= b;
        res.agreement.push_back(row);
      }
    }
  } catch (const CellBudgetError& ex) {
    res.aborted = true;
    res.abort_budget = true;
    res.abort_reason = ex.what();
  } catch (const ScaleCapError& ex) {
    res.aborted = true;
    res.abort_budget = true;
    res.abort_reason = ex.what();
  } catch (const TowerSearchError& ex) {
    res.aborted = true;
    res.abort_budget = true;
    res.abort_reason = ex.what();
  } catch (const std::exception& ex) {
    res.aborted = true;
    res.abort_reason = ex.what();
  }
  return res;
}

}  // namespace soe
