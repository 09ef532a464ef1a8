#include "report.hpp"

#include <fstream>

#include "json.hpp"

namespace soe {

namespace {

using nlohmann::json;

json certified(const CertifiedReal& c) {
  return json{{"lo", c.lower_double()}, {"hi", c.upper_double()}};
}

json bound_row(const BoundRow& r) {
  return json{{"n", r.n},
              {"measured", fraction(r.measured)},
              {"bound", fraction(r.bound)},
              {"pass", r.pass}};
}

json tower_rows(const std::vector<StrongTowerReport::AtomRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"name", r.name},
                   {"value", fraction(r.value)},
                   {"constant", r.constant},
                   {"pass", r.pass}});
  return out;
}

json stage_json(const StageReport& s) {
  json j;
  j["n"] = s.params.n;
  j["K"] = s.params.K;
  j["L"] = s.params.L;
  j["M"] = s.params.M;
  j["epsilon"] = fraction(s.params.epsilon);
  j["designated"] = s.params.designated;
  j["subsequence_index"] = s.subsequence_index;
  j["window_deficiency"] = fraction(s.e_deficiency);
  j["window_ok"] = s.e_ok;
  j["carryover_mass"] = fraction(s.o_mass);
  j["tower"] = {{"achieved_epsilon", fraction(s.tower.achieved_epsilon)},
                {"requested_epsilon", fraction(s.tower.requested_epsilon)},
                {"epsilon_ok", s.tower.epsilon_ok},
                {"good_set_rows", tower_rows(s.tower.good_set_rows)},
                {"aux_name_rows", tower_rows(s.tower.aux_name_rows)},
                {"good_set_ok", s.tower.good_set_ok},
                {"aux_ok", s.tower.aux_ok}};
  j["sigma"] = {{"mode", s.sigma.mode == SigmaMode::exact_uniform ? "exact" : "iid"},
                {"tuple_count", s.sigma.tuple_count},
                {"cell_count", s.sigma.cell_count},
                {"v_counts", s.sigma.v_counts}};
  j["atom_count"] = s.atom_count;
  j["atoms"] = json::array();
  for (const auto& a : s.atoms) {
    json aj;
    aj["name"] = a.name;
    aj["atom_mass"] = fraction(a.atom_mass);
    aj["permuted_mass"] = fraction(a.bar_mass);
    aj["good_count"] = a.good.size();
    aj["good_fraction"] = fraction(a.good_fraction);
    aj["good_threshold"] = fraction(a.good_threshold);
    aj["good_ok"] = a.good_ok;
    aj["q_checked"] = a.q_checked;
    aj["q_all_equal"] = a.q_all_equal;
    aj["q_all_gap_ok"] = a.q_all_gap_ok;
    aj["column_gap"] = fraction(a.column_gap);
    j["atoms"].push_back(std::move(aj));
  }
  j["name_rows"] = json::array();
  for (const auto& r : s.name_rows)
    j["name_rows"].push_back({{"fraction", fraction(r.fraction)},
                              {"threshold", fraction(r.threshold)},
                              {"pass", r.pass},
                              {"flagged", r.flagged}});
  if (s.delta_present)
    j["delta"] = {{"gap", fraction(s.delta.gap)},
                  {"delta", fraction(s.delta.delta)},
                  {"vacuous", s.delta.vacuous},
                  {"pass", s.delta.pass},
                  {"measured_threshold", fraction(s.measured_threshold)},
                  {"measured_ok", s.measured_ok},
                  {"column_gap_max", fraction(s.column_gap_max)},
                  {"aggregation_ok", s.aggregation_ok}};
  return j;
}

json verdict_json(const RunVerdict& v) {
  return json{{"pass", v.pass},
              {"budget", v.budget},
              {"error", v.error},
              {"error_text", v.error_text},
              {"failures", v.failures},
              {"exit_code", v.exit_code()}};
}

json config_json(const RunConfig& c) {
  return json{{"pipeline", c.pipeline}, {"base", c.base},
              {"grid_depth", c.grid_depth}, {"stages", c.stages},
              {"eps_offset", c.eps_offset}, {"k1", c.k1},
              {"sigma", c.sigma},           {"seed", c.seed},
              {"lambda_step", c.lambda_step},
              {"kappa", json{c.kappa_gx, c.kappa_gy}}};
}

}  // namespace

std::string fraction(const Rat& q) { return to_string(q); }

RunVerdict weakmix_verdict(const ConstructionResult& result) {
  RunVerdict v;
  if (result.aborted) {
    if (result.abort_budget) {
      v.budget = true;
    } else {
      v.error = true;
      v.error_text = result.abort_reason;
    }
    v.pass = false;
    return v;
  }
  for (const auto& s : result.stages) {
    const std::string tag = "stage " + std::to_string(s.params.n) + ": ";
    if (!s.tower.epsilon_ok) v.failures.push_back(tag + "tower quality below request");
    for (const auto& a : s.atoms) {
      if (!a.good_ok) v.failures.push_back(tag + a.name + ": good-position fraction low");
      if (a.q_checked && !a.q_all_equal)
        v.failures.push_back(tag + a.name + ": return cells unequal");
      if (a.q_checked && !a.q_all_gap_ok)
        v.failures.push_back(tag + a.name + ": good-position gap over tolerance");
    }
    if (s.delta_present) {
      if (!s.aggregation_ok) v.failures.push_back(tag + "column aggregation gap");
      if (s.tower.all_green() && !s.measured_ok)
        v.failures.push_back(tag + "mixing gap over the measured threshold");
    }
  }
  for (const auto& r : result.agreement)
    if (!r.pass)
      v.failures.push_back("agreement bound fails at stage " + std::to_string(r.m) +
                           " vs " + std::to_string(r.nj));
  v.pass = v.failures.empty();
  return v;
}

std::string weakmix_report_json(const RunConfig& config, const ConstructionResult& result,
                                const RunVerdict& verdict) {
  json j;
  j["schema"] = "stage-report-v1";
  j["config"] = config_json(config);
  j["verdict"] = verdict_json(verdict);
  j["aborted"] = result.aborted;
  j["abort_reason"] = result.abort_reason;
  j["designated"] = result.designated;
  j["stages"] = json::array();
  for (const auto& s : result.stages) j["stages"].push_back(stage_json(s));
  j["agreement"] = json::array();
  for (const auto& r : result.agreement)
    j["agreement"].push_back({{"m", r.m},
                              {"nj", r.nj},
                              {"ell", r.ell},
                              {"disagreement", fraction(r.disagreement)},
                              {"bound", fraction(r.bound)},
                              {"pass", r.pass}});
  return j.dump(2) + "\n";
}

std::string agreement_csv(const ConstructionResult& result) {
  std::string out = "m,nj,ell,disagreement,bound,pass\n";
  for (const auto& r : result.agreement)
    out += std::to_string(r.m) + "," + std::to_string(r.nj) + "," + std::to_string(r.ell) + "," +
           fraction(r.disagreement) + "," + fraction(r.bound) + "," + (r.pass ? "1" : "0") + "\n";
  return out;
}

ZtileResult run_ztile(const RunConfig& config) {
  ZtileResult result;
  const RankOneSystem sys =
      build_rank_one(std::vector<unsigned>(static_cast<std::size_t>(config.grid_depth), 3));
  const LabeledPartition trivial({{"X", IntervalSet::unit()}});
  long height = 1, side = 1;
  const ColumnToTileMap* prev = nullptr;
  for (long n = 1; n <= config.stages; ++n) {
    height *= 9;
    side *= 3;
    const Tower tower = rank_one_tower(sys, height);
    result.maps.push_back(build_column_to_tile(tower, pure_partition(tower, trivial),
                                               make_square_tile(side), {}, prev));
    prev = &result.maps.back();
  }
  Z2Schedule schedule;
  schedule.eps_coeff = Rat(1) / rat(1L << config.eps_offset);
  result.bounds = z2_bound_check(result.maps, config.lambda_step,
                                 {config.kappa_gx, config.kappa_gy}, schedule);
  const auto eps = [&](long n) {
    Rat e = schedule.eps_coeff;
    for (long i = 0; i < n; ++i) e *= schedule.eps_ratio;
    return e;
  };
  for (long n = 2; n <= config.stages; ++n)
    result.exceptional.push_back(
        exceptional_set(result.maps, static_cast<std::size_t>(n), {1, 0}, eps(n), eps(n - 1)));
  return result;
}

RunVerdict ztile_verdict(const ZtileResult& result) {
  RunVerdict v;
  if (result.bounds.inconclusive) v.failures.push_back("bound tails lack a closed form");
  if (!result.bounds.d_ok && !result.bounds.inconclusive)
    v.failures.push_back("step-displacement fixed-stage bound fails");
  if (!result.bounds.e_ok && !result.bounds.inconclusive)
    v.failures.push_back("displacement-step fixed-stage bound fails");
  v.pass = v.failures.empty();
  return v;
}

std::string ztile_report_json(const RunConfig& config, const ZtileResult& result,
                              const RunVerdict& verdict) {
  json j;
  j["schema"] = "tile-report-v1";
  j["config"] = config_json(config);
  j["verdict"] = verdict_json(verdict);
  j["stages"] = json::array();
  for (const auto& m : result.maps)
    j["stages"].push_back(json::parse(m.to_json()));
  j["d_rows"] = json::array();
  for (const auto& r : result.bounds.d_rows) j["d_rows"].push_back(bound_row(r));
  j["e_rows"] = json::array();
  for (const auto& r : result.bounds.e_rows) j["e_rows"].push_back(bound_row(r));
  j["boundary_rows"] = json::array();
  for (const auto& r : result.bounds.boundary_rows) j["boundary_rows"].push_back(bound_row(r));
  j["d_residual"] = fraction(result.bounds.d_residual);
  j["e_residual"] = fraction(result.bounds.e_residual);
  j["d_total"] = fraction(result.bounds.d_total);
  j["inconclusive"] = result.bounds.inconclusive;
  j["exceptional"] = json::array();
  for (std::size_t i = 0; i < result.exceptional.size(); ++i) {
    const auto& e = result.exceptional[i];
    j["exceptional"].push_back({{"stage", static_cast<long>(i) + 2},
                                {"off_tower", fraction(e.part_mass[0])},
                                {"off_previous_tower", fraction(e.part_mass[1])},
                                {"cell_exits", fraction(e.part_mass[2])},
                                {"rim", fraction(e.part_mass[3])},
                                {"mass", fraction(e.mass)},
                                {"bound", fraction(e.bound)},
                                {"pass", e.pass}});
  }
  return j.dump(2) + "\n";
}

EntropyRunResult run_entropy(const RunConfig& config) {
  EntropyRunResult result;
  result.construction = run_construction(to_weak_mix(config));
  if (result.construction.aborted) return result;
  const StageCocycle& stage = result.construction.cocycle;
  const long built = static_cast<long>(stage.stages());
  result.value_partition = cocycle_partition(stage, config.lambda_step);
  result.value_entropy = shannon_entropy(result.value_partition.partition);
  result.sets = fixed_stage_sets(stage, config.lambda_step, built);
  GeometricSchedule schedule;
  schedule.eps_offset = config.eps_offset;
  const WeakMixConfig w = to_weak_mix(config);
  schedule.L1 = built >= 1 ? w.block_length(1) : 8;
  schedule.K1 = config.k1;
  result.bounds = bound_check6(result.sets, schedule);
  for (long n = 1; n <= built; ++n) {
    const Rat b = schedule.drift(n);
    result.ledger.rows.push_back(
        {n, result.sets.d[static_cast<std::size_t>(n) - 1].measure(),
         2 * b.get_num().get_si() + 1});
  }
  // Stage 1 never meets the asymptotic size schedule (its value window is
  // wider than 2^1); its contribution is carried exactly by the partial
  // sums, and the majorant certifies the schedule from stage 2 on.
  EntropyLedger scheduled;
  for (const auto& r : result.ledger.rows)
    if (r.n >= 2) scheduled.rows.push_back(r);
  TailMajorant majorant;
  majorant.coeff = 1;
  majorant.size_exp = 3;
  result.tail = prop22_check(scheduled, majorant);
  return result;
}

RunVerdict entropy_verdict(const EntropyRunResult& result) {
  RunVerdict v;
  if (result.construction.aborted) {
    if (result.construction.abort_budget) {
      v.budget = true;
    } else {
      v.error = true;
      v.error_text = result.construction.abort_reason;
    }
    v.pass = false;
    return v;
  }
  for (const auto& b : result.bounds)
    if (b.state == BoundVerdict::State::fail) v.failures.push_back(b.name + " fails");
  if (result.tail.verdict == Prop22Result::Verdict::violated)
    v.failures.push_back("entropy tail majorant violated at stage " +
                         std::to_string(result.tail.violating_stage));
  v.pass = v.failures.empty();
  return v;
}

std::string entropy_report_json(const RunConfig& config, const EntropyRunResult& result,
                                const RunVerdict& verdict) {
  json j;
  j["schema"] = "entropy-report-v1";
  j["config"] = config_json(config);
  j["verdict"] = verdict_json(verdict);
  if (result.construction.aborted) {
    j["aborted"] = true;
    j["abort_reason"] = result.construction.abort_reason;
    return j.dump(2) + "\n";
  }
  j["residual_mass"] = fraction(result.value_partition.residual_mass);
  j["value_entropy"] = certified(result.value_entropy);
  j["bounds"] = json::array();
  for (const auto& b : result.bounds) {
    const char* state = b.state == BoundVerdict::State::pass         ? "pass"
                        : b.state == BoundVerdict::State::fail       ? "fail"
                                                                     : "inconclusive";
    j["bounds"].push_back({{"name", b.name},
                           {"lhs", fraction(b.lhs)},
                           {"rhs_lower", fraction(b.rhs_lower)},
                           {"rhs_upper", fraction(b.rhs_upper)},
                           {"state", state}});
  }
  j["ledger"] = json::array();
  for (const auto& r : result.ledger.rows)
    j["ledger"].push_back({{"n", r.n}, {"mass", fraction(r.mass)}, {"size", r.size}});
  j["partial_sums"] = json::array();
  for (const auto& s : ledger_partial_sums(result.ledger)) j["partial_sums"].push_back(certified(s));
  j["schedule_rows_from"] = 2;
  const char* tail_state = result.tail.verdict == Prop22Result::Verdict::finite ? "finite"
                           : result.tail.verdict == Prop22Result::Verdict::violated
                               ? "violated"
                               : "inconclusive";
  j["tail"] = {{"verdict", tail_state},
               {"value", certified(result.tail.tail_value)},
               {"from", result.tail.tail_from}};
  return j.dump(2) + "\n";
}

std::string ledger_csv(const EntropyLedger& ledger) {
  std::string out = "n,mass,size\n";
  for (const auto& r : ledger.rows)
    out += std::to_string(r.n) + "," + fraction(r.mass) + "," + std::to_string(r.size) + "\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace soe
