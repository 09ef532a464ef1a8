#pragma once

#include "config.hpp"
#include "tile_map.hpp"

namespace soe {

// Hard verdicts gate the exit status; everything else is reported alongside.
struct RunVerdict {
  bool pass = true;
  bool budget = false;
  bool error = false;
  std::string error_text;
  std::vector<std::string> failures;

  int exit_code() const { return error ? 1 : (budget ? 3 : (pass ? 0 : 2)); }
};

std::string fraction(const Rat& q);

RunVerdict weakmix_verdict(const ConstructionResult& result);
std::string weakmix_report_json(const RunConfig& config, const ConstructionResult& result,
                                const RunVerdict& verdict);
std::string agreement_csv(const ConstructionResult& result);

struct ZtileResult {
  std::vector<ColumnToTileMap> maps;
  Z2BoundReport bounds;
  std::vector<ExceptionalReport> exceptional;  // stages 2..n
};

ZtileResult run_ztile(const RunConfig& config);
RunVerdict ztile_verdict(const ZtileResult& result);
std::string ztile_report_json(const RunConfig& config, const ZtileResult& result,
                              const RunVerdict& verdict);

struct EntropyRunResult {
  ConstructionResult construction;
  CocyclePartitionResult value_partition;
  CertifiedReal value_entropy;
  FixedStageSets sets;
  std::vector<BoundVerdict> bounds;
  EntropyLedger ledger;
  Prop22Result tail;
};

EntropyRunResult run_entropy(const RunConfig& config);
RunVerdict entropy_verdict(const EntropyRunResult& result);
std::string entropy_report_json(const RunConfig& config, const EntropyRunResult& result,
                                const RunVerdict& verdict);

std::string ledger_csv(const EntropyLedger& ledger);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace soe
