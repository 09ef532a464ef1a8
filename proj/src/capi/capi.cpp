#include "soe/soe.h"

#include <cstring>
#include <optional>
#include <string>

#include "core/report.hpp"

using namespace soe;

struct soe_run {
  RunConfig config;
  std::string error;
  std::string report;
  std::string csv_agreement;
  std::string csv_lambda;
  std::string csv_kappa;
  std::optional<int> status;
};

namespace {

void fill_err(char* err, size_t err_len, const std::string& text) {
  if (!err || err_len == 0) return;
  const size_t n = std::min(err_len - 1, text.size());
  std::memcpy(err, text.data(), n);
  err[n] = '\0';
}

int execute_locked(soe_run& run) {
  try {
    validate(run.config);
    if (run.config.pipeline == "weakmix") {
      const ConstructionResult result = run_construction(to_weak_mix(run.config));
      const RunVerdict verdict = weakmix_verdict(result);
      run.report = weakmix_report_json(run.config, result, verdict);
      run.csv_agreement = agreement_csv(result);
      run.error = verdict.error_text;
      return verdict.exit_code();
    }
    if (run.config.pipeline == "ztile") {
      const ZtileResult result = run_ztile(run.config);
      const RunVerdict verdict = ztile_verdict(result);
      run.report = ztile_report_json(run.config, result, verdict);
      run.csv_lambda = ledger_csv(result.bounds.lambda_ledger);
      run.csv_kappa = ledger_csv(result.bounds.kappa_ledger);
      return verdict.exit_code();
    }
    const EntropyRunResult result = run_entropy(run.config);
    const RunVerdict verdict = entropy_verdict(result);
    run.report = entropy_report_json(run.config, result, verdict);
    run.csv_lambda = ledger_csv(result.ledger);
    run.error = verdict.error_text;
    return verdict.exit_code();
  } catch (const std::exception& e) {
    run.error = e.what();
    return SOE_EXIT_ERROR;
  }
}

}  // namespace

extern "C" {

soe_run* soe_run_create_from_file(const char* path, char* err, size_t err_len) {
  if (!path) {
    fill_err(err, err_len, "null path");
    return nullptr;
  }
  try {
    auto run = new soe_run;
    run->config = load_config_file(path);
    return run;
  } catch (const std::exception& e) {
    fill_err(err, err_len, e.what());
    return nullptr;
  }
}

soe_run* soe_run_create_from_text(const char* text, int is_json, char* err, size_t err_len) {
  if (!text) {
    fill_err(err, err_len, "null config text");
    return nullptr;
  }
  try {
    auto run = new soe_run;
    run->config = is_json ? parse_config_json(text) : parse_config_toml(text);
    return run;
  } catch (const std::exception& e) {
    fill_err(err, err_len, e.what());
    return nullptr;
  }
}

int soe_run_set_option(soe_run* run, const char* key, const char* value) {
  if (!run || !key || !value) return 1;
  if (run->status) {
    run->error = "options are fixed once the run has executed";
    return 1;
  }
  try {
    apply_option(run->config, key, value);
    return 0;
  } catch (const std::exception& e) {
    run->error = e.what();
    return 1;
  }
}

int soe_run_execute(soe_run* run) {
  if (!run) return SOE_EXIT_ERROR;
  if (!run->status) run->status = execute_locked(*run);
  return *run->status;
}

const char* soe_run_report_json(soe_run* run) {
  if (!run || run->report.empty()) return nullptr;
  return run->report.c_str();
}

int soe_run_write_outputs(soe_run* run, const char* dir) {
  if (!run || !dir || run->report.empty()) return 1;
  try {
    const std::string base = std::string(dir) + "/";
    write_text_file(base + "report.json", run->report);
    if (!run->csv_agreement.empty())
      write_text_file(base + "agreement.csv", run->csv_agreement);
    if (!run->csv_lambda.empty())
      write_text_file(base + "lambda_ledger.csv", run->csv_lambda);
    if (!run->csv_kappa.empty()) write_text_file(base + "kappa_ledger.csv", run->csv_kappa);
    return 0;
  } catch (const std::exception& e) {
    run->error = e.what();
    return 1;
  }
}

const char* soe_run_error(const soe_run* run) { return run ? run->error.c_str() : ""; }

void soe_run_destroy(soe_run* run) { delete run; }

}  // extern "C"
