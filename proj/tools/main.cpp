#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "soe/soe.h"

int main(int argc, char** argv) {
  CLI::App app{"Staged-construction engine: exact-rational runs with bound reports"};
  app.require_subcommand(1);

  CLI::App* run_cmd = app.add_subcommand("run", "Execute a run config and emit reports");
  std::string config_path;
  run_cmd->add_option("config", config_path, "Config file (key = value, or .json)")->required();
  std::string stages, seed, sigma, out_dir, pipeline;
  run_cmd->add_option("--stages", stages, "Override the stage count");
  run_cmd->add_option("--seed", seed, "Override the draw seed");
  run_cmd->add_option("--sigma", sigma, "Assignment mode: exact|iid");
  run_cmd->add_option("--out", out_dir, "Directory for report.json and CSV ledgers");
  run_cmd->add_option("--pipeline", pipeline, "Pipeline: weakmix|ztile|entropy");

  CLI11_PARSE(app, argc, argv);

  char err[512] = {0};
  soe_run* run = soe_run_create_from_file(config_path.c_str(), err, sizeof err);
  if (!run) {
    std::fprintf(stderr, "config error: %s\n", err);
    return SOE_EXIT_ERROR;
  }

  const auto set = [&](const char* key, const std::string& value) {
    if (value.empty()) return true;
    if (soe_run_set_option(run, key, value.c_str()) != 0) {
      std::fprintf(stderr, "config error: %s\n", soe_run_error(run));
      return false;
    }
    return true;
  };
  if (!set("stages", stages) || !set("seed", seed) || !set("sigma", sigma) ||
      !set("pipeline", pipeline.empty() ? "" : "\"" + pipeline + "\"")) {
    soe_run_destroy(run);
    return SOE_EXIT_ERROR;
  }

  const int status = soe_run_execute(run);
  const char* report = soe_run_report_json(run);
  if (report) std::fputs(report, stdout);
  if (status == SOE_EXIT_ERROR) std::fprintf(stderr, "error: %s\n", soe_run_error(run));

  if (!out_dir.empty() && report) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (soe_run_write_outputs(run, out_dir.c_str()) != 0) {
      std::fprintf(stderr, "write error: %s\n", soe_run_error(run));
      soe_run_destroy(run);
      return SOE_EXIT_ERROR;
    }
  }
  soe_run_destroy(run);
  return status;
}
