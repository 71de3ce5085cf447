#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "basisrisk/config.hpp"
#include "basisrisk/errors.hpp"
#include "basisrisk/pipeline.hpp"

namespace {

// 2 for problems the caller can fix from the command line (bad config or
// flags, unreadable files, contracts that are not offered); 1 for failures
// inside a stage.
int exit_code_for(basisrisk::ErrorKind kind) {
  using basisrisk::ErrorKind;
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::parse:
    case ErrorKind::io:
    case ErrorKind::not_offered:
      return 2;
    case ErrorKind::validation:
    case ErrorKind::insufficient_data:
    case ErrorKind::degenerate:
    case ErrorKind::domain:
      return 1;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch evaluation of area-based (index) crop insurance against "
               "no insurance and farm-level coverage"};
  app.require_subcommand(1);

  std::string config_path, out_dir, input_path, preference, premium_basis;
  std::string triggers, sizes;
  std::uint64_t seed = 0;
  int workers = 0, n_years = 0, min_years = 0;
  bool subsidy_on = false, subsidy_off = false;

  app.add_option("--config", config_path, "run configuration file");
  app.add_option("--seed", seed, "RNG seed (required here or in the config)");
  app.add_option("--workers", workers, "worker thread count");
  app.add_option("--out", out_dir, "output directory (default out)");
  app.add_option("--input", input_path, "panel file to ingest instead of generating");
  app.add_option("--n-years", n_years, "simulation horizon override");
  app.add_option("--min-years", min_years, "minimum observations per field series");
  app.add_flag("--subsidy", subsidy_on, "apply premium subsidies");
  app.add_flag("--no-subsidy", subsidy_off, "force fair premiums");
  app.add_option("--preference", preference, "crra or cpt");
  app.add_option("--premium-basis", premium_basis,
                 "field_fair, county_fair or subsidized");
  app.add_option("--triggers", triggers, "farm trigger grid, csv or lo:hi:step");
  app.add_option("--sizes", sizes, "sweep horizons, comma separated");

  auto* cmd_generate =
      app.add_subcommand("generate", "write a synthetic panel to the output directory");
  auto* cmd_fit = app.add_subcommand("fit", "field-to-county regressions");
  auto* cmd_simulate = app.add_subcommand("simulate", "simulate a balanced panel from fits");
  auto* cmd_evaluate = app.add_subcommand("evaluate", "price contracts and score welfare");
  auto* cmd_aggregate = app.add_subcommand("aggregate", "county aggregates and reversal report");
  auto* cmd_sweep = app.add_subcommand("sweep", "re-run the evaluation across horizon lengths");
  auto* cmd_run = app.add_subcommand("run", "full pipeline end to end");
  for (auto* cmd : {cmd_generate, cmd_fit, cmd_simulate, cmd_evaluate,
                    cmd_aggregate, cmd_sweep, cmd_run})
    cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    basisrisk::KeyValueConfig kv;
    if (!config_path.empty()) kv = basisrisk::KeyValueConfig::parse_file(config_path);
    if (app.count("--seed")) kv.set("run", "seed", std::to_string(seed));
    if (app.count("--workers")) kv.set("run", "workers", std::to_string(workers));
    if (app.count("--out")) kv.set("run", "out", out_dir);
    if (app.count("--input")) {
      kv.set("input", "mode", "file");
      kv.set("input", "path", input_path);
    }
    if (app.count("--min-years")) kv.set("filter", "min_years", std::to_string(min_years));
    if (app.count("--n-years")) kv.set("simulate", "n_years", std::to_string(n_years));
    if (subsidy_on) kv.set("contracts", "subsidy", "on");
    if (subsidy_off) kv.set("contracts", "subsidy", "off");
    if (app.count("--preference")) kv.set("preference", "kind", preference);
    if (app.count("--premium-basis")) kv.set("contracts", "premium_basis", premium_basis);
    if (app.count("--triggers")) kv.set("contracts", "grid", triggers);
    if (app.count("--sizes")) kv.set("sweep", "sizes", sizes);

    basisrisk::RunConfig cfg = basisrisk::load_run_config(kv);

    if (cmd_generate->parsed()) {
      basisrisk::stage_generate(cfg);
      std::cout << cfg.out_dir << "/" << basisrisk::stage_file::panel << "\n";
    } else if (cmd_fit->parsed()) {
      basisrisk::stage_fit(cfg);
      std::cout << cfg.out_dir << "/" << basisrisk::stage_file::fits << "\n";
    } else if (cmd_simulate->parsed()) {
      basisrisk::stage_simulate(cfg);
      std::cout << cfg.out_dir << "/" << basisrisk::stage_file::simulated << "\n";
    } else if (cmd_evaluate->parsed()) {
      basisrisk::stage_evaluate(cfg);
      std::cout << cfg.out_dir << "/" << basisrisk::stage_file::field_evals << "\n";
    } else if (cmd_aggregate->parsed()) {
      basisrisk::stage_aggregate(cfg);
      std::cout << cfg.out_dir << "/" << basisrisk::stage_file::county_aggregates << "\n";
    } else if (cmd_sweep->parsed()) {
      basisrisk::SweepResult res = basisrisk::run_sample_size_sweep(cfg);
      for (const auto& s : res.summary)
        std::printf("T=%d avg_share_ge_85=%.4f avg_share_ge_90=%.4f\n", s.n_years,
                    s.avg_share_ge_85, s.avg_share_ge_90);
    } else if (cmd_run->parsed()) {
      basisrisk::PipelineResult res = basisrisk::run_pipeline(cfg);
      std::cout << res.out_dir << "/" << basisrisk::stage_file::manifest << "\n";
    }
    return 0;
  } catch (const basisrisk::Error& e) {
    std::cerr << "basisrisk: [" << basisrisk::error_kind_name(e.kind()) << "] "
              << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "basisrisk: " << e.what() << "\n";
    return 1;
  }
}
