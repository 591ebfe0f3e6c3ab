// creditvote: run one stage or the whole pipeline from a JSON config.
//
//   creditvote --stage all --out run1 --seed 7 --workers 4
//   creditvote --config cfg.json --stage estimate --years 2012,2014,2016

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>
#include <string>

#include "creditvote/errors.hpp"
#include "creditvote/pipeline/config.hpp"
#include "creditvote/pipeline/stages.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kData = 3;
constexpr int kEstimation = 4;

int fail(int code, std::string_view kind, std::string_view what) {
  fmt::print(stderr, "creditvote: {} error: {}\n", kind, what);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace creditvote;

  CLI::App app{"Credit-threshold shares and congressional voting pipeline"};
  std::optional<std::string> config_path, out_dir, years;
  std::optional<int> bandwidth, workers;
  std::optional<std::uint64_t> seed;
  std::string stage_name = "all";
  app.add_option("--config", config_path, "JSON config; defaults are used when omitted");
  app.add_option("--stage", stage_name,
                 "simulate, crosswalk, scan, shares, estimate, report, pipeline (all but simulate) or all");
  app.add_option("--bandwidth", bandwidth, "headline bandwidth (5, 10, 15, 20 or 25)");
  app.add_option("--years", years, "comma-separated election years for estimation, e.g. 2012,2014,2016");
  app.add_option("--workers", workers, "worker threads");
  app.add_option("--seed", seed, "synthetic world seed");
  app.add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    pipeline::PipelineConfig config;
    if (config_path) config = pipeline::load_config(*config_path);
    if (out_dir) config.out_dir = *out_dir;
    if (bandwidth) config.bandwidth = *bandwidth;
    if (workers) config.workers = *workers;
    if (seed) config.world.seed = *seed;
    if (years) config.estimation_years = pipeline::parse_year_list(*years);
    const auto stage = pipeline::stage_from_string(stage_name);
    config.validate();

    for (const auto& result : pipeline::run_stage(stage, config)) {
      for (const auto& m : result.messages) fmt::print("[{}] {}\n", result.stage, m);
      fmt::print("[{}] wrote {} files to {}\n", result.stage, result.outputs.size(), config.out_dir.string());
    }
    return kOk;
  } catch (const ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const DataError& e) {
    return fail(kData, "data", e.what());
  } catch (const EstimationError& e) {
    return fail(kEstimation, "estimation", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kConfig, "config", e.what());
  }
}
