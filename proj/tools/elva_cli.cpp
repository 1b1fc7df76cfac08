// Command-line front end for the annuity pricing engines.
//
//   elva price    --config cfg.json [--preset B] [--method both] [--out dir]
//   elva sweep    --config cfg.json
//   elva region   --config cfg.json --out dir
//   elva validate --config cfg.json
//
// Exit codes: 0 success, 2 validation failure, 3 engine failure.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "elva/harness.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::string method;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--config", opts->config_path, "configuration file (JSON)");
  cmd->add_option("--preset", opts->preset,
                  "numerical preset: A, B, C, D or benchmark");
  cmd->add_option("--method", opts->method, "hybrid, lsmc or both");
  cmd->add_option("--out", opts->out_dir, "output directory");
  cmd->add_option("--threads", opts->threads, "worker threads");
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [opts](const std::uint64_t& s) {
        opts->seed = s;
        opts->seed_set = true;
      },
      "Monte Carlo master seed");
}

elva::ExperimentConfig assemble(const CommonOpts& opts) {
  elva::ExperimentConfig config;
  if (!opts.config_path.empty()) config = elva::load_config(opts.config_path);
  if (!opts.preset.empty()) elva::apply_preset(config, opts.preset);
  if (!opts.method.empty()) config.method = opts.method;
  if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
  if (opts.seed_set) config.numerics.seed = opts.seed;
  if (opts.threads > 0) config.numerics.threads = opts.threads;
  return config;
}

int check(const elva::ExperimentConfig& config, bool print_ok) {
  const auto violations = elva::validate(config);
  if (violations.empty()) {
    if (print_ok) std::puts("ok");
    return 0;
  }
  for (const auto& v : violations) std::fprintf(stderr, "invalid: %s\n", v.c_str());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equity-linked annuity pricing (hybrid lattice/PIDE and Monte Carlo)"};
  app.require_subcommand(1);

  CommonOpts price_opts, sweep_opts, region_opts, validate_opts;
  CLI::App* price = app.add_subcommand("price", "price one contract configuration");
  CLI::App* sweep = app.add_subcommand("sweep", "premium across a parameter sweep");
  CLI::App* region = app.add_subcommand("region", "export surrender regions");
  CLI::App* validate = app.add_subcommand("validate", "check a configuration file");
  add_common(price, &price_opts);
  add_common(sweep, &sweep_opts);
  add_common(region, &region_opts);
  add_common(validate, &validate_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      return check(assemble(validate_opts), true);
    }
    if (price->parsed()) {
      const auto config = assemble(price_opts);
      if (int rc = check(config, false)) return rc;
      const auto out = elva::run_experiment(config);
      for (const auto& rec : out.records)
        std::printf("%-6s  surrender %.6f  no-surrender %.6f  premium %.6f%s\n",
                    rec.method.c_str(), rec.price_surrender, rec.price_no_surrender,
                    rec.premium,
                    rec.has_ci
                        ? ("  ci99 [" + std::to_string(rec.premium_ci_lo) + ", " +
                           std::to_string(rec.premium_ci_hi) + "]")
                              .c_str()
                        : "");
      if (out.has_agreement)
        std::printf("agreement: hybrid premium %s the lsmc 99%% interval\n",
                    out.agreement ? "inside" : "OUTSIDE");
      if (!config.output_dir.empty())
        elva::write_run_output(config, out, config.output_dir);
      return 0;
    }
    if (sweep->parsed()) {
      const auto config = assemble(sweep_opts);
      if (int rc = check(config, false)) return rc;
      const auto rows = elva::run_sweep(config);
      const std::string dir =
          config.output_dir.empty() ? std::string(".") : config.output_dir;
      std::filesystem::create_directories(dir);
      const std::string path = dir + "/sweep_" + config.sweep_parameter + ".csv";
      elva::write_sweep_csv(rows, path);
      std::printf("wrote %s (%zu rows)\n", path.c_str(), rows.size());
      return 0;
    }
    if (region->parsed()) {
      const auto config = assemble(region_opts);
      if (int rc = check(config, false)) return rc;
      const std::string dir =
          config.output_dir.empty() ? std::string(".") : config.output_dir;
      const auto files = elva::run_region_export(config, dir);
      for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
