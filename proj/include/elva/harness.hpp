// Batch front door: configuration files, named numerical presets,
// validation, pricing runs, parameter sweeps and exercise-region export.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "elva/contract.hpp"
#include "elva/hull_white.hpp"
#include "elva/hybrid_pricer.hpp"
#include "elva/levy_models.hpp"
#include "elva/lsmc_pricer.hpp"

namespace elva {

inline constexpr const char* kEngineVersion = "elva 0.1.0";

struct ModelSpec {
  std::string type = "nig";  // nig | vg | cgmy | mjd
  NigParams nig{6.0, -0.4, 2.0};
  VgParams vg{0.85, 0.0, 0.2};
  CgmyParams cgmy{0.02, 5.0, 15.0, 1.2};
  MjdParams mjd{0.25, 0.6, 0.01, 0.13};
};

struct RateSpec {
  double k = 0.2;
  double sigma = 0.03;
  double r0 = 0.02;
  std::string curve = "flat";  // "flat" or a CSV path of (maturity, zcb)
};

struct ContractSpec {
  int maturity = 25;
  double f0 = 1.0;
  double g = 0.01;
  double c = 0.15;
  double q = 0.01;
  std::vector<double> fees{0.02};
  std::vector<double> penalties{0.02};
  int age = 30;
};

struct NumericsSpec {
  std::string preset;  // optional name: A, B, C, D, benchmark
  double dy = 0.010;
  int steps_per_year = 10;
  double grid_width_stds = 6.0;
  double explicit_intensity_budget = 1.0;
  double tail_tolerance = 1e-8;
  std::size_t paths = 250000;
  std::uint64_t seed = 20240202;
  bool out_of_sample = false;
  std::size_t out_of_sample_paths = 0;  // 0 = same count as `paths`
  int threads = 1;
};

struct ExperimentConfig {
  ModelSpec model;
  RateSpec rates;
  ContractSpec contract;
  std::string mortality_path = "data/mortality.csv";
  std::string method = "both";  // hybrid | lsmc | both
  NumericsSpec numerics;
  std::string sweep_parameter;  // empty = no sweep configured
  std::vector<double> sweep_values;
  std::vector<int> region_anniversaries;
  std::string output_dir;
};

// Table of named presets: (paths, dy, steps per year).
struct Preset {
  std::size_t paths;
  double dy;
  int steps_per_year;
  std::size_t out_of_sample_paths;  // nonzero only for the benchmark profile
};
const Preset* find_preset(const std::string& name);
void apply_preset(ExperimentConfig& config, const std::string& name);

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

// Schema and domain checks; returns human-readable violations with field
// paths. Never runs the engines.
std::vector<std::string> validate(const ExperimentConfig& config);

LevyModel build_model(const ModelSpec& spec);
HullWhiteParams build_rates(const RateSpec& spec);
ElvaContract build_contract(const ContractSpec& spec);
HybridConfig build_hybrid_config(const NumericsSpec& spec);

struct ResultRecord {
  std::string method;
  double price_surrender = 0.0;
  double price_no_surrender = 0.0;
  double premium = 0.0;
  bool has_ci = false;  // premium confidence interval (Monte Carlo only)
  double premium_std_error = 0.0;
  double premium_ci_lo = 0.0;
  double premium_ci_hi = 0.0;
  double runtime_seconds = 0.0;
  std::string engine_version = kEngineVersion;
  std::uint64_t seed = 0;
};
nlohmann::json record_to_json(const ResultRecord& record);

struct RunOutput {
  std::vector<ResultRecord> records;
  bool has_agreement = false;
  bool agreement = false;  // hybrid premium inside the Monte Carlo 99% CI
};

ResultRecord run_hybrid(const ExperimentConfig& config);
ResultRecord run_lsmc(const ExperimentConfig& config);
RunOutput run_experiment(const ExperimentConfig& config);
// Writes <dir>/result.json; creates the directory if needed.
void write_run_output(const ExperimentConfig& config, const RunOutput& out,
                      const std::string& dir);

struct SweepRow {
  double value = 0.0;
  double premium = 0.0;
  std::string method;
  double runtime_seconds = 0.0;
  std::string error;  // empty on success
};
std::vector<SweepRow> run_sweep(const ExperimentConfig& config);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

// One file per anniversary: rows (fund, rate, surrender_optimal).
std::vector<std::string> run_region_export(const ExperimentConfig& config,
                                           const std::string& dir);

}  // namespace elva
