#include "elva/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace elva {
namespace {

using nlohmann::json;

double get_num(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

std::vector<double> get_schedule(const json& j, const char* key,
                                 const std::vector<double>& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

const Preset* find_preset(const std::string& name) {
  static const std::pair<const char*, Preset> table[] = {
      {"A", {43000, 0.015, 7, 0}},
      {"B", {250000, 0.010, 10, 0}},
      {"C", {670000, 0.008, 15, 0}},
      {"D", {2000000, 0.005, 22, 0}},
      {"benchmark", {40000000, 0.001, 100, 10000000}},
  };
  for (const auto& [key, preset] : table)
    if (name == key) return &preset;
  return nullptr;
}

void apply_preset(ExperimentConfig& config, const std::string& name) {
  const Preset* p = find_preset(name);
  if (!p) throw std::invalid_argument("unknown preset: " + name);
  config.numerics.preset = name;
  config.numerics.paths = p->paths;
  config.numerics.dy = p->dy;
  config.numerics.steps_per_year = p->steps_per_year;
  if (p->out_of_sample_paths > 0) {
    config.numerics.out_of_sample = true;
    config.numerics.out_of_sample_paths = p->out_of_sample_paths;
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    c.model.type = m.value("type", c.model.type);
    if (c.model.type == "nig") {
      c.model.nig.alpha = get_num(m, "alpha", c.model.nig.alpha);
      c.model.nig.beta = get_num(m, "beta", c.model.nig.beta);
      c.model.nig.delta = get_num(m, "delta", c.model.nig.delta);
    } else if (c.model.type == "vg") {
      c.model.vg.kappa = get_num(m, "kappa", c.model.vg.kappa);
      c.model.vg.theta = get_num(m, "theta", c.model.vg.theta);
      c.model.vg.sigma = get_num(m, "sigma", c.model.vg.sigma);
    } else if (c.model.type == "cgmy") {
      c.model.cgmy.c = get_num(m, "C", c.model.cgmy.c);
      c.model.cgmy.g = get_num(m, "G", c.model.cgmy.g);
      c.model.cgmy.m = get_num(m, "M", c.model.cgmy.m);
      c.model.cgmy.y = get_num(m, "Y", c.model.cgmy.y);
    } else if (c.model.type == "mjd") {
      c.model.mjd.sigma = get_num(m, "sigma", c.model.mjd.sigma);
      c.model.mjd.lambda = get_num(m, "lambda", c.model.mjd.lambda);
      c.model.mjd.jump_mean = get_num(m, "jump_mean", c.model.mjd.jump_mean);
      c.model.mjd.jump_std = get_num(m, "jump_std", c.model.mjd.jump_std);
    }
  }
  if (j.contains("rates")) {
    const auto& r = j.at("rates");
    c.rates.k = get_num(r, "k", c.rates.k);
    c.rates.sigma = get_num(r, "sigma", c.rates.sigma);
    c.rates.r0 = get_num(r, "r0", c.rates.r0);
    c.rates.curve = r.value("curve", c.rates.curve);
  }
  if (j.contains("contract")) {
    const auto& k = j.at("contract");
    c.contract.maturity = static_cast<int>(get_num(k, "maturity", c.contract.maturity));
    c.contract.f0 = get_num(k, "f0", c.contract.f0);
    c.contract.g = get_num(k, "g", c.contract.g);
    c.contract.c = get_num(k, "c", c.contract.c);
    c.contract.q = get_num(k, "q", c.contract.q);
    c.contract.fees = get_schedule(k, "fee", c.contract.fees);
    c.contract.penalties = get_schedule(k, "penalty", c.contract.penalties);
    c.contract.age = static_cast<int>(get_num(k, "age", c.contract.age));
  }
  c.mortality_path = j.value("mortality", c.mortality_path);
  c.method = j.value("method", c.method);
  if (j.contains("numerics")) {
    const auto& n = j.at("numerics");
    if (n.contains("preset")) apply_preset(c, n.at("preset").get<std::string>());
    c.numerics.dy = get_num(n, "dy", c.numerics.dy);
    c.numerics.steps_per_year =
        static_cast<int>(get_num(n, "steps_per_year", c.numerics.steps_per_year));
    c.numerics.grid_width_stds =
        get_num(n, "grid_width_stds", c.numerics.grid_width_stds);
    c.numerics.explicit_intensity_budget = get_num(
        n, "explicit_intensity_budget", c.numerics.explicit_intensity_budget);
    c.numerics.tail_tolerance = get_num(n, "tail_tolerance", c.numerics.tail_tolerance);
    if (n.contains("paths")) c.numerics.paths = n.at("paths").get<std::size_t>();
    if (n.contains("seed")) c.numerics.seed = n.at("seed").get<std::uint64_t>();
    c.numerics.out_of_sample = n.value("out_of_sample", c.numerics.out_of_sample);
    if (n.contains("out_of_sample_paths"))
      c.numerics.out_of_sample_paths = n.at("out_of_sample_paths").get<std::size_t>();
    c.numerics.threads = static_cast<int>(get_num(n, "threads", c.numerics.threads));
  }
  if (j.contains("sweep")) {
    c.sweep_parameter = j.at("sweep").value("parameter", "");
    if (j.at("sweep").contains("values"))
      c.sweep_values = j.at("sweep").at("values").get<std::vector<double>>();
  }
  if (j.contains("region") && j.at("region").contains("anniversaries"))
    c.region_anniversaries =
        j.at("region").at("anniversaries").get<std::vector<int>>();
  if (j.contains("output")) c.output_dir = j.at("output").value("dir", "");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);  // comments allowed
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: " + std::string(e.what()));
  }
  return config_from_json(j);
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  json m;
  m["type"] = c.model.type;
  if (c.model.type == "nig") {
    m["alpha"] = c.model.nig.alpha;
    m["beta"] = c.model.nig.beta;
    m["delta"] = c.model.nig.delta;
  } else if (c.model.type == "vg") {
    m["kappa"] = c.model.vg.kappa;
    m["theta"] = c.model.vg.theta;
    m["sigma"] = c.model.vg.sigma;
  } else if (c.model.type == "cgmy") {
    m["C"] = c.model.cgmy.c;
    m["G"] = c.model.cgmy.g;
    m["M"] = c.model.cgmy.m;
    m["Y"] = c.model.cgmy.y;
  } else {
    m["sigma"] = c.model.mjd.sigma;
    m["lambda"] = c.model.mjd.lambda;
    m["jump_mean"] = c.model.mjd.jump_mean;
    m["jump_std"] = c.model.mjd.jump_std;
  }
  json out{
      {"model", m},
      {"rates",
       {{"k", c.rates.k}, {"sigma", c.rates.sigma}, {"r0", c.rates.r0},
        {"curve", c.rates.curve}}},
      {"contract",
       {{"maturity", c.contract.maturity}, {"f0", c.contract.f0},
        {"g", c.contract.g}, {"c", c.contract.c}, {"q", c.contract.q},
        {"fee", c.contract.fees}, {"penalty", c.contract.penalties},
        {"age", c.contract.age}}},
      {"mortality", c.mortality_path},
      {"method", c.method},
      {"numerics",
       {{"preset", c.numerics.preset}, {"dy", c.numerics.dy},
        {"steps_per_year", c.numerics.steps_per_year},
        {"grid_width_stds", c.numerics.grid_width_stds},
        {"explicit_intensity_budget", c.numerics.explicit_intensity_budget},
        {"tail_tolerance", c.numerics.tail_tolerance},
        {"paths", c.numerics.paths}, {"seed", c.numerics.seed},
        {"out_of_sample", c.numerics.out_of_sample},
        {"out_of_sample_paths", c.numerics.out_of_sample_paths},
        {"threads", c.numerics.threads}}},
  };
  if (!c.sweep_parameter.empty())
    out["sweep"] = {{"parameter", c.sweep_parameter}, {"values", c.sweep_values}};
  if (!c.region_anniversaries.empty())
    out["region"] = {{"anniversaries", c.region_anniversaries}};
  if (!c.output_dir.empty()) out["output"] = {{"dir", c.output_dir}};
  return out;
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> bad;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) bad.push_back(msg);
  };

  const std::string& t = c.model.type;
  require(t == "nig" || t == "vg" || t == "cgmy" || t == "mjd",
          "model.type: must be one of nig, vg, cgmy, mjd");
  if (t == "nig") {
    require(c.model.nig.alpha > 0.0, "model.alpha: must be positive");
    require(std::abs(c.model.nig.beta) < c.model.nig.alpha,
            "model.beta: requires |beta| < alpha");
    require(std::abs(c.model.nig.beta + 1.0) < c.model.nig.alpha,
            "model.beta: requires |beta + 1| < alpha for exponential moments");
    require(c.model.nig.delta > 0.0, "model.delta: must be positive");
  } else if (t == "vg") {
    require(c.model.vg.kappa > 0.0, "model.kappa: must be positive");
    require(c.model.vg.sigma > 0.0, "model.sigma: must be positive");
    require(1.0 - c.model.vg.theta * c.model.vg.kappa -
                    0.5 * c.model.vg.kappa * c.model.vg.sigma * c.model.vg.sigma >
                0.0,
            "model: VG parameters do not admit exponential moments");
  } else if (t == "cgmy") {
    require(c.model.cgmy.c > 0.0, "model.C: must be positive");
    require(c.model.cgmy.g > 0.0, "model.G: must be positive");
    require(c.model.cgmy.m > 1.0, "model.M: must exceed 1");
    require(c.model.cgmy.y < 2.0, "model.Y: must be below 2");
  } else if (t == "mjd") {
    require(c.model.mjd.sigma >= 0.0, "model.sigma: must be nonnegative");
    require(c.model.mjd.lambda >= 0.0, "model.lambda: must be nonnegative");
    require(c.model.mjd.jump_std > 0.0, "model.jump_std: must be positive");
  }

  require(c.rates.k > 0.0, "rates.k: must be positive");
  require(c.rates.sigma > 0.0, "rates.sigma: must be positive");
  if (c.rates.curve != "flat")
    require(std::filesystem::exists(c.rates.curve),
            "rates.curve: file not found: " + c.rates.curve);

  require(c.contract.maturity >= 1, "contract.maturity: must be >= 1");
  require(c.contract.f0 > 0.0, "contract.f0: must be positive");
  require(c.contract.c >= c.contract.g, "contract.c: cap rate must be >= floor rate g");
  for (double a : c.contract.fees)
    require(a >= 0.0 && a < 1.0, "contract.fee: entries must lie in [0, 1)");
  require(c.contract.fees.size() == 1 ||
              c.contract.fees.size() == static_cast<std::size_t>(c.contract.maturity),
          "contract.fee: needs 1 or maturity entries");
  for (double p : c.contract.penalties)
    require(p >= 0.0 && p <= 1.0, "contract.penalty: entries must lie in [0, 1]");
  require(c.contract.penalties.size() == 1 ||
              c.contract.penalties.size() ==
                  static_cast<std::size_t>(std::max(1, c.contract.maturity - 1)),
          "contract.penalty: needs 1 or maturity-1 entries");
  require(c.contract.age >= 0, "contract.age: must be nonnegative");

  if (c.contract.maturity > 1)
    require(std::filesystem::exists(c.mortality_path),
            "mortality: file not found: " + c.mortality_path);

  require(c.method == "hybrid" || c.method == "lsmc" || c.method == "both",
          "method: must be hybrid, lsmc or both");

  const bool needs_hybrid = c.method != "lsmc";
  const bool needs_lsmc = c.method != "hybrid";
  if (needs_hybrid) {
    require(c.numerics.dy > 0.0, "numerics.dy: must be positive");
    require(c.numerics.steps_per_year >= 1, "numerics.steps_per_year: must be >= 1");
    require(c.numerics.grid_width_stds > 0.0,
            "numerics.grid_width_stds: must be positive");
  }
  if (needs_lsmc)
    require(c.numerics.paths >= 2, "numerics.paths: must be >= 2");
  require(c.numerics.threads >= 1, "numerics.threads: must be >= 1");

  if (!c.sweep_parameter.empty()) {
    const std::string& p = c.sweep_parameter;
    require(p == "c" || p == "g" || p == "alpha" || p == "sigma_HW" ||
                p == "k_HW" || p == "alpha_levy",
            "sweep.parameter: must be one of c, g, alpha, sigma_HW, k_HW, alpha_levy");
    require(!c.sweep_values.empty(), "sweep.values: must be nonempty");
    if (p == "alpha_levy")
      require(t == "nig", "sweep.parameter: alpha_levy requires the nig model");
  }
  for (int m : c.region_anniversaries)
    require(m >= 1 && m <= c.contract.maturity - 1,
            "region.anniversaries: entries must lie in [1, maturity-1]");
  return bad;
}

LevyModel build_model(const ModelSpec& s) {
  if (s.type == "nig") return LevyModel::nig(s.nig.alpha, s.nig.beta, s.nig.delta);
  if (s.type == "vg") return LevyModel::vg(s.vg.kappa, s.vg.theta, s.vg.sigma);
  if (s.type == "cgmy")
    return LevyModel::cgmy(s.cgmy.c, s.cgmy.g, s.cgmy.m, s.cgmy.y);
  if (s.type == "mjd")
    return LevyModel::mjd(s.mjd.sigma, s.mjd.lambda, s.mjd.jump_mean, s.mjd.jump_std);
  throw std::invalid_argument("unknown model type: " + s.type);
}

HullWhiteParams build_rates(const RateSpec& s) {
  DiscountCurve curve = s.curve == "flat" ? DiscountCurve::flat(s.r0)
                                          : DiscountCurve::from_csv(s.curve);
  return HullWhiteParams(s.k, s.sigma, s.r0, std::move(curve));
}

ElvaContract build_contract(const ContractSpec& s) {
  return ElvaContract::make(s.maturity, s.f0, s.g, s.c, s.q, s.fees, s.penalties,
                            s.age);
}

HybridConfig build_hybrid_config(const NumericsSpec& s) {
  HybridConfig h;
  h.dy = s.dy;
  h.steps_per_year = s.steps_per_year;
  h.grid_width_stds = s.grid_width_stds;
  h.explicit_intensity_budget = s.explicit_intensity_budget;
  h.tail_tolerance = s.tail_tolerance;
  h.threads = s.threads;
  return h;
}

nlohmann::json record_to_json(const ResultRecord& r) {
  json j{{"method", r.method},
         {"price_surrender", r.price_surrender},
         {"price_no_surrender", r.price_no_surrender},
         {"premium", r.premium},
         {"runtime_seconds", r.runtime_seconds},
         {"engine_version", r.engine_version},
         {"seed", r.seed}};
  if (r.has_ci) {
    j["premium_std_error"] = r.premium_std_error;
    j["premium_ci"] = {r.premium_ci_lo, r.premium_ci_hi};
  }
  return j;
}

ResultRecord run_hybrid(const ExperimentConfig& config) {
  Timer timer;
  const LevyModel model = build_model(config.model);
  const HullWhiteParams rates = build_rates(config.rates);
  const ElvaContract contract = build_contract(config.contract);
  const MortalityTable mortality = MortalityTable::load_csv(config.mortality_path);
  const HybridPricer pricer(contract, model, rates, mortality,
                            build_hybrid_config(config.numerics));
  ResultRecord rec;
  rec.method = "hybrid";
  rec.seed = config.numerics.seed;
  rec.price_surrender = pricer.price(SurrenderMode::allowed);
  rec.price_no_surrender = pricer.price(SurrenderMode::prohibited);
  rec.premium = rec.price_surrender - rec.price_no_surrender;
  rec.runtime_seconds = timer.seconds();
  return rec;
}

ResultRecord run_lsmc(const ExperimentConfig& config) {
  Timer timer;
  const LevyModel model = build_model(config.model);
  const HullWhiteParams rates = build_rates(config.rates);
  const ElvaContract contract = build_contract(config.contract);
  const MortalityTable mortality = MortalityTable::load_csv(config.mortality_path);

  const PathSet paths = simulate_paths(model, rates, contract,
                                       config.numerics.paths, config.numerics.seed);
  const BackwardResult backward = backward_induction(paths, contract, mortality);

  std::vector<double> surrender_cf, plain_cf;
  if (config.numerics.out_of_sample) {
    const std::size_t n2 = config.numerics.out_of_sample_paths > 0
                               ? config.numerics.out_of_sample_paths
                               : config.numerics.paths;
    const PathSet fresh = simulate_paths(model, rates, contract, n2,
                                         config.numerics.seed ^ 0x5eedf00dULL);
    surrender_cf = cashflows_under_rule(fresh, backward.rule, contract, mortality);
    plain_cf = no_surrender_cashflows(fresh, mortality, contract);
  } else {
    surrender_cf = backward.cashflows;
    plain_cf = no_surrender_cashflows(paths, mortality, contract);
  }

  std::vector<double> diff(surrender_cf.size());
  for (std::size_t k = 0; k < diff.size(); ++k)
    diff[k] = surrender_cf[k] - plain_cf[k];
  const PriceResult surrender = summarize(surrender_cf);
  const PriceResult plain = summarize(plain_cf);
  const PriceResult premium = summarize(diff);

  ResultRecord rec;
  rec.method = "lsmc";
  rec.seed = config.numerics.seed;
  rec.price_surrender = surrender.value;
  rec.price_no_surrender = plain.value;
  rec.premium = rec.price_surrender - rec.price_no_surrender;
  rec.has_ci = true;
  rec.premium_std_error = premium.std_error;
  rec.premium_ci_lo = premium.ci_lo;
  rec.premium_ci_hi = premium.ci_hi;
  rec.runtime_seconds = timer.seconds();
  return rec;
}

RunOutput run_experiment(const ExperimentConfig& config) {
  RunOutput out;
  if (config.method == "hybrid" || config.method == "both")
    out.records.push_back(run_hybrid(config));
  if (config.method == "lsmc" || config.method == "both")
    out.records.push_back(run_lsmc(config));
  if (config.method == "both") {
    const ResultRecord& hybrid = out.records[0];
    const ResultRecord& lsmc = out.records[1];
    out.has_agreement = true;
    out.agreement = hybrid.premium >= lsmc.premium_ci_lo &&
                    hybrid.premium <= lsmc.premium_ci_hi;
  }
  return out;
}

void write_run_output(const ExperimentConfig& config, const RunOutput& out,
                      const std::string& dir) {
  std::filesystem::create_directories(dir);
  json j;
  j["config"] = config_to_json(config);
  j["engine_version"] = kEngineVersion;
  json records = json::array();
  for (const auto& r : out.records) records.push_back(record_to_json(r));
  j["records"] = std::move(records);
  if (out.has_agreement) j["agreement"] = out.agreement;
  std::ofstream f(dir + "/result.json");
  if (!f) throw std::runtime_error("cannot write " + dir + "/result.json");
  f << j.dump(2) << "\n";
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
  if (config.sweep_parameter.empty())
    throw std::invalid_argument("sweep: no parameter configured");
  std::vector<SweepRow> rows;
  for (double value : config.sweep_values) {
    SweepRow row;
    row.value = value;
    row.method = config.method == "both" ? "hybrid" : config.method;
    Timer timer;
    try {
      ExperimentConfig point = config;
      point.method = row.method;
      const std::string& p = config.sweep_parameter;
      if (p == "c") point.contract.c = value;
      else if (p == "g") point.contract.g = value;
      else if (p == "alpha") point.contract.fees = {value};
      else if (p == "sigma_HW") point.rates.sigma = value;
      else if (p == "k_HW") point.rates.k = value;
      else if (p == "alpha_levy") point.model.nig.alpha = value;
      const auto violations = validate(point);
      if (!violations.empty()) throw std::invalid_argument(violations.front());
      const ResultRecord rec =
          row.method == "hybrid" ? run_hybrid(point) : run_lsmc(point);
      row.premium = rec.premium;
      row.runtime_seconds = timer.seconds();
    } catch (const std::exception& e) {
      row.error = e.what();
      row.runtime_seconds = timer.seconds();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "parameter,premium,method,runtime_s,error\n";
  for (const auto& r : rows) {
    f << format_double(r.value) << ","
      << (r.error.empty() ? format_double(r.premium) : std::string("")) << ","
      << r.method << "," << format_double(r.runtime_seconds) << "," << r.error
      << "\n";
  }
}

std::vector<std::string> run_region_export(const ExperimentConfig& config,
                                           const std::string& dir) {
  if (config.region_anniversaries.empty())
    throw std::invalid_argument("region: no anniversaries configured");
  const LevyModel model = build_model(config.model);
  const HullWhiteParams rates = build_rates(config.rates);
  const ElvaContract contract = build_contract(config.contract);
  const MortalityTable mortality = MortalityTable::load_csv(config.mortality_path);
  const HybridPricer pricer(contract, model, rates, mortality,
                            build_hybrid_config(config.numerics));
  std::vector<ExerciseRegion> regions;
  pricer.price(SurrenderMode::allowed, config.region_anniversaries, &regions);

  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  for (const auto& region : regions) {
    char name[64];
    std::snprintf(name, sizeof name, "region_m%02d.csv", region.anniversary);
    const std::string path = dir + "/" + name;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "fund,rate,surrender_optimal\n";
    for (std::size_t j = 0; j < region.rate.size(); ++j)
      for (std::size_t i = 0; i < region.fund.size(); ++i)
        f << format_double(region.fund[i]) << "," << format_double(region.rate[j])
          << "," << int(region.optimal[j * region.fund.size() + i]) << "\n";
    files.push_back(path);
  }
  return files;
}

}  // namespace elva
