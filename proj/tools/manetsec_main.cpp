// Command-line front end: single runs and experiment sweeps.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "manetsec/manetsec.hpp"

namespace fs = std::filesystem;
using namespace manetsec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Precedence for the seed: --seed flag, then MANETSEC_SEED, then the file.
void apply_seed_env(ScenarioConfig& cfg, const std::optional<std::uint64_t>& flag_seed) {
  if (flag_seed) {
    cfg.seed = *flag_seed;
    return;
  }
  if (const char* env = std::getenv("MANETSEC_SEED")) {
    apply_config_key(cfg, "seed", env, "MANETSEC_SEED");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

// Accepts "lo:hi:step" ranges or comma-separated lists.
std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  const auto parse_one = [](const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("--values: bad number '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ConfigError("--values: expected lo:hi:step");
    const double lo = parse_one(text.substr(0, c1));
    const double hi = parse_one(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = parse_one(text.substr(c2 + 1));
    if (step <= 0.0 || hi < lo) throw ConfigError("--values: bad range");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
      // Round to a stable grid so 0.1:0.6:0.1 yields exact tenths.
      values.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      const std::string tok =
          text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!tok.empty()) values.push_back(parse_one(tok));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (values.empty()) throw ConfigError("--values: empty");
  return values;
}

int run_simulate(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                 const std::optional<std::uint32_t>& nodes,
                 const std::optional<double>& attack_fraction,
                 const std::optional<std::string>& detection, const std::string& out_dir) {
  ScenarioConfig cfg = parse_scenario(config_path);
  apply_seed_env(cfg, seed);
  if (nodes) {
    cfg.world.node_count = *nodes;
    cfg.flow_dest.reset();
  }
  if (attack_fraction) cfg.attack.fraction = *attack_fraction;
  if (detection) apply_config_key(cfg, "detection", *detection, "--detection");
  validate(cfg);

  RunResult result = run(cfg);

  fs::create_directories(out_dir);
  result.log.write_to((fs::path(out_dir) / "events.log").string());
  write_text(fs::path(out_dir) / "config.txt", serialize(cfg));
  std::vector<ResultRow> rows(1);
  rows[0].variant = cfg.detection.enabled ? Variant::Sra : Variant::Baseline;
  rows[0].value = cfg.attack.fraction;
  rows[0].seed = *cfg.seed;
  rows[0].metrics = result.metrics;
  emit_csv(rows, (fs::path(out_dir) / "metrics.csv").string());

  const MetricsReport& m = result.metrics;
  std::cout << "pdr=" << m.pdr << " throughput=" << m.throughput_fraction
            << " energy_j=" << m.energy_consumed_j << " recall=" << m.detection.recall
            << " sent=" << m.sent << " received=" << m.received << "\n";
  return kExitOk;
}

int run_sweep_cmd(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                  const std::string& variable, const std::string& values_text,
                  std::uint32_t seed_count, unsigned jobs, const std::string& out_dir) {
  SweepSpec spec;
  spec.base = parse_scenario(config_path);
  apply_seed_env(spec.base, seed);
  if (!spec.base.seed) throw ConfigError("sweep: a base seed is required (file, flag, or env)");
  if (variable == "attack_fraction") spec.variable = SweepVariable::AttackFraction;
  else if (variable == "node_count") spec.variable = SweepVariable::NodeCount;
  else if (variable == "traffic_rate") spec.variable = SweepVariable::TrafficRate;
  else throw ConfigError("--variable: expected attack_fraction|node_count|traffic_rate");
  spec.values = parse_values(values_text);
  if (seed_count == 0) throw ConfigError("--seeds: must be positive");
  for (std::uint32_t i = 0; i < seed_count; ++i) spec.seeds.push_back(*spec.base.seed + i);
  spec.jobs = jobs;

  const std::vector<ResultRow> rows = run_sweep(spec);

  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "base_config.txt", serialize(spec.base));
  emit_csv(rows, (fs::path(out_dir) / "sweep.csv").string());
  std::cout << "wrote " << rows.size() << " rows to " << out_dir << "/sweep.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete-event simulator for trust-based secure MANET routing"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> nodes;
  std::optional<double> attack_fraction;
  std::optional<std::string> detection;

  auto* simulate = app.add_subcommand("simulate", "run one scenario");
  simulate->add_option("--config", config_path, "scenario file")->required();
  simulate->add_option("--seed", seed, "override the scenario seed");
  simulate->add_option("--nodes", nodes, "override the node count");
  simulate->add_option("--attack-fraction", attack_fraction, "override the attacker fraction");
  simulate->add_option("--detection", detection, "on|off")
      ->check(CLI::IsMember({"on", "off"}));
  simulate->add_option("--out", out_dir, "output directory")->required();

  std::string variable = "attack_fraction";
  std::string values_text;
  std::uint32_t seed_count = 1;
  unsigned jobs = 1;

  auto* sweep = app.add_subcommand("sweep", "run a variable sweep over both variants");
  sweep->add_option("--config", config_path, "base scenario file")->required();
  sweep->add_option("--seed", seed, "override the base seed");
  sweep->add_option("--variable", variable, "attack_fraction|node_count|traffic_rate")
      ->required();
  sweep->add_option("--values", values_text, "lo:hi:step or comma list")->required();
  sweep->add_option("--seeds", seed_count, "number of consecutive seeds")->required();
  sweep->add_option("--jobs", jobs, "parallel runs");
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return run_simulate(config_path, seed, nodes, attack_fraction, detection, out_dir);
    }
    return run_sweep_cmd(config_path, seed, variable, values_text, seed_count, jobs, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
