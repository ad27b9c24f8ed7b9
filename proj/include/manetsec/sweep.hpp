#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "manetsec/config.hpp"
#include "manetsec/engine.hpp"
#include "manetsec/metrics.hpp"

namespace manetsec {

enum class SweepVariable : std::uint8_t { AttackFraction, NodeCount, TrafficRate };

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::AttackFraction: return "attack_fraction";
    case SweepVariable::NodeCount: return "node_count";
    case SweepVariable::TrafficRate: return "traffic_rate";
  }
  return "?";
}

enum class Variant : std::uint8_t { Sra, Baseline };

inline const char* to_string(Variant v) { return v == Variant::Sra ? "sra" : "baseline"; }

struct SweepSpec {
  SweepVariable variable = SweepVariable::AttackFraction;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  ScenarioConfig base;
  bool include_sra = true;
  bool include_baseline = true;
  unsigned jobs = 1;
};

struct ResultRow {
  Variant variant = Variant::Sra;
  double value = 0.0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
};

inline ScenarioConfig sweep_config(const SweepSpec& spec, Variant variant, double value,
                                   std::uint64_t seed) {
  ScenarioConfig cfg = spec.base;
  switch (spec.variable) {
    case SweepVariable::AttackFraction:
      cfg.attack.fraction = value;
      break;
    case SweepVariable::NodeCount:
      cfg.world.node_count = static_cast<std::uint32_t>(std::llround(value));
      cfg.flow_dest.reset();  // keep the default last-node endpoint valid
      break;
    case SweepVariable::TrafficRate:
      cfg.traffic_rate = value;
      break;
  }
  cfg.seed = seed;
  cfg.detection.enabled = variant == Variant::Sra;
  return cfg;
}

// Runs |values| x |seeds| x |variants| simulations. Rows come back ordered by
// (variant, value, seed) no matter how many worker threads ran them. Any
// invalid generated config aborts the sweep with the offending config echoed.
inline std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("run_sweep: no values");
  if (spec.seeds.empty()) throw std::invalid_argument("run_sweep: no seeds");
  if (!spec.include_sra && !spec.include_baseline) {
    throw std::invalid_argument("run_sweep: no variants selected");
  }
  std::vector<Variant> variants;
  if (spec.include_sra) variants.push_back(Variant::Sra);
  if (spec.include_baseline) variants.push_back(Variant::Baseline);

  struct Job {
    Variant variant;
    double value;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (Variant v : variants) {
    for (double value : spec.values) {
      for (std::uint64_t seed : spec.seeds) jobs.push_back({v, value, seed});
    }
  }
  // Validate every config up front so a bad sweep fails before any run.
  for (const Job& j : jobs) {
    const ScenarioConfig cfg = sweep_config(spec, j.variant, j.value, j.seed);
    try {
      validate(cfg);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + "\noffending config:\n" + serialize(cfg));
    }
  }

  std::vector<ResultRow> rows(jobs.size());
  const unsigned workers = std::max(1u, spec.jobs);
  std::atomic<std::size_t> cursor{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& j = jobs[i];
      RunResult result = run(sweep_config(spec, j.variant, j.value, j.seed));
      rows[i] = {j.variant, j.value, j.seed, result.metrics};
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::make_tuple(static_cast<int>(a.variant), a.value, a.seed) <
           std::make_tuple(static_cast<int>(b.variant), b.value, b.seed);
  });
  return rows;
}

namespace csv_detail {

inline void append_f(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  out += buf;
}

struct Stat {
  double sum = 0.0;
  double sumsq = 0.0;
  std::uint64_t n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    n += 1;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  // Sample standard deviation; 0 for fewer than two samples.
  double sd() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return var > 0.0 ? std::sqrt(var) : 0.0;
  }
};

}  // namespace csv_detail

inline std::string detail_csv_text(const std::vector<ResultRow>& rows) {
  std::string out =
      "variant,variable,seed,pdr,throughput_fraction,throughput_bps,energy_j,recall,precision,"
      "fpr,mean_delay_s,sent,received\n";
  for (const auto& r : rows) {
    out += to_string(r.variant);
    out += ',';
    csv_detail::append_f(out, r.value);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    csv_detail::append_f(out, r.metrics.pdr);
    out += ',';
    csv_detail::append_f(out, r.metrics.throughput_fraction);
    out += ',';
    csv_detail::append_f(out, r.metrics.throughput_bps);
    out += ',';
    csv_detail::append_f(out, r.metrics.energy_consumed_j);
    out += ',';
    csv_detail::append_f(out, r.metrics.detection.recall);
    out += ',';
    csv_detail::append_f(out, r.metrics.detection.precision);
    out += ',';
    csv_detail::append_f(out, r.metrics.detection.false_positive_rate);
    out += ',';
    csv_detail::append_f(out, r.metrics.mean_delay_s);
    out += ',';
    out += std::to_string(r.metrics.sent);
    out += ',';
    out += std::to_string(r.metrics.received);
    out += '\n';
  }
  return out;
}

// Per-(variant, value) mean and sample standard deviation of each metric,
// the direct analog of a results table row.
inline std::string aggregate_csv_text(const std::vector<ResultRow>& rows) {
  using csv_detail::Stat;
  struct Key {
    int variant;
    double value;
    bool operator<(const Key& o) const {
      return std::tie(variant, value) < std::tie(o.variant, o.value);
    }
  };
  struct Agg {
    Stat pdr, thr_frac, thr_bps, energy, recall, precision, fpr, delay;
  };
  std::map<Key, Agg> groups;
  for (const auto& r : rows) {
    Agg& g = groups[{static_cast<int>(r.variant), r.value}];
    g.pdr.add(r.metrics.pdr);
    g.thr_frac.add(r.metrics.throughput_fraction);
    g.thr_bps.add(r.metrics.throughput_bps);
    g.energy.add(r.metrics.energy_consumed_j);
    g.recall.add(r.metrics.detection.recall);
    g.precision.add(r.metrics.detection.precision);
    g.fpr.add(r.metrics.detection.false_positive_rate);
    g.delay.add(r.metrics.mean_delay_s);
  }
  std::string out =
      "variant,variable,runs,pdr_mean,pdr_sd,throughput_fraction_mean,throughput_fraction_sd,"
      "throughput_bps_mean,throughput_bps_sd,energy_j_mean,energy_j_sd,recall_mean,recall_sd,"
      "precision_mean,precision_sd,fpr_mean,fpr_sd,mean_delay_s_mean,mean_delay_s_sd\n";
  for (const auto& [key, g] : groups) {
    out += key.variant == 0 ? "sra" : "baseline";
    out += ',';
    csv_detail::append_f(out, key.value);
    out += ',';
    out += std::to_string(g.pdr.n);
    const Stat* stats[] = {&g.pdr, &g.thr_frac, &g.thr_bps, &g.energy,
                           &g.recall, &g.precision, &g.fpr, &g.delay};
    for (const Stat* s : stats) {
      out += ',';
      csv_detail::append_f(out, s->mean());
      out += ',';
      csv_detail::append_f(out, s->sd());
    }
    out += '\n';
  }
  return out;
}

inline std::string aggregate_path_for(const std::string& detail_path) {
  const auto dot = detail_path.rfind(".csv");
  if (dot != std::string::npos && dot == detail_path.size() - 4) {
    return detail_path.substr(0, dot) + "_aggregate.csv";
  }
  return detail_path + "_aggregate";
}

// Writes the detail table plus its aggregated companion file. Fixed column
// order and formatting: identical rows produce byte-identical files.
inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  const auto write = [](const std::string& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::ios_base::failure("emit_csv: cannot open " + p);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::ios_base::failure("emit_csv: write failed for " + p);
  };
  write(path, detail_csv_text(rows));
  write(aggregate_path_for(path), aggregate_csv_text(rows));
}

}  // namespace manetsec
