#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lgr/agent.hpp"
#include "lgr/rankers.hpp"
#include "lgr/scenario.hpp"
#include "lgr/spl.hpp"

namespace lgr {

enum class Method { LgrOracle, LgrLlm, RandomFrontier, NearestFrontier };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::LgrOracle: return "lgr-oracle";
    case Method::LgrLlm: return "lgr-llm";
    case Method::RandomFrontier: return "random-frontier";
    case Method::NearestFrontier: return "nearest-frontier";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  if (s == "lgr-oracle") return Method::LgrOracle;
  if (s == "lgr-llm") return Method::LgrLlm;
  if (s == "random-frontier") return Method::RandomFrontier;
  if (s == "nearest-frontier") return Method::NearestFrontier;
  throw std::invalid_argument("unknown method: " + s);
}

using RankerFactory = std::function<std::shared_ptr<const Ranker>(const Scenario&)>;

struct BatchConfig {
  std::vector<std::uint64_t> seeds;        // generated scenarios
  std::vector<std::string> scenario_files;  // loaded scenarios
  GenerationParams generation{};
  int episodes_per_scenario{100};
  std::vector<Method> methods{Method::LgrOracle, Method::RandomFrontier};
  bool paired{true};
  std::uint64_t master_seed{0};
  double min_separation{15.0};
  int threads{0};  // 0: hardware concurrency
  SelectionPolicy policy{SelectionPolicy::ArgmaxFused};
  WeightConfig weights{};
  SensorConfig sensor{};
  int max_steps{500};
  double max_length_factor{10.0};
  RankerFactory llm_factory;  // required for lgr-llm
};

inline BatchConfig batch_config_from_json(const nlohmann::json& j) {
  BatchConfig c;
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("scenarios")) c.scenario_files = j.at("scenarios").get<std::vector<std::string>>();
  if (j.contains("generation")) {
    const auto& g = j.at("generation");
    c.generation.width = g.value("width", c.generation.width);
    c.generation.height = g.value("height", c.generation.height);
    c.generation.rooms_min = g.value("rooms_min", c.generation.rooms_min);
    c.generation.rooms_max = g.value("rooms_max", c.generation.rooms_max);
    c.generation.min_room_side = g.value("min_room_side", c.generation.min_room_side);
    c.generation.objects_per_room_min = g.value("objects_per_room_min", c.generation.objects_per_room_min);
    c.generation.objects_per_room_max = g.value("objects_per_room_max", c.generation.objects_per_room_max);
  }
  c.episodes_per_scenario = j.value("episodes_per_scenario", c.episodes_per_scenario);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
  }
  c.paired = j.value("paired", c.paired);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.min_separation = j.value("min_separation", c.min_separation);
  c.threads = j.value("threads", c.threads);
  if (j.contains("policy")) c.policy = parse_policy(j.at("policy").get<std::string>());
  c.sensor.max_range = j.value("max_range", c.sensor.max_range);
  c.weights.tau = j.value("tau", static_cast<double>(c.sensor.max_range));
  c.max_steps = j.value("max_steps", c.max_steps);
  c.max_length_factor = j.value("max_length_factor", c.max_length_factor);
  return c;
}

inline nlohmann::json batch_config_to_json(const BatchConfig& c) {
  nlohmann::json j;
  j["seeds"] = c.seeds;
  j["scenarios"] = c.scenario_files;
  j["generation"] = {{"width", c.generation.width},
                     {"height", c.generation.height},
                     {"rooms_min", c.generation.rooms_min},
                     {"rooms_max", c.generation.rooms_max},
                     {"min_room_side", c.generation.min_room_side},
                     {"objects_per_room_min", c.generation.objects_per_room_min},
                     {"objects_per_room_max", c.generation.objects_per_room_max}};
  j["episodes_per_scenario"] = c.episodes_per_scenario;
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["paired"] = c.paired;
  j["master_seed"] = c.master_seed;
  j["min_separation"] = c.min_separation;
  j["policy"] = to_string(c.policy);
  j["max_range"] = c.sensor.max_range;
  j["tau"] = c.weights.tau;
  j["max_steps"] = c.max_steps;
  j["max_length_factor"] = c.max_length_factor;
  return j;
}

/// A (start, target) pair shared by every method.
struct EpisodePair {
  int pair_id{0};
  Cell start;
  std::string target;
};

/// Samples `count` pairs whose start is at least `min_separation` (shortest
/// path) from every instance of the target class, and does not already see
/// the target.
inline std::vector<EpisodePair> sample_pairs(const Scenario& sc, int count, double min_separation,
                                             const SensorConfig& sensor, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Cell> free_cells;
  for (std::size_t i = 0; i < sc.map.terrain.size(); ++i)
    if (sc.map.terrain.data()[i] == Terrain::Free) free_cells.push_back(sc.map.terrain.cell_of(i));
  if (free_cells.empty() || sc.objects.empty()) throw std::invalid_argument("sample_pairs: scenario has no free cells or objects");

  std::vector<EpisodePair> out;
  constexpr int kMaxAttempts = 10000;
  for (int id = 0; id < count; ++id) {
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      const ObjectInstance& obj = sc.objects[uniform_index(rng, sc.objects.size())];
      const Cell start = free_cells[uniform_index(rng, free_cells.size())];
      std::vector<Cell> instances;
      for (const auto* o : sc.instances_of(obj.class_name)) instances.push_back(o->cell);
      const auto sep = shortest_distance_to_any(sc.map, start, instances);
      if (!sep || *sep < min_separation) continue;
      const auto opt = optimal_path_length(sc, start, obj.class_name, sensor);
      if (!opt || *opt <= 0.0) continue;
      out.push_back({id, start, obj.class_name});
      ok = true;
    }
    if (!ok) throw std::runtime_error("sample_pairs: no (start, target) pair satisfies the separation constraint");
  }
  return out;
}

struct EpisodeRow {
  std::string scenario;
  int scenario_index{0};
  int pair_id{0};
  std::string method;
  std::string target;
  Cell start;
  bool success{false};
  double traveled{0.0};
  double optimal{0.0};
  double spl_term{0.0};
  int num_scans{0};
  int num_bumps{0};
  std::string reason;
};

struct MethodSummary {
  std::string method;
  std::string scenario;  // "all" for the pooled row
  int episodes{0};
  double spl{0.0};
  double success_rate{0.0};
  double mean_traveled{0.0};
};

struct SplReport {
  std::vector<std::string> scenarios;
  std::vector<std::string> methods;
  std::vector<EpisodeRow> rows;
  std::vector<MethodSummary> summaries;
  std::vector<std::string> warnings;
  nlohmann::json config;

  const MethodSummary* find(const std::string& method, const std::string& scenario) const {
    for (const auto& s : summaries)
      if (s.method == method && s.scenario == scenario) return &s;
    return nullptr;
  }
};

inline std::string format_fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string report_csv(const SplReport& r) {
  std::string out =
      "scenario,pair_id,method,target,start_x,start_y,success,traveled,optimal,spl_term,num_scans,num_bumps,reason\n";
  for (const auto& row : r.rows) {
    out += csv_quote(row.scenario) + "," + std::to_string(row.pair_id) + "," + row.method + "," + csv_quote(row.target) +
           "," + std::to_string(row.start.x) + "," + std::to_string(row.start.y) + "," + (row.success ? "1" : "0") + "," +
           format_fixed(row.traveled) + "," + format_fixed(row.optimal) + "," + format_fixed(row.spl_term) + "," +
           std::to_string(row.num_scans) + "," + std::to_string(row.num_bumps) + "," + csv_quote(row.reason) + "\n";
  }
  return out;
}

inline nlohmann::json report_summary_json(const SplReport& r) {
  nlohmann::json j;
  j["config"] = r.config;
  j["scenarios"] = r.scenarios;
  j["methods"] = r.methods;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : r.summaries)
    rows.push_back({{"method", s.method},
                    {"scenario", s.scenario},
                    {"episodes", s.episodes},
                    {"spl", s.spl},
                    {"success_rate", s.success_rate},
                    {"mean_traveled", s.mean_traveled}});
  j["summary"] = rows;
  j["warnings"] = r.warnings;
  return j;
}

/// Plain-text table: one row per method, one SPL column per scenario.
inline std::string report_table(const SplReport& r) {
  std::ostringstream out;
  out << "Comparison of SPL results\n";
  out << "(success = target class detected in any of the 8 views; l* = ground-truth shortest path to the nearest\n"
         " cell that sees a target instance; paired (start, target) episodes per scenario)\n\n";
  std::size_t w0 = 6;
  for (const auto& m : r.methods) w0 = std::max(w0, m.size());
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  out << pad("Method", w0);
  for (const auto& s : r.scenarios) out << " | " << pad(s, std::max<std::size_t>(s.size(), 5));
  out << " | " << "all\n";
  for (const auto& m : r.methods) {
    out << pad(m, w0);
    for (const auto& s : r.scenarios) {
      const MethodSummary* ms = r.find(m, s);
      out << " | " << pad(ms ? format_fixed(ms->spl, 3) : "-", std::max<std::size_t>(s.size(), 5));
    }
    const MethodSummary* all = r.find(m, "all");
    out << " | " << (all ? format_fixed(all->spl, 3) : "-") << "\n";
  }
  out << "\nSuccess rate / mean traveled length (all scenarios)\n";
  for (const auto& m : r.methods) {
    if (const MethodSummary* all = r.find(m, "all"))
      out << pad(m, w0) << " | " << format_fixed(all->success_rate, 3) << " | " << format_fixed(all->mean_traveled, 2)
          << "\n";
  }
  const MethodSummary* base_all = r.find("random-frontier", "all");
  for (const std::string lgr : {"lgr-oracle", "lgr-llm"}) {
    if (!base_all || !r.find(lgr, "all")) continue;
    out << "\nRelative SPL improvement of " << lgr << " over random-frontier\n";
    for (const auto& s : r.scenarios) {
      const MethodSummary* a = r.find(lgr, s);
      const MethodSummary* b = r.find("random-frontier", s);
      if (!a || !b) continue;
      out << pad(s, w0) << " | " << (b->spl > 0 ? format_fixed(100.0 * (a->spl - b->spl) / b->spl, 1) + "%" : "n/a")
          << "\n";
    }
  }
  for (const auto& w : r.warnings) out << "\nWARNING: " << w << "\n";
  return out.str();
}

inline void write_report(const SplReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << text;
  };
  write("episodes.csv", report_csv(r));
  write("summary.json", report_summary_json(r).dump(2) + "\n");
  write("comparison.txt", report_table(r));
}

/// Runs every method on the same sampled (start, target) pairs of every
/// scenario. Per-episode seeds depend only on (master seed, scenario, pair),
/// so the thread count never changes the results.
inline SplReport run_batch(const BatchConfig& cfg) {
  if (cfg.episodes_per_scenario < 1) throw std::invalid_argument("run_batch: episodes_per_scenario must be >= 1");
  if (cfg.methods.empty()) throw std::invalid_argument("run_batch: no methods");

  struct Loaded {
    std::string label;
    Scenario scenario;
  };
  std::vector<Loaded> scenarios;
  for (std::uint64_t seed : cfg.seeds) scenarios.push_back({"seed-" + std::to_string(seed), generate_scenario(seed, cfg.generation)});
  for (const auto& f : cfg.scenario_files)
    scenarios.push_back({std::filesystem::path(f).stem().string(), load_scenario(f)});
  if (scenarios.empty()) throw std::invalid_argument("run_batch: no scenarios");

  std::vector<std::shared_ptr<const Ranker>> oracle(scenarios.size());
  std::vector<std::shared_ptr<const Ranker>> llm(scenarios.size());
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    oracle[s] = std::make_shared<OracleRanker>(scenarios[s].scenario.prior);
    for (Method m : cfg.methods)
      if (m == Method::LgrLlm) {
        if (!cfg.llm_factory) throw std::invalid_argument("run_batch: lgr-llm requested without a language-model client");
        llm[s] = cfg.llm_factory(scenarios[s].scenario);
      }
  }

  // pairs[s][m]: identical across methods when paired.
  std::vector<std::vector<std::vector<EpisodePair>>> pairs(scenarios.size());
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      if (cfg.paired && m > 0) {
        pairs[s].push_back(pairs[s][0]);
        continue;
      }
      const std::uint64_t seed = derive_seed(cfg.master_seed, s, cfg.paired ? 0 : m + 1, 0x9a125ULL);
      pairs[s].push_back(sample_pairs(scenarios[s].scenario, cfg.episodes_per_scenario, cfg.min_separation, cfg.sensor, seed));
    }
  }

  struct Task {
    std::size_t s, m, p;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    for (std::size_t m = 0; m < cfg.methods.size(); ++m)
      for (std::size_t p = 0; p < pairs[s][m].size(); ++p) tasks.push_back({s, m, p});

  SplReport report;
  report.rows.resize(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) {
      const Task task = tasks[t];
      const Method method = cfg.methods[task.m];
      const EpisodePair& pair = pairs[task.s][task.m][task.p];
      const Scenario& sc = scenarios[task.s].scenario;
      EpisodeConfig ec;
      ec.target_object = pair.target;
      ec.start = {pair.start, 0};
      ec.policy = cfg.policy;
      ec.max_steps = cfg.max_steps;
      ec.max_length_factor = cfg.max_length_factor;
      ec.seed = derive_seed(cfg.master_seed, task.s, pair.pair_id, 0x5eedULL);
      ec.weights = cfg.weights;
      ec.sensor = cfg.sensor;
      ec.episode_id = static_cast<int>(task.s) * cfg.episodes_per_scenario + pair.pair_id;
      const Ranker* ranker = nullptr;
      switch (method) {
        case Method::LgrOracle: ec.strategy = Strategy::Ranked; ranker = oracle[task.s].get(); break;
        case Method::LgrLlm: ec.strategy = Strategy::Ranked; ranker = llm[task.s].get(); break;
        case Method::RandomFrontier: ec.strategy = Strategy::RandomFrontier; break;
        case Method::NearestFrontier: ec.strategy = Strategy::NearestFrontier; break;
      }
      EpisodeRow& row = report.rows[t];
      row.scenario = scenarios[task.s].label;
      row.scenario_index = static_cast<int>(task.s);
      row.pair_id = pair.pair_id;
      row.method = to_string(method);
      row.target = pair.target;
      row.start = pair.start;
      try {
        const EpisodeResult res = run_episode(sc, ec, ranker);
        row.success = res.success;
        row.traveled = res.traveled;
        row.optimal = res.optimal;
        row.spl_term = spl_term(res.spl_sample());
        row.num_scans = res.num_scans;
        row.num_bumps = res.num_bumps;
        row.reason = res.reason;
      } catch (const std::exception& e) {
        row.reason = std::string("error: ") + e.what();
        errors[t] = e.what();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : hw;
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const auto& l : scenarios) report.scenarios.push_back(l.label);
  for (Method m : cfg.methods) report.methods.push_back(to_string(m));
  report.config = batch_config_to_json(cfg);

  auto summarize = [&](const std::string& method, const std::string& scenario) {
    MethodSummary ms;
    ms.method = method;
    ms.scenario = scenario;
    std::vector<SplSample> samples;
    double traveled = 0.0;
    int successes = 0;
    for (const auto& row : report.rows) {
      if (row.method != method || (scenario != "all" && row.scenario != scenario)) continue;
      samples.push_back({row.success, row.traveled, row.optimal});
      traveled += row.traveled;
      successes += row.success ? 1 : 0;
    }
    ms.episodes = static_cast<int>(samples.size());
    if (!samples.empty()) {
      ms.spl = compute_spl(samples);
      ms.success_rate = static_cast<double>(successes) / static_cast<double>(samples.size());
      ms.mean_traveled = traveled / static_cast<double>(samples.size());
    }
    return ms;
  };
  for (const auto& m : report.methods) {
    for (const auto& s : report.scenarios) report.summaries.push_back(summarize(m, s));
    report.summaries.push_back(summarize(m, "all"));
    if (report.find(m, "all")->success_rate == 0.0) report.warnings.push_back("method " + m + " failed every episode");
  }
  std::size_t n_errors = 0;
  for (const auto& e : errors) n_errors += e.empty() ? 0 : 1;
  if (n_errors) report.warnings.push_back(std::to_string(n_errors) + " episodes aborted with an error");
  return report;
}

}  // namespace lgr
