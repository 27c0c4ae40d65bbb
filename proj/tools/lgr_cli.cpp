// Command-line front end: scenario generation, single episodes, paired
// batch experiments and transcript replay.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "lgr/http_transport.hpp"
#include "lgr/lgr.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kIo = 3, kRanker = 4, kInternal = 5 };

struct CliError : std::runtime_error {
  CliError(ExitCode c, const std::string& what) : std::runtime_error(what), code(c) {}
  ExitCode code;
};

lgr::Cell parse_cell(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw CliError(kUsage, "expected X,Y but got '" + s + "'");
  try {
    return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw CliError(kUsage, "expected X,Y but got '" + s + "'");
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(kIo, "cannot write " + path);
  out << text;
}

// Owns whatever the chosen ranker needs to stay alive.
struct RankerHolder {
  std::unique_ptr<lgr::ChatTransport> transport;
  std::unique_ptr<lgr::RateLimiter> limiter;
  std::unique_ptr<lgr::Ranker> ranker;
};

RankerHolder make_llm_ranker() {
  RankerHolder h;
  const lgr::LlmConfig cfg = lgr::LlmConfig::from_env();
  if (cfg.endpoint.empty()) throw CliError(kUsage, "the llm ranker needs LGR_LLM_ENDPOINT (and usually LGR_LLM_API_KEY, LGR_LLM_MODEL)");
  h.transport = std::make_unique<lgr::HttpChatTransport>(cfg);
  h.limiter = std::make_unique<lgr::RateLimiter>(cfg.requests_per_minute);
  h.ranker = std::make_unique<lgr::LlmRanker>(*h.transport, cfg.max_retries, h.limiter.get());
  return h;
}

struct EpisodeArgs {
  std::string scenario;
  std::string target;
  std::string start;
  std::string policy = "argmax-fused";
  std::uint64_t seed = 0;
  int max_range = 12;
  double tau = 0.0;
  int max_steps = 500;
  double max_length_factor = 10.0;
  std::string log;
  std::string transcript_out;
  std::string belief_out;
};

void add_episode_options(CLI::App* cmd, EpisodeArgs& a) {
  cmd->add_option("--scenario", a.scenario, "Scenario JSON file")->required();
  cmd->add_option("--target", a.target, "Target object class")->required();
  cmd->add_option("--start", a.start, "Start cell as X,Y")->required();
  cmd->add_option("--policy", a.policy, "argmax-fused | proto-random");
  cmd->add_option("--seed", a.seed, "Episode RNG seed");
  cmd->add_option("--max-range", a.max_range, "Sensor range in cells");
  cmd->add_option("--tau", a.tau, "Distance-weight decay length (default: sensor range)");
  cmd->add_option("--max-steps", a.max_steps, "Scan/select cycle budget");
  cmd->add_option("--max-length-factor", a.max_length_factor, "Travel budget as a multiple of l*");
  cmd->add_option("--log", a.log, "Write the decision log (JSON Lines) here");
  cmd->add_option("--transcript-out", a.transcript_out, "Write ranker exchanges (JSON Lines) here");
  cmd->add_option("--belief-out", a.belief_out, "Write the final belief grid here");
}

int run_one(const EpisodeArgs& a, lgr::Strategy strategy, const lgr::Ranker* ranker, int episode_id) {
  const lgr::Scenario sc = lgr::load_scenario(a.scenario);
  lgr::EpisodeConfig cfg;
  cfg.target_object = a.target;
  cfg.start = {parse_cell(a.start), 0};
  cfg.strategy = strategy;
  cfg.policy = lgr::parse_policy(a.policy);
  cfg.seed = a.seed;
  cfg.sensor.max_range = a.max_range;
  cfg.weights.tau = a.tau > 0.0 ? a.tau : static_cast<double>(a.max_range);
  cfg.max_steps = a.max_steps;
  cfg.max_length_factor = a.max_length_factor;
  cfg.episode_id = episode_id;
  const lgr::EpisodeResult res = lgr::run_episode(sc, cfg, ranker);
  if (!a.log.empty()) write_file(a.log, lgr::decision_log_jsonl(res.decision_log));
  if (!a.transcript_out.empty()) write_file(a.transcript_out, lgr::transcript_to_jsonl(res.transcript));
  if (!a.belief_out.empty()) write_file(a.belief_out, lgr::belief_to_text(res.final_belief));
  nlohmann::json summary = {{"success", res.success},     {"traveled", res.traveled},
                            {"optimal", res.optimal},     {"spl", lgr::spl_term(res.spl_sample())},
                            {"num_scans", res.num_scans}, {"num_bumps", res.num_bumps},
                            {"reason", res.reason}};
  std::cout << summary.dump() << "\n";
  if (res.reason.rfind("ranker-failure", 0) == 0) return kRanker;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frontier ranking for object-goal navigation in gridworlds"};
  app.require_subcommand(1);

  // gen
  std::uint64_t gen_seed = 0;
  lgr::GenerationParams gen;
  std::string gen_out;
  std::string gen_prior;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a scenario");
  gen_cmd->add_option("--seed", gen_seed, "Generator seed")->required();
  gen_cmd->add_option("--width", gen.width, "Grid width");
  gen_cmd->add_option("--height", gen.height, "Grid height");
  gen_cmd->add_option("--rooms-min", gen.rooms_min);
  gen_cmd->add_option("--rooms-max", gen.rooms_max);
  gen_cmd->add_option("--objects-min", gen.objects_per_room_min, "Objects per room, lower bound");
  gen_cmd->add_option("--objects-max", gen.objects_per_room_max, "Objects per room, upper bound");
  gen_cmd->add_option("--prior", gen_prior, "Co-occurrence table JSON (class -> category -> p)");
  gen_cmd->add_option("--out", gen_out, "Output file")->required();

  // run
  EpisodeArgs run_args;
  std::string run_ranker = "oracle";
  std::string run_transcript;
  auto* run_cmd = app.add_subcommand("run", "Run a single episode");
  add_episode_options(run_cmd, run_args);
  run_cmd->add_option("--ranker", run_ranker, "oracle | llm | replay | random-frontier | nearest-frontier");
  run_cmd->add_option("--transcript", run_transcript, "Transcript to replay (with --ranker replay)");

  // batch
  std::string batch_config;
  std::string batch_out;
  int batch_threads = -1;
  auto* batch_cmd = app.add_subcommand("batch", "Run a paired batch experiment");
  batch_cmd->add_option("--config", batch_config, "Batch config JSON")->required();
  batch_cmd->add_option("--out", batch_out, "Report directory")->required();
  batch_cmd->add_option("--threads", batch_threads, "Worker threads (overrides the config)");

  // replay
  EpisodeArgs replay_args;
  std::string replay_transcript;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run an episode from a recorded transcript");
  replay_cmd->add_option("--transcript", replay_transcript, "Transcript JSON Lines")->required();
  add_episode_options(replay_cmd, replay_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) {
      if (!gen_prior.empty()) gen.prior = lgr::load_prior(gen_prior);
      write_file(gen_out, lgr::scenario_to_string(lgr::generate_scenario(gen_seed, gen)));
      return kOk;
    }
    if (*run_cmd) {
      if (run_ranker == "random-frontier") return run_one(run_args, lgr::Strategy::RandomFrontier, nullptr, 0);
      if (run_ranker == "nearest-frontier") return run_one(run_args, lgr::Strategy::NearestFrontier, nullptr, 0);
      if (run_ranker == "oracle") {
        const lgr::OracleRanker oracle(lgr::load_scenario(run_args.scenario).prior);
        return run_one(run_args, lgr::Strategy::Ranked, &oracle, 0);
      }
      if (run_ranker == "llm") {
        RankerHolder h = make_llm_ranker();
        return run_one(run_args, lgr::Strategy::Ranked, h.ranker.get(), 0);
      }
      if (run_ranker == "replay") {
        if (run_transcript.empty()) throw CliError(kUsage, "--ranker replay needs --transcript");
        const auto records = lgr::load_transcript(run_transcript);
        const lgr::ReplayRanker replay(records);
        return run_one(run_args, lgr::Strategy::Ranked, &replay, records.empty() ? 0 : records.front().episode);
      }
      throw CliError(kUsage, "unknown ranker: " + run_ranker);
    }
    if (*batch_cmd) {
      std::ifstream in(batch_config, std::ios::binary);
      if (!in) throw CliError(kIo, "cannot read " + batch_config);
      lgr::BatchConfig cfg = lgr::batch_config_from_json(nlohmann::json::parse(in));
      if (batch_threads >= 0) cfg.threads = batch_threads;
      auto holder = std::make_shared<RankerHolder>();
      for (lgr::Method m : cfg.methods) {
        if (m != lgr::Method::LgrLlm) continue;
        *holder = make_llm_ranker();
        cfg.llm_factory = [holder](const lgr::Scenario&) {
          return std::shared_ptr<const lgr::Ranker>(holder, holder->ranker.get());
        };
      }
      const lgr::SplReport report = lgr::run_batch(cfg);
      lgr::write_report(report, batch_out);
      std::cout << lgr::report_table(report);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      return kOk;
    }
    if (*replay_cmd) {
      const auto records = lgr::load_transcript(replay_transcript);
      if (records.empty()) throw CliError(kUsage, "transcript is empty");
      const lgr::ReplayRanker replay(records);
      return run_one(replay_args, lgr::Strategy::Ranked, &replay, records.front().episode);
    }
  } catch (const CliError& e) {
    std::cerr << "error[" << (e.code == kUsage ? "usage" : e.code == kIo ? "io" : "ranker") << "]: " << e.what() << "\n";
    return e.code;
  } catch (const lgr::RankerError& e) {
    std::cerr << "error[ranker]: " << e.what() << "\n";
    return kRanker;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error[config]: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error[format]: " << e.what() << "\n";
    return kIo;
  } catch (const std::runtime_error& e) {
    std::cerr << "error[io]: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
