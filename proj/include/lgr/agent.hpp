#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "lgr/mapping.hpp"
#include "lgr/planner.hpp"
#include "lgr/rankers.hpp"
#include "lgr/ranking.hpp"
#include "lgr/scenario.hpp"
#include "lgr/spl.hpp"
#include "lgr/world.hpp"

namespace lgr {

/// How the agent picks its next frontier.
enum class Strategy { Ranked, RandomFrontier, NearestFrontier };

struct EpisodeConfig {
  std::string target_object;
  Pose start;
  Strategy strategy{Strategy::Ranked};
  SelectionPolicy policy{SelectionPolicy::ArgmaxFused};
  int max_steps{500};              // scan/select cycles
  double max_length_factor{10.0};  // travel budget as a multiple of l*
  std::uint64_t seed{0};
  WeightConfig weights{};
  SensorConfig sensor{};
  PlanMode plan_mode{PlanMode::OptimisticUnknown};
  double detection_dropout{0.0};
  int episode_id{0};  // transcript key
  bool allow_absent_target{false};
};

struct MoveRecord {
  int goal_id{0};
  Cell goal;
  bool no_path{false};
  double planned_length{0.0};
  double traveled{0.0};
  Cell reached;
  std::optional<Cell> bump;
};

struct DecisionRecord {
  int step{0};
  Pose pose;
  int newly_known{0};
  int frontier_count{0};
  std::string ranker;
  std::vector<std::string> rooms;
  std::vector<int> direction_ranks;
  std::string fallback;  // ranker error that triggered the distance-only ranking
  std::map<int, double> step_scores;
  std::optional<int> selected_id;
  Cell selected_cell;
  double selected_score{0.0};
  std::vector<MoveRecord> moves;
  std::string outcome;
};

struct EpisodeResult {
  bool success{false};
  double traveled{0.0};
  double optimal{0.0};
  int num_scans{0};
  int num_bumps{0};
  std::string reason;
  std::vector<DecisionRecord> decision_log;
  std::vector<TranscriptRecord> transcript;
  BeliefMap final_belief;

  SplSample spl_sample() const { return {success, traveled, optimal}; }
};

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Ranked: return "ranked";
    case Strategy::RandomFrontier: return "random-frontier";
    case Strategy::NearestFrontier: return "nearest-frontier";
  }
  return "unknown";
}

/// Ground-truth l*: shortest Free-only path from `start` to the nearest cell
/// that sees some instance of `target`. nullopt if the class is absent or
/// no such cell is reachable.
inline std::optional<double> optimal_path_length(const Scenario& sc, Cell start, const std::string& target,
                                                 const SensorConfig& sensor) {
  std::vector<Cell> goals;
  for (const ObjectInstance* obj : sc.instances_of(target)) {
    auto cells = cells_seeing(sc.map, obj->cell, sensor);
    goals.insert(goals.end(), cells.begin(), cells.end());
  }
  if (goals.empty()) return std::nullopt;
  return shortest_distance_to_any(sc.map, start, goals);
}

inline nlohmann::json to_json(const Cell& c) { return nlohmann::json::array({c.x, c.y}); }

inline nlohmann::json to_json(const DecisionRecord& r) {
  nlohmann::json j;
  j["step"] = r.step;
  j["pose"] = {{"x", r.pose.cell.x}, {"y", r.pose.cell.y}, {"heading", r.pose.heading}};
  j["newly_known"] = r.newly_known;
  j["frontier_count"] = r.frontier_count;
  j["ranker"] = r.ranker;
  if (!r.rooms.empty()) j["rooms"] = r.rooms;
  if (!r.direction_ranks.empty()) j["direction_ranks"] = r.direction_ranks;
  if (!r.fallback.empty()) j["fallback"] = r.fallback;
  nlohmann::json scores = nlohmann::json::object();
  for (const auto& [id, s] : r.step_scores) scores[std::to_string(id)] = s;
  j["step_scores"] = std::move(scores);
  if (r.selected_id) {
    j["selected"] = {{"id", *r.selected_id}, {"cell", to_json(r.selected_cell)}, {"score", r.selected_score}};
  }
  nlohmann::json moves = nlohmann::json::array();
  for (const auto& m : r.moves) {
    nlohmann::json mj = {{"goal_id", m.goal_id}, {"goal", to_json(m.goal)}, {"no_path", m.no_path},
                         {"planned_length", m.planned_length}, {"traveled", m.traveled}, {"reached", to_json(m.reached)}};
    if (m.bump) mj["bump"] = to_json(*m.bump);
    moves.push_back(std::move(mj));
  }
  j["moves"] = std::move(moves);
  if (!r.outcome.empty()) j["outcome"] = r.outcome;
  return j;
}

inline std::string decision_log_jsonl(const std::vector<DecisionRecord>& log) {
  std::string out;
  for (const auto& r : log) out += to_json(r).dump() + "\n";
  return out;
}

namespace detail {

inline RankerRequest make_request(const std::string& target, const std::vector<ViewObservation>& views,
                                  const RoomCategoryList& categories) {
  RankerRequest req;
  req.target_object = target;
  req.categories = categories;
  for (const auto& v : views) req.per_direction_objects[static_cast<std::size_t>(v.direction_index)] = v.object_classes();
  return req;
}

}  // namespace detail

/// One object-goal episode: scan, rank, fuse, select, plan, move, repeat.
///
/// `ranker` is required for Strategy::Ranked and ignored otherwise.
/// Throws std::invalid_argument on an invalid configuration.
inline EpisodeResult run_episode(const Scenario& sc, const EpisodeConfig& cfg, const Ranker* ranker) {
  const GroundTruthMap& world = sc.map;
  require_valid_pose(world, cfg.start);
  if (cfg.max_steps <= 0 || !(cfg.max_length_factor > 0.0)) throw std::invalid_argument("run_episode: budgets must be positive");
  if (cfg.strategy == Strategy::Ranked && !ranker) throw std::invalid_argument("run_episode: ranked strategy needs a ranker");
  if (cfg.target_object.empty()) throw std::invalid_argument("run_episode: empty target");
  const bool target_present = !sc.instances_of(cfg.target_object).empty();
  if (!target_present && !cfg.allow_absent_target)
    throw std::invalid_argument("run_episode: target class '" + cfg.target_object + "' is not in the scenario");

  EpisodeResult res;
  if (target_present) {
    const auto opt = optimal_path_length(sc, cfg.start.cell, cfg.target_object, cfg.sensor);
    if (!opt) throw std::invalid_argument("run_episode: target cannot be reached from the start");
    res.optimal = *opt;
  }
  const double max_travel = res.optimal > 0.0 ? cfg.max_length_factor * res.optimal
                                              : std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(cfg.seed);
  BeliefMap belief(world.width, world.height);
  belief.observe(cfg.start.cell, CellState::Free);
  FrontierList frontiers;
  std::map<int, int> no_path_count;
  Pose pose = cfg.start;

  auto finish = [&](bool success, const std::string& reason) {
    res.success = success;
    res.reason = reason;
    if (!res.decision_log.empty()) res.decision_log.back().outcome = reason;
    res.final_belief = belief;
    return res;
  };

  for (int step = 0; step < cfg.max_steps; ++step) {
    DecisionRecord rec;
    rec.step = step;
    rec.pose = pose;

    // Scan and integrate. The agent may have stopped on a cell it only
    // planned through, so its own cell is marked free first.
    if (belief.is_unknown(pose.cell)) belief.observe(pose.cell, CellState::Free);
    auto views = panoramic_scan(world, sc.objects, pose, cfg.sensor);
    if (cfg.detection_dropout > 0.0)
      for (auto& v : views) apply_detection_dropout(v, cfg.detection_dropout, rng);
    const std::size_t unknown_before = belief.count(CellState::Unknown);
    for (const auto& v : views) integrate_observation(belief, v);
    rec.newly_known = static_cast<int>(unknown_before - belief.count(CellState::Unknown));
    ++res.num_scans;

    bool found = false;
    for (const auto& obj : sc.objects)
      if (obj.class_name == cfg.target_object && obj.cell == pose.cell) found = true;
    for (const auto& v : views)
      for (const auto& d : v.detected_objects)
        if (d.class_name == cfg.target_object) found = true;
    if (found) {
      res.decision_log.push_back(std::move(rec));
      if (step == 0) res.traveled = res.optimal;  // seen from the start: a perfect episode
      return finish(true, "target-detected");
    }

    const auto tagged = visible_frontiers(belief, views);
    update_frontier_list(frontiers, belief, tagged, pose.cell);
    rec.frontier_count = static_cast<int>(frontiers.size());
    if (frontiers.empty()) {
      res.decision_log.push_back(std::move(rec));
      return finish(false, "frontiers-exhausted");
    }

    // Rank and fuse.
    std::optional<int> top_direction;
    if (cfg.strategy == Strategy::Ranked) {
      rec.ranker = ranker->name();
      RankVector ranks;
      try {
        RankerResponse resp = ranker->rank(detail::make_request(cfg.target_object, views, world.categories),
                                           {cfg.episode_id, step});
        res.transcript.insert(res.transcript.end(), resp.transcript.begin(), resp.transcript.end());
        rec.rooms = resp.per_direction_room;
        ranks = resp.direction_ranks;
      } catch (const RankerError& e) {
        res.transcript.insert(res.transcript.end(), e.transcript.begin(), e.transcript.end());
        if (e.kind == RankerErrorKind::TranscriptDivergence) {
          res.decision_log.push_back(std::move(rec));
          return finish(false, std::string("ranker-failure: ") + e.what());
        }
        rec.fallback = e.what();
        ranks = distance_only_ranking(frontiers);
      }
      rec.direction_ranks = ranks.ranks;
      top_direction = static_cast<int>(ranks.top());

      const std::vector<double> unit(kNumDirections, 1.0);
      const ScoreVector per_direction = reciprocal_rank_scores(ranks, unit);
      ScoreVector cumulative;
      ScoreVector fresh;
      for (const auto& e : frontiers.entries()) {
        cumulative.scores[e.id] = e.cumulative_score;
        if (e.seen_in_last_scan)
          fresh.scores[e.id] = distance_weight(e.last_distance, cfg.weights) * per_direction.get(e.last_seen_direction);
      }
      const ScoreVector fused = fuse(cumulative, fresh);
      for (auto& e : frontiers.entries()) e.cumulative_score = fused.get(e.id);
      rec.step_scores = fresh.scores;
    } else {
      rec.ranker = to_string(cfg.strategy);
    }

    // Select and move; drop goals that keep failing to plan.
    std::set<int> excluded;
    bool moved_on = false;
    while (!moved_on) {
      FrontierList candidates = frontiers;
      std::erase_if(candidates.entries(), [&](const FrontierEntry& e) { return excluded.contains(e.id); });
      if (candidates.empty()) break;  // nothing plannable this cycle; rescan

      int goal_id = 0;
      switch (cfg.strategy) {
        case Strategy::Ranked: goal_id = select_frontier(candidates, cfg.policy, rng, top_direction); break;
        case Strategy::RandomFrontier: goal_id = random_frontier_baseline(candidates, rng); break;
        case Strategy::NearestFrontier: goal_id = nearest_frontier_baseline(candidates); break;
      }
      const FrontierEntry goal = *frontiers.find(goal_id);
      rec.selected_id = goal.id;
      rec.selected_cell = goal.cell;
      rec.selected_score = goal.cumulative_score;

      MoveRecord mv;
      mv.goal_id = goal.id;
      mv.goal = goal.cell;
      mv.reached = pose.cell;
      const auto path = astar(belief, pose.cell, goal.cell, cfg.plan_mode);
      if (!path) {
        mv.no_path = true;
        rec.moves.push_back(mv);
        if (++no_path_count[goal.id] >= 2) frontiers.remove(goal.id);
        excluded.insert(goal.id);
        continue;  // reselect
      }
      mv.planned_length = path->length;
      const ExecutionResult ex = execute_path(world, pose, *path, max_travel - res.traveled);
      mv.traveled = ex.traveled;
      res.traveled += ex.traveled;
      pose = ex.pose;
      mv.reached = pose.cell;
      if (ex.bump) {
        mv.bump = ex.bump->blocked_cell;
        belief.observe(ex.bump->blocked_cell, CellState::Occupied);
        ++res.num_bumps;
      }
      rec.moves.push_back(mv);
      if (ex.budget_exhausted) {
        res.decision_log.push_back(std::move(rec));
        return finish(false, "length-budget");
      }
      // Arrival or bump both end the cycle; after a bump the next scan
      // happens where the agent stopped.
      moved_on = true;
    }
    if (frontiers.empty()) {
      res.decision_log.push_back(std::move(rec));
      return finish(false, "frontiers-exhausted");
    }
    res.decision_log.push_back(std::move(rec));
  }
  return finish(false, "step-budget");
}

}  // namespace lgr
