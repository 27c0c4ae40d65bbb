#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgr/mapping.hpp"

namespace lgr {

/// Ranks r_i, 1 = highest priority. Valid when a permutation of 1..N.
struct RankVector {
  std::vector<int> ranks;

  std::size_t size() const { return ranks.size(); }

  bool is_permutation() const {
    std::vector<bool> seen(ranks.size() + 1, false);
    for (int r : ranks) {
      if (r < 1 || r > static_cast<int>(ranks.size()) || seen[static_cast<std::size_t>(r)]) return false;
      seen[static_cast<std::size_t>(r)] = true;
    }
    return true;
  }

  /// Index holding rank 1.
  std::size_t top() const {
    for (std::size_t i = 0; i < ranks.size(); ++i)
      if (ranks[i] == 1) return i;
    throw std::logic_error("RankVector: no rank 1");
  }

  friend bool operator==(const RankVector&, const RankVector&) = default;
};

/// Frontier id -> nonnegative score.
struct ScoreVector {
  std::map<int, double> scores;

  bool empty() const { return scores.empty(); }
  std::size_t size() const { return scores.size(); }
  double get(int id) const {
    const auto it = scores.find(id);
    return it == scores.end() ? 0.0 : it->second;
  }

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

/// S[i] = w_i / r_i, keyed by the matching entry of `ids`.
inline ScoreVector reciprocal_rank_scores(const RankVector& ranks, std::span<const double> weights,
                                          std::span<const int> ids) {
  if (weights.size() != ranks.size() || ids.size() != ranks.size())
    throw std::invalid_argument("reciprocal_rank_scores: length mismatch");
  if (!ranks.is_permutation()) throw std::invalid_argument("reciprocal_rank_scores: ranks are not a permutation of 1..N");
  ScoreVector out;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (!(weights[i] > 0.0 && weights[i] <= 1.0))
      throw std::invalid_argument("reciprocal_rank_scores: weight outside (0, 1]");
    if (!out.scores.emplace(ids[i], weights[i] / ranks.ranks[i]).second)
      throw std::invalid_argument("reciprocal_rank_scores: duplicate id");
  }
  return out;
}

/// Same, with ids 0..N-1.
inline ScoreVector reciprocal_rank_scores(const RankVector& ranks, std::span<const double> weights) {
  std::vector<int> ids(ranks.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return reciprocal_rank_scores(ranks, weights, ids);
}

struct WeightConfig {
  double tau{12.0};  // decay length in cells
};

/// w(d) = exp(-d / tau), strictly decreasing, in (0, 1].
inline double distance_weight(double d, const WeightConfig& cfg) {
  if (!(d >= 0.0)) throw std::invalid_argument("distance_weight: negative distance");
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("distance_weight: tau must be positive");
  return std::exp(-d / cfg.tau);
}

/// Per-id sum. Ids missing from one side contribute the other side's value.
inline ScoreVector fuse(const ScoreVector& a, const ScoreVector& b) {
  ScoreVector out = a;
  for (const auto& [id, s] : b.scores) out.scores[id] += s;
  return out;
}

enum class SelectionPolicy { ArgmaxFused, ProtoRandom };

inline std::string to_string(SelectionPolicy p) {
  return p == SelectionPolicy::ArgmaxFused ? "argmax-fused" : "proto-random";
}

inline SelectionPolicy parse_policy(const std::string& s) {
  if (s == "argmax-fused") return SelectionPolicy::ArgmaxFused;
  if (s == "proto-random") return SelectionPolicy::ProtoRandom;
  throw std::invalid_argument("unknown selection policy: " + s);
}

class EmptyFrontierList : public std::runtime_error {
 public:
  EmptyFrontierList() : std::runtime_error("frontier list is empty") {}
};

/// Maximal cumulative score; smallest id on ties.
inline int argmax_fused(const FrontierList& list) {
  if (list.empty()) throw EmptyFrontierList();
  const FrontierEntry* best = nullptr;
  for (const auto& e : list.entries()) {
    if (!best || e.cumulative_score > best->cumulative_score ||
        (e.cumulative_score == best->cumulative_score && e.id < best->id))
      best = &e;
  }
  return best->id;
}

/// Chooses the next subgoal.
///
/// ArgmaxFused picks the highest cumulative score. ProtoRandom draws
/// uniformly among entries the latest scan saw in `top_direction` (the view
/// ranked first), falling back to ArgmaxFused when there are none.
template <typename Rng>
int select_frontier(const FrontierList& list, SelectionPolicy policy, Rng& rng,
                    std::optional<int> top_direction = std::nullopt) {
  if (list.empty()) throw EmptyFrontierList();
  if (policy == SelectionPolicy::ProtoRandom && top_direction) {
    std::vector<int> pool;
    for (const auto& e : list.entries())
      if (e.seen_in_last_scan && e.last_seen_direction == *top_direction) pool.push_back(e.id);
    if (!pool.empty()) return pool[uniform_index(rng, pool.size())];
  }
  return argmax_fused(list);
}

}  // namespace lgr
