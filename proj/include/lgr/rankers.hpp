#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "lgr/mapping.hpp"
#include "lgr/prompts.hpp"
#include "lgr/ranking.hpp"
#include "lgr/scenario.hpp"

namespace lgr {

struct RankerRequest {
  std::string target_object;
  std::array<std::vector<std::string>, kNumDirections> per_direction_objects;
  RoomCategoryList categories = default_room_categories();
};

struct RankerResponse {
  std::vector<std::string> per_direction_room;
  RankVector direction_ranks;
  std::vector<TranscriptRecord> transcript;
};

/// Identifies the exchange for transcripts and replay.
struct RankerContext {
  int episode{0};
  int step{0};
};

enum class RankerErrorKind { Transport, ParseExhausted, PermutationViolation, TranscriptDivergence };

inline std::string to_string(RankerErrorKind k) {
  switch (k) {
    case RankerErrorKind::Transport: return "transport";
    case RankerErrorKind::ParseExhausted: return "parse-exhausted";
    case RankerErrorKind::PermutationViolation: return "permutation-violation";
    case RankerErrorKind::TranscriptDivergence: return "transcript-divergence";
  }
  return "unknown";
}

class RankerError : public std::runtime_error {
 public:
  RankerError(RankerErrorKind k, const std::string& detail, std::vector<TranscriptRecord> partial = {})
      : std::runtime_error(to_string(k) + ": " + detail), kind(k), transcript(std::move(partial)) {}
  RankerErrorKind kind;
  std::vector<TranscriptRecord> transcript;  // exchanges made before the failure
};

/// Ranks the eight view directions for a target object.
class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual RankerResponse rank(const RankerRequest& request, const RankerContext& ctx) const = 0;
  virtual std::string name() const = 0;
};

inline void check_response(const RankerResponse& r, const RankerRequest& req) {
  if (r.direction_ranks.size() != kNumDirections || !r.direction_ranks.is_permutation())
    throw RankerError(RankerErrorKind::PermutationViolation, "direction ranks are not a permutation of 1..8",
                      r.transcript);
  for (const auto& room : r.per_direction_room)
    if (std::find(req.categories.begin(), req.categories.end(), room) == req.categories.end())
      throw RankerError(RankerErrorKind::PermutationViolation, "room '" + room + "' is not a category", r.transcript);
}

// ---------------------------------------------------------------------------
// Oracle

inline constexpr double kPriorEpsilon = 1e-6;

/// Naive-Bayes room guess: argmax over non-wall categories of
/// sum_obj log(prior(obj, category) + eps). First category wins ties.
inline std::string oracle_classify(const std::vector<std::string>& objects, const CoOccurrencePrior& prior,
                                   const RoomCategoryList& categories) {
  const std::string* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& cat : categories) {
    if (cat == kWallCategory) continue;
    double s = 0.0;
    for (const auto& obj : objects) s += std::log(prior.prob(obj, cat) + kPriorEpsilon);
    if (!best || s > best_score) {
      best = &cat;
      best_score = s;
    }
  }
  if (!best) throw std::invalid_argument("oracle_classify: no non-wall category");
  return *best;
}

/// Orders directions by prior(target, room) of their classified room,
/// lower direction index first on ties.
inline RankVector rank_directions_by_prior(const std::vector<std::string>& rooms, const std::string& target,
                                           const CoOccurrencePrior& prior) {
  std::vector<int> order(rooms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return prior.prob(target, rooms[static_cast<std::size_t>(a)]) > prior.prob(target, rooms[static_cast<std::size_t>(b)]);
  });
  RankVector rv;
  rv.ranks.assign(rooms.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) rv.ranks[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos) + 1;
  return rv;
}

/// Deterministic stand-in for the language model, driven by a co-occurrence
/// table. It also writes the exchange it would have had, in the model's
/// response formats, so its runs can be replayed.
class OracleRanker final : public Ranker {
 public:
  explicit OracleRanker(CoOccurrencePrior prior) : prior_(std::move(prior)) {}

  RankerResponse rank(const RankerRequest& req, const RankerContext& ctx) const override {
    RankerResponse out;
    const PromptBundle bundle = build_prompt_bundle(
        req.target_object, {req.per_direction_objects.begin(), req.per_direction_objects.end()}, req.categories);
    for (int k = 0; k < kNumDirections; ++k) {
      const auto& objs = req.per_direction_objects[static_cast<std::size_t>(k)];
      out.per_direction_room.push_back(oracle_classify(objs, prior_, req.categories));
      out.transcript.push_back({ctx.episode, ctx.step, "room", bundle.room_prompts[static_cast<std::size_t>(k)],
                                render_room_response(k + 1, out.per_direction_room.back())});
    }
    out.direction_ranks = rank_directions_by_prior(out.per_direction_room, req.target_object, prior_);
    ParsedRanking pr;
    for (int k = 0; k < kNumDirections; ++k)
      pr.entries.push_back({out.direction_ranks.ranks[static_cast<std::size_t>(k)],
                            out.per_direction_room[static_cast<std::size_t>(k)], k + 1});
    out.transcript.push_back({ctx.episode, ctx.step, "ranking", bundle.ranking_prompt, render_ranking_response(pr)});
    return out;
  }

  std::string name() const override { return "oracle"; }
  const CoOccurrencePrior& prior() const { return prior_; }

 private:
  CoOccurrencePrior prior_;
};

// ---------------------------------------------------------------------------
// Language-model client

struct ChatMessage {
  std::string role;  // "user" | "assistant"
  std::string content;
};

/// One chat completion round trip. Throws RankerError(Transport) on failure.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

/// Spaces outbound calls at least 60/rpm seconds apart. rpm <= 0 disables it.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute = 0.0) : rpm_(requests_per_minute) {}

  void acquire() {
    if (rpm_ <= 0.0) return;
    std::unique_lock lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    if (next_ > now) std::this_thread::sleep_until(next_);
    next_ = std::max(next_, now) +
            std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(60.0 / rpm_));
  }

 private:
  double rpm_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

struct LlmConfig {
  std::string endpoint;
  std::string api_key;
  std::string model;
  int max_retries{2};
  double requests_per_minute{0.0};

  /// LGR_LLM_ENDPOINT, LGR_LLM_API_KEY, LGR_LLM_MODEL, LGR_LLM_RPM.
  static LlmConfig from_env() {
    auto get = [](const char* k) -> std::string {
      const char* v = std::getenv(k);
      return v ? v : "";
    };
    LlmConfig c;
    c.endpoint = get("LGR_LLM_ENDPOINT");
    c.api_key = get("LGR_LLM_API_KEY");
    c.model = get("LGR_LLM_MODEL");
    if (const std::string rpm = get("LGR_LLM_RPM"); !rpm.empty()) c.requests_per_minute = std::stod(rpm);
    return c;
  }
};

/// Runs the eight room queries and the ranking query over a ChatTransport.
/// The ranking query carries the room exchanges as chat history so that its
/// "Step k" references resolve. Each query is retried up to `max_retries`
/// times on a parse failure.
class LlmRanker final : public Ranker {
 public:
  LlmRanker(ChatTransport& transport, int max_retries = 2, RateLimiter* limiter = nullptr)
      : transport_(transport), max_retries_(max_retries), limiter_(limiter) {}

  RankerResponse rank(const RankerRequest& req, const RankerContext& ctx) const override {
    std::lock_guard lock(mu_);
    RankerResponse out;
    const PromptBundle bundle = build_prompt_bundle(
        req.target_object, {req.per_direction_objects.begin(), req.per_direction_objects.end()}, req.categories);

    std::vector<ChatMessage> history;
    for (int k = 0; k < kNumDirections; ++k) {
      const std::string& prompt = bundle.room_prompts[static_cast<std::size_t>(k)];
      std::string answer;
      const std::string room = query_with_retries(
          ctx, "room", {{"user", prompt}}, out.transcript, answer,
          [&](const std::string& text) { return parse_room_response(text, req.categories); });
      out.per_direction_room.push_back(room);
      history.push_back({"user", prompt});
      history.push_back({"assistant", answer});
    }
    history.push_back({"user", bundle.ranking_prompt});
    std::string answer;
    const ParsedRanking ranking = query_with_retries(
        ctx, "ranking", history, out.transcript, answer,
        [&](const std::string& text) { return parse_ranking_response(text, bundle.response_count); });
    out.direction_ranks.ranks = ranking.ranks_by_step();
    check_response(out, req);
    return out;
  }

  std::string name() const override { return "llm"; }

 private:
  template <typename Parse>
  std::invoke_result_t<Parse, const std::string&> query_with_retries(const RankerContext& ctx, const std::string& kind, const std::vector<ChatMessage>& messages,
                          std::vector<TranscriptRecord>& transcript, std::string& raw_answer, Parse parse) const {
    std::string last_error;
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
      if (limiter_) limiter_->acquire();
      std::string text;
      try {
        text = transport_.complete(messages);
      } catch (const RankerError& e) {
        if (e.kind == RankerErrorKind::Transport) transcript.push_back({ctx.episode, ctx.step, kind, messages.back().content, "", e.what()});
        throw RankerError(e.kind, e.what(), transcript);
      } catch (const std::exception& e) {
        transcript.push_back({ctx.episode, ctx.step, kind, messages.back().content, "", e.what()});
        throw RankerError(RankerErrorKind::Transport, e.what(), transcript);
      }
      transcript.push_back({ctx.episode, ctx.step, kind, messages.back().content, text});
      try {
        auto parsed = parse(text);
        raw_answer = text;
        return parsed;
      } catch (const ParseError& e) {
        last_error = e.what();
      }
    }
    throw RankerError(RankerErrorKind::ParseExhausted,
                      kind + " query failed after " + std::to_string(max_retries_ + 1) + " attempts: " + last_error,
                      transcript);
  }

  ChatTransport& transport_;
  int max_retries_;
  RateLimiter* limiter_;
  mutable std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Replay

/// Serves recorded responses in order, checking each outbound prompt
/// against the record.
class ReplayTransport final : public ChatTransport {
 public:
  explicit ReplayTransport(std::vector<TranscriptRecord> records) : records_(std::move(records)) {}

  std::string complete(const std::vector<ChatMessage>& messages) override {
    if (next_ >= records_.size())
      throw RankerError(RankerErrorKind::TranscriptDivergence, "transcript has no further exchange for this step");
    const TranscriptRecord& rec = records_[next_++];
    if (messages.empty() || messages.back().content != rec.prompt)
      throw RankerError(RankerErrorKind::TranscriptDivergence,
                        "prompt differs from transcript record " + std::to_string(next_ - 1) + " of episode " +
                            std::to_string(rec.episode) + " step " + std::to_string(rec.step));
    if (rec.error) throw RankerError(RankerErrorKind::Transport, "recorded transport failure: " + *rec.error);
    return rec.response;
  }

  bool exhausted() const { return next_ >= records_.size(); }

 private:
  std::vector<TranscriptRecord> records_;
  std::size_t next_{0};
};

/// Reproduces a recorded run from its transcript. Records are matched by
/// (episode, step); within a step they must be consumed exactly, in order.
class ReplayRanker final : public Ranker {
 public:
  explicit ReplayRanker(std::vector<TranscriptRecord> records, int max_retries = 2)
      : records_(std::move(records)), max_retries_(max_retries) {}

  RankerResponse rank(const RankerRequest& req, const RankerContext& ctx) const override {
    std::vector<TranscriptRecord> mine;
    for (const auto& r : records_)
      if (r.episode == ctx.episode && r.step == ctx.step) mine.push_back(r);
    if (mine.empty())
      throw RankerError(RankerErrorKind::TranscriptDivergence, "no transcript records for episode " +
                                                                   std::to_string(ctx.episode) + " step " +
                                                                   std::to_string(ctx.step));
    ReplayTransport transport(std::move(mine));
    LlmRanker engine(transport, max_retries_);
    RankerResponse out;
    try {
      out = engine.rank(req, ctx);
    } catch (const RankerError& e) {
      if (e.kind == RankerErrorKind::ParseExhausted && !transport.exhausted())
        throw RankerError(RankerErrorKind::TranscriptDivergence, "unconsumed records after a failed step", e.transcript);
      throw;
    }
    if (!transport.exhausted())
      throw RankerError(RankerErrorKind::TranscriptDivergence, "unconsumed records for episode " +
                                                                   std::to_string(ctx.episode) + " step " +
                                                                   std::to_string(ctx.step));
    return out;
  }

  std::string name() const override { return "replay"; }

 private:
  std::vector<TranscriptRecord> records_;
  int max_retries_;
};

// ---------------------------------------------------------------------------
// Fallback

/// Directions ordered by their nearest frontier seen in the latest scan;
/// directions without one follow, by index.
inline RankVector distance_only_ranking(const FrontierList& list) {
  std::array<double, kNumDirections> nearest;
  nearest.fill(std::numeric_limits<double>::infinity());
  for (const auto& e : list.entries())
    if (e.seen_in_last_scan)
      nearest[static_cast<std::size_t>(e.last_seen_direction)] =
          std::min(nearest[static_cast<std::size_t>(e.last_seen_direction)], e.last_distance);
  std::vector<int> order(kNumDirections);
  for (int k = 0; k < kNumDirections; ++k) order[static_cast<std::size_t>(k)] = k;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return nearest[static_cast<std::size_t>(a)] < nearest[static_cast<std::size_t>(b)];
  });
  RankVector rv;
  rv.ranks.assign(kNumDirections, 0);
  for (int pos = 0; pos < kNumDirections; ++pos) rv.ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos + 1;
  return rv;
}

}  // namespace lgr
