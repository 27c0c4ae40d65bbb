#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <thread>

#include "lgr/http_transport.hpp"
#include "oracles.hpp"
#include "stubs.hpp"

using lgr::RankerErrorKind;

namespace {

lgr::RankerRequest request_with(std::string target, std::map<int, std::vector<std::string>> objs = {}) {
  lgr::RankerRequest r;
  r.target_object = std::move(target);
  for (auto& [k, v] : objs) r.per_direction_objects[static_cast<std::size_t>(k)] = v;
  return r;
}

RankerErrorKind error_kind(const lgr::Ranker& r, const lgr::RankerRequest& req, lgr::RankerContext ctx = {}) {
  try {
    r.rank(req, ctx);
  } catch (const lgr::RankerError& e) {
    return e.kind;
  }
  ADD_FAILURE() << "ranker did not fail";
  return RankerErrorKind::Transport;
}

}  // namespace

TEST(OracleClassify, Examples) {
  const auto prior = lgr::default_prior();
  const auto cats = lgr::default_room_categories();
  EXPECT_EQ(lgr::oracle_classify({"oven", "sink"}, prior, cats), "kitchen");
  EXPECT_EQ(lgr::oracle_classify({"oven", "sink"}, prior, cats), oracle::classify({"oven", "sink"}, prior, cats));
  EXPECT_EQ(lgr::oracle_classify({}, prior, cats), "bathroom");

  lgr::CoOccurrencePrior single;
  single.table["anvil"] = {{"laundry room", 1.0}};
  EXPECT_EQ(lgr::oracle_classify({"anvil"}, single, cats), "laundry room");
  EXPECT_EQ(lgr::oracle_classify({"unheard of"}, single, cats), "bathroom");
}

TEST(OracleClassify, MatchesBruteForceOnRandomTables) {
  std::mt19937_64 rng(12);
  const auto cats = lgr::default_room_categories();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    lgr::CoOccurrencePrior prior;
    for (int c = 0; c < 6; ++c) {
      auto& row = prior.table["obj" + std::to_string(c)];
      double sum = 0.0;
      for (std::size_t k = 0; k + 1 < cats.size(); ++k) {
        const double p = u(rng) < 0.4 ? 0.0 : u(rng);
        row[cats[k]] = p;
        sum += p;
      }
      if (sum == 0.0) row["kitchen"] = sum = 1.0;
      for (auto& [_, p] : row) p /= sum;
    }
    std::vector<std::string> objs;
    const int n = static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) objs.push_back("obj" + std::to_string(rng() % 7));  // obj6 is unknown
    ASSERT_EQ(lgr::oracle_classify(objs, prior, cats), oracle::classify(objs, prior, cats)) << t;
  }
}

TEST(OracleRanker, KitchenDirectionRanksFirstForPlate) {
  const lgr::OracleRanker r(lgr::default_prior());
  const auto resp = r.rank(request_with("plate", {{5, {"oven", "sink"}}}), {});
  EXPECT_EQ(resp.per_direction_room[5], "kitchen");
  EXPECT_EQ(resp.direction_ranks.ranks[5], 1);
  EXPECT_TRUE(resp.direction_ranks.is_permutation());
}

TEST(OracleRanker, EmptyViewsRankByIndex) {
  const lgr::OracleRanker r(lgr::default_prior());
  const auto resp = r.rank(request_with("plate"), {});
  EXPECT_EQ(resp.direction_ranks.ranks, (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(OracleRanker, TranscriptReplaysToTheSameAnswer) {
  const lgr::OracleRanker r(lgr::default_prior());
  const auto req = request_with("bed", {{0, {"pillow"}}, {3, {"oven"}}, {6, {"desk", "computer"}}});
  const auto live = r.rank(req, {4, 2});
  ASSERT_EQ(live.transcript.size(), 9u);
  const lgr::ReplayRanker replay(live.transcript);
  const auto again = replay.rank(req, {4, 2});
  EXPECT_EQ(again.direction_ranks, live.direction_ranks);
  EXPECT_EQ(again.per_direction_room, live.per_direction_room);
}

TEST(LlmRanker, ScriptedResponsesGiveTheExpectedRanks) {
  std::deque<std::string> script;
  for (int k = 0; k < 8; ++k) script.push_back(lgr::render_room_response(k + 1, stubs::kStep13Rooms[static_cast<std::size_t>(k)]));
  script.push_back(stubs::kStep13Ranking);
  stubs::ScriptedTransport t(script);
  const lgr::LlmRanker r(t);
  const auto resp = r.rank(request_with("red chair"), {1, 0});
  EXPECT_EQ(resp.per_direction_room, stubs::kStep13Rooms);
  EXPECT_EQ(resp.direction_ranks.ranks, (std::vector<int>{5, 3, 6, 8, 4, 7, 1, 2}));
  EXPECT_EQ(resp.transcript.size(), 9u);
  // The ranking query carries the eight room exchanges as history.
  ASSERT_EQ(t.calls.size(), 9u);
  EXPECT_EQ(t.calls[8].size(), 17u);
  EXPECT_EQ(t.calls[8].back().content, lgr::build_ranking_prompt("red chair", 8));
  EXPECT_EQ(t.calls[8][1].role, "assistant");
}

TEST(LlmRanker, GarbageTwiceThenValidSucceeds) {
  std::deque<std::string> script{"I cannot help with that", "???"};
  stubs::ScriptedTransport t(script, stubs::polite_model);
  const lgr::LlmRanker r(t, 2);
  const auto resp = r.rank(request_with("plate"), {});
  EXPECT_EQ(resp.per_direction_room[0], "kitchen");
  EXPECT_EQ(t.calls.size(), 3u + 7u + 1u);
  EXPECT_EQ(resp.transcript.size(), 11u);
}

TEST(LlmRanker, GarbageRankingIsRetriedToo) {
  std::deque<std::string> script;
  for (int k = 0; k < 8; ++k) script.push_back("kitchen");
  script.push_back("1. kitchen from Step 1\n2. kitchen from Step 1");
  stubs::ScriptedTransport t(script, stubs::polite_model);
  const lgr::LlmRanker r(t, 2);
  EXPECT_EQ(r.rank(request_with("plate"), {}).direction_ranks.ranks, (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(LlmRanker, AlwaysGarbageExhaustsRetries) {
  stubs::ScriptedTransport t({}, [](const auto&) { return std::string("no idea"); });
  const lgr::LlmRanker r(t, 2);
  try {
    r.rank(request_with("plate"), {});
    FAIL();
  } catch (const lgr::RankerError& e) {
    EXPECT_EQ(e.kind, RankerErrorKind::ParseExhausted);
    EXPECT_EQ(e.transcript.size(), 3u);
  }
  EXPECT_EQ(t.calls.size(), 3u);
}

TEST(LlmRanker, TransportFailureIsTyped) {
  stubs::ScriptedTransport t({""});
  const lgr::LlmRanker r(t);
  EXPECT_EQ(error_kind(r, request_with("plate")), RankerErrorKind::Transport);
}

TEST(ReplayRanker, DivergenceIsDetected) {
  const lgr::OracleRanker oracle(lgr::default_prior());
  const auto rec = oracle.rank(request_with("bed", {{1, {"pillow"}}}), {0, 0}).transcript;
  const lgr::ReplayRanker replay(rec);
  // Different observations render a different prompt.
  EXPECT_EQ(error_kind(replay, request_with("bed", {{1, {"oven"}}}), {0, 0}), RankerErrorKind::TranscriptDivergence);
  // No records for this step.
  EXPECT_EQ(error_kind(replay, request_with("bed", {{1, {"pillow"}}}), {0, 1}), RankerErrorKind::TranscriptDivergence);
  // Leftover records.
  auto extra = rec;
  extra.push_back(rec.back());
  EXPECT_EQ(error_kind(lgr::ReplayRanker(extra), request_with("bed", {{1, {"pillow"}}}), {0, 0}),
            RankerErrorKind::TranscriptDivergence);
}

TEST(ReplayRanker, RecordedTransportFailureReplaysAsTransportFailure) {
  stubs::ScriptedTransport t({""});
  const lgr::LlmRanker live(t);
  std::vector<lgr::TranscriptRecord> rec;
  try {
    live.rank(request_with("plate"), {2, 3});
  } catch (const lgr::RankerError& e) {
    rec = e.transcript;
  }
  ASSERT_EQ(rec.size(), 1u);
  ASSERT_TRUE(rec[0].error.has_value());
  EXPECT_EQ(error_kind(lgr::ReplayRanker(rec), request_with("plate"), {2, 3}), RankerErrorKind::Transport);
}

TEST(Fallback, DistanceOnlyRankingOrdersByNearestFreshFrontier) {
  lgr::FrontierList l;
  auto add = [&](int dir, double d, bool fresh) {
    auto* e = l.find(l.add({static_cast<int>(l.size()), 0}, dir, {0, 0}));
    e->last_distance = d;
    e->seen_in_last_scan = fresh;
  };
  add(3, 5.0, true);
  add(6, 2.0, true);
  add(1, 1.0, false);  // stale: ignored
  add(3, 9.0, true);
  const auto r = lgr::distance_only_ranking(l);
  EXPECT_EQ(r.ranks, (std::vector<int>{3, 4, 5, 2, 6, 7, 1, 8}));
}

TEST(RateLimiter, SpacesCalls) {
  lgr::RateLimiter lim(1200.0);  // one call per 50 ms
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) lim.acquire();
  EXPECT_GE(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(145));
  lgr::RateLimiter off(0.0);
  const auto t1 = std::chrono::steady_clock::now();
  for (int i = 0; i < 100; ++i) off.acquire();
  EXPECT_LT(std::chrono::steady_clock::now() - t1, std::chrono::milliseconds(50));
}

TEST(HttpChatTransport, TalksToALocalEndpoint) {
  httplib::Server srv;
  nlohmann::json seen;
  std::string auth;
  srv.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    const nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "Response for od1: kitchen"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  srv.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("overloaded", "text/plain");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  lgr::LlmConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.api_key = "k123";
  cfg.model = "m";
  lgr::HttpChatTransport t(cfg, 5);
  EXPECT_EQ(t.complete({{"user", "hello"}}), "Response for od1: kitchen");
  EXPECT_EQ(seen["model"], "m");
  EXPECT_EQ(seen["messages"][0]["content"], "hello");
  EXPECT_EQ(auth, "Bearer k123");

  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/broken";
  lgr::HttpChatTransport bad(cfg, 5);
  try {
    bad.complete({{"user", "hello"}});
    ADD_FAILURE();
  } catch (const lgr::RankerError& e) {
    EXPECT_EQ(e.kind, RankerErrorKind::Transport);
  }
  srv.stop();
  th.join();

  EXPECT_THROW(lgr::HttpChatTransport(lgr::LlmConfig{}), std::invalid_argument);
}
