#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"

using lgr::Cell;
using lgr::Terrain;

namespace {

lgr::GroundTruthMap open_map(int w, int h) {
  lgr::GroundTruthMap m(w, h);
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      m.terrain[{x, y}] = Terrain::Free;
      m.room[{x, y}] = 0;
    }
  return m;
}

lgr::GroundTruthMap random_map(std::mt19937_64& rng, int w, int h, double density) {
  lgr::GroundTruthMap m(w, h);
  std::bernoulli_distribution wall(density);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!wall(rng)) {
        m.terrain[{x, y}] = Terrain::Free;
        m.room[{x, y}] = 0;
      }
  return m;
}

std::set<Cell> cells_of(const lgr::ViewObservation& v) {
  std::set<Cell> out;
  for (const auto& c : v.visible_cells) out.insert(c.cell);
  return out;
}

}  // namespace

TEST(Wedge, MatchesAngleOracleOnEveryOffset) {
  for (int dy = -40; dy <= 40; ++dy)
    for (int dx = -40; dx <= 40; ++dx) {
      if (!dx && !dy) continue;
      ASSERT_EQ(lgr::wedge_of(dx, dy), oracle::wedge_by_angle(dx, dy)) << dx << "," << dy;
    }
}

TEST(Wedge, AxisOffsetsLandOnTheirOwnDirection) {
  for (int k = 0; k < 8; ++k) {
    const auto [dx, dy] = lgr::kDirectionOffsets[k];
    EXPECT_EQ(lgr::wedge_of(dx, dy), k);
    EXPECT_EQ(lgr::wedge_of(5 * dx, 5 * dy), k);
  }
  EXPECT_THROW(lgr::wedge_of(0, 0), std::invalid_argument);
}

TEST(LineOfSight, MatchesBruteForceOnRandomMaps) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = random_map(rng, 14, 14, 0.3);
    for (int k = 0; k < 150; ++k) {
      const Cell a{static_cast<int>(rng() % 14), static_cast<int>(rng() % 14)};
      const Cell b{static_cast<int>(rng() % 14), static_cast<int>(rng() % 14)};
      ASSERT_EQ(lgr::line_of_sight(m, a, b), oracle::line_of_sight(m, a, b)) << a.x << "," << a.y << " -> " << b.x << "," << b.y;
    }
  }
}

TEST(LineOfSight, DiagonalSqueezeBetweenTwoWallsIsBlocked) {
  const auto m = oracle::map_from_rows({".#.", "#..", "..."});
  EXPECT_FALSE(lgr::line_of_sight(m, {0, 0}, {2, 2}));
  const auto n = oracle::map_from_rows({"..#", "#..", "..."});
  EXPECT_TRUE(lgr::line_of_sight(n, {0, 0}, {2, 2}));
}

TEST(RaycastView, OpenMapWedgeMatchesOracleAndHasNoObjects) {
  const auto m = open_map(11, 11);
  lgr::SensorConfig s;
  s.max_range = 3;
  const lgr::Pose pose{{5, 5}, 0};
  for (int k = 0; k < 8; ++k) {
    const auto v = lgr::raycast_view(m, {}, pose, k, s);
    EXPECT_EQ(v.direction_index, k);
    EXPECT_EQ(cells_of(v), oracle::visible_cells(m, pose.cell, k, 3));
    EXPECT_TRUE(v.detected_objects.empty());
    for (const auto& c : v.visible_cells) EXPECT_EQ(c.state, Terrain::Free);
  }
}

TEST(RaycastView, MatchesOracleOnRandomMaps) {
  std::mt19937_64 rng(5);
  lgr::SensorConfig s;
  s.max_range = 6;
  for (int trial = 0; trial < 30; ++trial) {
    auto m = random_map(rng, 15, 15, 0.25);
    const Cell p{7, 7};
    m.terrain[p] = Terrain::Free;
    m.room[p] = 0;
    for (int k = 0; k < 8; ++k)
      ASSERT_EQ(cells_of(lgr::raycast_view(m, {}, {p, 0}, k, s)), oracle::visible_cells(m, p, k, 6)) << trial << "/" << k;
  }
}

TEST(RaycastView, WallAlongAxisHidesEverythingBehindIt) {
  auto m = open_map(11, 11);
  m.terrain[{6, 5}] = Terrain::Occupied;
  m.room[{6, 5}] = m.wall_index();
  lgr::SensorConfig s;
  s.max_range = 4;
  const auto v = lgr::raycast_view(m, {}, {{5, 5}, 0}, 0, s);
  const auto cells = cells_of(v);
  EXPECT_TRUE(cells.contains(Cell{6, 5}));
  for (int x = 7; x <= 9; ++x) EXPECT_FALSE(cells.contains(Cell{x, 5}));
}

TEST(RaycastView, ObjectVisibleOnlyWithLineOfSight) {
  auto m = open_map(11, 11);
  const std::vector<lgr::ObjectInstance> objs{{0, "sink", {8, 5}}, {1, "oven", {8, 7}}};
  lgr::SensorConfig s;
  s.max_range = 5;
  auto v = lgr::raycast_view(m, objs, {{5, 5}, 0}, 0, s);
  ASSERT_EQ(v.detected_objects.size(), 1u);
  EXPECT_EQ(v.detected_objects[0].class_name, "sink");
  m.terrain[{7, 5}] = Terrain::Occupied;
  m.room[{7, 5}] = m.wall_index();
  v = lgr::raycast_view(m, objs, {{5, 5}, 0}, 0, s);
  EXPECT_TRUE(v.detected_objects.empty());
}

TEST(PanoramicScan, OpenMapUnionIsTheFullDiskAndWedgesAreDisjoint) {
  const auto m = open_map(31, 31);
  lgr::SensorConfig s;
  const lgr::Pose pose{{15, 15}, 0};
  const auto views = lgr::panoramic_scan(m, {}, pose, s);
  ASSERT_EQ(views.size(), 8u);
  std::set<Cell> all;
  std::size_t total = 0;
  for (const auto& v : views) {
    total += v.visible_cells.size();
    for (const auto& c : v.visible_cells) all.insert(c.cell);
  }
  EXPECT_EQ(total, all.size());  // no cell in two wedges
  std::set<Cell> disk;
  for (int y = 0; y < 31; ++y)
    for (int x = 0; x < 31; ++x) {
      const int dx = x - 15, dy = y - 15;
      if ((dx || dy) && dx * dx + dy * dy <= 144 && oracle::line_of_sight(m, {15, 15}, {x, y})) disk.insert({x, y});
    }
  EXPECT_EQ(all, disk);
}

TEST(PanoramicScan, BoxedInSeesOnlyTheEightWalls) {
  const auto m = oracle::map_from_rows({".....", ".###.", ".#.#.", ".###.", "....."});
  const std::vector<lgr::ObjectInstance> objs{{0, "sink", {0, 0}}};
  std::set<Cell> all;
  for (const auto& v : lgr::panoramic_scan(m, objs, {{2, 2}, 0}, {})) {
    EXPECT_TRUE(v.detected_objects.empty());
    for (const auto& c : v.visible_cells) {
      EXPECT_EQ(c.state, Terrain::Occupied);
      all.insert(c.cell);
    }
  }
  EXPECT_EQ(all.size(), 8u);
}

TEST(PanoramicScan, QuarterTurnOfTheWorldShiftsDirectionsByTwo) {
  std::mt19937_64 rng(99);
  lgr::SensorConfig s;
  s.max_range = 5;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 13;
    auto m = random_map(rng, n, n, 0.25);
    m.terrain[{6, 6}] = Terrain::Free;
    m.room[{6, 6}] = 0;
    // (x, y) -> (n-1-y, x): +90 degrees with y pointing down.
    lgr::GroundTruthMap r(n, n);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        r.terrain[{n - 1 - y, x}] = m.terrain[{x, y}];
        r.room[{n - 1 - y, x}] = m.room[{x, y}];
      }
    for (int k = 0; k < 8; ++k) {
      std::set<Cell> rotated;
      for (const Cell& c : cells_of(lgr::raycast_view(m, {}, {{6, 6}, 0}, k, s))) rotated.insert({n - 1 - c.y, c.x});
      EXPECT_EQ(rotated, cells_of(lgr::raycast_view(r, {}, {{6, 6}, 0}, (k + 2) % 8, s)));
    }
  }
}

TEST(PanoramicScan, MoreWallsNeverRevealMoreCells) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto m = random_map(rng, 15, 15, 0.15);
    m.terrain[{7, 7}] = Terrain::Free;
    auto denser = m;
    for (int i = 0; i < 10; ++i) {
      const Cell c{static_cast<int>(rng() % 15), static_cast<int>(rng() % 15)};
      if (!(c == Cell{7, 7})) denser.terrain[c] = Terrain::Occupied;
    }
    for (int k = 0; k < 8; ++k) {
      const auto a = cells_of(lgr::raycast_view(m, {}, {{7, 7}, 0}, k, {}));
      const auto b = cells_of(lgr::raycast_view(denser, {}, {{7, 7}, 0}, k, {}));
      for (const Cell& c : b) EXPECT_TRUE(a.contains(c));
    }
  }
}

TEST(RaycastView, RejectsBadPoses) {
  const auto m = open_map(5, 5);
  EXPECT_THROW(lgr::raycast_view(m, {}, {{0, 0}, 0}, 0, {}), std::invalid_argument);
  EXPECT_THROW(lgr::raycast_view(m, {}, {{9, 9}, 0}, 0, {}), std::invalid_argument);
  EXPECT_THROW(lgr::raycast_view(m, {}, {{2, 2}, 0}, 8, {}), std::invalid_argument);
}

TEST(CellsSeeing, AgreesWithPerCellRaycasting) {
  std::mt19937_64 rng(21);
  lgr::SensorConfig s;
  s.max_range = 5;
  for (int trial = 0; trial < 10; ++trial) {
    auto m = random_map(rng, 12, 12, 0.25);
    const Cell t{6, 6};
    m.terrain[t] = Terrain::Free;
    const std::vector<lgr::ObjectInstance> objs{{0, "sink", t}};
    std::set<Cell> expect{t};
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 12; ++x) {
        if (!m.is_free({x, y}) || Cell{x, y} == t) continue;
        for (const auto& v : lgr::panoramic_scan(m, objs, {{x, y}, 0}, s))
          if (!v.detected_objects.empty()) expect.insert({x, y});
      }
    const auto got = lgr::cells_seeing(m, t, s);
    EXPECT_EQ(std::set<Cell>(got.begin(), got.end()), expect);
  }
}

TEST(Scenario, SameSeedGivesIdenticalBytes) {
  const auto a = lgr::scenario_to_string(lgr::generate_scenario(7, {}));
  const auto b = lgr::scenario_to_string(lgr::generate_scenario(7, {}));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, lgr::scenario_to_string(lgr::generate_scenario(8, {})));
}

TEST(Scenario, GeneratedMapsAreConnectedAndObjectsFitTheirRooms) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    lgr::GenerationParams p;
    if (seed % 2) {
      p.width = 32;
      p.height = 24;
      p.rooms_min = 3;
      p.rooms_max = 6;
    }
    const auto sc = lgr::generate_scenario(seed, p);
    Cell any{-1, -1};
    for (int y = 0; y < sc.map.height && any.x < 0; ++y)
      for (int x = 0; x < sc.map.width; ++x)
        if (sc.map.is_free({x, y})) {
          any = {x, y};
          break;
        }
    ASSERT_GE(any.x, 0);
    EXPECT_EQ(lgr::flood_fill_count(sc.map, any), lgr::free_cell_count(sc.map)) << seed;
    ASSERT_FALSE(sc.objects.empty());
    for (const auto& o : sc.objects) {
      ASSERT_TRUE(sc.map.is_free(o.cell));
      EXPECT_GT(sc.prior.prob(o.class_name, sc.map.room_name(o.cell)), 0.0) << o.class_name;
    }
    // Border is solid.
    for (int x = 0; x < sc.map.width; ++x) {
      EXPECT_FALSE(sc.map.is_free({x, 0}));
      EXPECT_FALSE(sc.map.is_free({x, sc.map.height - 1}));
    }
  }
}

TEST(Scenario, JsonRoundTrip) {
  const auto sc = lgr::generate_scenario(3, {});
  const auto back = lgr::scenario_from_json(lgr::scenario_to_json(sc));
  EXPECT_EQ(lgr::scenario_to_string(back), lgr::scenario_to_string(sc));
}

TEST(Scenario, RejectsGridsTooSmallForTheRoomCount) {
  lgr::GenerationParams p;
  p.width = 10;
  p.height = 10;
  p.rooms_min = 6;
  EXPECT_THROW(lgr::generate_scenario(1, p), std::invalid_argument);
}

TEST(Prior, DefaultTableIsValid) {
  EXPECT_NO_THROW(lgr::default_prior().validate(lgr::default_room_categories()));
  lgr::CoOccurrencePrior bad;
  bad.table["x"] = {{"kitchen", 0.5}};
  EXPECT_THROW(bad.validate(lgr::default_room_categories()), std::invalid_argument);
}
