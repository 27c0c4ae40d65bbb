#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lgr/world.hpp"

namespace lgr {

/// Object class -> room category -> probability. Stands in for the
/// commonsense a language model brings to room/object association.
struct CoOccurrencePrior {
  std::map<std::string, std::map<std::string, double>> table;

  double prob(const std::string& object_class, const std::string& category) const {
    const auto row = table.find(object_class);
    if (row == table.end()) return 0.0;
    const auto p = row->second.find(category);
    return p == row->second.end() ? 0.0 : p->second;
  }

  bool has_class(const std::string& object_class) const { return table.contains(object_class); }

  std::vector<std::string> classes() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : table) out.push_back(k);
    return out;
  }

  /// Rows must be nonnegative and sum to 1 over the non-wall categories.
  void validate(const RoomCategoryList& categories, double tol = 1e-9) const {
    for (const auto& [cls, row] : table) {
      if (cls.empty()) throw std::invalid_argument("prior: empty class name");
      double sum = 0.0;
      for (const auto& [cat, p] : row) {
        if (!(p >= 0.0)) throw std::invalid_argument("prior: negative entry for " + cls);
        if (cat == kWallCategory) {
          if (p != 0.0) throw std::invalid_argument("prior: nonzero wall entry for " + cls);
          continue;
        }
        if (std::find(categories.begin(), categories.end(), cat) == categories.end())
          throw std::invalid_argument("prior: unknown category '" + cat + "' for " + cls);
        sum += p;
      }
      if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("prior: row does not sum to 1 for " + cls);
    }
  }
};

/// Built-in table over the default room categories.
inline CoOccurrencePrior default_prior() {
  // bathroom, bedroom, reception room, laundry room, kitchen, home office, living room
  static const std::vector<std::pair<std::string, std::vector<double>>> rows = {
      {"toilet", {0.90, 0, 0, 0.05, 0, 0, 0.05}},
      {"bathtub", {0.95, 0, 0, 0.05, 0, 0, 0}},
      {"sink", {0.45, 0, 0, 0.15, 0.40, 0, 0}},
      {"towel", {0.60, 0.05, 0, 0.35, 0, 0, 0}},
      {"bed", {0, 0.95, 0, 0, 0, 0.02, 0.03}},
      {"pillow", {0, 0.75, 0.05, 0, 0, 0, 0.20}},
      {"wardrobe", {0, 0.80, 0.05, 0.05, 0, 0.10, 0}},
      {"nightstand", {0, 0.95, 0, 0, 0, 0, 0.05}},
      {"sofa", {0, 0.05, 0.35, 0, 0, 0.05, 0.55}},
      {"armchair", {0, 0.10, 0.40, 0, 0, 0.10, 0.40}},
      {"coffee table", {0, 0, 0.40, 0, 0, 0, 0.60}},
      {"tv", {0, 0.20, 0.15, 0, 0.05, 0.05, 0.55}},
      {"washing machine", {0.10, 0, 0, 0.85, 0.05, 0, 0}},
      {"dryer", {0, 0, 0, 0.95, 0.05, 0, 0}},
      {"ironing board", {0, 0.05, 0, 0.90, 0, 0, 0.05}},
      {"oven", {0, 0, 0, 0, 1.0, 0, 0}},
      {"refrigerator", {0, 0, 0, 0, 0.95, 0, 0.05}},
      {"plate", {0, 0, 0.05, 0, 0.80, 0, 0.15}},
      {"dining table", {0, 0, 0.25, 0, 0.45, 0, 0.30}},
      {"desk", {0, 0.15, 0, 0, 0, 0.80, 0.05}},
      {"computer", {0, 0.10, 0, 0, 0, 0.85, 0.05}},
      {"bookshelf", {0, 0.15, 0.10, 0, 0, 0.50, 0.25}},
      {"office chair", {0, 0.05, 0, 0, 0, 0.95, 0}},
      {"red chair", {0, 0.10, 0.30, 0, 0.20, 0.20, 0.20}},
      {"potted plant", {0.05, 0.10, 0.35, 0, 0.10, 0.10, 0.30}},
      {"coat rack", {0, 0.10, 0.80, 0.10, 0, 0, 0}},
      {"umbrella stand", {0, 0, 0.90, 0.10, 0, 0, 0}},
      {"shoe cabinet", {0, 0.10, 0.85, 0.05, 0, 0, 0}},
  };
  const RoomCategoryList cats = default_room_categories();
  CoOccurrencePrior prior;
  for (const auto& [cls, probs] : rows) {
    auto& row = prior.table[cls];
    for (std::size_t i = 0; i < probs.size(); ++i) row[cats[i]] = probs[i];
  }
  return prior;
}

struct GenerationParams {
  int width{48};
  int height{48};
  int rooms_min{6};
  int rooms_max{10};
  int min_room_side{4};
  int objects_per_room_min{2};
  int objects_per_room_max{5};
  RoomCategoryList categories = default_room_categories();
  CoOccurrencePrior prior = default_prior();
};

struct Scenario {
  GroundTruthMap map;
  std::vector<ObjectInstance> objects;
  CoOccurrencePrior prior;

  std::vector<const ObjectInstance*> instances_of(const std::string& cls) const {
    std::vector<const ObjectInstance*> out;
    for (const auto& o : objects)
      if (o.class_name == cls) out.push_back(&o);
    return out;
  }
};

/// Number of Free cells reachable from `start` through 4-connected Free cells.
inline std::size_t flood_fill_count(const GroundTruthMap& map, Cell start) {
  if (!map.is_free(start)) return 0;
  Grid<std::uint8_t> seen(map.width, map.height, 0);
  std::deque<Cell> queue{start};
  seen[start] = 1;
  std::size_t count = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    ++count;
    for (int k = 0; k < kNumDirections; k += 2) {
      const Cell n{c.x + kDirectionOffsets[k].first, c.y + kDirectionOffsets[k].second};
      if (map.is_free(n) && !seen[n]) {
        seen[n] = 1;
        queue.push_back(n);
      }
    }
  }
  return count;
}

inline std::size_t free_cell_count(const GroundTruthMap& map) {
  return static_cast<std::size_t>(std::count(map.terrain.data().begin(), map.terrain.data().end(), Terrain::Free));
}

namespace detail {

struct Rect {
  int x0, y0, x1, y1;  // inclusive
  int w() const { return x1 - x0 + 1; }
  int h() const { return y1 - y0 + 1; }
  long area() const { return static_cast<long>(w()) * h(); }
};

struct Split {
  bool vertical;  // wall is a column
  int pos;        // wall column or row
  int lo, hi;     // extent along the wall (inclusive)
};

}  // namespace detail

/// Binary-space-partition apartment: rectangular rooms split by one-cell
/// walls, one door per split so every room is reachable.
inline Scenario generate_scenario(std::uint64_t seed, const GenerationParams& params) {
  using detail::Rect;
  using detail::Split;
  if (params.rooms_min < 1 || params.rooms_max < params.rooms_min)
    throw std::invalid_argument("generate_scenario: invalid room count range");
  if (params.objects_per_room_min < 0 || params.objects_per_room_max < params.objects_per_room_min)
    throw std::invalid_argument("generate_scenario: invalid objects-per-room range");
  if (params.min_room_side < 1) throw std::invalid_argument("generate_scenario: min_room_side must be >= 1");
  if (params.width < params.min_room_side + 2 || params.height < params.min_room_side + 2)
    throw std::invalid_argument("generate_scenario: grid too small for a single room");
  params.prior.validate(params.categories);

  std::mt19937_64 rng(seed);
  const int target_rooms = uniform_int(rng, params.rooms_min, params.rooms_max);
  const int m = params.min_room_side;

  std::vector<Rect> leaves{{1, 1, params.width - 2, params.height - 2}};
  std::vector<Split> splits;
  while (static_cast<int>(leaves.size()) < target_rooms) {
    // Largest splittable leaf; earliest index on ties.
    int best = -1;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const Rect& r = leaves[i];
      if (r.w() < 2 * m + 1 && r.h() < 2 * m + 1) continue;
      if (best < 0 || r.area() > leaves[static_cast<std::size_t>(best)].area()) best = static_cast<int>(i);
    }
    if (best < 0) {
      if (static_cast<int>(leaves.size()) >= params.rooms_min) break;
      throw std::invalid_argument("generate_scenario: grid too small for requested room count");
    }
    const Rect r = leaves[static_cast<std::size_t>(best)];
    bool vertical;
    if (r.w() < 2 * m + 1) {
      vertical = false;
    } else if (r.h() < 2 * m + 1) {
      vertical = true;
    } else if (r.w() * 4 > r.h() * 5) {
      vertical = true;
    } else if (r.h() * 4 > r.w() * 5) {
      vertical = false;
    } else {
      vertical = uniform_index(rng, 2) == 0;
    }
    if (vertical) {
      const int pos = uniform_int(rng, r.x0 + m, r.x1 - m);
      leaves[static_cast<std::size_t>(best)] = {r.x0, r.y0, pos - 1, r.y1};
      leaves.push_back({pos + 1, r.y0, r.x1, r.y1});
      splits.push_back({true, pos, r.y0, r.y1});
    } else {
      const int pos = uniform_int(rng, r.y0 + m, r.y1 - m);
      leaves[static_cast<std::size_t>(best)] = {r.x0, r.y0, r.x1, pos - 1};
      leaves.push_back({r.x0, pos + 1, r.x1, r.y1});
      splits.push_back({false, pos, r.x0, r.x1});
    }
  }

  Scenario sc;
  sc.prior = params.prior;
  sc.map = GroundTruthMap(params.width, params.height, params.categories);
  GroundTruthMap& map = sc.map;

  // First rooms get distinct categories so small apartments are varied.
  std::vector<int> room_categories;
  std::vector<int> pool;
  const int wall = map.wall_index();
  for (int i = 0; i < static_cast<int>(params.categories.size()); ++i)
    if (i != wall) pool.push_back(i);
  std::vector<int> shuffled = pool;
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[uniform_index(rng, i)]);
  for (std::size_t i = 0; i < leaves.size(); ++i)
    room_categories.push_back(i < shuffled.size() ? shuffled[i] : pool[uniform_index(rng, pool.size())]);

  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const Rect& r = leaves[i];
    for (int y = r.y0; y <= r.y1; ++y)
      for (int x = r.x0; x <= r.x1; ++x) {
        map.terrain[{x, y}] = Terrain::Free;
        map.room[{x, y}] = room_categories[i];
      }
  }

  for (const Split& s : splits) {
    std::vector<Cell> candidates;
    for (int t = s.lo; t <= s.hi; ++t) {
      const Cell door = s.vertical ? Cell{s.pos, t} : Cell{t, s.pos};
      const Cell a = s.vertical ? Cell{s.pos - 1, t} : Cell{t, s.pos - 1};
      const Cell b = s.vertical ? Cell{s.pos + 1, t} : Cell{t, s.pos + 1};
      if (map.terrain[door] == Terrain::Occupied && map.is_free(a) && map.is_free(b)) candidates.push_back(door);
    }
    if (candidates.empty()) throw std::logic_error("generate_scenario: no door position on split wall");
    const Cell door = candidates[uniform_index(rng, candidates.size())];
    const Cell a = s.vertical ? Cell{s.pos - 1, door.y} : Cell{door.x, s.pos - 1};
    map.terrain[door] = Terrain::Free;
    map.room[door] = map.room[a];
  }

  int next_id = 0;
  const std::vector<std::string> classes = sc.prior.classes();
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const Rect& r = leaves[i];
    const std::string& cat = params.categories[static_cast<std::size_t>(room_categories[i])];
    std::vector<double> weights;
    for (const auto& cls : classes) weights.push_back(sc.prior.prob(cls, cat));
    const int n = uniform_int(rng, params.objects_per_room_min, params.objects_per_room_max);
    std::vector<Cell> cells;
    for (int y = r.y0; y <= r.y1; ++y)
      for (int x = r.x0; x <= r.x1; ++x) cells.push_back({x, y});
    for (int k = 0; k < n && !cells.empty(); ++k) {
      const std::size_t ci = uniform_index(rng, cells.size());
      const Cell c = cells[ci];
      cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(ci));
      sc.objects.push_back({next_id++, classes[weighted_index(rng, weights)], c});
    }
  }

  map.validate();
  return sc;
}

// --- JSON ---------------------------------------------------------------

inline std::vector<std::string> terrain_rows(const GroundTruthMap& map) {
  std::vector<std::string> rows;
  for (int y = 0; y < map.height; ++y) {
    std::string row;
    for (int x = 0; x < map.width; ++x) row += map.terrain[{x, y}] == Terrain::Free ? '.' : '#';
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json prior_to_json(const CoOccurrencePrior& prior) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [cls, row] : prior.table)
    for (const auto& [cat, p] : row) j[cls][cat] = p;
  return j;
}

inline CoOccurrencePrior prior_from_json(const nlohmann::json& j) {
  CoOccurrencePrior prior;
  for (const auto& [cls, row] : j.items())
    for (const auto& [cat, p] : row.items()) prior.table[cls][cat] = p.get<double>();
  return prior;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  const GroundTruthMap& map = sc.map;
  nlohmann::json j;
  j["width"] = map.width;
  j["height"] = map.height;
  j["resolution"] = map.resolution;
  j["terrain"] = terrain_rows(map);
  nlohmann::json grid = nlohmann::json::array();
  for (int y = 0; y < map.height; ++y) {
    nlohmann::json row = nlohmann::json::array();
    for (int x = 0; x < map.width; ++x) row.push_back(map.room[{x, y}]);
    grid.push_back(std::move(row));
  }
  j["rooms"] = {{"categories", map.categories}, {"grid", std::move(grid)}};
  nlohmann::json objs = nlohmann::json::array();
  for (const auto& o : sc.objects) objs.push_back({{"id", o.id}, {"class", o.class_name}, {"x", o.cell.x}, {"y", o.cell.y}});
  j["objects"] = std::move(objs);
  j["prior"] = prior_to_json(sc.prior);
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  const int w = j.at("width").get<int>();
  const int h = j.at("height").get<int>();
  sc.map = GroundTruthMap(w, h, j.at("rooms").at("categories").get<RoomCategoryList>());
  sc.map.resolution = j.value("resolution", 1.0);
  const auto rows = j.at("terrain").get<std::vector<std::string>>();
  const auto& grid = j.at("rooms").at("grid");
  if (static_cast<int>(rows.size()) != h || static_cast<int>(grid.size()) != h)
    throw std::invalid_argument("scenario: row count does not match height");
  for (int y = 0; y < h; ++y) {
    if (static_cast<int>(rows[static_cast<std::size_t>(y)].size()) != w ||
        static_cast<int>(grid[static_cast<std::size_t>(y)].size()) != w)
      throw std::invalid_argument("scenario: row length does not match width");
    for (int x = 0; x < w; ++x) {
      const char ch = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
      if (ch != '.' && ch != '#') throw std::invalid_argument("scenario: terrain must use '.' and '#'");
      sc.map.terrain[{x, y}] = ch == '.' ? Terrain::Free : Terrain::Occupied;
      sc.map.room[{x, y}] = grid[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)].get<int>();
    }
  }
  sc.map.validate();
  for (const auto& o : j.at("objects")) {
    ObjectInstance obj{o.at("id").get<int>(), o.at("class").get<std::string>(),
                       {o.at("x").get<int>(), o.at("y").get<int>()}};
    if (obj.class_name.empty()) throw std::invalid_argument("scenario: object with empty class");
    if (!sc.map.is_free(obj.cell)) throw std::invalid_argument("scenario: object not on a Free cell");
    sc.objects.push_back(std::move(obj));
  }
  sc.prior = prior_from_json(j.at("prior"));
  sc.prior.validate(sc.map.categories);
  return sc;
}

inline std::string scenario_to_string(const Scenario& sc) { return scenario_to_json(sc).dump(1) + "\n"; }

inline void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_string(sc);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read scenario file: " + path);
  return scenario_from_json(nlohmann::json::parse(in));
}

inline CoOccurrencePrior load_prior(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read prior file: " + path);
  return prior_from_json(nlohmann::json::parse(in));
}

}  // namespace lgr
