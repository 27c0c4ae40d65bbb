#pragma once

#include <algorithm>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgr/common.hpp"

namespace lgr {

enum class Terrain : std::uint8_t { Free, Occupied };

using RoomCategoryList = std::vector<std::string>;

inline const std::string kWallCategory = "wall";

/// The eight candidate room labels offered to the ranker, in prompt order.
inline RoomCategoryList default_room_categories() {
  return {"bathroom", "bedroom", "reception room", "laundry room",
          "kitchen",  "home office", "living room", "wall"};
}

/// Hidden ground truth: terrain plus per-cell room label (index into categories).
struct GroundTruthMap {
  int width{0};
  int height{0};
  double resolution{1.0};
  Grid<Terrain> terrain;
  Grid<int> room;
  RoomCategoryList categories = default_room_categories();

  GroundTruthMap() = default;
  GroundTruthMap(int w, int h, RoomCategoryList cats = default_room_categories())
      : width(w), height(h), terrain(w, h, Terrain::Occupied), room(w, h, 0), categories(std::move(cats)) {
    room = Grid<int>(w, h, wall_index());
  }

  bool in_bounds(Cell c) const { return terrain.in_bounds(c); }
  bool is_free(Cell c) const { return in_bounds(c) && terrain[c] == Terrain::Free; }

  int wall_index() const {
    for (std::size_t i = 0; i < categories.size(); ++i)
      if (categories[i] == kWallCategory) return static_cast<int>(i);
    throw std::logic_error("category list has no \"wall\" entry");
  }

  const std::string& room_name(Cell c) const { return categories.at(static_cast<std::size_t>(room[c])); }

  /// Throws std::invalid_argument when the wall/category invariants fail.
  void validate() const {
    if (terrain.width() != width || terrain.height() != height || room.width() != width ||
        room.height() != height)
      throw std::invalid_argument("GroundTruthMap: layer size mismatch");
    const int wall = wall_index();
    for (std::size_t i = 0; i < terrain.size(); ++i) {
      const Cell c = terrain.cell_of(i);
      const int r = room[c];
      if (r < 0 || r >= static_cast<int>(categories.size()))
        throw std::invalid_argument("GroundTruthMap: room index outside category list");
      if ((terrain[c] == Terrain::Occupied) != (r == wall))
        throw std::invalid_argument("GroundTruthMap: wall label disagrees with terrain");
    }
  }
};

struct ObjectInstance {
  int id{0};
  std::string class_name;
  Cell cell;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

struct Pose {
  Cell cell;
  int heading{0};

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct SensorConfig {
  static constexpr double fov_degrees = 45.0;
  static constexpr int num_directions = kNumDirections;
  int max_range{12};
};
static_assert(SensorConfig::num_directions * SensorConfig::fov_degrees == 360.0);

struct VisibleCell {
  Cell cell;
  Terrain state{Terrain::Free};

  friend bool operator==(const VisibleCell&, const VisibleCell&) = default;
};

struct DetectedObject {
  int id{0};
  std::string class_name;

  friend bool operator==(const DetectedObject&, const DetectedObject&) = default;
};

struct ViewObservation {
  int direction_index{0};
  std::vector<VisibleCell> visible_cells;
  std::vector<DetectedObject> detected_objects;

  std::vector<std::string> object_classes() const {
    std::vector<std::string> out;
    out.reserve(detected_objects.size());
    for (const auto& d : detected_objects) out.push_back(d.class_name);
    return out;
  }
};

/// Which of the eight 45-degree wedges contains the nonzero offset (dx, dy).
///
/// Wedge k spans [k*45 - 22.5, k*45 + 22.5) degrees. Wedge boundaries have
/// irrational slope (tan 22.5 = sqrt(2) - 1), so no integer offset lies on
/// one and the test can be done exactly: the angle from the x axis is below
/// 22.5 degrees iff (|dy| + |dx|)^2 < 2 dx^2.
inline int wedge_of(int dx, int dy) {
  if (dx == 0 && dy == 0) throw std::invalid_argument("wedge_of: zero offset");
  const long long ax = std::llabs(dx);
  const long long ay = std::llabs(dy);
  const long long s = ax + ay;
  const int sx = (dx > 0) - (dx < 0);
  const int sy = (dy > 0) - (dy < 0);
  int ux = sx;
  int uy = sy;
  if (s * s < 2 * ax * ax) {
    uy = 0;  // near the x axis
  } else if (s * s < 2 * ay * ay) {
    ux = 0;  // near the y axis
  }
  return direction_of_step(ux, uy);
}

/// True when nothing Occupied blocks the segment between the two cell
/// centers. Cells the segment passes through (supercover) block, except the
/// endpoints. Where the segment crosses exactly through a cell corner, it is
/// blocked only if both flanking cells are Occupied, and never at a corner
/// of the target cell itself.
inline bool line_of_sight(const GroundTruthMap& map, Cell from, Cell to) {
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  const long long nx = std::llabs(dx);
  const long long ny = std::llabs(dy);
  const int sx = (dx > 0) - (dx < 0);
  const int sy = (dy > 0) - (dy < 0);
  auto blocked = [&](Cell c) { return !(c == to) && !(c == from) && map.terrain[c] == Terrain::Occupied; };

  Cell p = from;
  long long ix = 0;
  long long iy = 0;
  while (ix < nx || iy < ny) {
    const long long decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
    if (decision == 0) {
      const Cell a{p.x + sx, p.y};
      const Cell b{p.x, p.y + sy};
      p = {p.x + sx, p.y + sy};
      if (!(p == to) && blocked(a) && blocked(b)) return false;
      ++ix;
      ++iy;
    } else if (decision < 0) {
      p.x += sx;
      ++ix;
    } else {
      p.y += sy;
      ++iy;
    }
    if (blocked(p)) return false;
  }
  return true;
}

inline bool within_range(Cell from, Cell to, int max_range) {
  const long long dx = to.x - from.x;
  const long long dy = to.y - from.y;
  return dx * dx + dy * dy <= static_cast<long long>(max_range) * max_range;
}

inline void require_valid_pose(const GroundTruthMap& map, const Pose& pose) {
  if (!map.in_bounds(pose.cell)) throw std::invalid_argument("pose outside the map");
  if (map.terrain[pose.cell] == Terrain::Occupied) throw std::invalid_argument("pose on an Occupied cell");
  if (!valid_direction(pose.heading)) throw std::invalid_argument("pose heading outside 0..7");
}

/// Idealized directional sensor: cells of one 45-degree wedge within range
/// and line of sight, plus every object standing on a visible Free cell.
inline ViewObservation raycast_view(const GroundTruthMap& map, std::span<const ObjectInstance> objects,
                                    const Pose& pose, int direction_index, const SensorConfig& sensor) {
  if (!valid_direction(direction_index)) throw std::invalid_argument("raycast_view: invalid direction index");
  require_valid_pose(map, pose);
  if (sensor.max_range < 0) throw std::invalid_argument("raycast_view: negative range");

  ViewObservation view;
  view.direction_index = direction_index;
  const Cell o = pose.cell;
  const int r = sensor.max_range;
  for (int y = std::max(0, o.y - r); y <= std::min(map.height - 1, o.y + r); ++y) {
    for (int x = std::max(0, o.x - r); x <= std::min(map.width - 1, o.x + r); ++x) {
      const Cell c{x, y};
      if (c == o || !within_range(o, c, r)) continue;
      if (wedge_of(x - o.x, y - o.y) != direction_index) continue;
      if (!line_of_sight(map, o, c)) continue;
      view.visible_cells.push_back({c, map.terrain[c]});
    }
  }
  for (const auto& obj : objects) {
    if (obj.cell == o || !map.is_free(obj.cell)) continue;
    const int dx = obj.cell.x - o.x;
    const int dy = obj.cell.y - o.y;
    if (!within_range(o, obj.cell, r) || wedge_of(dx, dy) != direction_index) continue;
    if (!line_of_sight(map, o, obj.cell)) continue;
    view.detected_objects.push_back({obj.id, obj.class_name});
  }
  return view;
}

/// All eight views from one pose, indexed by direction.
inline std::vector<ViewObservation> panoramic_scan(const GroundTruthMap& map, std::span<const ObjectInstance> objects,
                                                   const Pose& pose, const SensorConfig& sensor) {
  std::vector<ViewObservation> views;
  views.reserve(kNumDirections);
  for (int k = 0; k < kNumDirections; ++k) views.push_back(raycast_view(map, objects, pose, k, sensor));
  return views;
}

/// Drops each detection independently with probability p.
template <typename Rng>
void apply_detection_dropout(ViewObservation& view, double p, Rng& rng) {
  if (p <= 0.0) return;
  std::erase_if(view.detected_objects, [&](const DetectedObject&) { return uniform_unit(rng) < p; });
}

/// Cells from which `target` is seen by some view (and `target` itself).
/// Line of sight is symmetric, so this is a 360 degree sweep from the target.
inline std::vector<Cell> cells_seeing(const GroundTruthMap& map, Cell target, const SensorConfig& sensor) {
  std::vector<Cell> out;
  if (!map.is_free(target)) return out;
  const int r = sensor.max_range;
  for (int y = std::max(0, target.y - r); y <= std::min(map.height - 1, target.y + r); ++y) {
    for (int x = std::max(0, target.x - r); x <= std::min(map.width - 1, target.x + r); ++x) {
      const Cell c{x, y};
      if (!map.is_free(c) || !within_range(target, c, r)) continue;
      if (c == target || line_of_sight(map, c, target)) out.push_back(c);
    }
  }
  return out;
}

}  // namespace lgr
