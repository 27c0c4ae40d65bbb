#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "lgr/mapping.hpp"
#include "lgr/world.hpp"

namespace lgr {

inline const double kSqrt2 = std::sqrt(2.0);

struct Path {
  std::vector<Cell> cells;  // start..goal inclusive
  double length{0.0};

  bool empty() const { return cells.empty(); }
};

/// Length of a cell sequence with unit straight and sqrt(2) diagonal steps.
inline double path_length(const std::vector<Cell>& cells) {
  long straight = 0;
  long diagonal = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const int dx = std::abs(cells[i].x - cells[i - 1].x);
    const int dy = std::abs(cells[i].y - cells[i - 1].y);
    if (dx > 1 || dy > 1 || dx + dy == 0) throw std::invalid_argument("path_length: cells not 8-adjacent");
    (dx + dy == 2 ? diagonal : straight)++;
  }
  return static_cast<double>(straight) + static_cast<double>(diagonal) * kSqrt2;
}

inline double octile_distance(Cell a, Cell b) {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  return std::max(dx, dy) + (kSqrt2 - 1.0) * std::min(dx, dy);
}

enum class PlanMode { KnownFreeOnly, OptimisticUnknown };

/// Visits the legal 8-connected moves out of `c`. A diagonal move needs
/// both orthogonal cells it passes between to be traversable.
template <typename Passable, typename Visit>
void for_each_move(Cell c, const Passable& passable, Visit&& visit) {
  for (int k = 0; k < kNumDirections; ++k) {
    const auto [dx, dy] = kDirectionOffsets[k];
    const Cell n{c.x + dx, c.y + dy};
    if (!passable(n)) continue;
    const bool diagonal = dx != 0 && dy != 0;
    if (diagonal && !(passable(Cell{c.x + dx, c.y}) && passable(Cell{c.x, c.y + dy}))) continue;
    visit(n, diagonal ? kSqrt2 : 1.0);
  }
}

/// A* on a width x height grid under an arbitrary traversability predicate
/// (which must return false outside the grid).
template <typename Passable>
std::optional<Path> astar_grid(int width, int height, const Passable& passable, Cell start, Cell goal) {
  if (!passable(goal) || !passable(start)) return std::nullopt;
  const Grid<int> shape(width, height, 0);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(shape.size(), inf);
  std::vector<int> parent(shape.size(), -1);
  std::vector<bool> closed(shape.size(), false);
  // (f, h, insertion order, index): lower h first on equal f, FIFO after.
  using Item = std::tuple<double, double, long, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  long counter = 0;
  const std::size_t s = shape.index(start);
  g[s] = 0.0;
  open.emplace(octile_distance(start, goal), octile_distance(start, goal), counter++, s);
  while (!open.empty()) {
    const auto [f, h, order, i] = open.top();
    open.pop();
    if (closed[i]) continue;
    closed[i] = true;
    const Cell c = shape.cell_of(i);
    if (c == goal) break;
    for_each_move(c, passable, [&](Cell n, double step) {
      const std::size_t j = shape.index(n);
      if (closed[j]) return;
      const double ng = g[i] + step;
      if (ng < g[j] - 1e-12) {
        g[j] = ng;
        parent[j] = static_cast<int>(i);
        const double nh = octile_distance(n, goal);
        open.emplace(ng + nh, nh, counter++, j);
      }
    });
  }
  const std::size_t gi = shape.index(goal);
  if (!closed[gi]) return std::nullopt;
  Path path;
  for (int i = static_cast<int>(gi); i >= 0; i = parent[static_cast<std::size_t>(i)])
    path.cells.push_back(shape.cell_of(static_cast<std::size_t>(i)));
  std::reverse(path.cells.begin(), path.cells.end());
  path.length = path_length(path.cells);
  return path;
}

/// Shortest path on the belief. std::nullopt means NoPath.
inline std::optional<Path> astar(const BeliefMap& belief, Cell start, Cell goal, PlanMode mode) {
  if (!belief.is_free(start)) throw std::invalid_argument("astar: start is not Free in the belief");
  auto passable = [&](Cell c) {
    if (!belief.in_bounds(c)) return false;
    const CellState s = belief[c];
    return s == CellState::Free || (mode == PlanMode::OptimisticUnknown && s == CellState::Unknown);
  };
  return astar_grid(belief.width(), belief.height(), passable, start, goal);
}

/// Dijkstra distance from `start` to the nearest of `goals` over ground-truth
/// Free cells, with the same move rules as astar.
inline std::optional<double> shortest_distance_to_any(const GroundTruthMap& map, Cell start,
                                                      const std::vector<Cell>& goals) {
  if (!map.is_free(start)) return std::nullopt;
  Grid<std::uint8_t> is_goal(map.width, map.height, 0);
  for (const Cell& c : goals)
    if (map.is_free(c)) is_goal[c] = 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(map.terrain.size(), inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[map.terrain.index(start)] = 0.0;
  open.emplace(0.0, map.terrain.index(start));
  auto passable = [&](Cell c) { return map.is_free(c); };
  while (!open.empty()) {
    const auto [d, i] = open.top();
    open.pop();
    if (d > dist[i]) continue;
    const Cell c = map.terrain.cell_of(i);
    if (is_goal[c]) return d;
    for_each_move(c, passable, [&](Cell n, double step) {
      const std::size_t j = map.terrain.index(n);
      if (d + step < dist[j]) {
        dist[j] = d + step;
        open.emplace(dist[j], j);
      }
    });
  }
  return std::nullopt;
}

struct BumpEvent {
  Cell blocked_cell;
  Pose pose_before;
};

struct ExecutionResult {
  Pose pose;
  double traveled{0.0};
  std::optional<BumpEvent> bump;
  bool budget_exhausted{false};
  std::vector<Cell> visited;  // cells entered, in order
};

/// Drives along `path` on the ground truth. Stops in front of the first
/// Occupied cell (or the Occupied corner of a diagonal step) and reports it
/// as a bump. Stops before any step that would exceed `max_travel`.
inline ExecutionResult execute_path(const GroundTruthMap& world, const Pose& pose, const Path& path,
                                    double max_travel = std::numeric_limits<double>::infinity()) {
  ExecutionResult out;
  out.pose = pose;
  if (path.cells.empty()) return out;
  if (!(path.cells.front() == pose.cell)) throw std::invalid_argument("execute_path: path does not start at the pose");
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const Cell from = path.cells[i - 1];
    const Cell to = path.cells[i];
    const int dx = to.x - from.x;
    const int dy = to.y - from.y;
    if (std::abs(dx) > 1 || std::abs(dy) > 1 || (dx == 0 && dy == 0))
      throw std::invalid_argument("execute_path: consecutive cells are not 8-adjacent");
  }
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const Cell from = path.cells[i - 1];
    const Cell to = path.cells[i];
    const int dx = to.x - from.x;
    const int dy = to.y - from.y;
    const bool diagonal = dx != 0 && dy != 0;
    std::optional<Cell> blocked;
    if (!world.is_free(to)) {
      blocked = to;
    } else if (diagonal) {
      if (!world.is_free({to.x, from.y})) blocked = Cell{to.x, from.y};
      else if (!world.is_free({from.x, to.y})) blocked = Cell{from.x, to.y};
    }
    if (blocked) {
      out.bump = BumpEvent{*blocked, out.pose};
      return out;
    }
    const double step = diagonal ? kSqrt2 : 1.0;
    if (out.traveled + step > max_travel + 1e-9) {
      out.budget_exhausted = true;
      return out;
    }
    out.traveled += step;
    out.pose = {to, direction_of_step(dx, dy)};
    out.visited.push_back(to);
  }
  return out;
}

}  // namespace lgr
