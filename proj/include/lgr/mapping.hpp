#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "lgr/world.hpp"

namespace lgr {

enum class CellState : std::uint8_t { Unknown, Free, Occupied };

/// Raised when an observation contradicts what the belief already holds.
/// With the idealized sensor this only happens on a sensor-model bug.
class ObservationConflict : public std::runtime_error {
 public:
  ObservationConflict(Cell c, CellState had, CellState got)
      : std::runtime_error("observation contradicts belief at (" + std::to_string(c.x) + "," +
                           std::to_string(c.y) + ")"),
        cell(c),
        previous(had),
        observed(got) {}
  Cell cell;
  CellState previous;
  CellState observed;
};

/// The robot's three-state occupancy grid.
class BeliefMap {
 public:
  BeliefMap() = default;
  BeliefMap(int width, int height) : cells_(width, height, CellState::Unknown) {}

  int width() const { return cells_.width(); }
  int height() const { return cells_.height(); }
  bool in_bounds(Cell c) const { return cells_.in_bounds(c); }
  CellState operator[](Cell c) const { return cells_[c]; }
  CellState at(Cell c) const { return cells_.at(c); }
  const Grid<CellState>& grid() const { return cells_; }

  bool is_free(Cell c) const { return in_bounds(c) && cells_[c] == CellState::Free; }
  bool is_unknown(Cell c) const { return in_bounds(c) && cells_[c] == CellState::Unknown; }

  /// Sets a cell to a known state. Known cells never change state.
  void observe(Cell c, CellState s) {
    if (s == CellState::Unknown) throw std::invalid_argument("BeliefMap::observe: cannot observe Unknown");
    CellState& cur = cells_.at(c);
    if (cur != CellState::Unknown && cur != s) throw ObservationConflict(c, cur, s);
    cur = s;
  }

  std::size_t count(CellState s) const {
    return static_cast<std::size_t>(std::count(cells_.data().begin(), cells_.data().end(), s));
  }

  friend bool operator==(const BeliefMap&, const BeliefMap&) = default;

 private:
  Grid<CellState> cells_;
};

inline CellState to_cell_state(Terrain t) { return t == Terrain::Free ? CellState::Free : CellState::Occupied; }

/// Writes every visible cell of `view` into `belief`. Validates the whole
/// view first so a rejected view leaves the belief untouched.
inline void integrate_observation(BeliefMap& belief, const ViewObservation& view) {
  for (const auto& vc : view.visible_cells) {
    if (!belief.in_bounds(vc.cell)) throw std::out_of_range("integrate_observation: cell out of bounds");
    const CellState cur = belief[vc.cell];
    const CellState got = to_cell_state(vc.state);
    if (cur != CellState::Unknown && cur != got) throw ObservationConflict(vc.cell, cur, got);
  }
  for (const auto& vc : view.visible_cells) belief.observe(vc.cell, to_cell_state(vc.state));
}

/// Frontier predicate: a Free cell with at least one 4-adjacent Unknown cell.
inline bool is_frontier(const BeliefMap& belief, Cell c) {
  if (!belief.is_free(c)) return false;
  return belief.is_unknown({c.x + 1, c.y}) || belief.is_unknown({c.x - 1, c.y}) ||
         belief.is_unknown({c.x, c.y + 1}) || belief.is_unknown({c.x, c.y - 1});
}

/// All frontier cells in row-major order.
inline std::vector<Cell> detect_frontiers(const BeliefMap& belief) {
  std::vector<Cell> out;
  for (int y = 0; y < belief.height(); ++y)
    for (int x = 0; x < belief.width(); ++x)
      if (is_frontier(belief, {x, y})) out.push_back({x, y});
  return out;
}

/// Row-major text snapshot: '?' Unknown, '.' Free, '#' Occupied.
inline std::string belief_to_text(const BeliefMap& belief) {
  std::string out;
  for (int y = 0; y < belief.height(); ++y) {
    for (int x = 0; x < belief.width(); ++x) {
      const CellState s = belief[{x, y}];
      out += s == CellState::Unknown ? '?' : s == CellState::Free ? '.' : '#';
    }
    out += '\n';
  }
  return out;
}

inline BeliefMap belief_from_text(const std::string& text) {
  std::vector<std::string> rows;
  std::string row;
  for (char ch : text) {
    if (ch == '\n') {
      rows.push_back(row);
      row.clear();
    } else if (ch != '\r') {
      row += ch;
    }
  }
  if (!row.empty()) rows.push_back(row);
  const int h = static_cast<int>(rows.size());
  const int w = h == 0 ? 0 : static_cast<int>(rows[0].size());
  BeliefMap belief(w, h);
  for (int y = 0; y < h; ++y) {
    if (static_cast<int>(rows[static_cast<std::size_t>(y)].size()) != w)
      throw std::invalid_argument("belief_from_text: ragged rows");
    for (int x = 0; x < w; ++x) {
      switch (rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)]) {
        case '?': break;
        case '.': belief.observe({x, y}, CellState::Free); break;
        case '#': belief.observe({x, y}, CellState::Occupied); break;
        default: throw std::invalid_argument("belief_from_text: unexpected character");
      }
    }
  }
  return belief;
}

struct FrontierEntry {
  int id{0};
  Cell cell;
  int direction_at_discovery{0};
  Cell viewpoint_at_discovery;
  double cumulative_score{0.0};
  int observation_count{1};
  double last_distance{0.0};
  // Refreshed on every update: whether the latest scan saw this cell, and in
  // which view. Only entries seen in the latest scan take part in its ranking.
  bool seen_in_last_scan{false};
  int last_seen_direction{0};
};

/// A frontier cell observed in the current scan, tagged with the view it fell in.
struct TaggedFrontier {
  Cell cell;
  int direction{0};
};

class FrontierList {
 public:
  const std::vector<FrontierEntry>& entries() const { return entries_; }
  std::vector<FrontierEntry>& entries() { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  int next_id() const { return next_id_; }

  const FrontierEntry* find(int id) const {
    for (const auto& e : entries_)
      if (e.id == id) return &e;
    return nullptr;
  }
  FrontierEntry* find(int id) {
    for (auto& e : entries_)
      if (e.id == id) return &e;
    return nullptr;
  }
  const FrontierEntry* find_cell(Cell c) const {
    for (const auto& e : entries_)
      if (e.cell == c) return &e;
    return nullptr;
  }
  FrontierEntry* find_cell(Cell c) {
    for (auto& e : entries_)
      if (e.cell == c) return &e;
    return nullptr;
  }

  bool remove(int id) {
    return std::erase_if(entries_, [id](const FrontierEntry& e) { return e.id == id; }) > 0;
  }

  /// Appends a fresh entry unless the cell is already listed; returns the id.
  int add(Cell cell, int direction, Cell viewpoint) {
    if (const auto* e = find_cell(cell)) return e->id;
    FrontierEntry e;
    e.id = next_id_++;
    e.cell = cell;
    e.direction_at_discovery = direction;
    e.viewpoint_at_discovery = viewpoint;
    e.last_seen_direction = direction;
    e.last_distance = euclidean(viewpoint, cell);
    entries_.push_back(e);
    return e.id;
  }

 private:
  std::vector<FrontierEntry> entries_;
  int next_id_{0};
};

/// Drops entries that are no longer frontiers, appends newly seen frontier
/// cells, and refreshes distances from `viewpoint`. Scores of surviving
/// entries are kept.
inline void update_frontier_list(FrontierList& list, const BeliefMap& belief,
                                 std::span<const TaggedFrontier> newly_visible, Cell viewpoint) {
  for (const auto& t : newly_visible) {
    if (!is_frontier(belief, t.cell)) throw std::invalid_argument("update_frontier_list: offered cell is not a frontier");
    if (!valid_direction(t.direction)) throw std::invalid_argument("update_frontier_list: invalid direction tag");
  }
  std::erase_if(list.entries(), [&](const FrontierEntry& e) { return !is_frontier(belief, e.cell); });
  for (auto& e : list.entries()) e.seen_in_last_scan = false;

  std::unordered_set<Cell, CellHash> offered;
  for (const auto& t : newly_visible) {
    if (!offered.insert(t.cell).second) continue;
    if (FrontierEntry* e = list.find_cell(t.cell)) {
      ++e->observation_count;
      e->seen_in_last_scan = true;
      e->last_seen_direction = t.direction;
    } else {
      list.find(list.add(t.cell, t.direction, viewpoint))->seen_in_last_scan = true;
    }
  }
  for (auto& e : list.entries()) e.last_distance = euclidean(viewpoint, e.cell);
}

/// Frontier cells that appear among a scan's visible cells, tagged with the
/// view direction that saw them. Call after the views have been integrated.
inline std::vector<TaggedFrontier> visible_frontiers(const BeliefMap& belief,
                                                     std::span<const ViewObservation> views) {
  std::vector<TaggedFrontier> out;
  for (const auto& v : views)
    for (const auto& vc : v.visible_cells)
      if (is_frontier(belief, vc.cell)) out.push_back({vc.cell, v.direction_index});
  return out;
}

}  // namespace lgr
