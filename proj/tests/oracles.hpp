#pragma once

// Reference implementations used only by tests. Each one is written from the
// definition, without calling the library routine it checks.

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lgr/lgr.hpp"

namespace oracle {

using lgr::Cell;

// Wedge index from the polar angle in degrees, y axis pointing down.
inline int wedge_by_angle(int dx, int dy) {
  double deg = std::atan2(static_cast<double>(dy), static_cast<double>(dx)) * 180.0 / M_PI;
  if (deg < -22.5) deg += 360.0;
  return static_cast<int>(std::floor((deg + 22.5) / 45.0)) % 8;
}

// Small-integer fractions compared by cross-multiplication.
struct Frac {
  long long num;
  long long den;  // > 0
};
inline bool lt(Frac a, Frac b) { return a.num * b.den < b.num * a.den; }
inline Frac make_frac(long long n, long long d) { return d < 0 ? Frac{-n, -d} : Frac{n, d}; }

// Does the segment between the centers of a and b pass through the open
// interior of cell c? Works in doubled coordinates so everything is integral.
inline bool crosses_interior(Cell a, Cell b, Cell c) {
  const long long ax = 2LL * a.x, ay = 2LL * a.y;
  const long long dx = 2LL * (b.x - a.x), dy = 2LL * (b.y - a.y);
  Frac lo{0, 1};
  Frac hi{1, 1};
  auto clip = [&](long long p, long long d, long long cmin, long long cmax) {
    // need cmin < p + t d < cmax
    if (d == 0) return cmin < p && p < cmax;
    Frac t1 = make_frac(cmin - p, d);
    Frac t2 = make_frac(cmax - p, d);
    if (lt(t2, t1)) std::swap(t1, t2);
    if (lt(lo, t1)) lo = t1;
    if (lt(t2, hi)) hi = t2;
    return true;
  };
  if (!clip(ax, dx, 2LL * c.x - 1, 2LL * c.x + 1)) return false;
  if (!clip(ay, dy, 2LL * c.y - 1, 2LL * c.y + 1)) return false;
  return lt(lo, hi);
}

// Line of sight by brute force over the bounding box, with the corner rule:
// a segment through a grid corner is blocked there only when both cells
// flanking the corner are walls and the corner is not one of b's own.
inline bool line_of_sight(const lgr::GroundTruthMap& m, Cell a, Cell b) {
  if (a == b) return true;
  const int x0 = std::min(a.x, b.x), x1 = std::max(a.x, b.x);
  const int y0 = std::min(a.y, b.y), y1 = std::max(a.y, b.y);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const Cell c{x, y};
      if (c == a || c == b) continue;
      if (!m.is_free(c) && crosses_interior(a, b, c)) return false;
    }
  // Corners sit at odd doubled coordinates.
  const long long dx = 2LL * (b.x - a.x), dy = 2LL * (b.y - a.y);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const long long px = 2LL * x + 1 - 2LL * a.x, py = 2LL * y + 1 - 2LL * a.y;
      if (px * dy != py * dx) continue;  // corner not on the line
      if (std::llabs(2LL * x + 1 - 2LL * b.x) == 1 && std::llabs(2LL * y + 1 - 2LL * b.y) == 1) continue;
      const Cell tl{x, y}, tr{x + 1, y}, bl{x, y + 1}, br{x + 1, y + 1};
      const bool down_right = (dx > 0) == (dy > 0);
      const Cell f1 = down_right ? tr : tl;
      const Cell f2 = down_right ? bl : br;
      if (!m.is_free(f1) && !m.is_free(f2)) return false;
    }
  return true;
}

inline std::set<Cell> visible_cells(const lgr::GroundTruthMap& m, Cell pose, int dir, int range) {
  std::set<Cell> out;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      const Cell c{x, y};
      if (c == pose) continue;
      const int dx = x - pose.x, dy = y - pose.y;
      if (dx * dx + dy * dy > range * range) continue;
      if (wedge_by_angle(dx, dy) != dir) continue;
      if (oracle::line_of_sight(m, pose, c)) out.insert(c);
    }
  return out;
}

inline bool is_frontier(const lgr::BeliefMap& b, Cell c) {
  if (b[c] != lgr::CellState::Free) return false;
  const Cell n[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
  for (const Cell& q : n)
    if (q.x >= 0 && q.y >= 0 && q.x < b.width() && q.y < b.height() && b[q] == lgr::CellState::Unknown) return true;
  return false;
}

// Plain Dijkstra over an explicit 8-neighbour graph without corner cutting.
// Counts straight and diagonal steps separately so the result is exact.
template <typename Passable>
std::optional<double> dijkstra(int w, int h, const Passable& ok, Cell s, Cell g) {
  if (!ok(s) || !ok(g)) return std::nullopt;
  struct Cost {
    long long straight, diagonal;
    double value() const { return static_cast<double>(straight) + static_cast<double>(diagonal) * std::sqrt(2.0); }
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(w * h), inf);
  std::vector<Cost> cost(static_cast<std::size_t>(w * h), Cost{0, 0});
  std::vector<bool> done(static_cast<std::size_t>(w * h), false);
  auto id = [&](Cell c) { return static_cast<std::size_t>(c.y * w + c.x); };
  dist[id(s)] = 0.0;
  for (;;) {
    std::size_t best = dist.size();
    for (std::size_t i = 0; i < dist.size(); ++i)
      if (!done[i] && dist[i] < inf && (best == dist.size() || dist[i] < dist[best])) best = i;
    if (best == dist.size()) return std::nullopt;
    done[best] = true;
    const Cell c{static_cast<int>(best % static_cast<std::size_t>(w)), static_cast<int>(best / static_cast<std::size_t>(w))};
    if (c == g) return cost[best].value();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const Cell n{c.x + dx, c.y + dy};
        if (!ok(n)) continue;
        if (dx && dy && (!ok(Cell{c.x + dx, c.y}) || !ok(Cell{c.x, c.y + dy}))) continue;
        Cost nc = cost[best];
        (dx && dy ? nc.diagonal : nc.straight)++;
        if (nc.value() < dist[id(n)] - 1e-12) {
          dist[id(n)] = nc.value();
          cost[id(n)] = nc;
        }
      }
  }
}

// Naive Bayes by direct products; ties to the first category in list order.
inline std::string classify(const std::vector<std::string>& objects, const lgr::CoOccurrencePrior& prior,
                            const lgr::RoomCategoryList& cats) {
  std::string best;
  double best_p = -1.0;
  for (const auto& c : cats) {
    if (c == "wall") continue;
    long double p = 1.0L;
    for (const auto& o : objects) p *= static_cast<long double>(prior.prob(o, c)) + 1e-6L;
    if (static_cast<double>(p) > best_p) {
      best_p = static_cast<double>(p);
      best = c;
    }
  }
  return best;
}

// Chi-square statistic of observed counts against a uniform expectation.
inline double chi_square_uniform(const std::vector<int>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double e = total / static_cast<double>(counts.size());
  double chi = 0.0;
  for (int c : counts) chi += (c - e) * (c - e) / e;
  return chi;
}

inline lgr::BeliefMap random_belief(std::mt19937_64& rng, int w, int h, double p_unknown, double p_occupied) {
  lgr::BeliefMap b(w, h);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double r = u(rng);
      if (r < p_unknown) continue;
      b.observe({x, y}, r < p_unknown + p_occupied ? lgr::CellState::Occupied : lgr::CellState::Free);
    }
  return b;
}

// A ground-truth map from rows of '.' and '#'; every Free cell is labelled
// with the first category.
inline lgr::GroundTruthMap map_from_rows(const std::vector<std::string>& rows) {
  lgr::GroundTruthMap m(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), lgr::default_room_categories());
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] != '#') {
        m.terrain[{x, y}] = lgr::Terrain::Free;
        m.room[{x, y}] = 0;
      }
  return m;
}

}  // namespace oracle
