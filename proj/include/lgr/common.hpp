#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lgr {

/// Integer grid coordinate. x grows to the right (columns), y grows down (rows).
struct Cell {
  int x{0};
  int y{0};

  friend constexpr bool operator==(const Cell&, const Cell&) = default;
  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

struct CellHash {
  std::size_t operator()(const Cell& c) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
                                      static_cast<std::uint32_t>(c.y));
  }
};

inline double euclidean(Cell a, Cell b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline constexpr int kNumDirections = 8;

// Unit offsets for the eight headings. Heading k points at k*45 degrees,
// measured as atan2(dy, dx) in grid coordinates.
inline constexpr std::pair<int, int> kDirectionOffsets[kNumDirections] = {
    {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

inline constexpr bool valid_direction(int d) { return d >= 0 && d < kNumDirections; }

/// Direction index of a nonzero unit step (dx, dy in {-1,0,1}).
inline int direction_of_step(int dx, int dy) {
  for (int k = 0; k < kNumDirections; ++k) {
    if (kDirectionOffsets[k].first == dx && kDirectionOffsets[k].second == dy) return k;
  }
  throw std::invalid_argument("direction_of_step: not a unit step");
}

/// Dense row-major grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 0 || height < 0) throw std::invalid_argument("Grid: negative size");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }

  T& operator[](Cell c) { return data_[index(c)]; }
  const T& operator[](Cell c) const { return data_[index(c)]; }

  T& at(Cell c) {
    if (!in_bounds(c)) throw std::out_of_range("Grid: cell out of bounds");
    return data_[index(c)];
  }
  const T& at(Cell c) const {
    if (!in_bounds(c)) throw std::out_of_range("Grid: cell out of bounds");
    return data_[index(c)];
  }

  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_of(std::size_t i) const {
    return {static_cast<int>(i % width_), static_cast<int>(i / width_)};
  }

  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_{0};
  int height_{0};
  std::vector<T> data_;
};

// Deterministic, platform-independent sampling helpers. The std
// distributions are implementation-defined, which would make reports
// differ between standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combines seeds into one stream seed; order matters.
template <typename... Ts>
std::uint64_t derive_seed(std::uint64_t base, Ts... parts) {
  std::uint64_t s = splitmix64(base);
  ((s = splitmix64(s ^ static_cast<std::uint64_t>(parts))), ...);
  return s;
}

/// Uniform integer in [0, n) by rejection.
template <typename Rng>
std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    const std::uint64_t v = static_cast<std::uint64_t>(rng());
    if (v < limit) return static_cast<std::size_t>(v % bound);
  }
}

/// Uniform integer in [lo, hi].
template <typename Rng>
int uniform_int(Rng& rng, int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi - lo) + 1));
}

/// Uniform double in [0, 1).
template <typename Rng>
double uniform_unit(Rng& rng) {
  return static_cast<double>(static_cast<std::uint64_t>(rng()) >> 11) * 0x1.0p-53;
}

/// Samples an index proportional to nonnegative weights.
template <typename Rng>
std::size_t weighted_index(Rng& rng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::invalid_argument("weighted_index: zero total weight");
  double u = uniform_unit(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

}  // namespace lgr
