#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <stdexcept>

#include "lgr/mapping.hpp"
#include "lgr/ranking.hpp"

namespace lgr {

/// The inputs of one SPL term.
struct SplSample {
  bool success{false};
  double traveled{0.0};  // l_i
  double optimal{0.0};   // l_i*
};

/// One episode's contribution S * l* / max(l, l*). A success with
/// l = l* = 0 (target visible from the start) counts as 1.
inline double spl_term(const SplSample& s) {
  if (!(s.traveled >= 0.0) || !(s.optimal >= 0.0)) throw std::invalid_argument("spl: negative path length");
  if (!s.success) return 0.0;
  const double denom = std::max(s.traveled, s.optimal);
  if (denom == 0.0) return 1.0;
  return s.optimal / denom;
}

/// Success weighted by Path Length: (1/N) sum S_i * l_i* / max(l_i, l_i*).
inline double compute_spl(std::span<const SplSample> samples) {
  if (samples.empty()) throw std::invalid_argument("compute_spl: no episodes");
  double sum = 0.0;
  for (const auto& s : samples) sum += spl_term(s);
  return sum / static_cast<double>(samples.size());
}

/// Uniform choice over the current frontier list.
template <typename Rng>
int random_frontier_baseline(const FrontierList& list, Rng& rng) {
  if (list.empty()) throw EmptyFrontierList();
  return list.entries()[uniform_index(rng, list.size())].id;
}

/// Smallest last_distance; smallest id on ties.
inline int nearest_frontier_baseline(const FrontierList& list) {
  if (list.empty()) throw EmptyFrontierList();
  const FrontierEntry* best = nullptr;
  for (const auto& e : list.entries())
    if (!best || e.last_distance < best->last_distance || (e.last_distance == best->last_distance && e.id < best->id))
      best = &e;
  return best->id;
}

}  // namespace lgr
