#pragma once

#include <vector>

#include "prunetree/rng.hpp"
#include "prunetree/tree.hpp"

namespace testutil {

using prunetree::NodeId;
using prunetree::PlaneTree;

inline PlaneTree single_edge(double len) {
  PlaneTree t;
  t.add_child(0, len);
  return t;
}

// Planted Y: stem c, left leaf a, right leaf b.
inline PlaneTree y_tree(double a, double b, double c) {
  PlaneTree t;
  NodeId s = t.add_child(0, c);
  t.add_child(s, a);
  t.add_child(s, b);
  return t;
}

// Planted perfect binary tree with `depth` levels of branching, unit edges.
inline PlaneTree perfect_tree(int depth) {
  PlaneTree t;
  std::vector<NodeId> level{t.add_child(0, 1.0)};
  for (int d = 0; d < depth; ++d) {
    std::vector<NodeId> next;
    for (NodeId v : level) {
      next.push_back(t.add_child(v, 1.0));
      next.push_back(t.add_child(v, 1.0));
    }
    level = next;
  }
  return t;
}

// Random planted reduced tree with at most `max_leaves` leaves and lengths in (0.1, 2).
inline PlaneTree random_small_tree(prunetree::StreamRng& rng, int max_leaves) {
  PlaneTree t;
  std::vector<NodeId> open{t.add_child(0, 0.1 + 1.9 * rng.uniform())};
  int leaves = 1;
  while (!open.empty()) {
    std::size_t k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(open.size()));
    NodeId v = open[k];
    open.erase(open.begin() + static_cast<long>(k));
    if (leaves < max_leaves && rng.coin()) {
      open.push_back(t.add_child(v, 0.1 + 1.9 * rng.uniform()));
      open.push_back(t.add_child(v, 0.1 + 1.9 * rng.uniform()));
      ++leaves;
    }
  }
  return t;
}

}  // namespace testutil
