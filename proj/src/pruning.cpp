#include "prunetree/pruning.hpp"
#include "compensated.hpp"

#include <algorithm>
#include <cmath>

namespace prunetree {

std::string functional_name(FunctionalKind k) {
  switch (k) {
    case FunctionalKind::Height: return "height";
    case FunctionalKind::HortonOrder: return "horton";
    case FunctionalKind::Length: return "length";
    case FunctionalKind::LeafCount: return "leaves";
    case FunctionalKind::Custom: return "custom";
  }
  return "custom";
}

FunctionalKind parse_functional(const std::string& name) {
  if (name == "height") return FunctionalKind::Height;
  if (name == "horton") return FunctionalKind::HortonOrder;
  if (name == "length") return FunctionalKind::Length;
  if (name == "leaves") return FunctionalKind::LeafCount;
  throw DomainError("unknown functional: " + name);
}

double evaluate(const PruningFunctional& phi, const PlaneTree& t) {
  switch (phi.kind) {
    case FunctionalKind::Height: return height(t);
    case FunctionalKind::Length: return length(t);
    case FunctionalKind::HortonOrder: return std::max(horton_order(t) - 1, 0);
    case FunctionalKind::LeafCount: return static_cast<double>(num_leaves(t));
    case FunctionalKind::Custom: return phi.value(t);
  }
  return 0.0;
}

namespace {

std::optional<double> bisect_crossing(const PruningFunctional& phi, double child_value,
                                      const PlaneTree& sub, double len, double t) {
  if (child_value >= t) return 0.0;
  if (phi.edge_profile(child_value, sub, len) < t) return std::nullopt;
  double lo = 0.0, hi = len;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phi.edge_profile(child_value, sub, mid) >= t) hi = mid;
    else lo = mid;
  }
  return hi;
}

// Per-node data shared by all functionals.
struct Evaluation {
  std::vector<double> vertex;    // phi of the descendant tree of each vertex
  std::vector<double> interior;  // constant interior value (integer kinds)
  std::vector<double> below;     // total length strictly below each vertex
  std::vector<double> crossing;  // NaN when the edge is removed entirely
};

}  // namespace

std::optional<double> edge_crossing(const PruningFunctional& phi, double child_value,
                                    const PlaneTree& child_subtree, double edge_len, double t) {
  switch (phi.kind) {
    case FunctionalKind::Height:
    case FunctionalKind::Length: {
      if (child_value >= t) return 0.0;
      double s = t - child_value;
      if (s <= edge_len) return s;
      return std::nullopt;
    }
    case FunctionalKind::HortonOrder:
      if (child_value >= t) return 0.0;
      return std::nullopt;
    case FunctionalKind::LeafCount:
      if (std::max(child_value, 1.0) >= t) return 0.0;
      return std::nullopt;
    case FunctionalKind::Custom:
      return bisect_crossing(phi, child_value, child_subtree, edge_len, t);
  }
  return std::nullopt;
}

namespace {

Evaluation evaluate_nodes(const PlaneTree& t, const PruningFunctional& phi, double thr) {
  const std::size_t n = t.size();
  Evaluation e;
  e.vertex.assign(n, 0.0);
  e.below.assign(n, 0.0);
  e.crossing.assign(n, std::nan(""));
  auto order = t.preorder();
  // Subtree lengths are carried as unevaluated sums so large trees keep
  // full precision.
  std::vector<double> carry(n, 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId v = *it;
    CompensatedSum s;
    for (NodeId c : {t.left(v), t.right(v)}) {
      if (c == kNone) continue;
      s.add(e.below[c]);
      s.add(carry[c]);
      s.add(t.edge_length(c));
    }
    e.below[v] = s.sum;
    carry[v] = s.carry;
  }
  for (std::size_t v = 0; v < n; ++v) e.below[v] += carry[v];
  static const PlaneTree kNoSubtree;
  switch (phi.kind) {
    case FunctionalKind::Length:
      e.vertex = e.below;
      break;
    case FunctionalKind::Height:
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        NodeId v = *it;
        for (NodeId c : {t.left(v), t.right(v)})
          if (c != kNone) e.vertex[v] = std::max(e.vertex[v], e.vertex[c] + t.edge_length(c));
      }
      break;
    case FunctionalKind::HortonOrder: {
      // Strahler order of the vertex, minus one.
      auto k = strahler_orders(t);
      for (std::size_t v = 1; v < n; ++v) e.vertex[v] = std::max(k[v] - 1, 0);
      e.vertex[0] = evaluate(phi, t);
      break;
    }
    case FunctionalKind::LeafCount:
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        NodeId v = *it;
        for (NodeId c : {t.left(v), t.right(v)})
          if (c != kNone) e.vertex[v] += t.is_leaf(c) ? 1.0 : e.vertex[c];
      }
      break;
    case FunctionalKind::Custom: {
      if (!phi.value || !phi.edge_profile) throw DomainError("custom functional is incomplete");
      e.vertex[0] = phi.value(t);
      std::vector<PlaneTree> subs(n);
      for (std::size_t v = 1; v < n; ++v) {
        subs[v] = descendant_subtree(t, {static_cast<NodeId>(v), 0.0});
        e.vertex[v] = phi.value(subs[v]);
      }
      for (std::size_t v = 1; v < n; ++v) {
        double len = t.edge_length(static_cast<NodeId>(v));
        double mid = phi.edge_profile(e.vertex[v], subs[v], 0.5 * len);
        double top = phi.edge_profile(e.vertex[v], subs[v], len);
        double up = e.vertex[t.parent(static_cast<NodeId>(v))];
        double slack = 1e-12 * std::max({1.0, std::abs(top), std::abs(up)});
        if (e.vertex[v] > mid + slack || mid > top + slack || top > up + slack)
          throw DomainError("custom functional is not monotone");
        auto s = bisect_crossing(phi, e.vertex[v], subs[v], len, thr);
        if (s) e.crossing[v] = *s;
      }
      return e;
    }
  }
  for (std::size_t v = 1; v < n; ++v) {
    auto s = edge_crossing(phi, e.vertex[v], kNoSubtree, t.edge_length(static_cast<NodeId>(v)), thr);
    if (s) e.crossing[v] = *s;
  }
  return e;
}

}  // namespace

PruneResult prune(const PlaneTree& t, const PruningFunctional& phi, double thr) {
  if (!std::isfinite(thr) || thr < 0.0) throw DomainError("threshold must be non-negative");
  const Evaluation e = evaluate_nodes(t, phi, thr);
  auto kept_vertex = [&](NodeId v) { return v == 0 || e.vertex[v] >= thr; };
  auto kept_edge = [&](NodeId v) { return !std::isnan(e.crossing[v]); };
  auto piece = [&](NodeId c) {
    double len = t.edge_length(c);
    double val = phi.kind == FunctionalKind::Length ? e.below[c] + len
                 : phi.kind == FunctionalKind::Height ? e.vertex[c] + len
                 : phi.kind == FunctionalKind::LeafCount ? std::max(e.vertex[c], 1.0)
                 : phi.kind == FunctionalKind::Custom
                     ? phi.edge_profile(e.vertex[c], descendant_subtree(t, {c, 0.0}), len)
                     : e.vertex[c];
    return RemovedPiece{t.side_of(c), c, val, e.below[c] + len};
  };

  PruneResult out;
  out.tree.reserve(t.size());
  std::vector<std::pair<NodeId, NodeId>> tasks;

  auto split_children = [&](NodeId v, std::vector<NodeId>& keep, std::vector<RemovedPiece>& gone) {
    keep.clear();
    gone.clear();
    for (NodeId c : {t.left(v), t.right(v)}) {
      if (c == kNone) continue;
      if (kept_edge(c)) keep.push_back(c);
      else gone.push_back(piece(c));
    }
  };

  std::vector<NodeId> keep;
  std::vector<RemovedPiece> gone;
  split_children(0, keep, gone);
  if (!gone.empty())
    out.cuts.cuts.push_back({TreePoint::root(), TreePoint::root(), keep.empty(), gone});
  for (auto it = keep.rbegin(); it != keep.rend(); ++it) tasks.emplace_back(*it, 0);

  struct Pending {
    std::size_t cut;
    double from_top;
  };
  std::vector<Pending> pending;
  while (!tasks.empty()) {
    auto [c, parent] = tasks.back();
    tasks.pop_back();
    pending.clear();
    double len = 0.0;
    NodeId cur = c;
    NodeId node = kNone;
    while (true) {
      if (!kept_vertex(cur)) {
        double s = e.crossing[cur];
        len += t.edge_length(cur) - s;
        node = out.tree.add_child(parent, len);
        CutPoint cp{{node, 0.0}, {cur, s}, true, {}};
        if (s > 0.0) {
          RemovedPiece p = piece(cur);
          p.length = e.below[cur] + s;
          if (phi.kind == FunctionalKind::Length) p.phi = p.length;
          else if (phi.kind == FunctionalKind::Height) p.phi = e.vertex[cur] + s;
          out.cuts.cuts.push_back(std::move(cp));
          out.cuts.cuts.back().removed.push_back(p);
        } else {
          for (NodeId g : {t.left(cur), t.right(cur)})
            if (g != kNone) cp.removed.push_back(piece(g));
          if (!cp.removed.empty()) out.cuts.cuts.push_back(std::move(cp));
        }
        break;
      }
      len += t.edge_length(cur);
      split_children(cur, keep, gone);
      if (keep.size() == 1) {
        out.cuts.cuts.push_back({{kNone, 0.0}, {cur, 0.0}, false, gone});
        pending.push_back({out.cuts.cuts.size() - 1, len});
        cur = keep[0];
        continue;
      }
      node = out.tree.add_child(parent, len);
      if (keep.size() == 2) {
        tasks.emplace_back(keep[1], node);
        tasks.emplace_back(keep[0], node);
      } else if (!gone.empty()) {
        out.cuts.cuts.push_back({{node, 0.0}, {cur, 0.0}, true, gone});
      }
      break;
    }
    for (const Pending& p : pending) out.cuts.cuts[p.cut].point = {node, len - p.from_top};
  }
  return out;
}

PlaneTree horton_prune(const PlaneTree& t) {
  PlaneTree cut;
  cut.reserve(t.size());
  std::vector<std::pair<NodeId, NodeId>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [s, d] = stack.back();
    stack.pop_back();
    std::vector<NodeId> kids;
    for (NodeId c : {t.left(s), t.right(s)})
      if (c != kNone && !t.is_leaf(c)) kids.push_back(c);
    std::vector<NodeId> ids;
    for (NodeId c : kids) ids.push_back(cut.add_child(d, t.edge_length(c)));
    for (std::size_t i = kids.size(); i-- > 0;) stack.emplace_back(kids[i], ids[i]);
  }
  return series_reduce(cut);
}

double MassTree::total_mass() const {
  double s = 0.0;
  for (const auto& m : interior) s += m.mass;
  for (const auto& m : leaves) s += m.mass;
  return s;
}

MassTree prune_mass_equipped(const PlaneTree& t, double thr) {
  PruneResult pr = prune(t, PruningFunctional::tree_length(), thr);
  MassTree mt;
  mt.t = thr;
  mt.tree = std::move(pr.tree);
  std::vector<char> has_mass(mt.tree.size(), 0);
  for (const CutPoint& c : pr.cuts.cuts) {
    if (!c.at_leaf) {
      for (const RemovedPiece& p : c.removed)
        mt.interior.push_back({c.point, 2.0 * p.length, p.side});
      continue;
    }
    LeafMass lm;
    lm.leaf = c.point.edge;
    if (c.point.edge == 0) {
      for (const RemovedPiece& p : c.removed) lm.mass += 2.0 * p.length;
    } else if (c.orig.offset > 0.0) {
      lm.mass = 2.0 * thr;
    } else if (c.removed.size() == 2) {
      lm.is_double = true;
      const RemovedPiece& a = c.removed[0];
      const RemovedPiece& b = c.removed[1];
      lm.mass_left = 2.0 * (a.side == Side::Left ? a.length : b.length);
      lm.mass_right = 2.0 * (a.side == Side::Left ? b.length : a.length);
      lm.mass = lm.mass_left + lm.mass_right;
    } else {
      lm.mass = 2.0 * thr;
    }
    has_mass[lm.leaf] = 1;
    mt.leaves.push_back(lm);
  }
  for (NodeId v = 1; v < static_cast<NodeId>(mt.tree.size()); ++v)
    if (mt.tree.is_leaf(v) && !has_mass[v]) mt.leaves.push_back({v, false, 2.0 * thr, 0.0, 0.0});
  std::sort(mt.leaves.begin(), mt.leaves.end(),
            [](const LeafMass& a, const LeafMass& b) { return a.leaf < b.leaf; });
  return mt;
}

bool is_t_admissible(const MassTree& m, double tol) {
  double two_t = 2.0 * m.t;
  double slack = tol * std::max(1.0, two_t);
  for (const auto& im : m.interior)
    if (!(im.mass > 0.0 && im.mass < two_t + slack)) return false;
  for (const auto& lm : m.leaves) {
    if (lm.leaf == 0) continue;
    if (lm.is_double) {
      if (!(lm.mass_left + lm.mass_right > two_t - slack)) return false;
    } else if (std::abs(lm.mass - two_t) > slack) {
      return false;
    }
  }
  return true;
}

}  // namespace prunetree
