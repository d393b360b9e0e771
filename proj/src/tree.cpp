#include "prunetree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <utility>

namespace prunetree {

PlaneTree::PlaneTree() : parent_{kNone}, left_{kNone}, right_{kNone}, length_{0.0} {}

void PlaneTree::reserve(std::size_t n) {
  parent_.reserve(n);
  left_.reserve(n);
  right_.reserve(n);
  length_.reserve(n);
}

NodeId PlaneTree::add_child(NodeId parent, double length) {
  if (left_[parent] == kNone) return add_child(parent, Side::Left, length);
  return add_child(parent, Side::Right, length);
}

NodeId PlaneTree::add_child(NodeId parent, Side side, double length) {
  NodeId& slot = side == Side::Left ? left_[parent] : right_[parent];
  if (slot != kNone) throw DomainError("node already has a child on that side");
  auto id = static_cast<NodeId>(parent_.size());
  parent_.push_back(parent);
  left_.push_back(kNone);
  right_.push_back(kNone);
  length_.push_back(length);
  (side == Side::Left ? left_[parent] : right_[parent]) = id;
  return id;
}

std::vector<NodeId> PlaneTree::preorder() const {
  std::vector<NodeId> out;
  out.reserve(size());
  std::vector<NodeId> stack{0};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    out.push_back(v);
    if (right_[v] != kNone) stack.push_back(right_[v]);
    if (left_[v] != kNone) stack.push_back(left_[v]);
  }
  return out;
}

std::vector<double> PlaneTree::depths() const {
  std::vector<double> d(size(), 0.0);
  for (NodeId v : preorder())
    if (v != 0) d[v] = d[parent_[v]] + length_[v];
  return d;
}

void PlaneTree::validate(bool reduced) const {
  if (left_[0] == kNone && right_[0] != kNone) throw DomainError("root has a right child only");
  std::size_t seen = 0;
  for (NodeId v : preorder()) {
    ++seen;
    if (v == 0) continue;
    if (!std::isfinite(length_[v]) || length_[v] <= 0.0)
      throw DomainError("edge lengths must be positive and finite");
    NodeId p = parent_[v];
    if (left_[p] != v && right_[p] != v) throw DomainError("inconsistent parent link");
    if (left_[v] == kNone && right_[v] != kNone) throw DomainError("node has a right child only");
    if (reduced && num_children(v) == 1) throw DomainError("tree is not series-reduced");
  }
  if (seen != size()) throw DomainError("tree contains unreachable nodes");
}

double length(const PlaneTree& t) {
  double s = 0.0;
  for (NodeId v = 1; v < static_cast<NodeId>(t.size()); ++v) s += t.edge_length(v);
  return s;
}

double height(const PlaneTree& t) {
  auto d = t.depths();
  return *std::max_element(d.begin(), d.end());
}

std::size_t num_leaves(const PlaneTree& t) {
  std::size_t n = 0;
  for (NodeId v = 1; v < static_cast<NodeId>(t.size()); ++v)
    if (t.is_leaf(v)) ++n;
  return n;
}

std::vector<int> strahler_orders(const PlaneTree& t) {
  std::vector<int> k(t.size(), 0);
  auto order = t.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId v = *it;
    NodeId l = t.left(v), r = t.right(v);
    if (l == kNone) {
      k[v] = v == 0 ? 0 : 1;
    } else if (r == kNone) {
      k[v] = k[l];
    } else {
      k[v] = k[l] == k[r] ? k[l] + 1 : std::max(k[l], k[r]);
    }
  }
  return k;
}

int horton_order(const PlaneTree& t) {
  if (t.is_empty()) return 0;
  auto k = strahler_orders(t);
  if (t.is_planted()) return k[t.left(0)];
  return std::max(k[t.left(0)], k[t.right(0)]) + 1;
}

namespace {

// Copies the subtree strictly below `src_v` under `dst_parent`, keeping sides.
void copy_below(const PlaneTree& src, NodeId src_v, PlaneTree& dst, NodeId dst_parent) {
  std::vector<std::pair<NodeId, NodeId>> stack;
  auto push_children = [&](NodeId s, NodeId d) {
    if (src.right(s) != kNone) stack.emplace_back(src.right(s), d);
    if (src.left(s) != kNone) stack.emplace_back(src.left(s), d);
  };
  push_children(src_v, dst_parent);
  while (!stack.empty()) {
    auto [s, d] = stack.back();
    stack.pop_back();
    NodeId nd = dst.add_child(d, src.edge_length(s));
    push_children(s, nd);
  }
}

}  // namespace

PlaneTree descendant_subtree(const PlaneTree& t, TreePoint p) {
  if (p.edge < 0 || static_cast<std::size_t>(p.edge) >= t.size())
    throw DomainError("tree point refers to a missing edge");
  if (p.edge == 0) {
    if (p.offset != 0.0) throw DomainError("root point must have zero offset");
    return t;
  }
  double len = t.edge_length(p.edge);
  if (!(p.offset >= 0.0 && p.offset <= len)) throw DomainError("offset outside the edge");
  if (p.offset == len) {
    NodeId par = t.parent(p.edge);
    return descendant_subtree(t, {par, 0.0});
  }
  PlaneTree out;
  NodeId top = 0;
  if (p.offset > 0.0) top = out.add_child(0, p.offset);
  copy_below(t, p.edge, out, top);
  return out;
}

PlaneTree series_reduce(const PlaneTree& t) {
  PlaneTree out;
  out.reserve(t.size());
  std::vector<std::pair<NodeId, NodeId>> stack;
  if (t.right(0) != kNone) stack.emplace_back(t.right(0), 0);
  if (t.left(0) != kNone) stack.emplace_back(t.left(0), 0);
  while (!stack.empty()) {
    auto [c, d] = stack.back();
    stack.pop_back();
    double len = t.edge_length(c);
    NodeId cur = c;
    while (t.num_children(cur) == 1) {
      cur = t.left(cur);
      len += t.edge_length(cur);
    }
    NodeId nd = out.add_child(d, len);
    if (t.right(cur) != kNone) stack.emplace_back(t.right(cur), nd);
    if (t.left(cur) != kNone) stack.emplace_back(t.left(cur), nd);
  }
  return out;
}

namespace {

struct Embedder {
  const PlaneTree& s;
  const PlaneTree& b;
  double tol;

  // Small node u still needs `rem` of its edge, starting `off` above big vertex w.
  bool fit(NodeId u, double rem, NodeId w, double off) const {
    if (rem < off - tol) return s.is_leaf(u);
    if (std::abs(rem - off) <= tol) return fit_vertex(u, w);
    if (b.is_leaf(w)) return false;
    double r = rem - off;
    for (NodeId c : {b.left(w), b.right(w)})
      if (c != kNone && fit(u, r, c, b.edge_length(c))) return true;
    return false;
  }

  // Small vertex u sits exactly at big vertex w.
  bool fit_vertex(NodeId u, NodeId w) const {
    if (s.left(u) == kNone) return true;
    NodeId ul = s.left(u), ur = s.right(u);
    NodeId wl = b.left(w), wr = b.right(w);
    if (ur == kNone) {
      for (NodeId c : {wl, wr})
        if (c != kNone && fit(ul, s.edge_length(ul), c, b.edge_length(c))) return true;
      return false;
    }
    if (wr == kNone) return false;
    auto pair_fits = [&](NodeId x, NodeId y) {
      return fit(ul, s.edge_length(ul), x, b.edge_length(x)) &&
             fit(ur, s.edge_length(ur), y, b.edge_length(y));
    };
    return pair_fits(wl, wr) || pair_fits(wr, wl);
  }
};

}  // namespace

bool is_embeddable(const PlaneTree& small, const PlaneTree& big, double tol) {
  if (small.is_empty()) return true;
  if (big.is_empty()) return false;
  Embedder e{small, big, tol};
  auto depth = big.depths();
  if (small.is_planted()) {
    NodeId u = small.left(0);
    double stem = small.edge_length(u);
    if (small.is_leaf(u)) return height(big) >= stem - tol;
    for (NodeId z = 0; z < static_cast<NodeId>(big.size()); ++z)
      if (big.right(z) != kNone && depth[z] >= stem - tol && e.fit_vertex(u, z)) return true;
    return false;
  }
  for (NodeId z = 0; z < static_cast<NodeId>(big.size()); ++z)
    if (big.right(z) != kNone && e.fit_vertex(0, z)) return true;
  return false;
}

bool trees_equal(const PlaneTree& a, const PlaneTree& b, double rel_tol, double abs_tol) {
  if (a.size() != b.size()) return false;
  std::vector<std::pair<NodeId, NodeId>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [u, v] = stack.back();
    stack.pop_back();
    if (u != 0) {
      double x = a.edge_length(u), y = b.edge_length(v);
      double diff = std::abs(x - y);
      if (diff > abs_tol && diff > rel_tol * std::max(std::abs(x), std::abs(y))) return false;
    }
    if ((a.left(u) == kNone) != (b.left(v) == kNone)) return false;
    if ((a.right(u) == kNone) != (b.right(v) == kNone)) return false;
    if (a.left(u) != kNone) stack.emplace_back(a.left(u), b.left(v));
    if (a.right(u) != kNone) stack.emplace_back(a.right(u), b.right(v));
  }
  return true;
}

PlaneTree mirror(const PlaneTree& t) {
  PlaneTree out;
  out.reserve(t.size());
  std::vector<std::pair<NodeId, NodeId>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [s, d] = stack.back();
    stack.pop_back();
    NodeId l = t.left(s), r = t.right(s);
    if (r == kNone) {
      if (l != kNone) stack.emplace_back(l, out.add_child(d, t.edge_length(l)));
      continue;
    }
    NodeId nr = out.add_child(d, t.edge_length(r));
    NodeId nl = out.add_child(d, t.edge_length(l));
    stack.emplace_back(l, nl);
    stack.emplace_back(r, nr);
  }
  return out;
}

std::string to_newick(const PlaneTree& t) {
  std::function<void(NodeId, std::string&)> emit = [&](NodeId v, std::string& s) {
    if (t.left(v) != kNone) {
      s += '(';
      emit(t.left(v), s);
      if (t.right(v) != kNone) {
        s += ',';
        emit(t.right(v), s);
      }
      s += ')';
    }
    if (v == 0) {
      s += "root";
      return;
    }
    if (t.is_leaf(v)) s += "n" + std::to_string(v);
    char buf[40];
    std::snprintf(buf, sizeof buf, ":%.17g", t.edge_length(v));
    s += buf;
  };
  std::string s;
  emit(0, s);
  s += ';';
  return s;
}

}  // namespace prunetree
