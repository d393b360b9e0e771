#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prunetree/error.hpp"

namespace prunetree {

using NodeId = std::int32_t;
inline constexpr NodeId kNone = -1;

enum class Side : std::uint8_t { Left, Right };

inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
inline const char* side_name(Side s) { return s == Side::Left ? "L" : "R"; }

// Rooted binary plane tree with edge lengths, stored as an arena.
//
// Node 0 is the root vertex. Every other node owns the edge to its parent.
// A root with one child is planted, with two children stemless, with none
// the tree is the empty tree. A single child is always stored as the left
// child. Reduced trees have no non-root vertex of degree 2.
class PlaneTree {
 public:
  PlaneTree();

  static PlaneTree empty() { return PlaneTree(); }

  NodeId root() const { return 0; }
  std::size_t size() const { return parent_.size(); }
  std::size_t num_edges() const { return parent_.size() - 1; }

  NodeId parent(NodeId v) const { return parent_[v]; }
  NodeId left(NodeId v) const { return left_[v]; }
  NodeId right(NodeId v) const { return right_[v]; }
  double edge_length(NodeId v) const { return length_[v]; }
  void set_edge_length(NodeId v, double len) { length_[v] = len; }

  int num_children(NodeId v) const {
    return (left_[v] != kNone ? 1 : 0) + (right_[v] != kNone ? 1 : 0);
  }
  bool is_leaf(NodeId v) const { return v != 0 && left_[v] == kNone && right_[v] == kNone; }
  bool is_empty() const { return left_[0] == kNone; }
  bool is_planted() const { return left_[0] != kNone && right_[0] == kNone; }
  bool is_stemless() const { return right_[0] != kNone; }

  // Side of v under its parent; an only child reports Left.
  Side side_of(NodeId v) const { return right_[parent_[v]] == v ? Side::Right : Side::Left; }
  NodeId sibling(NodeId v) const {
    NodeId p = parent_[v];
    return left_[p] == v ? right_[p] : left_[p];
  }

  // Appends a child below `parent`. The first child goes left, the second right.
  NodeId add_child(NodeId parent, double length);
  // Appends a child on an explicit side. Used by deserialisation.
  NodeId add_child(NodeId parent, Side side, double length);

  void reserve(std::size_t n);

  // Node ids in depth-first preorder, left before right.
  std::vector<NodeId> preorder() const;
  // Distance from the root vertex to each node.
  std::vector<double> depths() const;

  // Checks positivity and finiteness of edge lengths and, when `reduced`,
  // the absence of non-root degree-2 vertices. Throws DomainError.
  void validate(bool reduced = true) const;

 private:
  std::vector<NodeId> parent_;
  std::vector<NodeId> left_;
  std::vector<NodeId> right_;
  std::vector<double> length_;
};

// A point on a tree: the edge above `edge` at distance `offset` from its
// child endpoint. The root vertex is {root, 0}.
struct TreePoint {
  NodeId edge = 0;
  double offset = 0.0;

  static TreePoint root() { return {0, 0.0}; }
};

double length(const PlaneTree& t);
double height(const PlaneTree& t);
std::size_t num_leaves(const PlaneTree& t);

// Number of Horton prunings needed to reach the empty tree; one more for a
// stemless tree. The empty tree has order 0.
int horton_order(const PlaneTree& t);

// Strahler order of the planted subtree through the edge above each node
// (1 at leaves). Entry 0 holds the order of the root vertex itself.
std::vector<int> strahler_orders(const PlaneTree& t);

// Subtree of points at or below p, rooted at p. Interior points give a
// planted tree with stem length equal to the offset; vertices give a
// stemless tree, leaves give the empty tree.
PlaneTree descendant_subtree(const PlaneTree& t, TreePoint p);

// Merges chains through non-root degree-2 vertices into single edges.
PlaneTree series_reduce(const PlaneTree& t);

// Isometric embedding of `small` into the descendant tree of some point of
// `big`. Exhaustive search, intended for trees with at most a dozen edges.
bool is_embeddable(const PlaneTree& small, const PlaneTree& big, double tol = 1e-12);

// Plane-order structural equality with edge lengths compared to
// `rel_tol` relative (or `abs_tol` absolute) accuracy.
bool trees_equal(const PlaneTree& a, const PlaneTree& b, double rel_tol = 1e-9,
                 double abs_tol = 1e-12);

// Horizontal mirror image.
PlaneTree mirror(const PlaneTree& t);

std::string to_newick(const PlaneTree& t);

}  // namespace prunetree
