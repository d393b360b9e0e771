#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prunetree/tree.hpp"

namespace prunetree {

enum class FunctionalKind { Height, HortonOrder, Length, LeafCount, Custom };

// Monotone functional phi evaluated on descendant subtrees.
//
// For Custom, `value` receives the descendant tree of a vertex (stemless or
// empty) and `edge_profile(child_value, child_subtree, offset)` gives phi at
// the point `offset` above that vertex. Custom functionals are evaluated by
// materialising subtrees and are quadratic in the tree size.
struct PruningFunctional {
  FunctionalKind kind = FunctionalKind::Length;
  std::function<double(const PlaneTree&)> value;
  std::function<double(double, const PlaneTree&, double)> edge_profile;

  static PruningFunctional height() { return {FunctionalKind::Height, {}, {}}; }
  static PruningFunctional horton() { return {FunctionalKind::HortonOrder, {}, {}}; }
  static PruningFunctional tree_length() { return {FunctionalKind::Length, {}, {}}; }
  static PruningFunctional leaf_count() { return {FunctionalKind::LeafCount, {}, {}}; }
  static PruningFunctional custom(std::function<double(const PlaneTree&)> value,
                                  std::function<double(double, const PlaneTree&, double)> profile) {
    return {FunctionalKind::Custom, std::move(value), std::move(profile)};
  }
};

std::string functional_name(FunctionalKind k);
FunctionalKind parse_functional(const std::string& name);

// phi of an arbitrary tree (the descendant tree of its root).
double evaluate(const PruningFunctional& phi, const PlaneTree& t);

// Smallest offset s in [0, edge_len] above a vertex whose descendant tree has
// phi value `child_value` with phi(s) >= t, if any. `child_subtree` is only
// read for Custom functionals.
std::optional<double> edge_crossing(const PruningFunctional& phi, double child_value,
                                    const PlaneTree& child_subtree, double edge_len, double t);

// Where pruning removed something. `point` is on the pruned tree; `orig` is
// the same point on the input tree. A cut strictly inside an input edge
// removes one piece: the lower part of that edge with everything below it.
// A cut at an input vertex removes one or two child subtrees.
struct RemovedPiece {
  Side side = Side::Left;  // plane side of the removed part under the cut point
  NodeId orig_child = kNone;
  double phi = 0.0;        // phi of the removed planted piece
  double length = 0.0;     // its total length
};

struct CutPoint {
  TreePoint point;
  TreePoint orig;
  bool at_leaf = false;  // cut point is a leaf of the pruned tree
  std::vector<RemovedPiece> removed;
};

struct CutSet {
  std::vector<CutPoint> cuts;
};

struct PruneResult {
  PlaneTree tree;
  CutSet cuts;
};

// Keeps the root and every point whose descendant tree has phi >= t, then
// series-reduces.
PruneResult prune(const PlaneTree& t, const PruningFunctional& phi, double threshold);

// Removes all leaf edges, then series-reduces.
PlaneTree horton_prune(const PlaneTree& t);

// Mass-equipped tree obtained from length pruning. Masses use the
// annihilation convention: twice the length of the removed subtree, so a
// single leaf mass equals 2t.
struct InteriorMass {
  TreePoint point;
  double mass = 0.0;
  Side orientation = Side::Left;
};

struct LeafMass {
  NodeId leaf = kNone;  // the root when the pruned tree is empty
  bool is_double = false;
  double mass = 0.0;  // single mass, or mL + mR
  double mass_left = 0.0;
  double mass_right = 0.0;
};

struct MassTree {
  PlaneTree tree;
  double t = 0.0;
  std::vector<InteriorMass> interior;
  std::vector<LeafMass> leaves;

  double total_mass() const;
};

MassTree prune_mass_equipped(const PlaneTree& t, double threshold);

// Conditions (internal masses below 2t, single leaf masses equal to 2t,
// double masses summing above 2t) with relative tolerance `tol`.
bool is_t_admissible(const MassTree& m, double tol = 1e-9);

}  // namespace prunetree
