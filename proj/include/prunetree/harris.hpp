#pragma once

#include <span>
#include <string>
#include <vector>

#include "prunetree/tree.hpp"

namespace prunetree {

// Piecewise-linear unit-slope excursion given by its local extrema, from the
// opening zero to the closing zero: 0, M_1, m_1, M_2, ..., M_n, 0.
struct Excursion {
  std::vector<double> extrema;

  std::size_t num_maxima() const { return extrema.size() / 2; }
  // Total horizontal extent when every segment has unit slope.
  double extent() const;
  // Breakpoint abscissae, starting at 0.
  std::vector<double> times() const;
};

// Throws DomainError unless the extrema alternate, start and end at 0 and
// stay strictly positive in between.
void validate_excursion(const Excursion& x);

// Harris path of a planted tree: depth-first contour at unit speed.
Excursion harris_path(const PlaneTree& t);

// Level-set tree of an excursion. Equal interior minima that would merge
// into a non-binary vertex raise GenericityError.
PlaneTree level_set_tree(const Excursion& x);

// Same, also returning the tree node attached to each extremum index.
// Maxima map to leaves, interior minima to internal vertices and the two
// boundary zeros to the root.
struct LevelSetTree {
  PlaneTree tree;
  std::vector<NodeId> node_of_extremum;
};
LevelSetTree level_set_tree_indexed(const Excursion& x);

// Builds an excursion from alternating rise and fall lengths, starting with
// a rise and ending with a rise; the closing fall is implied.
Excursion excursion_from_lengths(std::span<const double> rises_and_falls);

// CSV with header "t,value", one row per breakpoint.
std::string excursion_to_csv(const Excursion& x);

}  // namespace prunetree
