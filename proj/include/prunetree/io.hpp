#pragma once

#include <json.hpp>

#include "prunetree/annihilation.hpp"
#include "prunetree/harris.hpp"
#include "prunetree/pruning.hpp"
#include "prunetree/tree.hpp"

namespace prunetree {

using Json = nlohmann::ordered_json;

// {"planted": bool, "nodes": [{"id", "parent", "side", "len"}]}; the root
// vertex is node 0 with a null parent, side and length 0.
Json tree_to_json(const PlaneTree& t);
PlaneTree tree_from_json(const Json& j);

Json cuts_to_json(const CutSet& c);
Json mass_tree_to_json(const MassTree& m);

// {"a", "b", "extrema"} for an initial potential.
Json potential_to_json(const Potential& p);
Potential potential_from_json(const Json& j);
// Evolved potentials add breakpoints, plateaus and sinks.
Json evolved_to_json(const EvolvedPotential& p);

Json shock_tree_to_json(const ShockTree& s);

}  // namespace prunetree
