#include "prunetree/io.hpp"

#include <array>
#include <cmath>

namespace prunetree {

Json tree_to_json(const PlaneTree& t) {
  Json nodes = Json::array();
  nodes.push_back({{"id", 0}, {"parent", nullptr}, {"side", nullptr}, {"len", 0.0}});
  for (NodeId v : t.preorder()) {
    if (v == 0) continue;
    nodes.push_back({{"id", v},
                     {"parent", t.parent(v)},
                     {"side", side_name(t.side_of(v))},
                     {"len", t.edge_length(v)}});
  }
  return {{"planted", t.is_planted()}, {"nodes", nodes}};
}

PlaneTree tree_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("nodes")) throw DomainError("tree JSON needs a \"nodes\" array");
  const Json& nodes = j.at("nodes");
  std::vector<const Json*> by_id;
  for (const Json& n : nodes) {
    long id = n.at("id").get<long>();
    if (id < 0 || id > 100'000'000) throw DomainError("tree JSON node id out of range");
    if (static_cast<std::size_t>(id) >= by_id.size()) by_id.resize(id + 1, nullptr);
    if (by_id[id]) throw DomainError("duplicate node id in tree JSON");
    by_id[id] = &n;
  }
  if (by_id.empty() || !by_id[0] || !by_id[0]->at("parent").is_null())
    throw DomainError("tree JSON needs a root node 0 with a null parent");
  // Children per parent and side, then a preorder rebuild with fresh ids.
  std::vector<std::array<long, 2>> kids(by_id.size(), {-1, -1});
  for (std::size_t id = 1; id < by_id.size(); ++id) {
    if (!by_id[id]) continue;
    const Json& n = *by_id[id];
    long p = n.at("parent").get<long>();
    if (p < 0 || static_cast<std::size_t>(p) >= by_id.size() || !by_id[p])
      throw DomainError("tree JSON node has an unknown parent");
    int side = 0;
    if (n.contains("side") && !n.at("side").is_null()) {
      std::string s = n.at("side").get<std::string>();
      if (s != "L" && s != "R") throw DomainError("tree JSON side must be \"L\" or \"R\"");
      side = s == "R" ? 1 : 0;
    } else if (kids[p][0] >= 0) {
      side = 1;
    }
    if (kids[p][side] >= 0) throw DomainError("two children on the same side in tree JSON");
    kids[p][side] = static_cast<long>(id);
  }
  PlaneTree t;
  std::vector<std::pair<long, NodeId>> stack;
  for (int side = 1; side >= 0; --side)
    if (kids[0][side] >= 0) stack.emplace_back(kids[0][side], 0);
  std::size_t seen = 1;
  while (!stack.empty()) {
    auto [id, parent] = stack.back();
    stack.pop_back();
    ++seen;
    double len = by_id[id]->at("len").get<double>();
    const auto& pk = kids[by_id[id]->at("parent").get<long>()];
    if (pk[1] == id && pk[0] < 0) throw DomainError("a right child needs a left sibling");
    Side side = pk[1] == id ? Side::Right : Side::Left;
    NodeId v = t.add_child(parent, side, len);
    for (int s = 1; s >= 0; --s)
      if (kids[id][s] >= 0) stack.emplace_back(kids[id][s], v);
  }
  std::size_t listed = 0;
  for (const Json* n : by_id) listed += n != nullptr;
  if (seen != listed) throw DomainError("tree JSON is not connected");
  t.validate(false);
  if (j.contains("planted") && j.at("planted").get<bool>() != t.is_planted() && !t.is_empty())
    throw DomainError("tree JSON \"planted\" flag disagrees with the root degree");
  return t;
}

namespace {

Json point_json(TreePoint p) { return {{"edge", p.edge}, {"offset", p.offset}}; }

}  // namespace

Json cuts_to_json(const CutSet& c) {
  Json out = Json::array();
  for (const CutPoint& cp : c.cuts) {
    Json removed = Json::array();
    for (const RemovedPiece& r : cp.removed)
      removed.push_back({{"side", side_name(r.side)},
                         {"orig_child", r.orig_child},
                         {"phi", r.phi},
                         {"length", r.length}});
    out.push_back({{"point", point_json(cp.point)},
                   {"orig", point_json(cp.orig)},
                   {"at_leaf", cp.at_leaf},
                   {"removed", removed}});
  }
  return out;
}

Json mass_tree_to_json(const MassTree& m) {
  Json interior = Json::array(), leaves = Json::array();
  for (const InteriorMass& im : m.interior)
    interior.push_back({{"edge", im.point.edge},
                        {"offset", im.point.offset},
                        {"mass", im.mass},
                        {"orientation", side_name(im.orientation)}});
  for (const LeafMass& lm : m.leaves) {
    Json l = {{"leaf", lm.leaf}, {"mass", lm.mass}};
    if (lm.is_double) {
      l["mL"] = lm.mass_left;
      l["mR"] = lm.mass_right;
    }
    leaves.push_back(l);
  }
  return {{"t", m.t}, {"tree", tree_to_json(m.tree)}, {"interior", interior}, {"leaves", leaves}};
}

Json potential_to_json(const Potential& p) {
  return {{"a", p.a}, {"b", p.b()}, {"extrema", p.extrema}, {"plateaus", Json::array()},
          {"sinks", Json::array()}};
}

Potential potential_from_json(const Json& j) {
  Potential p;
  p.a = j.value("a", 0.0);
  p.extrema = j.at("extrema").get<std::vector<double>>();
  validate_potential(p);
  if (j.contains("b") && std::abs(j.at("b").get<double>() - p.b()) > 1e-9 * std::max(1.0, std::abs(p.b())))
    throw DomainError("potential JSON \"b\" disagrees with the unit-slope extrema");
  return p;
}

Json evolved_to_json(const EvolvedPotential& p) {
  Json pts = Json::array(), ext = Json::array(), pl = Json::array(), sk = Json::array();
  for (const auto& [x, y] : p.points) {
    pts.push_back({x, y});
    ext.push_back(y);
  }
  for (const Plateau& q : p.plateaus) pl.push_back({{"x0", q.x0}, {"len", q.len}});
  for (const SinkState& s : p.sinks) {
    Json o = {{"x", s.x}, {"mass", s.mass}};
    if (s.paired) {
      o["mL"] = s.mass_left;
      o["mR"] = s.mass_right;
    }
    sk.push_back(o);
  }
  double a = p.points.empty() ? 0.0 : p.points.front().first;
  double b = p.points.empty() ? 0.0 : p.points.back().first;
  return {{"t", p.t}, {"a", a}, {"b", b}, {"extrema", ext}, {"points", pts}, {"plateaus", pl}, {"sinks", sk}};
}

Json shock_tree_to_json(const ShockTree& s) {
  Json vs = Json::array();
  for (NodeId v = 1; v < static_cast<NodeId>(s.tree.size()); ++v) {
    const ShockVertex& x = s.vertex[v];
    Json o = {{"id", v},         {"parent", s.tree.parent(v)}, {"minimum", x.is_minimum},
              {"x", x.x},        {"level", x.level},           {"v", x.v},
              {"h", x.h},        {"center", x.center},         {"t_start", x.t_start}};
    if (!x.is_minimum) o["basin"] = {x.basin_left, x.basin_right};
    vs.push_back(o);
  }
  return {{"tree", tree_to_json(s.tree)}, {"vertices", vs}};
}

}  // namespace prunetree
