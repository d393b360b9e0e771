#include <algorithm>
#include <cmath>
#include <limits>

#include "prunetree/annihilation.hpp"
#include "compensated.hpp"

namespace prunetree {

namespace {

int slope_sign(double dx, double dy, double tol) {
  if (std::abs(dy) <= tol * std::max(1.0, dx)) return 0;
  return dy > 0.0 ? 1 : -1;
}

}  // namespace

void canonicalize(EvolvedPotential& p, double tol) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& q : p.points) {
    if (!pts.empty() && q.first - pts.back().first <= tol) {
      pts.back().second = q.second;
      continue;
    }
    if (pts.size() >= 2) {
      auto& a = pts[pts.size() - 2];
      auto& b = pts.back();
      int s1 = slope_sign(b.first - a.first, b.second - a.second, tol);
      int s2 = slope_sign(q.first - b.first, q.second - b.second, tol);
      if (s1 == s2) {
        b = q;
        continue;
      }
    }
    pts.push_back(q);
  }
  p.points = std::move(pts);
  std::vector<Plateau> pl;
  for (const Plateau& q : p.plateaus) {
    if (q.len <= tol) continue;
    if (!pl.empty() && std::abs(pl.back().x0 + pl.back().len - q.x0) <= tol) {
      pl.back().len += q.len;
      continue;
    }
    pl.push_back(q);
  }
  p.plateaus = std::move(pl);
  std::stable_sort(p.sinks.begin(), p.sinks.end(),
                   [](const SinkState& a, const SinkState& b) { return a.x < b.x; });
  // Sinks that met exactly at the sampled instant are one sink.
  std::vector<SinkState> sk;
  for (const SinkState& s : p.sinks) {
    if (!sk.empty() && s.x - sk.back().x <= tol * std::max(1.0, std::abs(s.x))) {
      sk.back().mass += s.mass;
      sk.back().paired = false;
      continue;
    }
    sk.push_back(s);
  }
  p.sinks = std::move(sk);
}

double potential_distance(const EvolvedPotential& a, const EvolvedPotential& b) {
  const double inf = std::numeric_limits<double>::infinity();
  if (a.points.size() != b.points.size() || a.plateaus.size() != b.plateaus.size() ||
      a.sinks.size() != b.sinks.size())
    return inf;
  double d = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    d = std::max({d, std::abs(a.points[i].first - b.points[i].first),
                  std::abs(a.points[i].second - b.points[i].second)});
  for (std::size_t i = 0; i < a.plateaus.size(); ++i)
    d = std::max({d, std::abs(a.plateaus[i].x0 - b.plateaus[i].x0),
                  std::abs(a.plateaus[i].len - b.plateaus[i].len)});
  for (std::size_t i = 0; i < a.sinks.size(); ++i)
    d = std::max({d, std::abs(a.sinks[i].x - b.sinks[i].x), std::abs(a.sinks[i].mass - b.sinks[i].mass)});
  return d;
}

EvolvedPotential mass_tree_to_potential(const MassTree& m, double x_start) {
  const PlaneTree& t = m.tree;
  const double two_t = 2.0 * m.t;
  EvolvedPotential out;
  out.t = m.t;
  CompensatedSum xs(x_start), ps(0.0);
  double x = x_start, psi = 0.0;
  out.points.emplace_back(x, psi);
  if (t.is_empty()) {
    double mass = 0.0;
    for (const LeafMass& lm : m.leaves) mass += lm.mass;
    out.sinks.push_back({x, mass});
    return out;
  }
  if (!t.is_planted()) throw DomainError("mass tree must be planted");

  std::vector<std::vector<const InteriorMass*>> down(t.size()), up(t.size());
  for (const InteriorMass& im : m.interior) {
    if (im.point.edge <= 0 || static_cast<std::size_t>(im.point.edge) >= t.size())
      throw DomainError("interior mass off the tree");
    (im.orientation == Side::Left ? down : up)[im.point.edge].push_back(&im);
  }
  for (std::size_t v = 0; v < t.size(); ++v) {
    std::sort(down[v].begin(), down[v].end(),
              [](auto* a, auto* b) { return a->point.offset > b->point.offset; });
    std::sort(up[v].begin(), up[v].end(),
              [](auto* a, auto* b) { return a->point.offset < b->point.offset; });
  }
  std::vector<const LeafMass*> leaf_mass(t.size(), nullptr);
  for (const LeafMass& lm : m.leaves)
    if (lm.leaf > 0 && static_cast<std::size_t>(lm.leaf) < t.size()) leaf_mass[lm.leaf] = &lm;

  auto move = [&](double dx, double dpsi) {
    xs.add(dx);
    ps.add(dpsi);
    x = xs.value();
    psi = ps.value();
    out.points.emplace_back(x, psi);
  };
  auto plateau = [&](double len) {
    if (len < 0.0) throw DomainError("mass tree is not t-admissible");
    if (len == 0.0) return;
    out.plateaus.push_back({x, len});
    move(len, 0.0);
  };

  // phase 0: descend the edge, 1: after the left subtree, 2: ascend.
  std::vector<std::pair<NodeId, int>> stack{{t.left(0), 0}};
  while (!stack.empty()) {
    auto [v, phase] = stack.back();
    stack.pop_back();
    double len = t.edge_length(v);
    if (phase == 0) {
      double at = len;
      for (const InteriorMass* im : down[v]) {
        move(at - im->point.offset, -(at - im->point.offset));
        at = im->point.offset;
        out.sinks.push_back({x, im->mass});
        plateau(im->mass);
      }
      move(at, -at);
      if (t.is_leaf(v)) {
        const LeafMass* lm = leaf_mass[v];
        if (lm && lm->is_double) {
          out.sinks.push_back({x, lm->mass_left, true, lm->mass_left, lm->mass_right});
          plateau(lm->mass_left + lm->mass_right - two_t);
          out.sinks.push_back({x, lm->mass_right, true, lm->mass_left, lm->mass_right});
        } else {
          out.sinks.push_back({x, lm ? lm->mass : two_t});
        }
        stack.emplace_back(v, 2);
      } else {
        stack.emplace_back(v, 1);
        stack.emplace_back(t.left(v), 0);
      }
    } else if (phase == 1) {
      plateau(two_t);
      stack.emplace_back(v, 2);
      stack.emplace_back(t.right(v), 0);
    } else {
      double at = 0.0;
      for (const InteriorMass* im : up[v]) {
        move(im->point.offset - at, im->point.offset - at);
        at = im->point.offset;
        plateau(im->mass);
        out.sinks.push_back({x, im->mass});
      }
      move(len - at, len - at);
    }
  }
  out.points.back().second = 0.0;
  canonicalize(out);
  return out;
}

MassTree potential_to_mass_tree(const EvolvedPotential& p, double tol) {
  MassTree mt;
  mt.t = p.t;
  const double two_t = 2.0 * p.t;
  if (p.points.size() < 2 || p.points.back().first - p.points.front().first <= tol) {
    double mass = 0.0;
    for (const SinkState& s : p.sinks) mass += s.mass;
    mt.leaves.push_back({0, false, mass, 0.0, 0.0});
    return mt;
  }
  // Runs in the H = -psi orientation: +1 rising, -1 falling, 0 flat.
  struct Run {
    int dir;
    double x0, len;
  };
  std::vector<Run> runs;
  for (std::size_t i = 1; i < p.points.size(); ++i) {
    double dx = p.points[i].first - p.points[i - 1].first;
    double dh = -(p.points[i].second - p.points[i - 1].second);
    if (dx <= 0.0) continue;
    int dir = slope_sign(dx, dh, tol);
    if (dir != 0 && std::abs(std::abs(dh) - dx) > tol * std::max(1.0, dx))
      throw DomainError("potential slopes must be 0 or +-1");
    if (!runs.empty() && runs.back().dir == dir) runs.back().len += dx;
    else runs.push_back({dir, p.points[i - 1].first, dx});
  }
  if (runs.front().dir != 1 || runs.back().dir != -1)
    throw DomainError("potential must start downwards and end upwards");

  Excursion ex;
  ex.extrema.push_back(0.0);
  struct Flat {
    std::size_t segment;  // index of the extremum preceding the flat
    double height, x0, len;
    int before, after;
  };
  std::vector<Flat> flats;
  double h = 0.0;
  int last_dir = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Run& r = runs[i];
    if (r.dir == 0) {
      int after = i + 1 < runs.size() ? runs[i + 1].dir : 0;
      flats.push_back({ex.extrema.size() - 1, h, r.x0, r.len, last_dir, after});
      continue;
    }
    if (r.dir == last_dir) {
      h += r.dir * r.len;
      ex.extrema.back() = h;
    } else {
      h += r.dir * r.len;
      ex.extrema.push_back(h);
    }
    last_dir = r.dir;
  }
  ex.extrema.back() = 0.0;
  // Excursion extrema are recorded at the end of each run; the first entry
  // after 0 must be a maximum.
  LevelSetTree ls = level_set_tree_indexed(ex);
  mt.tree = ls.tree;
  std::vector<double> value(mt.tree.size(), 0.0);
  for (std::size_t k = 0; k < ex.extrema.size(); ++k)
    if (ls.node_of_extremum[k] > 0) value[ls.node_of_extremum[k]] = ex.extrema[k];

  std::vector<const Flat*> leaf_flat(mt.tree.size(), nullptr);
  for (const Flat& f : flats) {
    if (f.before == 0 || f.after == 0) throw DomainError("plateau at the domain boundary");
    if (f.before == 1 && f.after == -1) {
      // f.segment is the index of the maximum the flat sits on.
      leaf_flat[ls.node_of_extremum[f.segment]] = &f;
    } else if (f.before == -1 && f.after == 1) {
      if (std::abs(f.len - two_t) > tol * std::max(1.0, two_t))
        throw DomainError("plateau at a local maximum must have length 2t");
    } else {
      // Monotone part: rising flats lie before maximum segment+1, falling
      // ones after maximum segment.
      std::size_t max_idx = f.before == 1 ? f.segment + 1 : f.segment;
      NodeId v = ls.node_of_extremum[max_idx];
      while (mt.tree.parent(v) != 0 && value[mt.tree.parent(v)] >= f.height) v = mt.tree.parent(v);
      double offset = value[v] - f.height;
      mt.interior.push_back({{v, offset}, f.len, f.before == 1 ? Side::Left : Side::Right});
    }
  }
  auto sink_at = [&](double x) -> const SinkState* {
    for (const SinkState& s : p.sinks)
      if (std::abs(s.x - x) <= tol * std::max(1.0, std::abs(x))) return &s;
    return nullptr;
  };
  for (NodeId v = 1; v < static_cast<NodeId>(mt.tree.size()); ++v) {
    if (!mt.tree.is_leaf(v)) continue;
    const Flat* f = leaf_flat[v];
    if (!f) {
      mt.leaves.push_back({v, false, two_t, 0.0, 0.0});
      continue;
    }
    LeafMass lm{v, true, f->len + two_t, 0.0, 0.0};
    const SinkState* l = sink_at(f->x0);
    const SinkState* r = sink_at(f->x0 + f->len);
    if (l && r && std::abs(l->mass + r->mass - lm.mass) <= tol * std::max(1.0, lm.mass)) {
      lm.mass_left = l->mass;
      lm.mass_right = r->mass;
    } else {
      lm.mass_left = lm.mass_right = 0.5 * lm.mass;
    }
    mt.leaves.push_back(lm);
  }
  return mt;
}

EvolvedPotential evolve(const Potential& p, double t) {
  validate_potential(p);
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be non-negative");
  double tm = p.t_max();
  PlaneTree tree = level_set_tree(negated(p));
  MassTree mt = prune_mass_equipped(tree, std::min(t, tm));
  mt.t = t;
  return mass_tree_to_potential(mt, p.a + std::min(t, tm));
}

}  // namespace prunetree
