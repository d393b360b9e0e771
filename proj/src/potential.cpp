#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "prunetree/annihilation.hpp"
#include "compensated.hpp"

namespace prunetree {

double Potential::b() const {
  CompensatedSum s(a);
  for (std::size_t i = 1; i < extrema.size(); ++i) s.add(std::abs(extrema[i] - extrema[i - 1]));
  return s.value();
}

std::vector<double> Potential::positions() const {
  std::vector<double> x(extrema.size(), a);
  CompensatedSum s(a);
  for (std::size_t i = 1; i < extrema.size(); ++i) {
    s.add(std::abs(extrema[i] - extrema[i - 1]));
    x[i] = s.value();
  }
  return x;
}

double Potential::value_at(double x) const {
  auto xs = positions();
  if (x <= xs.front()) return extrema.front();
  if (x >= xs.back()) return extrema.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
  double slope = extrema[k + 1] >= extrema[k] ? 1.0 : -1.0;
  return extrema[k] + slope * (x - xs[k]);
}

void validate_potential(const Potential& p) {
  const auto& e = p.extrema;
  if (e.size() < 3 || e.size() % 2 == 0) throw DomainError("potential needs an odd number (>= 3) of extrema");
  if (e.front() != 0.0 || e.back() != 0.0) throw DomainError("potential must vanish at both ends");
  if (!std::isfinite(p.a)) throw DomainError("left end must be finite");
  for (std::size_t i = 1; i + 1 < e.size(); ++i) {
    if (!std::isfinite(e[i]) || e[i] >= 0.0) throw DomainError("potential must be negative inside");
    bool is_min = i % 2 == 1;
    if (is_min ? !(e[i] < e[i - 1] && e[i] < e[i + 1]) : !(e[i] > e[i - 1] && e[i] > e[i + 1]))
      throw DomainError("potential extrema do not alternate");
  }
}

namespace {

// Basin of each interior maximum (even index): the interval around it on
// which the potential stays at or below the maximum's value.
std::vector<std::pair<double, double>> basins(const Potential& p) {
  const auto& e = p.extrema;
  auto xs = p.positions();
  const std::size_t m = e.size();
  std::vector<std::pair<double, double>> out(m, {0.0, 0.0});
  std::vector<std::size_t> stack;
  // Nearest strictly higher even index to the left.
  for (std::size_t k = 0; k < m; k += 2) {
    while (!stack.empty() && e[stack.back()] <= e[k]) stack.pop_back();
    if (k != 0 && k != m - 1) {
      std::size_t j = stack.back();
      out[k].first = xs[j] + (e[j] - e[k]);
    }
    stack.push_back(k);
  }
  stack.clear();
  for (std::size_t kk = m; kk-- > 0;) {
    if (kk % 2 != 0) continue;
    while (!stack.empty() && e[stack.back()] <= e[kk]) stack.pop_back();
    if (kk != 0 && kk != m - 1) {
      std::size_t j = stack.back();
      out[kk].second = xs[j] - (e[j] - e[kk]);
    }
    stack.push_back(kk);
  }
  return out;
}

}  // namespace

void check_genericity(const Potential& p) {
  validate_potential(p);
  std::vector<double> mins;
  for (std::size_t i = 1; i < p.extrema.size(); i += 2) mins.push_back(p.extrema[i]);
  std::sort(mins.begin(), mins.end());
  if (std::adjacent_find(mins.begin(), mins.end()) != mins.end())
    throw GenericityError("equal local minimum values");
  // Basins are nested or disjoint. Disjoint basins of equal length unfold
  // independently, so only overlapping ties are degenerate.
  auto bs = basins(p);
  std::vector<std::pair<double, double>> by_len;
  for (std::size_t k = 2; k + 1 < p.extrema.size(); k += 2)
    by_len.emplace_back(bs[k].second - bs[k].first, bs[k].first);
  std::sort(by_len.begin(), by_len.end());
  for (std::size_t i = 1; i < by_len.size(); ++i)
    if (by_len[i].first == by_len[i - 1].first && by_len[i].second - by_len[i - 1].second < by_len[i].first)
      throw GenericityError("equal basin lengths");
}

Potential potential_from_tree(const PlaneTree& t, double a) {
  Excursion h = harris_path(t);
  Potential p;
  p.a = a;
  p.extrema.reserve(h.extrema.size());
  for (double v : h.extrema) p.extrema.push_back(v == 0.0 ? 0.0 : -v);
  return p;
}

Excursion negated(const Potential& p) {
  Excursion x;
  x.extrema.reserve(p.extrema.size());
  for (double v : p.extrema) x.extrema.push_back(v == 0.0 ? 0.0 : -v);
  return x;
}

ShockTree shock_tree(const Potential& p) {
  check_genericity(p);
  const auto& e = p.extrema;
  const std::size_t m = e.size();
  auto xs = p.positions();
  auto bs = basins(p);

  std::vector<ShockVertex> rec(m);
  std::vector<long> lchild(m, -1), rchild(m, -1);
  // Linked list over current extrema, boundaries excluded.
  std::vector<long> prev(m, -1), next(m, -1);
  for (std::size_t k = 1; k + 1 < m; ++k) {
    prev[k] = static_cast<long>(k) - 1;
    next[k] = k + 2 < m ? static_cast<long>(k) + 1 : -1;
  }
  prev[1] = -1;
  // State of the sink currently sitting in each minimum slot.
  std::vector<long> slot_vertex(m, -1);
  std::vector<double> slot_virtual(m, 0.0), slot_level(m, 0.0), slot_center(m, 0.0);
  for (std::size_t k = 1; k < m; k += 2) {
    rec[k].extremum = k;
    rec[k].is_minimum = true;
    rec[k].x = xs[k];
    rec[k].level = e[k];
    rec[k].center = xs[k];
    slot_vertex[k] = static_cast<long>(k);
    slot_virtual[k] = e[k];
    slot_level[k] = e[k];
    slot_center[k] = xs[k];
  }

  std::vector<std::size_t> order;
  for (std::size_t k = 2; k + 1 < m; k += 2) order.push_back(k);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return bs[i].second - bs[i].first < bs[j].second - bs[j].first;
  });

  for (std::size_t k : order) {
    long l = prev[k], r = next[k];
    if (l < 0 || r < 0 || l % 2 == 0 || r % 2 == 0)
      throw std::logic_error("basin unfolding reached a non W-shaped basin");
    double level = e[k];
    double half = 0.5 * (bs[k].second - bs[k].first);
    ShockVertex& sv = rec[k];
    sv.extremum = k;
    sv.is_minimum = false;
    sv.x = xs[k];
    sv.level = level;
    sv.basin_left = bs[k].first;
    sv.basin_right = bs[k].second;
    sv.center = 0.5 * (bs[k].first + bs[k].second);
    sv.t_start = half;
    long vl = slot_vertex[l], vr = slot_vertex[r];
    rec[vl].v = level - slot_level[l];
    rec[vl].h = level - slot_virtual[r];
    rec[vr].v = level - slot_level[r];
    rec[vr].h = level - slot_virtual[l];
    double span = (level - slot_virtual[l]) + (level - slot_virtual[r]);
    if (std::abs(span - half) > 1e-9 * std::max(1.0, half))
      throw std::logic_error("basin unfolding lost track of sink timing");
    lchild[k] = vl;
    rchild[k] = vr;
    slot_vertex[l] = static_cast<long>(k);
    slot_virtual[l] = level - half;
    slot_level[l] = level;
    slot_center[l] = sv.center;
    next[l] = next[r];
    if (next[r] >= 0) prev[next[r]] = l;
  }

  long top = slot_vertex[1];
  rec[top].v = -rec[top].level;
  rec[top].h = 0.0;

  ShockTree out;
  out.tree.reserve(m);
  ShockVertex root;
  root.extremum = 0;
  root.is_minimum = false;
  root.x = 0.5 * (p.a + p.b());
  root.center = root.x;
  root.t_start = p.t_max();
  out.vertex.push_back(root);
  std::vector<std::pair<long, NodeId>> stack{{top, 0}};
  while (!stack.empty()) {
    auto [k, parent] = stack.back();
    stack.pop_back();
    NodeId id = out.tree.add_child(parent, rec[k].v + rec[k].h);
    out.vertex.push_back(rec[k]);
    if (!rec[k].is_minimum) {
      stack.emplace_back(rchild[k], id);
      stack.emplace_back(lchild[k], id);
    }
  }
  return out;
}

PlaneTree vertical_tree(const ShockTree& s) {
  PlaneTree t = s.tree;
  for (NodeId v = 1; v < static_cast<NodeId>(t.size()); ++v) t.set_edge_length(v, s.vertex[v].v);
  return t;
}

std::string shock_tree_svg(const Potential& p, const ShockTree& s) {
  const double w = 900.0, hgt = 500.0, pad = 20.0;
  double lo = *std::min_element(p.extrema.begin(), p.extrema.end());
  double a = p.a, b = p.b();
  auto X = [&](double x) { return pad + (x - a) / (b - a) * (w - 2 * pad); };
  auto Y = [&](double y) { return pad + (0.0 - y) / (0.0 - lo) * (hgt - 2 * pad); };
  std::ostringstream os;
  char buf[128];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << hgt << "\">\n";
  os << "<polyline fill=\"none\" stroke=\"#999\" stroke-width=\"1\" points=\"";
  auto xs = p.positions();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.3f,%.3f ", X(xs[i]), Y(p.extrema[i]));
    os << buf;
  }
  os << "\"/>\n";
  for (NodeId v = 1; v < static_cast<NodeId>(s.tree.size()); ++v) {
    const ShockVertex& sv = s.vertex[v];
    const ShockVertex& up = s.vertex[s.tree.parent(v)];
    double top = sv.level + sv.v;
    std::snprintf(buf, sizeof buf, "<polyline fill=\"none\" stroke=\"#000\" points=\"%.3f,%.3f %.3f,%.3f %.3f,%.3f\"/>\n",
                  X(sv.center), Y(sv.level), X(sv.center), Y(top), X(up.center), Y(top));
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

// First point beyond x, on the given side, where the potential climbs back
// to level m. Exact because all slopes are +-1.
double crossing(const Potential& p, const std::vector<double>& xs, double x, double m, bool leftwards) {
  const auto& e = p.extrema;
  if (leftwards) {
    long j = static_cast<long>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    for (; j >= 0; --j)
      if (e[j] >= m) return xs[j] + (e[j] - m);
    return xs.front();
  }
  auto j = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  for (; j < xs.size(); ++j)
    if (e[j] >= m) return xs[j] - (e[j] - m);
  return xs.back();
}

double sup_on(const Potential& p, const std::vector<double>& xs, double x, double y) {
  double m = std::max(p.value_at(x), p.value_at(y));
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] > x && xs[i] < y) m = std::max(m, p.extrema[i]);
  return m;
}

}  // namespace

double collision_time(const Potential& p, double x, double y) {
  if (x > y) std::swap(x, y);
  auto xs = p.positions();
  if (x < xs.front() || y > xs.back()) throw DomainError("points outside the potential's domain");
  if (x == y) return 0.0;
  double m = sup_on(p, xs, x, y);
  double l = p.value_at(x) >= m ? x : crossing(p, xs, x, m, true);
  double r = p.value_at(y) >= m ? y : crossing(p, xs, y, m, false);
  return 0.5 * (r - l);
}

double tree_distance(const Potential& p, double x, double y) {
  if (x > y) std::swap(x, y);
  auto xs = p.positions();
  if (x < xs.front() || y > xs.back()) throw DomainError("points outside the potential's domain");
  return 2.0 * sup_on(p, xs, x, y) - p.value_at(x) - p.value_at(y);
}

}  // namespace prunetree
