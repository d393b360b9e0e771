#include "prunetree/harris.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace prunetree {

double Excursion::extent() const {
  double s = 0.0;
  for (std::size_t i = 1; i < extrema.size(); ++i) s += std::abs(extrema[i] - extrema[i - 1]);
  return s;
}

std::vector<double> Excursion::times() const {
  std::vector<double> t(extrema.size(), 0.0);
  for (std::size_t i = 1; i < extrema.size(); ++i)
    t[i] = t[i - 1] + std::abs(extrema[i] - extrema[i - 1]);
  return t;
}

void validate_excursion(const Excursion& x) {
  const auto& v = x.extrema;
  if (v.size() < 3 || v.size() % 2 == 0)
    throw DomainError("excursion needs an odd number (>= 3) of extrema");
  if (v.front() != 0.0 || v.back() != 0.0) throw DomainError("excursion must start and end at 0");
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] <= 0.0)
      throw DomainError("excursion must stay strictly positive inside");
    bool is_max = i % 2 == 1;
    if (is_max ? !(v[i] > v[i - 1] && v[i] > v[i + 1]) : !(v[i] < v[i - 1] && v[i] < v[i + 1]))
      throw DomainError("extrema do not alternate");
  }
}

Excursion harris_path(const PlaneTree& t) {
  if (t.is_empty()) throw DomainError("Harris path of the empty tree is undefined");
  if (!t.is_planted()) throw DomainError("Harris path needs a planted tree");
  t.validate(true);
  Excursion x;
  x.extrema.reserve(2 * t.size());
  x.extrema.push_back(0.0);
  auto depth = t.depths();
  // In-order traversal: left subtree, vertex, right subtree.
  std::vector<std::pair<NodeId, bool>> stack{{t.left(0), false}};
  while (!stack.empty()) {
    auto [v, expanded] = stack.back();
    stack.pop_back();
    if (t.is_leaf(v)) {
      x.extrema.push_back(depth[v]);
    } else if (expanded) {
      x.extrema.push_back(depth[v]);
    } else {
      stack.emplace_back(t.right(v), false);
      stack.emplace_back(v, true);
      stack.emplace_back(t.left(v), false);
    }
  }
  x.extrema.push_back(0.0);
  return x;
}

LevelSetTree level_set_tree_indexed(const Excursion& x) {
  validate_excursion(x);
  const auto& v = x.extrema;
  const std::size_t n = v.size() / 2;  // number of maxima
  const std::size_t m = v.size();
  // Min-Cartesian tree over the interior minima at even indices 2..m-3.
  // parent index in extremum coordinates; -1 marks the stem top.
  std::vector<long> par(m, -1), lch(m, -1), rch(m, -1);
  std::vector<long> stack;
  for (std::size_t k = 2; k + 1 < m; k += 2) {
    long last = -1;
    while (!stack.empty() && v[stack.back()] > v[k]) {
      last = stack.back();
      stack.pop_back();
    }
    if (!stack.empty() && v[stack.back()] == v[k])
      throw GenericityError("equal interior minima produce a non-binary vertex");
    if (last != -1) {
      lch[k] = last;
      par[last] = static_cast<long>(k);
    }
    if (!stack.empty()) {
      rch[stack.back()] = static_cast<long>(k);
      par[k] = stack.back();
    }
    stack.push_back(static_cast<long>(k));
  }
  long top = stack.empty() ? -1 : stack.front();
  // Attach maxima: maximum 2i+1 sits between minima 2i and 2i+2; its parent
  // is the higher of the two (boundary zeros are lower than everything).
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 2 * i + 1;
    long lm = k >= 3 ? static_cast<long>(k - 1) : -1;
    long rm = k + 3 <= m - 1 ? static_cast<long>(k + 1) : -1;
    long p;
    if (lm == -1) p = rm;
    else if (rm == -1) p = lm;
    else p = v[lm] > v[rm] ? lm : rm;
    par[k] = p;
    if (p != -1) {
      if (p == lm) rch[p] = static_cast<long>(k);
      else lch[p] = static_cast<long>(k);
    }
  }
  if (n == 1) top = 1;

  LevelSetTree out;
  out.node_of_extremum.assign(m, kNone);
  out.node_of_extremum[0] = 0;
  out.node_of_extremum[m - 1] = 0;
  out.tree.reserve(m);
  std::vector<std::pair<long, NodeId>> work{{top, 0}};
  while (!work.empty()) {
    auto [k, dparent] = work.back();
    work.pop_back();
    double parent_value = par[k] == -1 ? 0.0 : v[par[k]];
    NodeId id = out.tree.add_child(dparent, v[k] - parent_value);
    out.node_of_extremum[k] = id;
    if (k % 2 == 0) {
      // Left is popped first so it takes the left slot.
      work.emplace_back(rch[k], id);
      work.emplace_back(lch[k], id);
    }
  }
  return out;
}

PlaneTree level_set_tree(const Excursion& x) { return level_set_tree_indexed(x).tree; }

Excursion excursion_from_lengths(std::span<const double> rf) {
  if (rf.empty() || rf.size() % 2 == 0)
    throw DomainError("need an odd number of rise/fall lengths");
  Excursion x;
  x.extrema.reserve(rf.size() + 2);
  x.extrema.push_back(0.0);
  double level = 0.0;
  for (std::size_t i = 0; i < rf.size(); ++i) {
    if (!std::isfinite(rf[i]) || rf[i] <= 0.0) throw DomainError("lengths must be positive");
    level += i % 2 == 0 ? rf[i] : -rf[i];
    if (level <= 0.0) throw DomainError("excursion returns to zero early");
    x.extrema.push_back(level);
  }
  x.extrema.push_back(0.0);
  return x;
}

std::string excursion_to_csv(const Excursion& x) {
  std::ostringstream os;
  os << "t,value\n";
  auto t = x.times();
  char buf[64];
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t[i], x.extrema[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace prunetree
