#include <doctest.h>

#include <cmath>
#include <functional>

#include "helpers.hpp"
#include "prunetree/gw.hpp"
#include "prunetree/pruning.hpp"

using namespace prunetree;
using namespace testutil;

namespace {

PlaneTree prune_tree(const PlaneTree& t, const PruningFunctional& phi, double thr) {
  return prune(t, phi, thr).tree;
}

// Planted tree of order 3: a perfect depth-2 tree with one extra cherry.
PlaneTree order_three_tree() {
  PlaneTree t = perfect_tree(2);
  NodeId leaf = kNone;
  for (NodeId v = 1; v < static_cast<NodeId>(t.size()); ++v)
    if (t.is_leaf(v)) leaf = v;
  t.add_child(leaf, 0.5);
  t.add_child(leaf, 0.7);
  return t;
}

}  // namespace

TEST_SUITE("pruning") {

TEST_CASE("length pruning of the Y tree") {
  auto y = y_tree(1, 2, 3);
  CHECK(trees_equal(prune_tree(y, PruningFunctional::tree_length(), 1.5), single_edge(3.5)));
  for (double t : {2.0, 2.5, 3.0})
    CHECK(trees_equal(prune_tree(y, PruningFunctional::tree_length(), t), single_edge(3.0)));
  CHECK(trees_equal(prune_tree(y, PruningFunctional::tree_length(), 0.0), y, 0, 0));
  CHECK(trees_equal(prune_tree(y, PruningFunctional::tree_length(), 0.5), y_tree(0.5, 1.5, 3)));
  CHECK(trees_equal(prune_tree(y, PruningFunctional::tree_length(), 4.0), single_edge(2.0)));
  CHECK(prune_tree(y, PruningFunctional::tree_length(), 6.5).is_empty());
}

TEST_CASE("length pruning is not a semigroup") {
  auto y = y_tree(1, 2, 3);
  auto phi = PruningFunctional::tree_length();
  auto two_step = prune_tree(prune_tree(y, phi, 1.5), phi, 1.0);
  auto one_step = prune_tree(y, phi, 2.5);
  CHECK(trees_equal(two_step, single_edge(2.5)));
  CHECK(trees_equal(one_step, single_edge(3.0)));
  CHECK_FALSE(trees_equal(two_step, one_step));
}

TEST_CASE("height pruning erases the leaf-ward t-neighbourhood") {
  auto phi = PruningFunctional::height();
  CHECK(trees_equal(prune_tree(single_edge(2.0), phi, 0.5), single_edge(1.5)));
  CHECK(prune_tree(single_edge(2.0), phi, 2.5).is_empty());
  CHECK(trees_equal(prune_tree(y_tree(1, 2, 3), phi, 1.5), single_edge(3.5)));
  CHECK(trees_equal(prune_tree(y_tree(1, 2, 3), phi, 0.5), y_tree(0.5, 1.5, 3)));
}

TEST_CASE("height pruning is a semigroup") {
  auto phi = PruningFunctional::height();
  StreamRng rng(31, 0);
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto t = sample_gw(1.0, 31, i);
    double s = 2.0 * rng.uniform(), u = 2.0 * rng.uniform();
    auto a = prune_tree(prune_tree(t, phi, s), phi, u);
    auto b = prune_tree(t, phi, s + u);
    CHECK(trees_equal(a, b, 1e-9, 1e-9));
  }
}

TEST_CASE("horton pruning") {
  CHECK(horton_prune(single_edge(1)).is_empty());
  CHECK(trees_equal(horton_prune(y_tree(1, 2, 3)), single_edge(3)));
  auto t = order_three_tree();
  auto r1 = horton_prune(t);
  auto r2 = horton_prune(r1);
  auto r3 = horton_prune(r2);
  CHECK_FALSE(r1.is_empty());
  CHECK(num_leaves(r1) == 2);
  CHECK_FALSE(r2.is_empty());
  CHECK(r3.is_empty());

  auto phi = PruningFunctional::horton();
  CHECK(trees_equal(prune_tree(t, phi, 1.0), r1));
  CHECK(trees_equal(prune_tree(t, phi, 2.0), r2));
  CHECK(prune_tree(t, phi, 3.0).is_empty());
  // Integer-valued: non-integer thresholds act like the next integer.
  CHECK(trees_equal(prune_tree(t, phi, 0.5), r1));
  CHECK(trees_equal(prune_tree(t, phi, 1.5), r2));
}

TEST_CASE("horton pruning is a semigroup at integer times") {
  auto phi = PruningFunctional::horton();
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto t = sample_gw(1.0, 32, i);
    for (int s = 0; s <= 2; ++s)
      for (int u = 0; u <= 2; ++u)
        CHECK(trees_equal(prune_tree(prune_tree(t, phi, s), phi, u), prune_tree(t, phi, s + u)));
  }
}

TEST_CASE("nesting") {
  StreamRng rng(33, 0);
  for (int i = 0; i < 200; ++i) {
    auto t = random_small_tree(rng, 5);
    for (auto phi : {PruningFunctional::tree_length(), PruningFunctional::height(),
                     PruningFunctional::leaf_count(), PruningFunctional::horton()}) {
      double s = 3.0 * rng.uniform(), u = s + 2.0 * rng.uniform();
      CHECK(is_embeddable(prune_tree(t, phi, u), prune_tree(t, phi, s), 1e-9));
    }
  }
}

TEST_CASE("leaf count pruning matches brute force") {
  StreamRng rng(34, 0);
  auto phi = PruningFunctional::leaf_count();
  for (int i = 0; i < 200; ++i) {
    auto t = random_small_tree(rng, 6);
    double thr = 1.0 + static_cast<double>(static_cast<int>(4.0 * rng.uniform()));
    // An edge survives iff its child subtree has at least thr leaves; points
    // inside share the edge's leaf count.
    std::function<double(NodeId)> leaves_below = [&](NodeId v) -> double {
      if (t.is_leaf(v)) return 1.0;
      double s = 0.0;
      for (NodeId c : {t.left(v), t.right(v)})
        if (c != kNone) s += leaves_below(c);
      return s;
    };
    PlaneTree kept;
    std::function<void(NodeId, NodeId)> copy = [&](NodeId v, NodeId d) {
      for (NodeId c : {t.left(v), t.right(v)})
        if (c != kNone && leaves_below(c) >= thr) copy(c, kept.add_child(d, t.edge_length(c)));
    };
    copy(0, 0);
    CHECK(trees_equal(prune_tree(t, phi, thr), series_reduce(kept)));
  }
}

TEST_CASE("custom functional agrees with the built-in height") {
  auto custom = PruningFunctional::custom(
      [](const PlaneTree& s) { return height(s); },
      [](double child, const PlaneTree&, double offset) { return child + offset; });
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto t = sample_gw(1.0, 35, i);
    CHECK(trees_equal(prune_tree(t, custom, 0.7), prune_tree(t, PruningFunctional::height(), 0.7),
                      1e-9, 1e-9));
  }
}

TEST_CASE("non-monotone custom functional is rejected") {
  auto bad = PruningFunctional::custom([](const PlaneTree& s) { return -length(s); },
                                       [](double child, const PlaneTree&, double o) { return child - o; });
  CHECK_THROWS_AS(prune(y_tree(1, 2, 3), bad, -1.0), DomainError);
  CHECK_THROWS_AS(prune(y_tree(1, 2, 3), bad, 1.0), DomainError);
}

TEST_CASE("edge_crossing") {
  PlaneTree none;
  auto s = edge_crossing(PruningFunctional::tree_length(), 1.0, none, 2.0, 1.5);
  REQUIRE(s);
  CHECK(*s == doctest::Approx(0.5));
  CHECK_FALSE(edge_crossing(PruningFunctional::horton(), 1.0, none, 2.0, 1.5));
  CHECK_FALSE(edge_crossing(PruningFunctional::height(), 2.0, none, 2.0, 5.0));
  s = edge_crossing(PruningFunctional::height(), 2.0, none, 4.0, 5.0);
  REQUIRE(s);
  CHECK(*s == doctest::Approx(3.0));
}

TEST_CASE("cut sets") {
  auto r = prune(y_tree(1, 2, 3), PruningFunctional::tree_length(), 1.5);
  REQUIRE(r.cuts.cuts.size() == 2);
  double removed = 0.0;
  for (const auto& c : r.cuts.cuts)
    for (const auto& p : c.removed) removed += p.length;
  CHECK(removed == doctest::Approx(2.5));
}

TEST_CASE("mass-equipped pruning of the W tree") {
  // Level-set tree of the negated W potential: stem 1, leaves 1 and 2.
  auto w = y_tree(1, 2, 1);

  SUBCASE("interior mass stage") {
    auto m = prune_mass_equipped(w, 1.5);
    CHECK(trees_equal(m.tree, single_edge(1.5)));
    REQUIRE(m.interior.size() == 1);
    CHECK(m.interior[0].mass == doctest::Approx(2.0));
    CHECK(m.interior[0].point.edge == 1);
    CHECK(m.interior[0].point.offset == doctest::Approx(0.5));
    CHECK(m.interior[0].orientation == Side::Left);
    REQUIRE(m.leaves.size() == 1);
    CHECK_FALSE(m.leaves[0].is_double);
    CHECK(m.leaves[0].mass == 3.0);
    CHECK(is_t_admissible(m));
  }
  SUBCASE("double mass stage") {
    auto m = prune_mass_equipped(w, 2.5);
    CHECK(trees_equal(m.tree, single_edge(1.0)));
    CHECK(m.interior.empty());
    REQUIRE(m.leaves.size() == 1);
    CHECK(m.leaves[0].is_double);
    CHECK(m.leaves[0].mass_left == doctest::Approx(2.0));
    CHECK(m.leaves[0].mass_right == doctest::Approx(4.0));
    CHECK(is_t_admissible(m));
  }
  SUBCASE("t = 0 keeps the tree without extra masses") {
    auto m = prune_mass_equipped(w, 0.0);
    CHECK(trees_equal(m.tree, w, 0, 0));
    CHECK(m.interior.empty());
    for (const auto& l : m.leaves) CHECK(l.mass == 0.0);
  }
}

TEST_CASE("mass-equipped pruning conserves length") {
  for (std::uint64_t i = 0; i < 300; ++i) {
    auto t = sample_gw(1.0, 36, i);
    for (double thr : {0.3, 1.0, 2.5}) {
      auto m = prune_mass_equipped(t, thr);
      CHECK(is_t_admissible(m));
      // Each mass is twice the length it replaces.
      double half = 0.0;
      for (const auto& im : m.interior) half += 0.5 * im.mass;
      for (const auto& lm : m.leaves) half += 0.5 * lm.mass;
      CHECK(length(m.tree) + half == doctest::Approx(length(t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("threshold validation") {
  CHECK_THROWS_AS(prune(single_edge(1), PruningFunctional::tree_length(), -1.0), DomainError);
  CHECK_THROWS_AS(parse_functional("nope"), DomainError);
  CHECK(parse_functional("height") == FunctionalKind::Height);
}

}
