#include <doctest.h>

#include <cmath>
#include <vector>

#include "prunetree/gw.hpp"
#include "prunetree/harris.hpp"
#include "prunetree/special.hpp"
#include "prunetree/stats.hpp"

using namespace prunetree;

TEST_SUITE("gw") {

TEST_CASE("leaf count pmf") {
  CHECK(gw_leaf_pmf(1) == doctest::Approx(0.5));
  CHECK(gw_leaf_pmf(2) == doctest::Approx(0.125));
  CHECK(gw_leaf_pmf(3) == doctest::Approx(2.0 / 32.0));
  double s = 0.0;
  for (std::size_t n = 1; n <= 2000; ++n) s += gw_leaf_pmf(n);
  // Tail decays like n^{-3/2}.
  CHECK(s > 0.98);
  CHECK(s < 1.0);
}

TEST_CASE("sampling is deterministic") {
  auto a = sample_gw(1.0, 5, 3);
  auto b = sample_gw(1.0, 5, 3);
  CHECK(trees_equal(a, b, 0, 0));
  CHECK(to_newick(a) == to_newick(b));
  auto c = sample_gw(1.0, 5, 4);
  CHECK(to_newick(a) != to_newick(c));
}

TEST_CASE("samples are valid planted trees") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto t = sample_gw(2.0, 6, s);
    CHECK(t.is_planted());
    CHECK_NOTHROW(t.validate());
  }
}

TEST_CASE("node cap") {
  StreamRng rng(7, 0);
  bool truncated = false;
  for (int i = 0; i < 200 && !truncated; ++i) {
    auto g = sample_gw_bounded(1.0, rng, 32);
    if (g.truncated) {
      truncated = true;
      CHECK(g.tree.size() >= 32);
      CHECK_NOTHROW(g.tree.validate());
    }
  }
  CHECK(truncated);
  bool threw = false;
  for (std::uint64_t s = 0; s < 200 && !threw; ++s) {
    try {
      sample_gw(1.0, 8, s, 32);
    } catch (const DomainError&) {
      threw = true;
    }
  }
  CHECK(threw);
}

// Heavy-tailed sizes: samples are grown under a node cap. The stem and the
// first leaves are unaffected, and a capped tree's length is only a lower
// bound, so it enters the length test as +inf (above every sample point).
TEST_CASE("edge lengths and leaf counts follow the law") {
  std::vector<double> lengths;
  std::vector<double> counts(9, 0.0);
  const int n = 20000;
  for (int s = 0; s < n; ++s) {
    StreamRng rng(9, static_cast<std::uint64_t>(s));
    auto g = sample_gw_bounded(1.0, rng, 1u << 20);
    lengths.push_back(g.tree.edge_length(g.tree.left(0)));
    std::size_t k = g.truncated ? 9 : num_leaves(g.tree);
    counts[std::min<std::size_t>(k, 9) - 1] += 1.0;
  }
  double d = stats::ks_statistic(lengths, [](double x) { return 1.0 - std::exp(-x); });
  CHECK(stats::ks_pvalue(d, lengths.size()) > 0.01);
  std::vector<double> probs(9, 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k <= 8; ++k) acc += probs[k - 1] = gw_leaf_pmf(k);
  probs[8] = 1.0 - acc;
  CHECK(stats::chi_square_test(counts, probs).p_value > 0.01);
}

TEST_CASE("total length follows the length density") {
  std::vector<double> total;
  for (int s = 0; s < 20000; ++s) {
    StreamRng rng(10, static_cast<std::uint64_t>(s));
    auto g = sample_gw_bounded(1.0, rng, 1u << 20);
    total.push_back(g.truncated ? INFINITY : length(g.tree));
  }
  auto cdf = [](double x) { return std::isinf(x) ? 1.0 : 1.0 - survival_prob(FunctionalKind::Length, 1.0, x); };
  CHECK(stats::ks_pvalue(stats::ks_statistic(total, cdf), total.size()) > 0.01);
}

TEST_CASE("exponential excursions") {
  std::vector<double> first_rises;
  std::size_t capped = 0;
  for (std::uint64_t s = 0; s < 20000; ++s) {
    StreamRng rng(11, s);
    Excursion x;
    try {
      x = sample_exp_excursion(1.0, rng, 1u << 24);
    } catch (const DomainError&) {
      ++capped;
      continue;
    }
    CHECK_NOTHROW(validate_excursion(x));
    if (s < 2000) CHECK(x.extent() == doctest::Approx(2.0 * length(level_set_tree(x))).epsilon(1e-12));
    first_rises.push_back(x.extrema[1]);
  }
  CHECK(capped <= 20);
  double d = stats::ks_statistic(first_rises, [](double v) { return 1.0 - std::exp(-0.5 * v); });
  CHECK(stats::ks_pvalue(d, first_rises.size()) > 0.01);
}

}

TEST_SUITE("special") {

TEST_CASE("bessel values") {
  CHECK(bessel_i(0, 0.0) == 1.0);
  CHECK(bessel_i(1, 0.0) == 0.0);
  CHECK(bessel_i(0, 1.0) == doctest::Approx(1.2660658777520082).epsilon(1e-14));
  CHECK(bessel_i(1, 1.0) == doctest::Approx(0.5651591039924851).epsilon(1e-14));
  CHECK(bessel_i(0, 30.0) == doctest::Approx(781672297823.97748).epsilon(1e-13));
  CHECK(bessel_i_scaled(0, 1e4) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI * 1e4)).epsilon(1e-4));
  CHECK_THROWS_AS(bessel_i(2, 1.0), DomainError);
  CHECK_THROWS_AS(bessel_i(0, -1.0), DomainError);
}

TEST_CASE("length density") {
  CHECK(length_pdf(1.0, 1.0) == doctest::Approx(std::exp(-1.0) * 0.5651591039924851).epsilon(1e-13));
  CHECK(length_pdf(1.0, 1.0) == doctest::Approx(0.2079104).epsilon(1e-6));
  // Zero below the support; the continuous limit at 0.
  CHECK(length_pdf(1.0, -1.0) == 0.0);
  CHECK(length_pdf(2.0, 0.0) == 1.0);
  // x = w^-2 on the tail keeps the integrand bounded.
  double total = stats::integrate([](double x) { return length_pdf(1.0, x); }, 0.0, 1.0) +
                 stats::integrate([](double w) { return 2.0 * length_pdf(1.0, 1.0 / (w * w)) / (w * w * w); },
                                  0.0, 1.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("survival probabilities") {
  CHECK(survival_prob(FunctionalKind::Length, 1.0, 1.0) == doctest::Approx(0.6736700229).epsilon(1e-9));
  CHECK(survival_prob(FunctionalKind::Height, 1.0, 2.0) == 0.5);
  CHECK(survival_prob(FunctionalKind::HortonOrder, 1.0, 1.0) == 0.5);
  CHECK(survival_prob(FunctionalKind::HortonOrder, 1.0, 2.0) == 0.25);
  CHECK(survival_prob(FunctionalKind::HortonOrder, 1.0, 2.7) == 0.125);
  for (auto k : {FunctionalKind::Length, FunctionalKind::Height, FunctionalKind::HortonOrder})
    CHECK(survival_prob(k, 1.0, 0.0) == 1.0);
  CHECK_THROWS_AS(survival_prob(FunctionalKind::LeafCount, 1.0, 1.0), DomainError);
  // Length survival is the tail of the length density.
  for (double d : {0.25, 1.0, 3.0}) {
    double tail = 1.0 - stats::integrate([](double x) { return length_pdf(1.0, x); }, 0.0, d);
    CHECK(survival_prob(FunctionalKind::Length, 1.0, d) == doctest::Approx(tail).epsilon(1e-8));
  }
}

TEST_CASE("growth probability and sink mass law") {
  CHECK(growth_probability(1.0, 1.0) == doctest::Approx(0.4657596077).epsilon(1e-9));
  CHECK(growth_probability(1.0, 0.0) == 1.0);
  double prev = 1.0;
  for (double t = 0.1; t < 10.0; t += 0.1) {
    double g = growth_probability(1.0, t);
    CHECK(g < prev);
    prev = g;
  }
  CHECK(sink_mass_pdf(1.0, 1.0, 1e-12) == doctest::Approx(0.3368350115).epsilon(1e-9));
  for (double t : {0.5, 1.0, 2.0}) {
    double c = stats::integrate([t](double a) { return sink_mass_pdf(1.0, t, a); }, 0.0, 2.0 * t);
    CHECK(c + growth_probability(1.0, t) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("mass laws") {
  double p = survival_prob(FunctionalKind::Length, 1.0, 1.0);
  CHECK(mass_law::single_leaf_fraction(1.0, 1.0) ==
        doctest::Approx(2.0 * length_pdf(1.0, 1.0) / (p * p)).epsilon(1e-12));
  CHECK(mass_law::single_leaf_fraction(1.0, 1.0) == doctest::Approx(0.9163).epsilon(1e-4));
  CHECK(mass_law::interior_count_pmf(1.0, 1.0, 0) == doctest::Approx(p));
  double s = 0.0;
  for (std::size_t k = 0; k < 200; ++k) s += mass_law::interior_count_pmf(1.0, 1.0, k);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mass_law::interior_mass_cdf(1.0, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
  double pdf_int = stats::integrate([](double a) { return mass_law::interior_mass_pdf(1.0, 1.0, a); }, 0.0, 2.0);
  CHECK(pdf_int == doctest::Approx(1.0).epsilon(1e-8));
  // The double-mass density carries the double-leaf share of the leaves.
  double dbl = stats::integrate(
      [](double a) {
        return stats::integrate([a](double b) { return mass_law::double_mass_pdf(1.0, 1.0, a, b); },
                                2.0 - a, 2.0);
      },
      0.0, 2.0);
  CHECK(dbl == doctest::Approx(1.0).epsilon(1e-6));
}

}

TEST_SUITE("stats") {

TEST_CASE("kolmogorov tail") {
  CHECK(stats::kolmogorov_tail(0.0) == doctest::Approx(1.0));
  CHECK(stats::kolmogorov_tail(1.3580986393) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(stats::kolmogorov_tail(1.6276236115) == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("ks statistic") {
  std::vector<double> x{0.1, 0.4, 0.7};
  double d = stats::ks_statistic(x, [](double v) { return v; });
  CHECK(d == doctest::Approx(0.3));
  std::vector<double> a{1, 2, 3}, b{1, 2, 3};
  CHECK(stats::ks_two_sample_statistic(a, b) == 0.0);
}

TEST_CASE("chi-square") {
  CHECK(stats::chi_square_pvalue(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
  std::vector<double> obs{50, 50}, probs{0.5, 0.5};
  auto r = stats::chi_square_test(obs, probs);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("normal p-value") {
  CHECK(stats::normal_two_sided_pvalue(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("quadrature") {
  CHECK(stats::integrate([](double x) { return std::exp(-x); }, 0.0, 5.0) ==
        doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-12));
}

}
