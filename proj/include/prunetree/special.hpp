#pragma once

#include <cstddef>

#include "prunetree/pruning.hpp"

namespace prunetree {

// Modified Bessel functions of the first kind, orders 0 and 1, for z >= 0.
double bessel_i(int nu, double z);
// e^{-z} I_nu(z); finite for all z >= 0.
double bessel_i_scaled(int nu, double z);

// Density of the total length of a GW(lambda) tree.
double length_pdf(double lambda, double x);

// P(phi(T) >= delta) for T ~ GW(lambda). LeafCount has no closed form.
double survival_prob(FunctionalKind kind, double lambda, double delta);

// Probability that a random sink is still growing at time t.
double growth_probability(double lambda, double t);

// Continuous part of the law of a random sink mass at time t, on (0, 2t).
// The law also has an atom of weight growth_probability at 2t.
double sink_mass_pdf(double lambda, double t, double a);

// P(#leaves = n) for a critical binary GW tree, n >= 1.
double gw_leaf_pmf(std::size_t n);

// Laws of masses on a length-pruned GW tree conditioned on survival.
namespace mass_law {
// Probability that a leaf carries a single mass.
double single_leaf_fraction(double lambda, double t);
// Joint density of a double leaf mass (a, b), a, b <= 2t < a + b.
double double_mass_pdf(double lambda, double t, double a, double b);
// Density and CDF of an interior mass on (0, 2t).
double interior_mass_pdf(double lambda, double t, double a);
double interior_mass_cdf(double lambda, double t, double a);
// P(k interior masses on an edge).
double interior_count_pmf(double lambda, double t, std::size_t k);
}  // namespace mass_law

}  // namespace prunetree
