#pragma once

#include <functional>
#include <span>
#include <vector>

namespace prunetree::stats {

// Kolmogorov distribution tail P(K > x) for the scaled statistic.
double kolmogorov_tail(double x);

// sup |F_n - F|; sorts a copy of the sample.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);
// Asymptotic p-value for a one-sample statistic on n points.
double ks_pvalue(double d, std::size_t n);
double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b);
double ks_two_sample_pvalue(double d, std::size_t n1, std::size_t n2);

double chi_square_pvalue(double statistic, double dof);

struct ChiSquare {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};
// Pearson test of observed counts against expected probabilities. Adjacent
// cells are pooled from the right until each expected count is >= min_expected.
ChiSquare chi_square_test(std::span<const double> observed, std::span<const double> probs,
                          double min_expected = 5.0);

// Two-sided normal p-value for a z-score.
double normal_two_sided_pvalue(double z);

// Adaptive Gauss-Kronrod quadrature on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10);

}  // namespace prunetree::stats
