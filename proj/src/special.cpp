#include "prunetree/special.hpp"

#include <cmath>
#include <numbers>

#include "prunetree/error.hpp"

namespace prunetree {

namespace {

constexpr double kSeriesLimit = 20.0;

// Power series sum_k (z/2)^(2k+nu) / (k! (k+nu)!); all terms positive.
double series(int nu, double z) {
  double half = 0.5 * z;
  double q = half * half;
  double term = nu == 0 ? 1.0 : half;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + nu));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

// Large-argument expansion of e^{-z} I_nu(z).
double asymptotic_scaled(int nu, double z) {
  double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    double odd = 2.0 * k - 1.0;
    double next = -term * (mu - odd * odd) / (k * 8.0 * z);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

void check_order(int nu, double z) {
  if (nu != 0 && nu != 1) throw DomainError("only orders 0 and 1 are supported");
  if (!(z >= 0.0)) throw DomainError("Bessel argument must be non-negative");
}

}  // namespace

double bessel_i(int nu, double z) {
  check_order(nu, z);
  if (z <= kSeriesLimit) return series(nu, z);
  return asymptotic_scaled(nu, z) * std::exp(z);
}

double bessel_i_scaled(int nu, double z) {
  check_order(nu, z);
  if (z <= kSeriesLimit) return series(nu, z) * std::exp(-z);
  return asymptotic_scaled(nu, z);
}

double length_pdf(double lambda, double x) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return lambda / 2.0;
  return bessel_i_scaled(1, lambda * x) / x;
}

double survival_prob(FunctionalKind kind, double lambda, double delta) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(delta >= 0.0)) throw DomainError("delta must be non-negative");
  switch (kind) {
    case FunctionalKind::Length: {
      double z = lambda * delta;
      return bessel_i_scaled(0, z) + bessel_i_scaled(1, z);
    }
    case FunctionalKind::Height:
      return 2.0 / (lambda * delta + 2.0);
    case FunctionalKind::HortonOrder:
      // phi = order - 1 takes integer values, so phi >= delta means
      // order >= ceil(delta) + 1.
      return std::ldexp(1.0, -static_cast<int>(std::ceil(delta)));
    default:
      throw DomainError("no closed-form survival probability for this functional");
  }
}

double growth_probability(double lambda, double t) {
  if (!(t >= 0.0)) throw DomainError("time must be non-negative");
  return bessel_i_scaled(0, lambda * t);
}

double sink_mass_pdf(double lambda, double t, double a) {
  if (!(a > 0.0 && a < 2.0 * t)) return 0.0;
  double u = lambda * (t - a / 2.0);
  double w = lambda * a / 2.0;
  return lambda / 2.0 * (bessel_i_scaled(0, u) + bessel_i_scaled(1, u)) * bessel_i_scaled(0, w);
}

double gw_leaf_pmf(std::size_t n) {
  if (n == 0) return 0.0;
  // C_{n-1} / 2^{2n-1} computed in logs to avoid overflow.
  double m = static_cast<double>(n - 1);
  double log_c = std::lgamma(2.0 * m + 1.0) - std::lgamma(m + 2.0) - std::lgamma(m + 1.0);
  return std::exp(log_c - (2.0 * m + 1.0) * std::numbers::ln2);
}

namespace mass_law {

double single_leaf_fraction(double lambda, double t) {
  double p = survival_prob(FunctionalKind::Length, lambda, t);
  return 2.0 / lambda * length_pdf(lambda, t) / (p * p);
}

double double_mass_pdf(double lambda, double t, double a, double b) {
  if (!(a > 0.0 && b > 0.0 && a <= 2.0 * t && b <= 2.0 * t && a + b > 2.0 * t)) return 0.0;
  double p = survival_prob(FunctionalKind::Length, lambda, t);
  double norm = p * p - 2.0 / lambda * length_pdf(lambda, t);
  return 0.25 * length_pdf(lambda, a / 2.0) * length_pdf(lambda, b / 2.0) / norm;
}

double interior_mass_pdf(double lambda, double t, double a) {
  if (!(a > 0.0 && a < 2.0 * t)) return 0.0;
  double p = survival_prob(FunctionalKind::Length, lambda, t);
  return length_pdf(lambda, a / 2.0) / (2.0 * (1.0 - p));
}

double interior_mass_cdf(double lambda, double t, double a) {
  if (a <= 0.0) return 0.0;
  if (a >= 2.0 * t) return 1.0;
  double p = survival_prob(FunctionalKind::Length, lambda, t);
  double pa = survival_prob(FunctionalKind::Length, lambda, a / 2.0);
  return (1.0 - pa) / (1.0 - p);
}

double interior_count_pmf(double lambda, double t, std::size_t k) {
  double p = survival_prob(FunctionalKind::Length, lambda, t);
  return p * std::pow(1.0 - p, static_cast<double>(k));
}

}  // namespace mass_law

}  // namespace prunetree
