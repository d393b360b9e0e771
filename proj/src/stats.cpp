#include "prunetree/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "prunetree/error.hpp"

namespace prunetree::stats {

double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Theta-function form converges fast for small x.
    double s = 0.0;
    double c = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    for (int k = 1; k < 20; k += 2) s += std::exp(-c * k * k);
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k < 100; ++k) {
    double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  std::vector<double> x(sample.begin(), sample.end());
  if (x.empty()) throw DomainError("empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b) {
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  if (x.empty() || y.empty()) throw DomainError("empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / x.size() - static_cast<double>(j) / y.size()));
  }
  return d;
}

double ks_two_sample_pvalue(double d, std::size_t n1, std::size_t n2) {
  double ne = static_cast<double>(n1) * n2 / (static_cast<double>(n1) + n2);
  return ks_pvalue(d, static_cast<std::size_t>(std::max(1.0, std::round(ne))));
}

double chi_square_pvalue(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, std::max(statistic, 0.0) / 2.0);
}

ChiSquare chi_square_test(std::span<const double> observed, std::span<const double> probs,
                          double min_expected) {
  if (observed.size() != probs.size() || observed.empty()) throw DomainError("bin mismatch");
  double total = 0.0;
  for (double o : observed) total += o;
  std::vector<double> obs, expct;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = observed.size(); i-- > 0;) {
    o_acc += observed[i];
    e_acc += probs[i] * total;
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      expct.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (expct.empty()) {
      obs.push_back(o_acc);
      expct.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      expct.back() += e_acc;
    }
  }
  ChiSquare r;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    double diff = obs[i] - expct[i];
    r.statistic += diff * diff / expct[i];
  }
  r.dof = static_cast<double>(obs.size()) - 1.0;
  r.p_value = chi_square_pvalue(r.statistic, r.dof);
  return r;
}

double normal_two_sided_pvalue(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol);
}

}  // namespace prunetree::stats
