#include <algorithm>
#include <cmath>

#include "incomelab/estimation.hpp"

namespace incomelab::estimation {
namespace {

double checked(const Cdf& cdf, double x) {
  const double f = cdf(x);
  if (!(f >= 0.0 && f <= 1.0)) throw InvalidArgument("ks_statistic: cdf value outside [0, 1]");
  return f;
}

}  // namespace

double ks_statistic(std::span<const double> sample, const Cdf& cdf) {
  if (sample.empty()) throw InvalidArgument("ks_statistic: sample is empty");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  double prev_f = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = checked(cdf, sorted[i]);
    if (f + 1e-15 < prev_f) throw InvalidArgument("ks_statistic: cdf is not monotone");
    prev_f = f;
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_statistic(const std::vector<double>& sample, const Cdf& cdf) {
  return ks_statistic(std::span<const double>(sample), cdf);
}

double ks_statistic(const Histogram& histogram, const Cdf& cdf) {
  histogram.validate();
  double d = std::fabs(checked(cdf, histogram.left.front()));
  double empirical = 0.0;
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    empirical += histogram.density[i] * histogram.width(i);
    d = std::max(d, std::fabs(empirical - checked(cdf, histogram.right[i])));
  }
  return d;
}

double ks_statistic(const EmpiricalDistribution& dist, const Cdf& cdf) {
  return std::visit([&](const auto& d) { return ks_statistic(d, cdf); }, dist);
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace incomelab::estimation
