#include <algorithm>
#include <cmath>

#include "incomelab/estimation.hpp"

namespace incomelab::estimation {
namespace {

// Gibbs weights at multiplier beta, shifted by the max exponent.
std::vector<double> gibbs(std::span<const double> w, double beta) {
  double top = -INFINITY;
  for (double v : w) top = std::max(top, -beta * v);
  std::vector<double> p(w.size());
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    p[i] = std::exp(-beta * w[i] - top);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

double gibbs_mean(std::span<const double> w, double beta) {
  const auto p = gibbs(w, beta);
  double m = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) m += p[i] * w[i];
  return m;
}

}  // namespace

EntropySolution max_entropy_wage(std::span<const double> bins, double mean_constraint) {
  if (bins.empty()) throw InvalidArgument("max_entropy_wage: no bins");
  for (double v : bins)
    if (!std::isfinite(v)) throw InvalidArgument("max_entropy_wage: non-finite bin value");
  if (!(mean_constraint > 0.0) || !std::isfinite(mean_constraint))
    throw InvalidArgument("max_entropy_wage: mean must be positive");
  const auto [min_it, max_it] = std::minmax_element(bins.begin(), bins.end());
  const double lo = *min_it, hi = *max_it;
  if (mean_constraint < lo || mean_constraint > hi)
    throw InfeasibleError("max_entropy_wage: mean outside the bin range");

  EntropySolution sol;
  sol.bin_values.assign(bins.begin(), bins.end());
  if (lo == hi || mean_constraint == lo || mean_constraint == hi) {
    // Only point masses at the extreme bins satisfy the constraint.
    sol.occupation.assign(bins.size(), 0.0);
    std::size_t count = 0;
    for (double v : bins) count += v == mean_constraint;
    for (std::size_t i = 0; i < bins.size(); ++i)
      if (bins[i] == mean_constraint) sol.occupation[i] = 1.0 / static_cast<double>(count);
    sol.multiplier = lo == hi ? 0.0 : (mean_constraint == lo ? INFINITY : -INFINITY);
    return sol;
  }

  const double scale = std::max(std::fabs(lo), std::fabs(hi));
  double b_lo = -50.0 / scale, b_hi = 50.0 / scale;
  // Mean decreases in beta.
  for (int i = 0; i < 60 && gibbs_mean(bins, b_lo) < mean_constraint; ++i) b_lo *= 2.0;
  for (int i = 0; i < 60 && gibbs_mean(bins, b_hi) > mean_constraint; ++i) b_hi *= 2.0;

  double beta = 0.5 * (b_lo + b_hi);
  for (int it = 0; it < 400; ++it) {
    beta = 0.5 * (b_lo + b_hi);
    const double m = gibbs_mean(bins, beta);
    if (std::fabs(m - mean_constraint) <= 1e-13 * std::max(1.0, scale)) break;
    if (m > mean_constraint)
      b_lo = beta;
    else
      b_hi = beta;
    if (b_hi - b_lo <= 1e-17 * std::max(1.0, std::fabs(beta))) break;
  }
  const double m = gibbs_mean(bins, beta);
  if (std::fabs(m - mean_constraint) > 1e-10)
    throw NumericError("max_entropy_wage: multiplier did not converge");
  sol.multiplier = beta;
  sol.occupation = gibbs(bins, beta);
  return sol;
}

double entropy(std::span<const double> occupation) {
  double s = 0.0;
  for (double p : occupation) {
    if (p < 0.0) throw InvalidArgument("entropy: negative probability");
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

}  // namespace incomelab::estimation
