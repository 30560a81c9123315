#include <algorithm>
#include <cmath>
#include <functional>

#include "incomelab/estimation.hpp"

namespace incomelab::estimation {
namespace {

double hill_at(const std::vector<double>& desc, std::size_t k) {
  const double threshold = desc[k];
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(desc[i] / threshold);
  if (!(sum > 0.0)) throw NumericError("hill_tail_exponent: tail has no spread above threshold");
  return 1.0 + static_cast<double>(k) / sum;
}

}  // namespace

HillEstimate hill_tail_exponent(std::span<const double> sample, std::size_t k) {
  if (k < 10) throw InvalidArgument("hill_tail_exponent: k must be at least 10");
  if (2 * k >= sample.size()) throw InvalidArgument("hill_tail_exponent: too few tail points");
  std::vector<double> desc(sample.begin(), sample.end());
  for (double v : desc)
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgument("hill_tail_exponent: sample must be positive and finite");
  std::partial_sort(desc.begin(), desc.begin() + static_cast<std::ptrdiff_t>(k + 1), desc.end(),
                    std::greater<>());

  HillEstimate est;
  est.exponent = hill_at(desc, k);
  est.std_error = (est.exponent - 1.0) / std::sqrt(static_cast<double>(k));

  const std::size_t quarter = std::max<std::size_t>(k / 4, 10);
  est.exponent_at_quarter_k = hill_at(desc, quarter);
  if (quarter < k) {
    const double var = (est.exponent - 1.0) * (est.exponent - 1.0) *
                       (1.0 / static_cast<double>(quarter) - 1.0 / static_cast<double>(k));
    est.stable = std::fabs(est.exponent_at_quarter_k - est.exponent) <= 3.0 * std::sqrt(var);
  }
  return est;
}

}  // namespace incomelab::estimation
