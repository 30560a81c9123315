#include <algorithm>
#include <cmath>

#include "incomelab/estimation.hpp"

namespace incomelab::estimation {
namespace {

void check_sample(std::span<const double> sample) {
  if (sample.empty()) throw InvalidArgument("histogram: sample is empty");
  for (double v : sample)
    if (!std::isfinite(v)) throw InvalidArgument("histogram: sample contains non-finite values");
}

Histogram bin_sample(std::span<const double> sample, double lo, double width, std::size_t n_bins) {
  Histogram h;
  h.left.resize(n_bins);
  h.right.resize(n_bins);
  h.density.assign(n_bins, 0.0);
  for (std::size_t i = 0; i < n_bins; ++i) {
    h.left[i] = lo + static_cast<double>(i) * width;
    h.right[i] = lo + static_cast<double>(i + 1) * width;
  }
  std::vector<std::size_t> counts(n_bins, 0);
  for (double v : sample) {
    auto idx = static_cast<std::ptrdiff_t>(std::floor((v - lo) / width));
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(n_bins) - 1);
    ++counts[static_cast<std::size_t>(idx)];
  }
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < n_bins; ++i)
    h.density[i] = static_cast<double>(counts[i]) / (n * h.width(i));
  return h;
}

}  // namespace

void Histogram::validate() const {
  if (density.empty()) throw InvalidArgument("histogram: no bins");
  if (left.size() != density.size() || right.size() != density.size())
    throw InvalidArgument("histogram: column lengths differ");
  double mass = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(right[i] > left[i])) throw InvalidArgument("histogram: bin edges must increase");
    if (i > 0 && std::fabs(left[i] - right[i - 1]) > 1e-9 * std::max(1.0, std::fabs(left[i])))
      throw InvalidArgument("histogram: bins must be contiguous");
    if (!(density[i] >= 0.0)) throw InvalidArgument("histogram: densities must be >= 0");
    mass += density[i] * width(i);
  }
  if (std::fabs(mass - 1.0) > 1e-6) throw InvalidArgument("histogram: total mass differs from 1");
}

Histogram build_histogram(std::span<const double> sample, std::size_t n_bins) {
  check_sample(sample);
  if (n_bins == 0) throw InvalidArgument("histogram: need at least one bin");
  const auto [min_it, max_it] = std::minmax_element(sample.begin(), sample.end());
  double lo = *min_it;
  double hi = *max_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  return bin_sample(sample, lo, (hi - lo) / static_cast<double>(n_bins), n_bins);
}

Histogram build_histogram_width(std::span<const double> sample, double bin_width) {
  check_sample(sample);
  if (!(bin_width > 0.0)) throw InvalidArgument("histogram: bin width must be positive");
  const auto [min_it, max_it] = std::minmax_element(sample.begin(), sample.end());
  const double lo = *min_it;
  const auto n_bins = static_cast<std::size_t>(std::floor((*max_it - lo) / bin_width)) + 1;
  return bin_sample(sample, lo, bin_width, n_bins);
}

Histogram histogram_from_cdf(const std::function<double(double)>& cdf, double lo, double hi,
                             std::size_t n_bins) {
  if (!(hi > lo) || n_bins == 0) throw InvalidArgument("histogram_from_cdf: bad range");
  Histogram h;
  const double width = (hi - lo) / static_cast<double>(n_bins);
  double prev = cdf(lo);
  for (std::size_t i = 0; i < n_bins; ++i) {
    const double l = lo + static_cast<double>(i) * width;
    const double r = i + 1 == n_bins ? hi : lo + static_cast<double>(i + 1) * width;
    const double next = cdf(r);
    h.left.push_back(l);
    h.right.push_back(r);
    h.density.push_back((next - prev) / (r - l));
    prev = next;
  }
  return h;
}

Moments moments(std::span<const double> sample) {
  if (sample.empty()) throw InvalidArgument("moments: sample is empty");
  const double n = static_cast<double>(sample.size());
  double mean = 0.0, mean_abs = 0.0;
  for (double v : sample) {
    mean += v;
    mean_abs += std::fabs(v);
  }
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : sample) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  Moments m;
  m.mean = mean;
  m.mean_abs = mean_abs / n;
  m.variance = m2;
  m.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return m;
}

}  // namespace incomelab::estimation
