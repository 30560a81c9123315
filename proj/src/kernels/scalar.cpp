#include <cmath>

#include "incomelab/kernels.hpp"

namespace incomelab::kernels::scalar {

void drift_noise_step(std::span<double> x, std::span<const double> noise, double drift_dt,
                      double noise_scale) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double inc = drift_dt + noise_scale * noise[i];
    x[i] = x[i] + inc;
  }
}

void sign_drift_noise_step(std::span<double> x, std::span<const double> noise, double rate_dt,
                           double noise_scale) {
  const double neg_rate = -rate_dt;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
    const double inc = neg_rate * s + noise_scale * noise[i];
    x[i] = x[i] + inc;
  }
}

void reflect_below(std::span<double> x, double floor) {
  const double twice = floor + floor;
  for (double& v : x) {
    if (v < floor) v = twice - v;
  }
}

double sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double sum_abs(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += std::fabs(v);
  return acc;
}

double sum_sq(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

void exp_inplace(std::span<double> x) {
  for (double& v : x) v = std::exp(v);
}

void scale_by_exp(std::span<double> y, std::span<const double> log_factor) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= std::exp(log_factor[i]);
}

}  // namespace incomelab::kernels::scalar
