#pragma once

// Statistical machinery: density histograms, Kolmogorov–Smirnov distances,
// Hill tail exponents, the maximum-entropy wage occupation and the
// least-squares fitter for the income mixture.

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "incomelab/common.hpp"
#include "incomelab/income.hpp"

namespace incomelab::estimation {

/// Contiguous density-normalized bins.
struct Histogram {
  std::vector<double> left;
  std::vector<double> right;
  std::vector<double> density;

  [[nodiscard]] std::size_t size() const { return density.size(); }
  [[nodiscard]] double width(std::size_t i) const { return right[i] - left[i]; }
  [[nodiscard]] double midpoint(std::size_t i) const { return 0.5 * (left[i] + right[i]); }
  /// Throws unless edges increase, bins are contiguous and Σ density·width = 1 ± 1e-6.
  void validate() const;
};

using EmpiricalDistribution = std::variant<std::vector<double>, Histogram>;

Histogram build_histogram(std::span<const double> sample, std::size_t n_bins);
Histogram build_histogram_width(std::span<const double> sample, double bin_width);
/// Exact bin averages of a CDF over equal bins on [lo, hi].
Histogram histogram_from_cdf(const std::function<double(double)>& cdf, double lo, double hi,
                             std::size_t n_bins);

using Cdf = std::function<double(double)>;

double ks_statistic(std::span<const double> sample, const Cdf& cdf);
double ks_statistic(const std::vector<double>& sample, const Cdf& cdf);
double ks_statistic(const Histogram& histogram, const Cdf& cdf);
double ks_statistic(const EmpiricalDistribution& dist, const Cdf& cdf);
/// Asymptotic Kolmogorov p-value of statistic d at sample size n.
double ks_pvalue(double d, std::size_t n);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double mean_abs = 0.0;
};
Moments moments(std::span<const double> sample);

struct HillEstimate {
  double exponent = 0.0;    // density exponent λ in P(x) ~ x^−λ
  double std_error = 0.0;   // (λ − 1)/sqrt(k)
  bool stable = true;       // estimate at k/4 consistent with the one at k
  double exponent_at_quarter_k = 0.0;
};

HillEstimate hill_tail_exponent(std::span<const double> sample, std::size_t k);

struct EntropySolution {
  std::vector<double> bin_values;
  std::vector<double> occupation;
  double multiplier = 0.0;  // β in P_l ∝ exp(−β w_l)
};

EntropySolution max_entropy_wage(std::span<const double> bins, double mean_constraint);
double entropy(std::span<const double> occupation);

inline const std::vector<std::string>& mixture_parameter_names() {
  static const std::vector<std::string> names = {"n_pf", "n_e", "n_ue", "h0", "sigma_f",
                                                 "lambda", "h_splice", "t_wage", "h_ue",
                                                 "sigma_ue"};
  return names;
}

struct FitOptions {
  double h_floor = 0.0;  // bins with midpoint below carry no weight
  std::size_t max_iterations = 500;
  double tolerance = 1e-12;
};

struct FitResult {
  income::MixtureParams params;
  double objective_value = 0.0;
  std::map<std::string, double> standard_errors;
  bool converged = false;
  std::size_t n_iterations = 0;
  /// Objective after every accepted iteration, starting with the initial one.
  std::vector<double> objective_trace;
};

/// Weighted least squares Σ (model − empirical)²·width over the bins, where
/// the model density of a bin is its exact bin average.
double fit_objective(const Histogram& hist, const income::MixtureParams& params,
                     double h_floor = 0.0);

FitResult fit_mixture(const Histogram& hist, const income::MixtureParams& init,
                      const std::set<std::string>& frozen, const FitOptions& options = {});
/// Samples are binned first (sqrt(n) equal bins, clamped to [10, 2000]).
FitResult fit_mixture(const EmpiricalDistribution& dist, const income::MixtureParams& init,
                      const std::set<std::string>& frozen, const FitOptions& options = {});

}  // namespace incomelab::estimation
