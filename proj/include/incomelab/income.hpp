#pragma once

// Personal income as a mixture of three sources:
//
//   P(h) = n_pf·P_F(h) + n_e·P_E(h) + n_ue·P_UE(h)
//
// P_F  capital income of private firms: lognormal body, optional Pareto tail
//      spliced continuously at h_splice and renormalized,
// P_E  labour income: exponential with mean wage T,
// P_UE social insurance: Gaussian peak, truncated at zero.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "incomelab/common.hpp"
#include "incomelab/sde.hpp"

namespace incomelab::income {

struct MixtureParams {
  double n_pf = 0.0;
  double n_e = 1.0;
  double n_ue = 0.0;
  double h0 = 1.0;
  double sigma_f = 1.0;
  double lambda = 2.5;
  double h_splice = 0.0;
  bool pareto_enabled = false;
  double t_wage = 1.0;
  double h_ue = 1.0;
  double sigma_ue = 1.0;

  /// Throws InvalidArgument on any violated invariant.
  void validate() const;
};

/// Reference parameter set for the Australian 1994-95 income distribution
/// (Pareto part switched off; λ and h_splice carry the synthetic defaults).
MixtureParams australia_1994_fit();

/// Income where the lognormal's log-log slope equals −λ: h0·exp((λ−1)σ²).
double tangent_splice(double h0, double sigma_f, double lambda);

double capital_density(double h, const MixtureParams& p);
double capital_cdf(double h, const MixtureParams& p);
double labour_density(double h, const MixtureParams& p);
double labour_cdf(double h, const MixtureParams& p);
double insurance_density(double h, const MixtureParams& p);
double insurance_cdf(double h, const MixtureParams& p);

double mixture_density(double h, const MixtureParams& p);
double mixture_cdf(double h, const MixtureParams& p);
/// Smallest h with mixture_cdf(h) >= q, by bisection.
double mixture_quantile(double q, const MixtureParams& p);

/// Weighted component densities; total is their sum in this order.
struct Components {
  double capital = 0.0;
  double labour = 0.0;
  double insurance = 0.0;
  [[nodiscard]] double total() const { return capital + labour + insurance; }
};
Components mixture_components(double h, const MixtureParams& p);

/// Batch evaluation on the dispatched vector exp; agrees with
/// mixture_density to a few ulp.
std::vector<double> mixture_density_batch(std::span<const double> h, const MixtureParams& p);

std::vector<double> mixture_sample(const MixtureParams& p, std::size_t n, std::uint64_t seed);

struct WageProcessParams {
  double zeta = 1.0;         // down-drift rate
  double q_amplitude = 1.0;  // Q
  double t_wage = 1.0;       // mean wage the caller expects (Q/ζ)

  void validate() const;
  /// Nullopt when T matches Q/ζ within 1e-6 relative, else a warning.
  [[nodiscard]] std::optional<std::string> mean_mismatch() const;
};

struct WageSimulation {
  Trajectory path;
  std::optional<std::string> warning;
};

/// dw = −ζ dτ + sqrt(2Q) dW, reflected at zero.
WageSimulation simulate_wage_process(const WageProcessParams& params, double w0, double dt,
                                     std::size_t n_steps, std::uint64_t seed);
sde::AdditiveProcess wage_process(const WageProcessParams& params);
sde::DriftDiffusion wage_drift_diffusion(const WageProcessParams& params);

}  // namespace incomelab::income
