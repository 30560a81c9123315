#pragma once

// Price fluctuations around the mean price: the sign-restoring Langevin
// equation, its Laplace stationary law and the Subbotin-like tail density.
//
// The random price variations have time correlation D·δ(τ − τ'), so one step
// of length dt adds sqrt(D·dt)·ξ. In the generic sde convention (variance
// 2·amplitude per unit time) this is amplitude D/2.

#include <cstdint>
#include <vector>

#include "incomelab/common.hpp"
#include "incomelab/sde.hpp"

namespace incomelab::price {

enum class Regime { competitive, non_competitive };

struct PriceFluctParams {
  double relaxation = 1.0;  // b
  double amplitude = 1.0;   // D
  Regime regime = Regime::competitive;

  void validate() const;
};

struct SubbotinTailParams {
  double scale = 1.0;       // σ_p
  double normalizer = 1.0;  // C_p
  double beta = 0.15;       // size-scaling exponent, carried for reference only
};

double price_fluct_step(double dp, const PriceFluctParams& params, double dt, double noise_draw);

/// (b/D)·exp(−(2b/D)|δp|); throws NoStationaryDistribution outside the
/// competitive regime.
double laplace_density(double dp, const PriceFluctParams& params);
double laplace_cdf(double dp, const PriceFluctParams& params);
/// Mean of |δp| under the Laplace law, D/(2b).
double laplace_mean_abs(const PriceFluctParams& params);
double laplace_variance(const PriceFluctParams& params);

/// C_p·exp(−|δp|/σ_p)/|δp|, valid for δp ≠ 0.
double subbotin_tail_density(double dp, const SubbotinTailParams& params);

/// The equivalent generic drift-diffusion model (G ≡ 1, amplitude D/2).
sde::DriftDiffusion as_drift_diffusion(const PriceFluctParams& params);
sde::AdditiveProcess as_additive_process(const PriceFluctParams& params);

/// Replica ensemble started at δp = 0, samples laid out per sde::run_ensemble.
std::vector<double> simulate_ensemble(const PriceFluctParams& params,
                                      const sde::EnsembleSchedule& schedule, std::uint64_t seed);

}  // namespace incomelab::price
