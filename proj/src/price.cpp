#include "incomelab/price.hpp"

#include <cmath>

namespace incomelab::price {

void PriceFluctParams::validate() const {
  if (!(relaxation > 0.0)) throw InvalidArgument("price: relaxation b must be > 0");
  if (!(amplitude > 0.0)) throw InvalidArgument("price: amplitude D must be > 0");
}

double price_fluct_step(double dp, const PriceFluctParams& params, double dt, double noise_draw) {
  if (!(dt > 0.0)) throw InvalidArgument("price_fluct_step: dt must be positive");
  // Non-competitive markets lose the restoring force: the drift points outward.
  const double b = params.regime == Regime::competitive ? params.relaxation : -params.relaxation;
  const double rate_dt = b * dt;
  const double inc = -rate_dt * sign(dp) + std::sqrt(params.amplitude * dt) * noise_draw;
  return dp + inc;
}

namespace {

void require_stationary(const PriceFluctParams& params) {
  params.validate();
  if (params.regime != Regime::competitive)
    throw NoStationaryDistribution(
        "price fluctuations have no stationary distribution without competition");
}

}  // namespace

double laplace_density(double dp, const PriceFluctParams& params) {
  require_stationary(params);
  const double k = params.relaxation / params.amplitude;
  return k * std::exp(-2.0 * k * std::fabs(dp));
}

double laplace_cdf(double dp, const PriceFluctParams& params) {
  require_stationary(params);
  const double rate = 2.0 * params.relaxation / params.amplitude;
  return dp < 0.0 ? 0.5 * std::exp(rate * dp) : 1.0 - 0.5 * std::exp(-rate * dp);
}

double laplace_mean_abs(const PriceFluctParams& params) {
  require_stationary(params);
  return params.amplitude / (2.0 * params.relaxation);
}

double laplace_variance(const PriceFluctParams& params) {
  require_stationary(params);
  return params.amplitude * params.amplitude / (2.0 * params.relaxation * params.relaxation);
}

double subbotin_tail_density(double dp, const SubbotinTailParams& params) {
  if (dp == 0.0) throw DomainError("subbotin_tail_density: singular at dp = 0");
  if (!(params.scale > 0.0)) throw InvalidArgument("subbotin_tail_density: scale must be > 0");
  const double a = std::fabs(dp);
  return params.normalizer * std::exp(-a / params.scale) / a;
}

sde::DriftDiffusion as_drift_diffusion(const PriceFluctParams& params) {
  params.validate();
  const double b = params.regime == Regime::competitive ? params.relaxation : -params.relaxation;
  sde::DriftDiffusion model;
  model.drift = [b](double x) { return -b * sign(x); };
  model.diffusion = [](double) { return 1.0; };
  return model;
}

sde::AdditiveProcess as_additive_process(const PriceFluctParams& params) {
  params.validate();
  sde::AdditiveProcess p;
  p.kind = sde::AdditiveProcess::Drift::sign_restoring;
  p.rate = params.regime == Regime::competitive ? params.relaxation : -params.relaxation;
  p.amplitude = 0.5 * params.amplitude;
  return p;
}

std::vector<double> simulate_ensemble(const PriceFluctParams& params,
                                      const sde::EnsembleSchedule& schedule, std::uint64_t seed) {
  return sde::run_ensemble(as_additive_process(params), 0.0, schedule, seed);
}

}  // namespace incomelab::price
