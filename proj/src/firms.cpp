#include "incomelab/firms.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "incomelab/kernels.hpp"
#include "incomelab/rng.hpp"

namespace incomelab::firms {

Firm Firm::from_units(std::vector<BusinessUnit> units, Classification c) {
  Firm f;
  f.units = std::move(units);
  for (const auto& u : f.units) f.total_sales += u.sales;
  f.classification = c;
  return f;
}

void FirmPopulation::validate() const {
  for (const auto& f : firms) {
    double sum = 0.0;
    for (const auto& u : f.units) {
      if (!(u.sales > 0.0)) throw InvalidArgument("firm population: unit sales must be > 0");
      sum += u.sales;
    }
    if (std::fabs(sum - f.total_sales) > 1e-9 * std::fabs(f.total_sales))
      throw InvalidArgument("firm population: firm total differs from the sum of its units");
  }
}

void FirmGrowthParams::validate() const {
  if (!(attach_rate >= 0.0)) throw InvalidArgument("firms: attach_rate must be >= 0");
  if (!(noise_amplitude > 0.0)) throw InvalidArgument("firms: noise amplitude D' must be > 0");
  if (!(cash_cow_share > 0.0 && cash_cow_share <= 1.0))
    throw InvalidArgument("firms: cash_cow_share must lie in (0, 1]");
  if (!(mean_unit_profit > 0.0)) throw InvalidArgument("firms: mean_unit_profit must be > 0");
}

bool FirmGrowthParams::attach_rate_large() const { return attach_rate > 10.0 * noise_amplitude; }

std::size_t cash_cow_select(const Firm& firm) {
  if (firm.units.empty()) throw DomainError("cash_cow_select: firm has no business units");
  std::size_t best = 0;
  for (std::size_t i = 1; i < firm.units.size(); ++i)
    if (firm.units[i].sales > firm.units[best].sales) best = i;
  return best;
}

double cash_cow_amplitude(const Firm& firm) {
  const auto& cow = firm.units[cash_cow_select(firm)];
  const double share = cow.sales / firm.total_sales;
  const double s = share * cow.fitness_sigma;
  return 0.5 * s * s;
}

double firm_sales_step(double x, const FirmGrowthParams& params, double dt, double noise_draw) {
  if (!(x > 0.0)) throw DomainError("firm_sales_step: sales must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("firm_sales_step: dt must be positive");
  const double log_inc =
      -params.attach_rate * dt + std::sqrt(2.0 * params.noise_amplitude * dt) * noise_draw;
  const double next = x * std::exp(log_inc);
  return next > 0.0 ? next : std::numeric_limits<double>::denorm_min();
}

TailExponent power_law_exponent(const FirmGrowthParams& params) {
  if (!(params.noise_amplitude > 0.0))
    throw DomainError("power_law_exponent: D' = 0 leaves the tail exponent undefined");
  const double v = 1.0 + params.attach_rate / params.noise_amplitude;
  return {v, v > 1.0};
}

double lognormal_product_density(double y, const LognormalParams& p) {
  if (!(y > 0.0)) throw DomainError("lognormal_product_density: y must be positive");
  const double var = p.omega * p.omega * p.tau;
  const double z = std::log(y / p.y0) - p.u * p.tau;
  return std::exp(-z * z / (2.0 * var)) / (std::sqrt(2.0 * std::numbers::pi * p.tau) * p.omega * y);
}

double lognormal_product_cdf(double y, const LognormalParams& p) {
  if (y <= 0.0) return 0.0;
  const double z = (std::log(y / p.y0) - p.u * p.tau) / (p.omega * std::sqrt(p.tau));
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double profit_from_sales(double x, const FirmGrowthParams& params) {
  if (!(x > 0.0)) throw DomainError("profit_from_sales: sales must be positive");
  return params.mean_unit_profit * x;
}

sde::DriftDiffusion firm_drift_diffusion(const FirmGrowthParams& params, double x_min) {
  params.validate();
  const double a = params.attach_rate;
  sde::DriftDiffusion model;
  model.drift = [a](double x) { return -a * x; };
  model.diffusion = [](double x) { return x; };
  model.domain_low = x_min;
  model.boundary = sde::Boundary::reflecting;
  return model;
}

std::vector<double> simulate_population(const FirmGrowthParams& params, const PopulationRun& run,
                                        std::uint64_t seed) {
  params.validate();
  if (!(run.x0 > 0.0) || !(run.x_min > 0.0) || run.x0 < run.x_min)
    throw InvalidArgument("simulate_population: need 0 < x_min <= x0");
  sde::AdditiveProcess log_process;
  log_process.kind = sde::AdditiveProcess::Drift::constant;
  log_process.rate = -params.attach_rate;
  log_process.amplitude = params.noise_amplitude;
  log_process.reflect = true;
  log_process.floor = std::log(run.x_min);
  sde::EnsembleSchedule schedule;
  schedule.n_replicas = run.n_firms;
  schedule.dt = run.dt;
  schedule.burn_in_steps = run.n_steps;
  schedule.n_samples = 1;
  auto sizes = sde::run_ensemble(log_process, std::log(run.x0), schedule, seed);
  kernels::exp_inplace(sizes);
  return sizes;
}

Trajectory simulate_firm_full(const Firm& firm, const FirmGrowthParams& params, double dt,
                              std::size_t n_steps, std::uint64_t seed) {
  if (firm.units.empty()) throw DomainError("simulate_firm_full: firm has no business units");
  std::vector<double> sales;
  for (const auto& u : firm.units) sales.push_back(u.sales);
  std::vector<ReplicaStream> streams;
  for (std::size_t k = 0; k < sales.size(); ++k) streams.emplace_back(seed, k);
  Trajectory traj;
  auto total = [&] {
    double s = 0.0;
    for (double v : sales) s += v;
    return s;
  };
  traj.times.push_back(0.0);
  traj.values.push_back(total());
  const double sqrt_dt = std::sqrt(dt);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    for (std::size_t k = 0; k < sales.size(); ++k) {
      const double delta_f = firm.units[k].fitness_sigma * streams[k].normal() / sqrt_dt;
      sales[k] = sde::gibrat_step(sales[k], delta_f - params.attach_rate, dt);
    }
    traj.times.push_back(static_cast<double>(i) * dt);
    traj.values.push_back(total());
  }
  return traj;
}

}  // namespace incomelab::firms
