#pragma once

// Firm sizes in unit sales: Gibrat growth of business units, the cash-cow
// approximation and the size-dependent attachment term that turns the
// lognormal body into a power-law tail.
//
// Attachment convention: the firm Langevin equation is integrated in log
// space as x ← x·exp(−a·dt + sqrt(2 D' dt)·ξ) above a reflecting floor, i.e.
// F(x) = −a·x and G(x) = x. Its stationary law is P(x) ∝ x^−(1 + a/D').

#include <cstdint>
#include <span>
#include <vector>

#include "incomelab/common.hpp"
#include "incomelab/sde.hpp"

namespace incomelab::firms {

struct BusinessUnit {
  double sales = 1.0;
  double fitness_sigma = 0.0;  // std of δf per sqrt(unit time)
};

enum class Classification { private_firm, capital_company };

struct Firm {
  std::vector<BusinessUnit> units;
  double total_sales = 0.0;
  Classification classification = Classification::private_firm;

  static Firm from_units(std::vector<BusinessUnit> units,
                         Classification c = Classification::private_firm);
};

struct FirmPopulation {
  std::vector<Firm> firms;
  /// Checks x_l = Σ unit sales within 1e-9 relative for every firm.
  void validate() const;
};

struct FirmGrowthParams {
  double attach_rate = 0.0;      // a
  double noise_amplitude = 1.0;  // D'
  double cash_cow_share = 1.0;   // ν
  double mean_unit_profit = 1.0; // ⟨π⟩

  void validate() const;
  /// a/D' above 10 is outside the small-attachment regime.
  [[nodiscard]] bool attach_rate_large() const;
};

struct LognormalParams {
  double y0 = 1.0;
  double u = 0.0;
  double omega = 1.0;
  double tau = 1.0;
};

struct TailExponent {
  double value = 0.0;
  bool normalizable = true;  // false when the exponent is <= 1
};

std::size_t cash_cow_select(const Firm& firm);
/// D' = (ν σ_cc)²/2 for the firm's cash cow with share ν of its sales.
double cash_cow_amplitude(const Firm& firm);

double firm_sales_step(double x, const FirmGrowthParams& params, double dt, double noise_draw);
TailExponent power_law_exponent(const FirmGrowthParams& params);

double lognormal_product_density(double y, const LognormalParams& params);
double lognormal_product_cdf(double y, const LognormalParams& params);

double profit_from_sales(double x, const FirmGrowthParams& params);

/// F(x) = −a·x, G(x) = x with a reflecting wall at x_min.
sde::DriftDiffusion firm_drift_diffusion(const FirmGrowthParams& params, double x_min);

struct PopulationRun {
  std::size_t n_firms = 1000;
  double x0 = 1.0;
  double x_min = 0.01;
  double dt = 1.0;
  std::size_t n_steps = 1000;
};

/// Final firm sizes of a cash-cow ensemble, all started at x0.
std::vector<double> simulate_population(const FirmGrowthParams& params, const PopulationRun& run,
                                        std::uint64_t seed);

/// Full mode: every business unit follows its own Gibrat process and the
/// attachment factor applies to the whole firm. Returns the firm total over time.
Trajectory simulate_firm_full(const Firm& firm, const FirmGrowthParams& params, double dt,
                              std::size_t n_steps, std::uint64_t seed);

}  // namespace incomelab::firms
