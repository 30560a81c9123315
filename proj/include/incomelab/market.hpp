#pragma once

// Short-time-scale circuit of the representative good: cost structure,
// inventory and potential-consumer balances, replicator competition between
// products and the money ledgers of the agents.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "incomelab/common.hpp"

namespace incomelab::market {

class EmptyMarketError : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateCostError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Total cost of a business unit c0 + c1·s + c2·s² per unit time.
struct CostCurve {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  [[nodiscard]] double total(double output) const { return c0 + c1 * output + c2 * output * output; }
};

struct Product {
  double price = 1.0;
  double preference = 1.0;    // η_k
  double reproduction = 0.0;  // γ_k
  double inventory = 0.0;     // z_k
  double sales = 0.0;         // y_k
  CostCurve costs;
  bool stockout = false;

  [[nodiscard]] double supply() const { return (1.0 + reproduction) * sales; }
};

struct MarketState {
  std::vector<Product> products;
  double psi = 0.0;  // density of potential consumers
  double demand_intercept = 1.0;
  double demand_slope = 1.0;
  double growth_offset = 0.0;  // ξ = ⟨f⟩ from the last replicator step
  double time = 0.0;

  /// d_t(⟨p⟩) = max(0, intercept − slope·⟨p⟩)
  [[nodiscard]] double demand_rate(double mean_price) const;
  void validate() const;
};

struct MarketAggregates {
  double mean_price = 0.0;
  double total_sales = 0.0;
  double total_supply = 0.0;
  double mean_reproduction = 0.0;
  double net_income = 0.0;
  double total_wage = 0.0;
  double total_profit = 0.0;
  double alpha = 0.0;
  double mean_unit_cost = 0.0;
  double mean_unit_profit = 0.0;
  /// |⟨cγ⟩ − ⟨c⟩⟨γ⟩|·y_t, the exact gap of g_t ≈ (⟨π⟩ − ⟨c⟩⟨γ⟩)·y_t.
  double profit_approx_bound = 0.0;
  double psi = 0.0;
  double demand = 0.0;
  double mean_fitness = 0.0;
  double total_inventory = 0.0;
};

struct AgentLedger {
  std::string name;
  double opening_money = 0.0;  // balance at the start of the step
  double money = 0.0;
  double inflow = 0.0;
  double outflow = 0.0;
  double taxes_net = 0.0;  // received transfers minus taxes paid
};

struct Capacity {
  double output = 0.0;
  bool degenerate = false;  // c0 == 0: monotone cost curve, no interior minimum
};

Capacity capacity_limit(const CostCurve& costs);
double unit_cost(const CostCurve& costs, double output);
double mean_price(std::span<const Product> products);
double purchase_flow(const Product& product, double psi);
double product_fitness(const Product& product, double psi_at_price);

/// Instantaneous share growth ds_k/dτ = s_k (f_k − ⟨f⟩).
std::vector<double> replicator_rates(const MarketState& state);
std::vector<double> sales_shares(const MarketState& state);

/// y_k ← y_k·exp((f_k + shock_k − ⟨f⟩)·dt), then rescaled to the prior total.
MarketState replicator_step(const MarketState& state, double dt,
                            std::span<const double> fitness_shocks = {});
MarketState inventory_step(const MarketState& state, double dt);
MarketState consumer_balance_step(const MarketState& state, double dt);

MarketAggregates compute_aggregates(const MarketState& state);
double cobb_douglas_ratio(const MarketAggregates& agg);

struct ConservationReport {
  double max_violation = 0.0;        // largest per-agent |Δm − (i − o)·dt|
  double aggregate_violation = 0.0;  // |Σ(i − o)|·dt
  double relative_violation = 0.0;   // aggregate / Σm
  double tax_imbalance = 0.0;        // |Σ taxes_net|
  std::vector<std::size_t> offending;
  bool passed = true;
};

ConservationReport conservation_check(std::span<const AgentLedger> ledgers, double dt,
                                      double tolerance = 1e-9);

struct ProbeResult {
  std::optional<double> decay_rate;  // empty for a zero perturbation
  double expected_rate = 0.0;        // ⟨η⟩_z·z_t
  bool slow_relaxation = false;
  Trajectory deviation;              // δψ over time
};

/// Perturbs ψ around its stationary value at fixed inventories and constant
/// demand, integrates the consumer balance and fits the exponential decay.
ProbeResult stability_probe(const MarketState& state, double delta_psi0, double dt,
                            std::size_t n_steps);

/// A closed economy: firms own one product each, plus employees and
/// unemployed agents financed by a balanced tax transfer.
struct Economy {
  MarketState market;
  std::vector<AgentLedger> ledgers;  // firms, then employees, then unemployed
  std::size_t n_employees = 1;
  std::size_t n_unemployed = 1;
  double tax_rate = 0.1;
};

Economy make_economy(MarketState market, std::size_t n_employees, std::size_t n_unemployed,
                     double tax_rate, double initial_money);

struct StepRecord {
  MarketAggregates aggregates;  // of the state the flows were computed from
  ConservationReport conservation;
};

StepRecord step_economy(Economy& economy, double dt, std::span<const double> fitness_shocks = {});

}  // namespace incomelab::market
