#include "incomelab/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace incomelab::market {

double MarketState::demand_rate(double mean_price) const {
  return std::max(0.0, demand_intercept - demand_slope * mean_price);
}

void MarketState::validate() const {
  if (!(psi >= 0.0)) throw InvalidArgument("market: psi must be >= 0");
  if (!(demand_slope > 0.0)) throw InvalidArgument("market: demand_slope must be > 0");
  for (const auto& p : products) {
    if (!(p.price > 0.0)) throw InvalidArgument("market: product price must be > 0");
    if (!(p.preference > 0.0)) throw InvalidArgument("market: product preference must be > 0");
    if (!(p.inventory >= 0.0)) throw InvalidArgument("market: inventory must be >= 0");
    if (!(p.sales >= 0.0)) throw InvalidArgument("market: sales must be >= 0");
    for (double c : {p.costs.c0, p.costs.c1, p.costs.c2})
      if (!(c >= 0.0) || !std::isfinite(c))
        throw InvalidArgument("market: cost coefficients must be finite and >= 0");
  }
}

Capacity capacity_limit(const CostCurve& costs) {
  if (!(costs.c2 > 0.0))
    throw DegenerateCostError("capacity_limit: c2 = 0 leaves no interior cost minimum");
  return {std::sqrt(costs.c0 / costs.c2), costs.c0 == 0.0};
}

double unit_cost(const CostCurve& costs, double output) {
  if (!(output > 0.0)) throw DomainError("unit_cost: output must be positive");
  return costs.c0 / output + costs.c1 + costs.c2 * output;
}

double mean_price(std::span<const Product> products) {
  double sales = 0.0;
  double revenue = 0.0;
  for (const auto& p : products) {
    sales += p.sales;
    revenue += p.sales * p.price;
  }
  if (!(sales > 0.0)) throw EmptyMarketError("mean_price: total sales are zero");
  return revenue / sales;
}

double purchase_flow(const Product& product, double psi) {
  return product.preference * product.inventory * psi;
}

double product_fitness(const Product& product, double psi_at_price) {
  return psi_at_price * product.preference * product.reproduction;
}

namespace {

double total_sales(const MarketState& state) {
  double y = 0.0;
  for (const auto& p : state.products) y += p.sales;
  return y;
}

double mean_fitness(const MarketState& state, std::span<const double> fitness) {
  double y = 0.0;
  double yf = 0.0;
  for (std::size_t k = 0; k < state.products.size(); ++k) {
    y += state.products[k].sales;
    yf += state.products[k].sales * fitness[k];
  }
  if (!(y > 0.0)) throw EmptyMarketError("replicator: total sales are zero");
  return yf / y;
}

}  // namespace

std::vector<double> sales_shares(const MarketState& state) {
  const double y = total_sales(state);
  if (!(y > 0.0)) throw EmptyMarketError("sales_shares: total sales are zero");
  std::vector<double> shares;
  shares.reserve(state.products.size());
  for (const auto& p : state.products) shares.push_back(p.sales / y);
  return shares;
}

std::vector<double> replicator_rates(const MarketState& state) {
  std::vector<double> f;
  for (const auto& p : state.products) f.push_back(product_fitness(p, state.psi));
  const double mean_f = mean_fitness(state, f);
  auto shares = sales_shares(state);
  for (std::size_t k = 0; k < shares.size(); ++k) shares[k] *= f[k] - mean_f;
  return shares;
}

MarketState replicator_step(const MarketState& state, double dt,
                            std::span<const double> fitness_shocks) {
  if (!(dt > 0.0)) throw InvalidArgument("replicator_step: dt must be positive");
  if (!fitness_shocks.empty() && fitness_shocks.size() != state.products.size())
    throw InvalidArgument("replicator_step: one fitness shock per product required");
  MarketState next = state;
  const std::size_t n = state.products.size();
  std::vector<double> f(n);
  for (std::size_t k = 0; k < n; ++k) {
    f[k] = product_fitness(state.products[k], state.psi);
    if (!fitness_shocks.empty()) f[k] += fitness_shocks[k];
  }
  const double mean_f = mean_fitness(state, f);
  const double before = total_sales(state);
  double after = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    next.products[k].sales = state.products[k].sales * std::exp((f[k] - mean_f) * dt);
    after += next.products[k].sales;
  }
  // The slow mode fixes total sales on the short time scale.
  const double scale = before / after;
  for (auto& p : next.products) p.sales *= scale;
  next.growth_offset = mean_f;
  return next;
}

MarketState inventory_step(const MarketState& state, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("inventory_step: dt must be positive");
  MarketState next = state;
  for (auto& p : next.products) {
    const double z = p.inventory + (p.supply() - p.sales) * dt;
    p.stockout = z < 0.0;
    p.inventory = p.stockout ? 0.0 : z;
  }
  return next;
}

MarketState consumer_balance_step(const MarketState& state, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("consumer_balance_step: dt must be positive");
  MarketState next = state;
  const double demand = state.demand_rate(mean_price(state.products));
  next.psi = std::max(0.0, state.psi + (demand - total_sales(state)) * dt);
  return next;
}

MarketAggregates compute_aggregates(const MarketState& state) {
  MarketAggregates agg;
  double y = 0.0, revenue = 0.0, supply = 0.0, y_gamma = 0.0, y_cost = 0.0, y_cost_gamma = 0.0;
  double wage = 0.0, profit = 0.0, inventory = 0.0;
  for (const auto& p : state.products) {
    const double s = p.supply();
    const double bill = p.costs.total(s);
    y += p.sales;
    revenue += p.price * p.sales;
    supply += s;
    y_gamma += p.sales * p.reproduction;
    if (p.sales > 0.0) {
      const double c = unit_cost(p.costs, s);
      y_cost += p.sales * c;
      y_cost_gamma += p.sales * c * p.reproduction;
    }
    wage += bill;
    profit += p.price * p.sales - bill;
    inventory += p.inventory;
  }
  if (!(y > 0.0)) throw EmptyMarketError("compute_aggregates: total sales are zero");
  agg.total_sales = y;
  agg.total_supply = supply;
  agg.mean_price = revenue / y;
  agg.mean_reproduction = y_gamma / y;
  agg.net_income = revenue;
  agg.total_wage = wage;
  agg.total_profit = profit;
  agg.alpha = revenue > 0.0 ? wage / revenue : 0.0;
  agg.mean_unit_cost = y_cost / y;
  agg.mean_unit_profit = agg.mean_price - agg.mean_unit_cost;
  agg.profit_approx_bound =
      std::fabs(y_cost_gamma / y - agg.mean_unit_cost * agg.mean_reproduction) * y;
  agg.psi = state.psi;
  agg.demand = state.demand_rate(agg.mean_price);
  agg.mean_fitness = state.growth_offset;
  agg.total_inventory = inventory;
  return agg;
}

double cobb_douglas_ratio(const MarketAggregates& agg) {
  if (!(agg.net_income > 0.0)) throw DomainError("cobb_douglas_ratio: net income must be > 0");
  return agg.total_wage / agg.net_income;
}

ConservationReport conservation_check(std::span<const AgentLedger> ledgers, double dt,
                                      double tolerance) {
  if (!(dt > 0.0)) throw InvalidArgument("conservation_check: dt must be positive");
  ConservationReport report;
  double net_flow = 0.0;
  double money = 0.0;
  double taxes = 0.0;
  for (const auto& l : ledgers) {
    net_flow += l.inflow - l.outflow;
    money += std::fabs(l.money);
    taxes += l.taxes_net;
  }
  const double scale = money > 0.0 ? money : 1.0;
  for (std::size_t j = 0; j < ledgers.size(); ++j) {
    const auto& l = ledgers[j];
    const double v = std::fabs((l.money - l.opening_money) - (l.inflow - l.outflow) * dt);
    report.max_violation = std::max(report.max_violation, v);
    if (v > tolerance * scale) report.offending.push_back(j);
  }
  report.aggregate_violation = std::fabs(net_flow) * dt;
  report.relative_violation = report.aggregate_violation / scale;
  report.tax_imbalance = std::fabs(taxes);
  report.max_violation = std::max(report.max_violation, report.aggregate_violation);
  report.passed = report.offending.empty() && report.relative_violation <= tolerance &&
                  report.tax_imbalance <= tolerance * scale;
  return report;
}

ProbeResult stability_probe(const MarketState& state, double delta_psi0, double dt,
                            std::size_t n_steps) {
  if (!(dt > 0.0)) throw InvalidArgument("stability_probe: dt must be positive");
  if (n_steps < 2) throw InvalidArgument("stability_probe: need at least two steps");
  double z_total = 0.0;
  double eta_z = 0.0;
  for (const auto& p : state.products) {
    z_total += p.inventory;
    eta_z += p.preference * p.inventory;
  }
  ProbeResult result;
  result.expected_rate = eta_z;  // ⟨η⟩_z·z_t = Σ η_k z_k
  const double demand =
      total_sales(state) > 0.0 ? state.demand_rate(mean_price(state.products)) : state.demand_intercept;
  if (z_total <= 1e-12) {
    result.slow_relaxation = true;
    result.deviation.times.assign(1, 0.0);
    result.deviation.values.assign(1, delta_psi0);
    return result;
  }
  const double psi_s = demand / eta_z;

  double psi = psi_s + delta_psi0;
  auto& dev = result.deviation;
  dev.times.push_back(0.0);
  dev.values.push_back(delta_psi0);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    double purchases = 0.0;
    for (const auto& p : state.products) purchases += purchase_flow(p, psi);
    psi += (demand - purchases) * dt;
    dev.times.push_back(static_cast<double>(i) * dt);
    dev.values.push_back(psi - psi_s);
  }
  result.slow_relaxation = eta_z * dt * static_cast<double>(n_steps) < 1.0;
  if (delta_psi0 == 0.0) return result;

  // Least-squares slope of ln|δψ| against time over the points that still
  // carry signal above round-off.
  const double cutoff = std::fabs(delta_psi0) * 1e-10;
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    const double a = std::fabs(dev.values[i]);
    if (a <= cutoff) break;
    const double t = dev.times[i];
    const double l = std::log(a);
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
    ++m;
  }
  if (m < 2) throw NumericError("stability_probe: perturbation vanished before it could be fitted");
  const double mm = static_cast<double>(m);
  const double slope = (mm * stl - st * sl) / (mm * stt - st * st);
  result.decay_rate = -slope;
  return result;
}

Economy make_economy(MarketState market, std::size_t n_employees, std::size_t n_unemployed,
                     double tax_rate, double initial_money) {
  market.validate();
  if (n_employees == 0) throw InvalidArgument("economy: need at least one employee");
  if (!(tax_rate >= 0.0 && tax_rate < 1.0)) throw InvalidArgument("economy: tax_rate in [0,1)");
  if (!(initial_money > 0.0)) throw InvalidArgument("economy: initial_money must be > 0");
  Economy e;
  e.n_employees = n_employees;
  e.n_unemployed = n_unemployed;
  e.tax_rate = tax_rate;
  const std::size_t n_agents = market.products.size() + n_employees + n_unemployed;
  const double share = initial_money / static_cast<double>(n_agents);
  for (std::size_t k = 0; k < market.products.size(); ++k)
    e.ledgers.push_back({"firm_" + std::to_string(k), share, share, 0, 0, 0});
  for (std::size_t j = 0; j < n_employees; ++j)
    e.ledgers.push_back({"employee_" + std::to_string(j), share, share, 0, 0, 0});
  for (std::size_t j = 0; j < n_unemployed; ++j)
    e.ledgers.push_back({"unemployed_" + std::to_string(j), share, share, 0, 0, 0});
  e.market = std::move(market);
  return e;
}

StepRecord step_economy(Economy& economy, double dt, std::span<const double> fitness_shocks) {
  auto& market = economy.market;
  auto& ledgers = economy.ledgers;
  const std::size_t n_firms = market.products.size();
  StepRecord record;
  record.aggregates = compute_aggregates(market);
  const auto& agg = record.aggregates;

  for (auto& l : ledgers) {
    l.opening_money = l.money;
    l.inflow = l.outflow = l.taxes_net = 0.0;
  }

  // Goods circuit: revenue to firms, cost bill paid out as wages.
  double tax_pool = 0.0;
  for (std::size_t k = 0; k < n_firms; ++k) {
    const auto& p = market.products[k];
    const double revenue = p.price * p.sales;
    const double bill = p.costs.total(p.supply());
    const double tax = economy.tax_rate * std::max(0.0, revenue - bill);
    ledgers[k].inflow += revenue;
    ledgers[k].outflow += bill + tax;
    ledgers[k].taxes_net -= tax;
    tax_pool += tax;
  }
  const double wage_each = agg.total_wage / static_cast<double>(economy.n_employees);
  for (std::size_t j = 0; j < economy.n_employees; ++j) {
    auto& l = ledgers[n_firms + j];
    const double tax = economy.tax_rate * wage_each;
    l.inflow += wage_each;
    l.outflow += tax;
    l.taxes_net -= tax;
    tax_pool += tax;
  }
  // Balanced government budget: every tax unit is transferred on.
  const std::size_t transfer_first = economy.n_unemployed > 0 ? n_firms + economy.n_employees : 0;
  const std::size_t transfer_count = economy.n_unemployed > 0 ? economy.n_unemployed : ledgers.size();
  const double transfer_each = tax_pool / static_cast<double>(transfer_count);
  for (std::size_t j = 0; j < transfer_count; ++j) {
    auto& l = ledgers[transfer_first + j];
    l.inflow += transfer_each;
    l.taxes_net += transfer_each;
  }
  // Expenditure for the good is spread over agents in proportion to holdings.
  double holdings = 0.0;
  for (const auto& l : ledgers) holdings += std::max(0.0, l.money);
  for (auto& l : ledgers)
    l.outflow += holdings > 0.0 ? agg.net_income * std::max(0.0, l.money) / holdings : 0.0;
  for (auto& l : ledgers) l.money = l.opening_money + (l.inflow - l.outflow) * dt;
  record.conservation = conservation_check(ledgers, dt);

  MarketState next = inventory_step(market, dt);
  next = consumer_balance_step(next, dt);
  next = replicator_step(next, dt, fitness_shocks);
  next.time = market.time + dt;
  market = std::move(next);
  return record;
}

}  // namespace incomelab::market
