#include "incomelab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include "incomelab/estimation.hpp"
#include "incomelab/firms.hpp"
#include "incomelab/income.hpp"
#include "incomelab/io.hpp"
#include "incomelab/market.hpp"
#include "incomelab/price.hpp"
#include "incomelab/rng.hpp"
#include "incomelab/sde.hpp"

namespace incomelab::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// A config block with a fixed key set.
class Block {
 public:
  Block(const json& j, std::string where, std::set<std::string> keys)
      : j_(j.is_null() ? json::object() : j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
    for (const auto& [key, value] : j_.items())
      if (!keys.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
  }

  [[nodiscard]] bool has(const std::string& key) const {
    return j_.contains(key) && !j_[key].is_null();
  }
  [[nodiscard]] const json& raw(const std::string& key) const { return j_[key]; }

  [[nodiscard]] double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    if (!j_[key].is_number()) throw ConfigError(where_ + ": '" + key + "' must be a number");
    return j_[key].get<double>();
  }

  [[nodiscard]] std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_[key];
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_float() && v.get<double>() >= 0.0 &&
        v.get<double>() == std::floor(v.get<double>()))
      return static_cast<std::size_t>(v.get<double>());
    throw ConfigError(where_ + ": '" + key + "' must be a non-negative integer");
  }

  [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!j_[key].is_string()) throw ConfigError(where_ + ": '" + key + "' must be a string");
    return j_[key].get<std::string>();
  }

 private:
  json j_;
  std::string where_;
};

void write_table(const GlobalOptions& g, const std::string& stem, const io::Table& table) {
  if (g.format == "json")
    io::write_atomic(g.out / (stem + ".json"), io::dump(io::to_json(table)));
  else
    io::write_atomic(g.out / (stem + ".csv"), io::to_csv(table));
}

void write_json(const GlobalOptions& g, const std::string& name, const ordered_json& j) {
  io::write_atomic(g.out / name, io::dump(j));
}

ordered_json moments_json(const estimation::Moments& m) {
  ordered_json j;
  j["mean"] = m.mean;
  j["variance"] = m.variance;
  j["skewness"] = m.skewness;
  j["mean_abs"] = m.mean_abs;
  return j;
}

sde::EnsembleSchedule schedule_from(const Block& b) {
  sde::EnsembleSchedule s;
  s.n_replicas = b.count("n_replicas", 10000);
  s.dt = b.number("dt", 0.01);
  s.burn_in_steps = b.count("burn_in_steps", 1000);
  s.n_samples = b.count("n_samples", 100);
  s.thin = b.count("thin", 100);
  if (s.n_replicas == 0 || s.n_samples == 0 || s.thin == 0 || !(s.dt > 0.0))
    throw ConfigError("schedule: n_replicas, n_samples, thin and dt must be positive");
  return s;
}

const std::set<std::string> kScheduleKeys = {"n_replicas", "dt", "burn_in_steps", "n_samples",
                                             "thin"};

std::set<std::string> with_schedule(std::set<std::string> keys) {
  keys.insert(kScheduleKeys.begin(), kScheduleKeys.end());
  return keys;
}

market::Product product_from(const json& j, std::size_t k) {
  const Block b(j, "simulate-market.products[" + std::to_string(k) + "]",
                {"price", "eta", "gamma", "z0", "y0", "c0", "c1", "c2"});
  market::Product p;
  p.price = b.number("price", 1.0);
  p.preference = b.number("eta", 1.0);
  p.reproduction = b.number("gamma", 0.02);
  p.inventory = b.number("z0", 1.0);
  p.sales = b.number("y0", 1.0);
  p.costs = {b.number("c0", 0.1), b.number("c1", 0.5), b.number("c2", 0.05)};
  return p;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate-market", "simulate-firms",
                                                 "simulate-wages",  "simulate-prices",
                                                 "sample",          "fit",
                                                 "oracle-entropy"};
  return names;
}

nlohmann::json load_config_block(const std::filesystem::path& path, const std::string& command) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  const auto& names = command_names();
  for (const auto& [key, value] : j.items())
    if (std::find(names.begin(), names.end(), key) == names.end())
      throw ConfigError("config: unknown command block '" + key + "'");
  return j.contains(command) ? j[command] : json::object();
}

int cmd_simulate_market(const GlobalOptions& g, const json& block) {
  const Block b(block, "simulate-market",
                {"products", "psi", "demand_intercept", "demand_slope", "n_steps", "dt",
                 "n_employees", "n_unemployed", "tax_rate", "initial_money", "shock_amplitude",
                 "record_every"});
  market::MarketState state;
  if (b.has("products")) {
    const auto& arr = b.raw("products");
    if (!arr.is_array() || arr.empty()) throw ConfigError("simulate-market: products must be a non-empty array");
    for (std::size_t k = 0; k < arr.size(); ++k) state.products.push_back(product_from(arr[k], k));
  } else {
    for (double price : {1.0, 1.2, 0.9}) {
      market::Product p = product_from(json::object(), 0);
      p.price = price;
      state.products.push_back(p);
    }
  }
  state.psi = b.number("psi", 1.0);
  state.demand_slope = b.number("demand_slope", 1.0);
  double y = 0.0;
  for (const auto& p : state.products) y += p.sales;
  // Without an explicit intercept the demand balances the initial sales.
  state.demand_intercept = b.number(
      "demand_intercept", y + state.demand_slope * market::mean_price(state.products));
  state.validate();

  const std::size_t n_steps = b.count("n_steps", 10000);
  const double dt = b.number("dt", 0.01);
  const std::size_t every = std::max<std::size_t>(1, b.count("record_every", 1));
  const double shock_amplitude = b.number("shock_amplitude", 0.0);
  if (!(dt > 0.0)) throw ConfigError("simulate-market: dt must be positive");
  if (shock_amplitude < 0.0) throw ConfigError("simulate-market: shock_amplitude must be >= 0");

  auto economy = market::make_economy(state, b.count("n_employees", 10), b.count("n_unemployed", 2),
                                      b.number("tax_rate", 0.1), b.number("initial_money", 100.0));
  const std::size_t n_products = state.products.size();

  io::Table table;
  table.columns = {"time",         "mean_price",   "total_sales",      "total_supply",
                   "mean_reproduction", "net_income", "total_wage",    "total_profit",
                   "alpha",        "mean_unit_cost", "mean_unit_profit", "profit_approx_bound",
                   "psi",          "demand",       "mean_fitness",     "total_inventory"};
  for (std::size_t k = 0; k < n_products; ++k) table.columns.push_back("share_" + std::to_string(k));

  ReplicaStream stream(g.seed);
  std::vector<double> shocks;
  double worst_relative = 0.0, worst_agent = 0.0, worst_tax = 0.0;
  std::size_t failed = 0;
  for (std::size_t step = 0; step < n_steps; ++step) {
    const double time = economy.market.time;
    const auto shares = market::sales_shares(economy.market);
    if (shock_amplitude > 0.0) {
      shocks.resize(n_products);
      for (auto& s : shocks) s = std::sqrt(2.0 * shock_amplitude / dt) * stream.normal();
    }
    const auto rec = market::step_economy(economy, dt, shocks);
    worst_relative = std::max(worst_relative, rec.conservation.relative_violation);
    worst_agent = std::max(worst_agent, rec.conservation.max_violation);
    worst_tax = std::max(worst_tax, rec.conservation.tax_imbalance);
    failed += !rec.conservation.passed;
    if (step % every == 0) {
      const auto& a = rec.aggregates;
      std::vector<double> row = {time,         a.mean_price,   a.total_sales,      a.total_supply,
                                 a.mean_reproduction, a.net_income, a.total_wage, a.total_profit,
                                 a.alpha,      a.mean_unit_cost, a.mean_unit_profit,
                                 a.profit_approx_bound, a.psi, a.demand, a.mean_fitness,
                                 a.total_inventory};
      row.insert(row.end(), shares.begin(), shares.end());
      table.add_row(std::move(row));
    }
  }
  write_table(g, "market", table);

  double money = 0.0;
  for (const auto& l : economy.ledgers) money += l.money;
  ordered_json report;
  report["n_steps"] = n_steps;
  report["dt"] = dt;
  report["max_relative_violation"] = worst_relative;
  report["max_agent_violation"] = worst_agent;
  report["max_tax_imbalance"] = worst_tax;
  report["failed_steps"] = failed;
  report["total_money"] = money;
  report["passed"] = failed == 0;
  write_json(g, "conservation.json", report);
  if (failed) {
    std::cerr << "simulate-market: money conservation failed in " << failed << " steps\n";
    return numeric_failure;
  }
  return ok;
}

int cmd_simulate_firms(const GlobalOptions& g, const json& block) {
  const Block b(block, "simulate-firms",
                {"a", "D_prime", "nu", "pi_mean", "n_firms", "x0", "x_min", "dt", "n_steps",
                 "hill_k"});
  firms::FirmGrowthParams params;
  params.attach_rate = b.number("a", 0.05);
  params.noise_amplitude = b.number("D_prime", 0.05);
  params.cash_cow_share = b.number("nu", 1.0);
  params.mean_unit_profit = b.number("pi_mean", 1.0);
  params.validate();
  firms::PopulationRun run;
  run.n_firms = b.count("n_firms", 10000);
  run.x0 = b.number("x0", 1.0);
  run.x_min = b.number("x_min", 0.01);
  run.dt = b.number("dt", 1.0);
  run.n_steps = b.count("n_steps", 2000);
  const std::size_t k = b.count("hill_k", std::max<std::size_t>(10, run.n_firms / 100));

  const auto sizes = firms::simulate_population(params, run, g.seed);
  io::Table table;
  table.columns = {"sales"};
  for (double x : sizes) table.rows.push_back({x});
  write_table(g, "firms", table);

  ordered_json summary;
  const auto predicted = firms::power_law_exponent(params);
  summary["predicted_exponent"] = predicted.value;
  const auto hill = estimation::hill_tail_exponent(sizes, k);
  summary["tail_exponent"] = hill.exponent;
  summary["tail_exponent_std_error"] = hill.std_error;
  summary["tail_exponent_at_quarter_k"] = hill.exponent_at_quarter_k;
  summary["tail_stable"] = hill.stable;
  summary["hill_k"] = k;
  const double ratio = params.attach_rate / params.noise_amplitude;
  const double x_min = run.x_min;
  summary["ks_stationary"] = estimation::ks_statistic(
      std::span<const double>(sizes),
      [&](double x) { return x <= x_min ? 0.0 : 1.0 - std::pow(x / x_min, -ratio); });
  summary["moments"] = moments_json(estimation::moments(sizes));
  summary["attach_rate_large"] = params.attach_rate_large();
  write_json(g, "firms_summary.json", summary);
  return ok;
}

int cmd_simulate_wages(const GlobalOptions& g, const json& block) {
  const Block b(block, "simulate-wages", with_schedule({"zeta", "q_amplitude", "t_wage", "w0"}));
  income::WageProcessParams params;
  params.zeta = b.number("zeta", 1.0);
  params.q_amplitude = b.number("q_amplitude", 1.0);
  params.t_wage = b.number("t_wage", params.q_amplitude / params.zeta);
  params.validate();
  const auto schedule = schedule_from(b);
  const double mean = params.q_amplitude / params.zeta;
  const auto wages =
      sde::run_ensemble(income::wage_process(params), b.number("w0", mean), schedule, g.seed);

  io::Table table;
  table.columns = {"wage"};
  for (double w : wages) table.rows.push_back({w});
  write_table(g, "wages", table);

  ordered_json summary;
  const auto m = estimation::moments(wages);
  summary["mean"] = m.mean;
  summary["stationary_mean"] = mean;
  summary["ks_exponential"] = estimation::ks_statistic(
      std::span<const double>(wages), [&](double w) { return w <= 0.0 ? 0.0 : -std::expm1(-w / mean); });
  summary["moments"] = moments_json(m);
  const auto warning = params.mean_mismatch();
  summary["warning"] = warning ? json(*warning) : json(nullptr);
  write_json(g, "wages_summary.json", summary);
  if (warning) std::cerr << "simulate-wages: " << *warning << "\n";
  return ok;
}

int cmd_simulate_prices(const GlobalOptions& g, const json& block) {
  const Block b(block, "simulate-prices", with_schedule({"b", "D", "regime", "n_windows"}));
  price::PriceFluctParams params;
  params.relaxation = b.number("b", 1.0);
  params.amplitude = b.number("D", 2.0);
  const std::string regime = b.text("regime", "competitive");
  if (regime == "competitive")
    params.regime = price::Regime::competitive;
  else if (regime == "non_competitive")
    params.regime = price::Regime::non_competitive;
  else
    throw ConfigError("simulate-prices: regime must be competitive or non_competitive");
  params.validate();
  const auto schedule = schedule_from(b);
  const auto dp = price::simulate_ensemble(params, schedule, g.seed);

  io::Table table;
  table.columns = {"price_fluctuation"};
  for (double v : dp) table.rows.push_back({v});
  write_table(g, "prices", table);

  ordered_json summary;
  summary["moments"] = moments_json(estimation::moments(dp));

  // E|δp| per window of consecutive sample times.
  const std::size_t n_windows = std::clamp<std::size_t>(b.count("n_windows", 10), 1, schedule.n_samples);
  const std::size_t per_window = schedule.n_samples / n_windows;
  std::vector<double> windows;
  for (std::size_t w = 0; w < n_windows; ++w) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t s = w * per_window; s < (w + 1) * per_window; ++s)
      for (std::size_t r = 0; r < schedule.n_replicas; ++r, ++n)
        acc += std::fabs(dp[s * schedule.n_replicas + r]);
    windows.push_back(acc / static_cast<double>(n));
  }
  summary["windowed_mean_abs"] = windows;

  if (params.regime == price::Regime::non_competitive) {
    summary["no_stationary_distribution"] = true;
  } else {
    summary["no_stationary_distribution"] = false;
    summary["stationary_mean_abs"] = price::laplace_mean_abs(params);
    summary["ks_laplace"] = estimation::ks_statistic(
        std::span<const double>(dp), [&](double x) { return price::laplace_cdf(x, params); });
  }
  write_json(g, "prices_summary.json", summary);
  return ok;
}

int cmd_sample(const GlobalOptions& g, const json& block) {
  const Block b(block, "sample", {"params", "n"});
  const auto params =
      b.has("params") ? io::mixture_params_from_json(b.raw("params")) : income::australia_1994_fit();
  const std::size_t n = b.count("n", 1000);
  const auto sample = income::mixture_sample(params, n, g.seed);
  io::Table table;
  table.columns = {"income"};
  for (double h : sample) table.rows.push_back({h});
  write_table(g, "incomes", table);
  return ok;
}

int cmd_fit(const GlobalOptions& g, const json& block) {
  const Block b(block, "fit", {"data", "init", "freeze", "h_floor", "n_bins", "max_iterations"});
  if (!b.has("data")) throw ConfigError("fit: a data file is required");
  const auto table = io::parse_csv(io::read_file(b.text("data", "")));
  estimation::Histogram hist;
  if (std::find(table.columns.begin(), table.columns.end(), "bin_left") != table.columns.end()) {
    hist = io::histogram_from_table(table);
  } else {
    const auto sample = io::read_income_sample(b.text("data", ""));
    hist = estimation::build_histogram(sample, b.count("n_bins", 1000));
  }

  const auto init = b.has("init") ? io::mixture_params_from_json(b.raw("init"), false)
                                  : income::australia_1994_fit();
  std::set<std::string> frozen;
  if (b.has("freeze")) {
    const auto& arr = b.raw("freeze");
    if (!arr.is_array()) throw ConfigError("fit: freeze must be an array of parameter names");
    const auto& names = estimation::mixture_parameter_names();
    for (const auto& v : arr) {
      if (!v.is_string() || std::find(names.begin(), names.end(), v.get<std::string>()) == names.end())
        throw ConfigError("fit: unknown parameter in freeze list");
      frozen.insert(v.get<std::string>());
    }
  }
  estimation::FitOptions options;
  options.h_floor = b.number("h_floor", 0.0);
  options.max_iterations = b.count("max_iterations", options.max_iterations);

  const auto result = estimation::fit_mixture(hist, init, frozen, options);
  write_json(g, "fit_result.json", io::to_json(result));

  io::Table curve;
  curve.columns = {"h", "empirical", "fitted_total", "capital", "labour", "insurance"};
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double h = hist.midpoint(i);
    if (!(h > 0.0)) continue;
    const auto c = income::mixture_components(h, result.params);
    curve.add_row({h, hist.density[i], c.total(), c.capital, c.labour, c.insurance});
  }
  write_table(g, "fit_curve", curve);
  if (!result.converged) {
    std::cerr << "fit: did not converge after " << result.n_iterations << " iterations\n";
    return fit_not_converged;
  }
  return ok;
}

int cmd_oracle_entropy(const GlobalOptions& g, const json& block) {
  const Block b(block, "oracle-entropy", {"bins", "grid", "mean"});
  std::vector<double> bins;
  if (b.has("bins")) {
    const auto& arr = b.raw("bins");
    if (!arr.is_array()) throw ConfigError("oracle-entropy: bins must be an array");
    for (const auto& v : arr) {
      if (!v.is_number()) throw ConfigError("oracle-entropy: bins must be numbers");
      bins.push_back(v.get<double>());
    }
  } else if (b.has("grid")) {
    const Block grid(b.raw("grid"), "oracle-entropy.grid", {"lo", "hi", "n"});
    const double lo = grid.number("lo", 0.0), hi = grid.number("hi", 1.0);
    const std::size_t n = grid.count("n", 2);
    if (n < 2 || !(hi > lo)) throw ConfigError("oracle-entropy: grid needs n >= 2 and hi > lo");
    for (std::size_t i = 0; i < n; ++i)
      bins.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  } else {
    throw ConfigError("oracle-entropy: give bins or grid");
  }
  if (!b.has("mean")) throw ConfigError("oracle-entropy: mean is required");
  const auto sol = estimation::max_entropy_wage(bins, b.number("mean", 0.0));
  write_json(g, "entropy.json", io::to_json(sol));
  return ok;
}

int run_command(const std::string& command, const GlobalOptions& g, const json& block) {
  try {
    if (g.format != "csv" && g.format != "json") throw ConfigError("--format must be csv or json");
    if (command == "simulate-market") return cmd_simulate_market(g, block);
    if (command == "simulate-firms") return cmd_simulate_firms(g, block);
    if (command == "simulate-wages") return cmd_simulate_wages(g, block);
    if (command == "simulate-prices") return cmd_simulate_prices(g, block);
    if (command == "sample") return cmd_sample(g, block);
    if (command == "fit") return cmd_fit(g, block);
    if (command == "oracle-entropy") return cmd_oracle_entropy(g, block);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return config_error;
  } catch (const io::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return config_error;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return numeric_failure;
  }
}

}  // namespace incomelab::cli
