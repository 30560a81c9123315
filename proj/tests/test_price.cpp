#include <doctest.h>

#include <cmath>
#include <vector>

#include "incomelab/estimation.hpp"
#include "incomelab/kernels.hpp"
#include "incomelab/price.hpp"
#include "incomelab/rng.hpp"

using namespace incomelab;
using namespace incomelab::price;

namespace {

PriceFluctParams params(double b, double d, Regime regime = Regime::competitive) {
  PriceFluctParams p;
  p.relaxation = b;
  p.amplitude = d;
  p.regime = regime;
  return p;
}

}  // namespace

TEST_CASE("price_fluct_step examples") {
  CHECK(price_fluct_step(0.0, params(0.5, 1.0), 1.0, 0.0) == 0.0);
  CHECK(price_fluct_step(1.0, params(0.5, 1.0), 1.0, 0.0) == 0.5);
  CHECK(price_fluct_step(-1.0, params(0.5, 1.0), 1.0, 0.0) == -0.5);
  CHECK(price_fluct_step(1.0, params(0.5, 1.0, Regime::non_competitive), 1.0, 0.0) == 1.5);
  // Noise variance per step is D·dt.
  CHECK(price_fluct_step(0.0, params(1.0, 2.0), 0.5, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(price_fluct_step(0.0, params(1.0, 1.0), 0.0, 0.0), InvalidArgument);
}

TEST_CASE("single step equals the ensemble kernel bit for bit") {
  const auto p = params(1.3, 0.7);
  const auto proc = as_additive_process(p);
  const double dt = 0.01;
  std::vector<double> x = {0.0, 0.25, -1.5, 3.0};
  const std::vector<double> noise = {0.3, -1.1, 0.7, 2.2};
  std::vector<double> expected;
  for (std::size_t i = 0; i < x.size(); ++i) expected.push_back(price_fluct_step(x[i], p, dt, noise[i]));
  kernels::sign_drift_noise_step(x, noise, proc.rate * dt, std::sqrt(2.0 * proc.amplitude * dt));
  CHECK(x == expected);
}

TEST_CASE("laplace density, cdf and moments") {
  const auto p = params(1.0, 2.0);
  CHECK(laplace_density(0.0, p) == 0.5);
  CHECK(laplace_density(1.0, p) / laplace_density(0.0, p) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(laplace_density(-2.5, p) == laplace_density(2.5, p));
  CHECK(laplace_variance(p) == 2.0);
  CHECK(laplace_mean_abs(p) == 1.0);
  CHECK(laplace_cdf(0.0, p) == 0.5);
  CHECK(laplace_cdf(1.0, p) == doctest::Approx(1.0 - 0.5 * std::exp(-1.0)).epsilon(1e-15));

  // ln density is a tent with slopes ±2b/D.
  const auto q = params(0.7, 1.9);
  const double slope = (std::log(laplace_density(3.0, q)) - std::log(laplace_density(1.0, q))) / 2.0;
  CHECK(slope == doctest::Approx(-2.0 * 0.7 / 1.9).epsilon(1e-12));

  // Normalization by midpoint quadrature over ±40 scale lengths.
  double mass = 0.0;
  const double h = 1e-3;
  for (double x = -40.0 + h / 2; x < 40.0; x += h) mass += laplace_density(x, p) * h;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

  const auto nc = params(1.0, 2.0, Regime::non_competitive);
  CHECK_THROWS_AS(laplace_density(0.0, nc), NoStationaryDistribution);
  CHECK_THROWS_AS(laplace_mean_abs(nc), NoStationaryDistribution);
  CHECK_THROWS_AS(laplace_density(0.0, params(0.0, 1.0)), InvalidArgument);
}

TEST_CASE("subbotin tail density") {
  SubbotinTailParams s;
  CHECK(subbotin_tail_density(1.0, s) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(subbotin_tail_density(-0.3, s) == subbotin_tail_density(0.3, s));
  CHECK(std::log(subbotin_tail_density(2.0, s)) - std::log(subbotin_tail_density(1.0, s)) ==
        doctest::Approx(-1.0 - std::log(2.0)).epsilon(1e-14));
  CHECK(s.beta == 0.15);
  CHECK_THROWS_AS(subbotin_tail_density(0.0, s), DomainError);
}

TEST_CASE("generic model view: stationary density is the Laplace law") {
  const auto p = params(1.0, 2.0);
  std::vector<double> grid;
  for (int i = 0; i <= 4000; ++i) grid.push_back(-20.0 + 0.01 * i);
  const auto dens = sde::stationary_density(as_drift_diffusion(p), as_additive_process(p).amplitude, grid);
  // Exact shape on each side of the kink; the kink at 0 costs O(grid step) overall.
  for (auto [i, j] : {std::pair<std::size_t, std::size_t>{2500, 3999}, {0, 1000}, {2100, 2900}})
    CHECK(dens[i] / dens[j] == doctest::Approx(laplace_density(grid[i], p) / laplace_density(grid[j], p)).epsilon(1e-12));
  for (std::size_t i : {0u, 1000u, 2000u, 2500u, 3999u})
    CHECK(dens[i] == doctest::Approx(laplace_density(grid[i], p)).epsilon(0.01));
}

TEST_CASE("competitive ensemble converges to the Laplace law") {
  const auto p = params(1.0, 2.0);
  sde::EnsembleSchedule s;
  s.n_replicas = 5000;
  s.dt = 0.01;
  s.burn_in_steps = 1000;
  s.n_samples = 60;
  s.thin = 100;
  const auto dp = simulate_ensemble(p, s, 7);
  const auto m = estimation::moments(dp);
  CHECK(m.mean_abs == doctest::Approx(laplace_mean_abs(p)).epsilon(0.03));
  CHECK(estimation::ks_statistic(dp, [&](double x) { return laplace_cdf(x, p); }) < 0.02);
}

TEST_CASE("non-competitive ensemble broadens") {
  const auto p = params(0.5, 1.0, Regime::non_competitive);
  sde::EnsembleSchedule s;
  s.n_replicas = 2000;
  s.dt = 0.01;
  s.burn_in_steps = 0;
  s.n_samples = 8;
  s.thin = 100;
  const auto dp = simulate_ensemble(p, s, 3);
  double prev = -1.0;
  for (std::size_t k = 0; k < s.n_samples; ++k) {
    double acc = 0.0;
    for (std::size_t r = 0; r < s.n_replicas; ++r) acc += std::fabs(dp[k * s.n_replicas + r]);
    const double mean_abs = acc / static_cast<double>(s.n_replicas);
    CHECK(mean_abs > prev);
    prev = mean_abs;
  }
}
