#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "incomelab/estimation.hpp"
#include "incomelab/rng.hpp"
#include "incomelab/sde.hpp"

using namespace incomelab;
using sde::Boundary;
using sde::DriftDiffusion;

namespace {

DriftDiffusion model(std::function<double(double)> f, std::function<double(double)> g) {
  DriftDiffusion m;
  m.drift = std::move(f);
  m.diffusion = std::move(g);
  return m;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  auto v = linspace(std::log(lo), std::log(hi), n);
  for (auto& x : v) x = std::exp(x);
  return v;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

}  // namespace

TEST_CASE("euler_maruyama_step examples") {
  const auto zero = model([](double) { return 0.0; }, [](double) { return 0.0; });
  CHECK(sde::euler_maruyama_step(1.0, zero, 0.1, 0.7, 1.0) == 1.0);

  const auto decay = model([](double x) { return -x; }, [](double) { return 0.0; });
  CHECK(sde::euler_maruyama_step(2.0, decay, 0.5, 0.3, 1.0) == 1.0);

  const auto geometric = model([](double) { return 0.0; }, [](double x) { return x; });
  CHECK(sde::euler_maruyama_step(1.0, geometric, 1.0, 1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("euler_maruyama_step rejects bad input and reports overflow") {
  const auto blowup = model([](double x) { return x * x; }, [](double) { return 0.0; });
  CHECK_THROWS_AS(sde::euler_maruyama_step(1e200, blowup, 1.0, 0.0, 0.0), NumericError);
  CHECK_THROWS_AS(sde::euler_maruyama_step(1.0, blowup, 0.0, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(sde::euler_maruyama_step(1.0, blowup, 1.0, 0.0, -1.0), InvalidArgument);
}

TEST_CASE("boundaries") {
  auto m = model([](double) { return -1.0; }, [](double) { return 0.0; });
  m.domain_low = 0.0;
  m.boundary = Boundary::reflecting;
  CHECK(sde::euler_maruyama_step(0.25, m, 1.0, 0.0, 0.0) == 0.75);
  m.boundary = Boundary::absorbing;
  bool absorbed = false;
  CHECK(sde::apply_boundary(-0.5, m, &absorbed) == 0.0);
  CHECK(absorbed);
  const auto traj = sde::simulate(m, 0.5, 0.25, 6, {0.0, 1});
  CHECK(traj.values.back() == 0.0);
  CHECK(traj.values[2] == 0.0);
}

TEST_CASE("simulate examples") {
  const auto zero = model([](double) { return 0.0; }, [](double) { return 0.0; });
  const auto flat = sde::simulate(zero, 5.0, 0.1, 10, {1.0, 3});
  REQUIRE(flat.size() == 11);
  for (double v : flat.values) CHECK(v == 5.0);
  for (std::size_t i = 1; i < flat.size(); ++i) CHECK(flat.times[i] > flat.times[i - 1]);

  const auto decay = model([](double x) { return -x; }, [](double) { return 0.0; });
  const auto d = sde::simulate(decay, 1.0, 0.01, 1000, {0.0, 0});
  CHECK(std::fabs(d.back() - std::exp(-10.0)) < 1e-3);

  const auto ou = model([](double x) { return -x; }, [](double) { return 1.0; });
  const auto a = sde::simulate(ou, 0.0, 0.01, 500, {1.0, 42});
  const auto b = sde::simulate(ou, 0.0, 0.01, 500, {1.0, 42});
  const auto c = sde::simulate(ou, 0.0, 0.01, 500, {1.0, 43});
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("gibrat_step") {
  CHECK(sde::gibrat_step(10.0, 0.0, 1.0) == 10.0);
  CHECK(sde::gibrat_step(1.0, std::log(2.0), 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(sde::gibrat_step(1e-300, -1e5, 1.0) > 0.0);
  CHECK(sde::gibrat_step(1.0, -800.0, 1.0) > 0.0);
  CHECK_THROWS_AS(sde::gibrat_step(0.0, 0.0, 1.0), DomainError);
}

TEST_CASE("gibrat ensemble gives a normal log-size") {
  const std::size_t n = 10000, steps = 400;
  std::vector<double> logy(n);
  for (std::size_t r = 0; r < n; ++r) {
    ReplicaStream s(5, r);
    double y = 1.0;
    for (std::size_t i = 0; i < steps; ++i) y = sde::gibrat_step(y, 0.1 * s.normal(), 1.0);
    logy[r] = std::log(y);
  }
  const auto m = estimation::moments(logy);
  const double sd = std::sqrt(m.variance);
  const double d = estimation::ks_statistic(logy, [&](double x) {
    return 0.5 * std::erfc(-(x - m.mean) / (sd * std::numbers::sqrt2));
  });
  // Estimated parameters make the plain Kolmogorov p-value conservative.
  CHECK(estimation::ks_pvalue(d, n) > 0.01);
}

TEST_CASE("stationary density: multiplicative noise gives the power law") {
  const auto grid = logspace(1.0, 1000.0, 20001);
  for (double ratio : {0.5, 1.0, 2.0, 3.0}) {
    CAPTURE(ratio);
    const double a = 0.1 * ratio, d_amp = 0.1;
    auto m = model([a](double x) { return -a * x; }, [](double x) { return x; });
    m.domain_low = 1.0;
    m.boundary = Boundary::reflecting;
    const auto p = sde::stationary_density(m, d_amp, grid);
    const double slope = (std::log(p[15000]) - std::log(p[5000])) / (std::log(grid[15000]) - std::log(grid[5000]));
    CHECK(std::fabs(slope + (1.0 + ratio)) < 1e-6);
    CHECK(trapezoid(grid, p) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("stationary density: Laplace and Gaussian shapes") {
  const auto grid = linspace(-10.0, 10.0, 4001);
  const double b = 1.0, d_amp = 0.5;
  const auto laplace = model([b](double x) { return -b * sign(x); }, [](double) { return 1.0; });
  const auto p = sde::stationary_density(laplace, d_amp, grid);
  // Away from the kink at 0 the trapezoid potential is exact.
  const auto i0 = std::size_t{2200}, i1 = std::size_t{2400};  // x = 1 and x = 2
  CHECK(std::log(p[i1] / p[i0]) == doctest::Approx(-(b / d_amp) * (grid[i1] - grid[i0])).epsilon(1e-12));
  CHECK(std::log(p[1600] / p[1800]) == doctest::Approx(-(b / d_amp) * (grid[1800] - grid[1600])).epsilon(1e-12));
  // The kink itself costs half a grid step of potential.
  const double h = grid[1] - grid[0];
  CHECK(std::log(p[2000] / p[2200]) == doctest::Approx((b / d_amp) * (1.0 - h / 2.0)).epsilon(1e-12));
  CHECK(trapezoid(grid, p) == doctest::Approx(1.0).epsilon(1e-9));

  const auto ou = model([](double x) { return -x; }, [](double) { return 1.0; });
  const auto q = sde::stationary_density(ou, 1.0, grid);
  // Trapezoid potential of a linear force is exact.
  CHECK(std::log(q[2300] / q[2000]) == doctest::Approx(-0.5 * grid[2300] * grid[2300]).epsilon(1e-12));
}

TEST_CASE("stationary density errors") {
  const auto up = model([](double) { return 1.0; }, [](double) { return 1.0; });
  CHECK_THROWS_AS(sde::stationary_density(up, 1.0, linspace(0.0, 10.0, 11)), NonNormalizableError);
  const auto down = model([](double) { return -1.0; }, [](double) { return 1.0; });
  CHECK_THROWS_AS(sde::stationary_density(down, 1.0, linspace(0.0, 10.0, 11)), NonNormalizableError);
  auto walled = down;
  walled.domain_low = 0.0;
  walled.boundary = Boundary::reflecting;
  CHECK_NOTHROW(sde::stationary_density(walled, 1.0, linspace(0.0, 10.0, 11)));
  const auto zero_g = model([](double) { return -1.0; }, [](double) { return 0.0; });
  CHECK_THROWS_AS(sde::stationary_density(zero_g, 1.0, linspace(0.0, 1.0, 5)), DomainError);
  CHECK_THROWS_AS(sde::stationary_density(walled, 1.0, std::vector<double>{1.0}), InvalidArgument);
  CHECK_THROWS_AS(sde::stationary_density(walled, 1.0, std::vector<double>{1.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(sde::stationary_density(walled, 0.0, linspace(0.0, 1.0, 5)), InvalidArgument);
}

TEST_CASE("run_ensemble layout and determinism") {
  sde::AdditiveProcess p;
  p.kind = sde::AdditiveProcess::Drift::constant;
  p.rate = 0.0;
  p.amplitude = 0.0;
  sde::EnsembleSchedule s;
  s.n_replicas = 600;
  s.dt = 0.5;
  s.burn_in_steps = 4;
  s.n_samples = 3;
  s.thin = 2;
  p.rate = 1.0;
  const auto det = sde::run_ensemble(p, 1.0, s, 0);
  REQUIRE(det.size() == 1800);
  CHECK(det[0] == 3.0);
  CHECK(det[600] == 4.0);
  CHECK(det[1799] == 5.0);

  p.amplitude = 1.0;
  const auto a = sde::run_ensemble(p, 0.0, s, 9);
  const auto b = sde::run_ensemble(p, 0.0, s, 9);
  CHECK(a == b);

  // Replica r follows its own stream, independent of how many replicas run.
  s.n_replicas = 300;
  const auto c = sde::run_ensemble(p, 0.0, s, 9);
  CHECK(c[299] == a[299]);
  CHECK(c[2 * 300 + 10] == a[2 * 600 + 10]);
}

TEST_CASE("sign-restoring ensemble matches the stationary density") {
  sde::AdditiveProcess p;
  p.kind = sde::AdditiveProcess::Drift::sign_restoring;
  p.rate = 1.0;
  p.amplitude = 0.5;
  sde::EnsembleSchedule s;
  s.n_replicas = 10000;
  s.dt = 0.01;
  s.burn_in_steps = 1000;
  s.n_samples = 100;
  s.thin = 100;
  const auto x = sde::run_ensemble(p, 0.0, s, 2024);

  // CDF from the analytic density by trapezoid integration on a fine grid.
  const auto grid = linspace(-20.0, 20.0, 40001);
  const auto m = model([](double v) { return -sign(v); }, [](double) { return 1.0; });
  const auto dens = sde::stationary_density(m, p.amplitude, grid);
  std::vector<double> cdf(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (grid[i] - grid[i - 1]);
  const auto lookup = [&](double v) {
    if (v <= grid.front()) return 0.0;
    if (v >= grid.back()) return 1.0;
    const auto it = std::upper_bound(grid.begin(), grid.end(), v);
    const auto i = static_cast<std::size_t>(it - grid.begin());
    const double t = (v - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return std::min(1.0, cdf[i - 1] + t * (cdf[i] - cdf[i - 1]));
  };
  CHECK(estimation::ks_statistic(x, lookup) < 0.02);
}
