#include "incomelab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "incomelab/kernels.hpp"
#include "incomelab/parallel.hpp"
#include "incomelab/rng.hpp"

namespace incomelab::sde {

double apply_boundary(double x, const DriftDiffusion& model, bool* absorbed) {
  if (absorbed) *absorbed = false;
  if (x >= model.domain_low) return x;
  switch (model.boundary) {
    case Boundary::reflecting:
      return 2.0 * model.domain_low - x;
    case Boundary::absorbing:
      if (absorbed) *absorbed = true;
      return model.domain_low;
    case Boundary::none:
      break;
  }
  return x;
}

double euler_maruyama_step(double x, const DriftDiffusion& model, double dt, double noise_draw,
                           double amplitude) {
  if (!(dt > 0.0)) throw InvalidArgument("euler_maruyama_step: dt must be positive");
  if (amplitude < 0.0) throw InvalidArgument("euler_maruyama_step: amplitude must be >= 0");
  const double f = model.drift ? model.drift(x) : 0.0;
  const double g = model.diffusion ? model.diffusion(x) : 0.0;
  const double next = x + f * dt + g * std::sqrt(2.0 * amplitude * dt) * noise_draw;
  if (!std::isfinite(next)) {
    std::ostringstream msg;
    msg << "numeric overflow in Euler-Maruyama step (x=" << x << ", F=" << f << ", G=" << g
        << ", dt=" << dt << ", draw=" << noise_draw << ", amplitude=" << amplitude << ")";
    throw NumericError(msg.str());
  }
  return apply_boundary(next, model);
}

Trajectory simulate(const DriftDiffusion& model, double x0, double dt, std::size_t n_steps,
                    const NoiseSpec& noise) {
  if (!(dt > 0.0)) throw InvalidArgument("simulate: dt must be positive");
  if (x0 < model.domain_low) throw DomainError("simulate: x0 lies below the model domain");
  ReplicaStream stream(noise.seed, 0);
  Trajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.values.reserve(n_steps + 1);
  traj.times.push_back(0.0);
  traj.values.push_back(x0);
  double x = x0;
  bool absorbed = model.boundary == Boundary::absorbing && x0 <= model.domain_low;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const double draw = stream.normal();
    if (!absorbed) {
      x = euler_maruyama_step(x, model, dt, draw, noise.amplitude);
      absorbed = model.boundary == Boundary::absorbing && x <= model.domain_low;
    }
    traj.times.push_back(static_cast<double>(i) * dt);
    traj.values.push_back(x);
  }
  return traj;
}

double gibrat_step(double y, double delta_f, double dt) {
  if (!(y > 0.0)) throw DomainError("gibrat_step: y must be positive");
  const double next = y * std::exp(delta_f * dt);
  // Underflow of an extreme shrink still has to keep the size positive.
  return next > 0.0 ? next : std::numeric_limits<double>::denorm_min();
}

std::vector<double> stationary_density(const DriftDiffusion& model, double amplitude,
                                       std::span<const double> grid) {
  if (!(amplitude > 0.0)) throw InvalidArgument("stationary_density: amplitude must be positive");
  if (grid.size() < 2) throw InvalidArgument("stationary_density: grid needs at least two points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument("stationary_density: grid must increase");

  const std::size_t n = grid.size();
  std::vector<double> integrand(n);
  std::vector<double> log_g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = model.diffusion ? model.diffusion(grid[i]) : 0.0;
    if (!(g > 0.0)) throw DomainError("stationary_density: G(x) must be positive on the grid");
    const double f = model.drift ? model.drift(grid[i]) : 0.0;
    integrand[i] = f / (g * g);
    log_g[i] = std::log(g);
  }

  // log P = (1/D) ∫ F/G² − ln G, potential accumulated by the trapezoid rule.
  std::vector<double> log_p(n);
  double potential = 0.0;
  log_p[0] = -log_g[0];
  for (std::size_t i = 1; i < n; ++i) {
    potential += 0.5 * (integrand[i] + integrand[i - 1]) * (grid[i] - grid[i - 1]);
    log_p[i] = potential / amplitude - log_g[i];
  }
  const auto max_it = std::max_element(log_p.begin(), log_p.end());
  const double peak = *max_it;
  if (!std::isfinite(peak)) throw NonNormalizableError("stationary_density: non-finite density");

  // A density that peaks on an open end of the grid is growing towards an
  // unbounded side of the domain.
  const auto argmax = static_cast<std::size_t>(max_it - log_p.begin());
  const bool lower_is_wall = model.boundary != Boundary::none && grid[0] <= model.domain_low;
  if (argmax == n - 1 || (argmax == 0 && !lower_is_wall))
    throw NonNormalizableError(
        "stationary_density: density does not decay towards an open end of the grid");

  std::vector<double> density(n);
  for (std::size_t i = 0; i < n; ++i) density[i] = std::exp(log_p[i] - peak);
  double mass = 0.0;
  for (std::size_t i = 1; i < n; ++i)
    mass += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw NonNormalizableError("stationary_density: normalization diverges");
  for (double& d : density) d /= mass;
  return density;
}

namespace {

constexpr std::size_t kBlock = 256;

void advance(const AdditiveProcess& p, std::span<double> x, std::span<const double> noise,
             double dt, double noise_scale) {
  if (p.kind == AdditiveProcess::Drift::constant)
    kernels::drift_noise_step(x, noise, p.rate * dt, noise_scale);
  else
    kernels::sign_drift_noise_step(x, noise, p.rate * dt, noise_scale);
  if (p.reflect) kernels::reflect_below(x, p.floor);
}

}  // namespace

std::vector<double> run_ensemble(const AdditiveProcess& process, std::span<const double> x0,
                                 const EnsembleSchedule& schedule, std::uint64_t seed) {
  if (!(schedule.dt > 0.0)) throw InvalidArgument("run_ensemble: dt must be positive");
  if (process.amplitude < 0.0) throw InvalidArgument("run_ensemble: amplitude must be >= 0");
  if (schedule.n_samples == 0 || schedule.thin == 0)
    throw InvalidArgument("run_ensemble: need at least one sample and thin >= 1");
  const std::size_t n_rep = x0.size();
  const double noise_scale = std::sqrt(2.0 * process.amplitude * schedule.dt);
  std::vector<double> samples(schedule.n_samples * n_rep);
  const std::size_t n_blocks = (n_rep + kBlock - 1) / kBlock;

  parallel_for_blocks(n_blocks, [&](std::size_t block) {
    const std::size_t begin = block * kBlock;
    const std::size_t count = std::min(kBlock, n_rep - begin);
    std::vector<ReplicaStream> streams;
    streams.reserve(count);
    for (std::size_t r = 0; r < count; ++r) streams.emplace_back(seed, begin + r);
    std::vector<double> x(x0.begin() + begin, x0.begin() + begin + count);
    std::vector<double> noise(count);

    auto step = [&] {
      for (std::size_t r = 0; r < count; ++r) noise[r] = streams[r].normal();
      advance(process, x, noise, schedule.dt, noise_scale);
    };
    auto record = [&](std::size_t s) {
      std::copy(x.begin(), x.end(), samples.begin() + s * n_rep + begin);
    };

    for (std::size_t i = 0; i < schedule.burn_in_steps; ++i) step();
    record(0);
    for (std::size_t s = 1; s < schedule.n_samples; ++s) {
      for (std::size_t i = 0; i < schedule.thin; ++i) step();
      record(s);
    }
    for (double v : x)
      if (!std::isfinite(v)) throw NumericError("run_ensemble: replica state became non-finite");
  });
  return samples;
}

std::vector<double> run_ensemble(const AdditiveProcess& process, double x0,
                                 const EnsembleSchedule& schedule, std::uint64_t seed) {
  const std::vector<double> start(schedule.n_replicas, x0);
  return run_ensemble(process, start, schedule, seed);
}

}  // namespace incomelab::sde
