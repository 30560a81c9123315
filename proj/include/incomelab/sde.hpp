#pragma once

// Generic stochastic-differential-equation machinery.
//
// Noise convention: a process with amplitude D has white noise of variance
// 2·D per unit time, i.e. dx = F(x) dt + G(x) sqrt(2 D) dW. The analytic
// stationary law for that convention is
//
//   P(x) = exp((1/D) ∫ F/G² dx') / (N G(x)),
//
// obtained by the additive-noise transform dh = dx / G(x).

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "incomelab/common.hpp"

namespace incomelab::sde {

enum class Boundary { none, reflecting, absorbing };

struct NoiseSpec {
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

struct DriftDiffusion {
  std::function<double(double)> drift;
  std::function<double(double)> diffusion;
  double domain_low = -std::numeric_limits<double>::infinity();
  Boundary boundary = Boundary::none;
};

/// One Euler–Maruyama step followed by the model's boundary rule.
/// Throws NumericError when the result is not finite.
double euler_maruyama_step(double x, const DriftDiffusion& model, double dt, double noise_draw,
                           double amplitude);

/// Applies the boundary rule; sets `absorbed` when an absorbing wall was hit.
double apply_boundary(double x, const DriftDiffusion& model, bool* absorbed = nullptr);

/// n_steps+1 points, deterministic per seed. An absorbed path stays on the wall.
Trajectory simulate(const DriftDiffusion& model, double x0, double dt, std::size_t n_steps,
                    const NoiseSpec& noise);

/// Exact log-space integration of (1/y) dy/dτ = δf.
double gibrat_step(double y, double delta_f, double dt);

/// Analytic stationary density on `grid`, normalized by the trapezoid rule.
std::vector<double> stationary_density(const DriftDiffusion& model, double amplitude,
                                       std::span<const double> grid);

/// Replica ensemble of an additive-noise process dx = drift(x) dt + sqrt(2 D) dW,
/// where the drift is either a constant or a sign-restoring force, optionally
/// reflected at a floor. Runs on the dispatched SIMD kernels.
struct AdditiveProcess {
  enum class Drift { constant, sign_restoring };
  Drift kind = Drift::constant;
  /// constant: the drift value; sign_restoring: b in −b·sign(x). A negative b
  /// flips the force outward.
  double rate = 0.0;
  double amplitude = 0.0;
  bool reflect = false;
  double floor = 0.0;
};

struct EnsembleSchedule {
  std::size_t n_replicas = 1;
  double dt = 0.01;
  std::size_t burn_in_steps = 0;
  std::size_t n_samples = 1;
  /// Steps between successive samples (the first sample follows burn-in).
  std::size_t thin = 1;
};

/// Samples laid out as samples[s * n_replicas + r]. Replica r uses the stream
/// derive_seed(seed, r), so the result is independent of blocking and threads.
std::vector<double> run_ensemble(const AdditiveProcess& process, double x0,
                                 const EnsembleSchedule& schedule, std::uint64_t seed);

/// Same as run_ensemble but starting each replica from its own value.
std::vector<double> run_ensemble(const AdditiveProcess& process, std::span<const double> x0,
                                 const EnsembleSchedule& schedule, std::uint64_t seed);

}  // namespace incomelab::sde
