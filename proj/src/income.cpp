#include "incomelab/income.hpp"

#include <cmath>
#include <numbers>

#include "incomelab/kernels.hpp"
#include "incomelab/rng.hpp"

namespace incomelab::income {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

double phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double lognormal_pdf(double h, double h0, double sigma) {
  const double l = std::log(h / h0);
  return kInvSqrt2Pi / (sigma * h) * std::exp(-l * l / (2.0 * sigma * sigma));
}

// Splice geometry of the capital component.
struct Splice {
  double z_s = 0.0;       // standardized log splice point
  double body = 1.0;      // lognormal mass below the splice
  double tail = 0.0;      // Pareto mass above the splice (unnormalized)
  double density_s = 0.0; // lognormal density at the splice
  double norm = 1.0;      // body + tail
};

Splice splice_of(const MixtureParams& p) {
  Splice s;
  if (!p.pareto_enabled) return s;
  s.z_s = std::log(p.h_splice / p.h0) / p.sigma_f;
  s.body = phi(s.z_s);
  s.density_s = lognormal_pdf(p.h_splice, p.h0, p.sigma_f);
  s.tail = s.density_s * p.h_splice / (p.lambda - 1.0);
  s.norm = s.body + s.tail;
  return s;
}

void require_positive(double h, const char* what) {
  if (!(h > 0.0)) throw DomainError(std::string(what) + ": income must be positive");
}

}  // namespace

void MixtureParams::validate() const {
  for (double w : {n_pf, n_e, n_ue})
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("mixture: weights must lie in [0, 1]");
  if (std::fabs(n_pf + n_e + n_ue - 1.0) > 1e-9)
    throw InvalidArgument("mixture: weights n_pf + n_e + n_ue must sum to 1");
  if (!(h0 > 0.0) || !(sigma_f > 0.0)) throw InvalidArgument("mixture: h0 and sigma_f must be > 0");
  if (!(t_wage > 0.0)) throw InvalidArgument("mixture: t_wage must be > 0");
  if (!(h_ue > 0.0) || !(sigma_ue > 0.0))
    throw InvalidArgument("mixture: h_ue and sigma_ue must be > 0");
  if (pareto_enabled) {
    if (!(lambda > 1.0)) throw InvalidArgument("mixture: lambda must be > 1 with the Pareto tail");
    if (!(h_splice > 0.0)) throw InvalidArgument("mixture: h_splice must be > 0");
  }
}

MixtureParams australia_1994_fit() {
  MixtureParams p;
  p.n_pf = 0.11;
  p.sigma_f = 0.2;
  p.h0 = 28e3;
  p.n_e = 0.77;
  p.t_wage = 1.9e4;
  p.n_ue = 0.12;
  p.sigma_ue = 1200.0;
  p.h_ue = 7.4e3;
  p.pareto_enabled = false;
  p.lambda = 2.5;
  p.h_splice = tangent_splice(p.h0, p.sigma_f, p.lambda);
  return p;
}

double tangent_splice(double h0, double sigma_f, double lambda) {
  return h0 * std::exp((lambda - 1.0) * sigma_f * sigma_f);
}

double capital_density(double h, const MixtureParams& p) {
  require_positive(h, "capital_density");
  if (!p.pareto_enabled) return lognormal_pdf(h, p.h0, p.sigma_f);
  const Splice s = splice_of(p);
  if (h <= p.h_splice) return lognormal_pdf(h, p.h0, p.sigma_f) / s.norm;
  return s.density_s * std::pow(h / p.h_splice, -p.lambda) / s.norm;
}

double capital_cdf(double h, const MixtureParams& p) {
  if (h <= 0.0) return 0.0;
  const double z = std::log(h / p.h0) / p.sigma_f;
  if (!p.pareto_enabled) return phi(z);
  const Splice s = splice_of(p);
  if (h <= p.h_splice) return phi(z) / s.norm;
  const double above = s.tail * (1.0 - std::pow(h / p.h_splice, 1.0 - p.lambda));
  return (s.body + above) / s.norm;
}

double labour_density(double h, const MixtureParams& p) {
  if (h < 0.0) throw DomainError("labour_density: wage income cannot be negative");
  return std::exp(-h / p.t_wage) / p.t_wage;
}

double labour_cdf(double h, const MixtureParams& p) {
  return h <= 0.0 ? 0.0 : -std::expm1(-h / p.t_wage);
}

double insurance_density(double h, const MixtureParams& p) {
  if (h < 0.0) return 0.0;
  const double z = (h - p.h_ue) / p.sigma_ue;
  const double kept = phi(p.h_ue / p.sigma_ue);  // mass of the Gaussian above zero
  return kInvSqrt2Pi / p.sigma_ue * std::exp(-0.5 * z * z) / kept;
}

double insurance_cdf(double h, const MixtureParams& p) {
  if (h <= 0.0) return 0.0;
  const double lost = phi(-p.h_ue / p.sigma_ue);
  return (phi((h - p.h_ue) / p.sigma_ue) - lost) / (1.0 - lost);
}

Components mixture_components(double h, const MixtureParams& p) {
  require_positive(h, "mixture_density");
  Components c;
  c.capital = p.n_pf * capital_density(h, p);
  c.labour = p.n_e * labour_density(h, p);
  c.insurance = p.n_ue * insurance_density(h, p);
  return c;
}

double mixture_density(double h, const MixtureParams& p) {
  p.validate();
  return mixture_components(h, p).total();
}

double mixture_cdf(double h, const MixtureParams& p) {
  return p.n_pf * capital_cdf(h, p) + p.n_e * labour_cdf(h, p) + p.n_ue * insurance_cdf(h, p);
}

double mixture_quantile(double q, const MixtureParams& p) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("mixture_quantile: q must lie in (0, 1)");
  double lo = 0.0;
  double hi = std::max({p.h0, p.t_wage, p.h_ue + p.sigma_ue});
  while (mixture_cdf(hi, p) < q) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericError("mixture_quantile: quantile diverges");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mixture_cdf(mid, p) < q ? lo : hi) = mid;
  }
  return hi;
}

std::vector<double> mixture_density_batch(std::span<const double> h, const MixtureParams& p) {
  p.validate();
  const std::size_t n = h.size();
  std::vector<double> lognormal(n), labour(n), insurance(n);
  for (std::size_t i = 0; i < n; ++i) {
    require_positive(h[i], "mixture_density_batch");
    const double l = std::log(h[i] / p.h0);
    lognormal[i] = -l * l / (2.0 * p.sigma_f * p.sigma_f);
    labour[i] = -h[i] / p.t_wage;
    const double z = (h[i] - p.h_ue) / p.sigma_ue;
    insurance[i] = -0.5 * z * z;
  }
  kernels::exp_inplace(lognormal);
  kernels::exp_inplace(labour);
  kernels::exp_inplace(insurance);

  const Splice s = splice_of(p);
  const double kept = phi(p.h_ue / p.sigma_ue);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double cap;
    if (p.pareto_enabled && h[i] > p.h_splice)
      cap = s.density_s * std::pow(h[i] / p.h_splice, -p.lambda) / s.norm;
    else
      cap = kInvSqrt2Pi / (p.sigma_f * h[i]) * lognormal[i] / s.norm;
    const double lab = labour[i] / p.t_wage;
    const double ins = kInvSqrt2Pi / p.sigma_ue * insurance[i] / kept;
    out[i] = p.n_pf * cap + p.n_e * lab + p.n_ue * ins;
  }
  return out;
}

std::vector<double> mixture_sample(const MixtureParams& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  ReplicaStream rng(seed);
  const Splice s = splice_of(p);
  const double tail_prob = p.pareto_enabled ? s.tail / s.norm : 0.0;
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double pick = rng.uniform();
    double h;
    if (pick < p.n_pf) {
      if (rng.uniform() < tail_prob) {
        // Pareto above the splice by inversion.
        h = p.h_splice * std::pow(1.0 - rng.uniform(), -1.0 / (p.lambda - 1.0));
      } else {
        // Lognormal body, rejecting draws beyond the splice.
        do {
          h = p.h0 * std::exp(p.sigma_f * rng.normal());
        } while (p.pareto_enabled && h > p.h_splice);
      }
    } else if (pick < p.n_pf + p.n_e) {
      h = -p.t_wage * std::log1p(-rng.uniform());
    } else {
      do {
        h = p.h_ue + p.sigma_ue * rng.normal();
      } while (h <= 0.0);
    }
    if (h > 0.0) out.push_back(h);
  }
  return out;
}

void WageProcessParams::validate() const {
  if (!(zeta > 0.0) || !(q_amplitude > 0.0) || !(t_wage > 0.0))
    throw InvalidArgument("wage process: zeta, q_amplitude and t_wage must be > 0");
}

std::optional<std::string> WageProcessParams::mean_mismatch() const {
  const double implied = q_amplitude / zeta;
  if (std::fabs(implied - t_wage) <= 1e-6 * t_wage) return std::nullopt;
  return "mean wage T=" + std::to_string(t_wage) + " differs from Q/zeta=" +
         std::to_string(implied) + "; the stationary mean follows Q/zeta";
}

sde::AdditiveProcess wage_process(const WageProcessParams& params) {
  params.validate();
  sde::AdditiveProcess proc;
  proc.kind = sde::AdditiveProcess::Drift::constant;
  proc.rate = -params.zeta;
  proc.amplitude = params.q_amplitude;
  proc.reflect = true;
  proc.floor = 0.0;
  return proc;
}

sde::DriftDiffusion wage_drift_diffusion(const WageProcessParams& params) {
  params.validate();
  const double zeta = params.zeta;
  sde::DriftDiffusion model;
  model.drift = [zeta](double) { return -zeta; };
  model.diffusion = [](double) { return 1.0; };
  model.domain_low = 0.0;
  model.boundary = sde::Boundary::reflecting;
  return model;
}

WageSimulation simulate_wage_process(const WageProcessParams& params, double w0, double dt,
                                     std::size_t n_steps, std::uint64_t seed) {
  if (!(w0 >= 0.0)) throw DomainError("simulate_wage_process: w0 must be >= 0");
  WageSimulation out;
  out.warning = params.mean_mismatch();
  out.path = sde::simulate(wage_drift_diffusion(params), w0, dt, n_steps,
                           {params.q_amplitude, seed});
  return out;
}

}  // namespace incomelab::income
