#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "incomelab/estimation.hpp"

namespace incomelab::estimation {
namespace {

using income::MixtureParams;

constexpr double kMaxStep = 1.0;

double& field(MixtureParams& p, const std::string& name) {
  if (name == "n_pf") return p.n_pf;
  if (name == "n_e") return p.n_e;
  if (name == "n_ue") return p.n_ue;
  if (name == "h0") return p.h0;
  if (name == "sigma_f") return p.sigma_f;
  if (name == "lambda") return p.lambda;
  if (name == "h_splice") return p.h_splice;
  if (name == "t_wage") return p.t_wage;
  if (name == "h_ue") return p.h_ue;
  if (name == "sigma_ue") return p.sigma_ue;
  throw InvalidArgument("fit_mixture: unknown parameter '" + name + "'");
}

double field(const MixtureParams& p, const std::string& name) {
  return field(const_cast<MixtureParams&>(p), name);
}

const std::vector<std::string>& component_params(const std::string& weight) {
  static const std::vector<std::string> capital = {"h0", "sigma_f", "lambda", "h_splice"};
  static const std::vector<std::string> labour = {"t_wage"};
  static const std::vector<std::string> insurance = {"h_ue", "sigma_ue"};
  if (weight == "n_pf") return capital;
  if (weight == "n_e") return labour;
  return insurance;
}

// Free parameters live in an unconstrained space: log for scales,
// log(λ − 1) for λ, and log-ratios against a pivot for the free weights,
// which share whatever mass the frozen weights leave.
class Parametrization {
 public:
  Parametrization(const MixtureParams& init, const std::set<std::string>& frozen) : base_(init) {
    for (const auto& name : frozen) (void)field(base_, name);
    std::set<std::string> fixed = frozen;
    if (!init.pareto_enabled) {
      fixed.insert("lambda");
      fixed.insert("h_splice");
    }
    for (const char* w : {"n_pf", "n_e", "n_ue"})
      if (fixed.count(w) && field(init, w) == 0.0)
        for (const auto& name : component_params(w)) fixed.insert(name);

    budget_ = 1.0;
    for (const char* w : {"n_e", "n_pf", "n_ue"}) {
      if (fixed.count(w))
        budget_ -= field(init, w);
      else
        weights_.emplace_back(w);
    }
    budget_ = std::max(budget_, 0.0);
    if (!weights_.empty()) {
      auto pivot = std::find_if(weights_.begin(), weights_.end(),
                                [&](const std::string& w) { return field(init, w) > 0.0; });
      if (pivot == weights_.end()) pivot = weights_.begin();
      std::rotate(weights_.begin(), pivot, pivot + 1);
    }
    for (const auto& name : mixture_parameter_names()) {
      if (fixed.count(name) || name.rfind("n_", 0) == 0) continue;
      shapes_.push_back(name);
    }
  }

  [[nodiscard]] std::size_t size() const {
    return (weights_.empty() ? 0 : weights_.size() - 1) + shapes_.size();
  }

  [[nodiscard]] std::vector<std::string> free_names() const {
    std::vector<std::string> names(weights_.begin(), weights_.end());
    names.insert(names.end(), shapes_.begin(), shapes_.end());
    return names;
  }

  [[nodiscard]] Eigen::VectorXd encode(const MixtureParams& p) const {
    Eigen::VectorXd theta(size());
    Eigen::Index j = 0;
    if (!weights_.empty()) {
      const double pivot = std::max(field(p, weights_[0]), 1e-300);
      for (std::size_t i = 1; i < weights_.size(); ++i)
        theta[j++] = std::log(std::max(field(p, weights_[i]), 1e-12 * pivot) / pivot);
    }
    for (const auto& name : shapes_)
      theta[j++] = name == "lambda" ? std::log(p.lambda - 1.0) : std::log(field(p, name));
    return theta;
  }

  [[nodiscard]] MixtureParams decode(const Eigen::VectorXd& theta) const {
    MixtureParams p = base_;
    Eigen::Index j = 0;
    if (!weights_.empty()) {
      std::vector<double> e(weights_.size(), 1.0);
      double top = 0.0;
      for (std::size_t i = 1; i < weights_.size(); ++i) top = std::max(top, theta[j + static_cast<Eigen::Index>(i) - 1]);
      double z = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double u = i == 0 ? 0.0 : theta[j + static_cast<Eigen::Index>(i) - 1];
        e[i] = std::exp(u - top);
        z += e[i];
      }
      for (std::size_t i = 0; i < weights_.size(); ++i) field(p, weights_[i]) = budget_ * e[i] / z;
      j += static_cast<Eigen::Index>(weights_.size()) - 1;
    }
    for (const auto& name : shapes_)
      field(p, name) = name == "lambda" ? 1.0 + std::exp(theta[j++]) : std::exp(theta[j++]);
    return p;
  }

  // d(natural value)/d(theta) for each free natural parameter name.
  [[nodiscard]] Eigen::MatrixXd natural_jacobian(const Eigen::VectorXd& theta,
                                                 const MixtureParams& p) const {
    const auto names = free_names();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(names.size()), theta.size());
    const auto nw = static_cast<Eigen::Index>(weights_.size());
    if (nw > 1) {
      for (Eigen::Index i = 0; i < nw; ++i) {
        const double s_i = field(p, weights_[static_cast<std::size_t>(i)]) / budget_;
        for (Eigen::Index k = 1; k < nw; ++k) {
          const double s_k = field(p, weights_[static_cast<std::size_t>(k)]) / budget_;
          d(i, k - 1) = budget_ * s_i * ((i == k ? 1.0 : 0.0) - s_k);
        }
      }
    }
    const Eigen::Index offset = nw > 0 ? nw - 1 : 0;
    for (std::size_t s = 0; s < shapes_.size(); ++s) {
      const auto row = nw + static_cast<Eigen::Index>(s);
      const auto col = offset + static_cast<Eigen::Index>(s);
      d(row, col) = shapes_[s] == "lambda" ? p.lambda - 1.0 : field(p, shapes_[s]);
    }
    return d;
  }

 private:
  MixtureParams base_;
  double budget_ = 1.0;
  std::vector<std::string> weights_;
  std::vector<std::string> shapes_;
};

struct Problem {
  const Histogram& hist;
  std::vector<std::size_t> bins;  // bins carrying weight
  std::vector<double> sqrt_w;

  Problem(const Histogram& h, double h_floor) : hist(h) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (h.midpoint(i) < h_floor) continue;
      bins.push_back(i);
      sqrt_w.push_back(std::sqrt(h.width(i)));
    }
  }

  [[nodiscard]] Eigen::VectorXd residuals(const MixtureParams& p) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(bins.size()));
    for (std::size_t j = 0; j < bins.size(); ++j) {
      const std::size_t i = bins[j];
      const double model =
          (income::mixture_cdf(hist.right[i], p) - income::mixture_cdf(hist.left[i], p)) /
          hist.width(i);
      r[static_cast<Eigen::Index>(j)] = sqrt_w[j] * (model - hist.density[i]);
    }
    return r;
  }
};

MixtureParams normalized_init(const MixtureParams& init) {
  const double total = init.n_pf + init.n_e + init.n_ue;
  if (std::fabs(total - 1.0) > 1e-6)
    throw InfeasibleError("fit_mixture: initial weights must sum to 1");
  MixtureParams p = init;
  p.n_pf /= total;
  p.n_e /= total;
  p.n_ue /= total;
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw InfeasibleError(std::string("fit_mixture: infeasible init: ") + e.what());
  }
  return p;
}

}  // namespace

double fit_objective(const Histogram& hist, const MixtureParams& params, double h_floor) {
  hist.validate();
  params.validate();
  return Problem(hist, h_floor).residuals(params).squaredNorm();
}

FitResult fit_mixture(const Histogram& hist, const MixtureParams& init,
                      const std::set<std::string>& frozen, const FitOptions& options) {
  hist.validate();
  if (hist.size() < 10) throw InvalidArgument("fit_mixture: need at least 10 bins");
  const MixtureParams start = normalized_init(init);
  const Parametrization par(start, frozen);
  const Problem problem(hist, options.h_floor);
  if (problem.bins.empty()) throw InvalidArgument("fit_mixture: h_floor leaves no bins");

  FitResult result;
  Eigen::VectorXd theta = par.encode(start);
  result.params = par.decode(theta);
  Eigen::VectorXd r = problem.residuals(result.params);
  double cost = r.squaredNorm();
  result.objective_trace.push_back(cost);
  for (const auto& name : mixture_parameter_names()) result.standard_errors[name] = 0.0;

  const auto n = static_cast<Eigen::Index>(par.size());
  if (n == 0) {
    result.objective_value = cost;
    result.converged = true;
    return result;
  }
  const auto m = r.size();
  const double data_scale = [&] {
    double s = 0.0;
    for (std::size_t j = 0; j < problem.bins.size(); ++j)
      s += std::pow(problem.sqrt_w[j] * hist.density[problem.bins[j]], 2);
    return std::max(s, std::numeric_limits<double>::min());
  }();

  auto jacobian = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& r0) {
    Eigen::MatrixXd jac(m, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::VectorXd probe = at;
      const double h = 1e-7 * std::max(1.0, std::fabs(at[k]));
      probe[k] += h;
      jac.col(k) = (problem.residuals(par.decode(probe)) - r0) / (probe[k] - at[k]);
    }
    return jac;
  };

  double mu = 1e-3;
  Eigen::MatrixXd jac = jacobian(theta, r);
  while (result.n_iterations < options.max_iterations) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;

    // Scale-free gradient test: cosine between residual and each column.
    double cosine = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double denom = std::sqrt(jtj(k, k) * cost);
      if (denom > 0.0) cosine = std::max(cosine, std::fabs(grad[k]) / denom);
    }
    if (cosine < 1e-10 || cost <= 1e-24 * data_scale) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    Eigen::VectorXd step;
    while (mu < 1e20) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index k = 0; k < n; ++k) a(k, k) += mu * std::max(jtj(k, k), 1e-300);
      step = a.ldlt().solve(-grad);
      if (!step.allFinite()) {
        mu *= 10.0;
        continue;
      }
      // Bound the move in transformed space (a factor e per iteration).
      const double longest = step.lpNorm<Eigen::Infinity>();
      if (longest > kMaxStep) step *= kMaxStep / longest;
      const Eigen::VectorXd trial = theta + step;
      double trial_cost = std::numeric_limits<double>::infinity();
      Eigen::VectorXd trial_r;
      try {
        const MixtureParams p = par.decode(trial);
        trial_r = problem.residuals(p);
        if (trial_r.allFinite()) trial_cost = trial_r.squaredNorm();
      } catch (const Error&) {
      }
      if (trial_cost < cost) {
        const double previous = cost;
        theta = trial;
        r = trial_r;
        cost = trial_cost;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        ++result.n_iterations;
        result.objective_trace.push_back(cost);
        const bool small_step =
            step.lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + theta.lpNorm<Eigen::Infinity>());
        const bool small_gain = previous - cost <= options.tolerance * previous;
        if (small_step && small_gain) result.converged = true;
        break;
      }
      mu *= 4.0;
    }
    if (!accepted) {
      // No downhill step at any damping: a numerical minimum if the gradient
      // is negligible or the residual is at rounding level.
      result.converged = cosine < 1e-4 || cost <= 1e-20 * data_scale;
      break;
    }
    if (result.converged) break;
    jac = jacobian(theta, r);
  }

  result.params = par.decode(theta);
  result.objective_value = cost;

  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const double dof = static_cast<double>(std::max<Eigen::Index>(1, m - n));
  const Eigen::MatrixXd cov_theta =
      (cost / dof) * jtj.completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::MatrixXd d = par.natural_jacobian(theta, result.params);
  const Eigen::MatrixXd cov = d * cov_theta * d.transpose();
  const auto names = par.free_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    result.standard_errors[names[i]] =
        std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
  return result;
}

FitResult fit_mixture(const EmpiricalDistribution& dist, const MixtureParams& init,
                      const std::set<std::string>& frozen, const FitOptions& options) {
  if (const auto* hist = std::get_if<Histogram>(&dist))
    return fit_mixture(*hist, init, frozen, options);
  const auto& sample = std::get<std::vector<double>>(dist);
  const auto bins = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::sqrt(static_cast<double>(sample.size()))), 10, 2000);
  return fit_mixture(build_histogram(sample, bins), init, frozen, options);
}

}  // namespace incomelab::estimation
