#pragma once

// Data-parallel inner loops of the replica ensembles.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active variant is chosen once at runtime from the CPU features
// and the INCOMELAB_SIMD environment variable (scalar | avx2 | auto).
//
// The step kernels (drift_noise_step, sign_drift_noise_step, reflect_below)
// perform the same IEEE operations in the same order in both variants and are
// bit-identical. Reductions and exp-based kernels agree to a few ulp.

#include <span>
#include <string_view>

namespace incomelab::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool avx2_available();
Isa active_isa();
/// Overrides the runtime choice; requesting avx2 on a CPU without it throws.
void set_active_isa(Isa isa);

/// x[i] += drift_dt + noise_scale * noise[i]
void drift_noise_step(std::span<double> x, std::span<const double> noise, double drift_dt,
                      double noise_scale);
/// x[i] += -rate_dt * sign(x[i]) + noise_scale * noise[i]
void sign_drift_noise_step(std::span<double> x, std::span<const double> noise, double rate_dt,
                           double noise_scale);
/// Mirror every value below `floor` back into [floor, inf).
void reflect_below(std::span<double> x, double floor);

double sum(std::span<const double> x);
double sum_abs(std::span<const double> x);
double sum_sq(std::span<const double> x);

void exp_inplace(std::span<double> x);
/// y[i] *= exp(log_factor[i])
void scale_by_exp(std::span<double> y, std::span<const double> log_factor);

namespace scalar {
void drift_noise_step(std::span<double> x, std::span<const double> noise, double drift_dt,
                      double noise_scale);
void sign_drift_noise_step(std::span<double> x, std::span<const double> noise, double rate_dt,
                           double noise_scale);
void reflect_below(std::span<double> x, double floor);
double sum(std::span<const double> x);
double sum_abs(std::span<const double> x);
double sum_sq(std::span<const double> x);
void exp_inplace(std::span<double> x);
void scale_by_exp(std::span<double> y, std::span<const double> log_factor);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void drift_noise_step(std::span<double> x, std::span<const double> noise, double drift_dt,
                      double noise_scale);
void sign_drift_noise_step(std::span<double> x, std::span<const double> noise, double rate_dt,
                           double noise_scale);
void reflect_below(std::span<double> x, double floor);
double sum(std::span<const double> x);
double sum_abs(std::span<const double> x);
double sum_sq(std::span<const double> x);
void exp_inplace(std::span<double> x);
void scale_by_exp(std::span<double> y, std::span<const double> log_factor);
}  // namespace avx2
#endif

}  // namespace incomelab::kernels
