#include <atomic>
#include <cstdlib>
#include <string>

#include "incomelab/common.hpp"
#include "incomelab/kernels.hpp"

namespace incomelab::kernels {
namespace {

Isa detect() {
  const char* env = std::getenv("INCOMELAB_SIMD");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return Isa::scalar;
  if (choice == "avx2" && !avx2_available())
    throw InvalidArgument("INCOMELAB_SIMD=avx2 requested but the CPU lacks AVX2");
  return avx2_available() ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& active_slot() {
  static std::atomic<int> slot{static_cast<int>(detect())};
  return slot;
}

bool use_avx2() {
#ifdef INCOMELAB_HAVE_AVX2
  return active_slot().load(std::memory_order_relaxed) == static_cast<int>(Isa::avx2);
#else
  return false;
#endif
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#ifdef INCOMELAB_HAVE_AVX2
  static const bool has = __builtin_cpu_supports("avx2");
  return has;
#else
  return false;
#endif
}

Isa active_isa() { return static_cast<Isa>(active_slot().load()); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available())
    throw InvalidArgument("AVX2 kernels are not available on this CPU");
  active_slot().store(static_cast<int>(isa));
}

#ifdef INCOMELAB_HAVE_AVX2
#define INCOMELAB_DISPATCH(fn, ...) \
  (use_avx2() ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define INCOMELAB_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void drift_noise_step(std::span<double> x, std::span<const double> noise, double drift_dt,
                      double noise_scale) {
  INCOMELAB_DISPATCH(drift_noise_step, x, noise, drift_dt, noise_scale);
}

void sign_drift_noise_step(std::span<double> x, std::span<const double> noise, double rate_dt,
                           double noise_scale) {
  INCOMELAB_DISPATCH(sign_drift_noise_step, x, noise, rate_dt, noise_scale);
}

void reflect_below(std::span<double> x, double floor) { INCOMELAB_DISPATCH(reflect_below, x, floor); }

double sum(std::span<const double> x) { return INCOMELAB_DISPATCH(sum, x); }
double sum_abs(std::span<const double> x) { return INCOMELAB_DISPATCH(sum_abs, x); }
double sum_sq(std::span<const double> x) { return INCOMELAB_DISPATCH(sum_sq, x); }

void exp_inplace(std::span<double> x) { INCOMELAB_DISPATCH(exp_inplace, x); }

void scale_by_exp(std::span<double> y, std::span<const double> log_factor) {
  INCOMELAB_DISPATCH(scale_by_exp, y, log_factor);
}

}  // namespace incomelab::kernels
