#pragma once

// Oscillatory sum kernels: the inner loop of every extension-operator
// evaluation in the library.
//
//   S = sum_j (c_re[j] + i c_im[j]) * e(sum_d x[d] * axes[d][j]),  e(t) = exp(2 pi i t)
//
// A scalar reference kernel and an AVX2+FMA kernel are provided; the active
// one is chosen once at runtime (CPU support, overridable with DECOUP_KERNEL).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace decoup::kernels {

inline constexpr int kMaxAxes = 4;

struct OscillatorySum {
  const double* axes[kMaxAxes] = {};
  int num_axes = 0;
  const double* c_re = nullptr;
  const double* c_im = nullptr;  // may be null: purely real coefficients
  std::size_t count = 0;
};

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
/// Kernel in use. Resolved on first call from DECOUP_KERNEL=scalar|avx2|auto.
Isa active_isa();
/// Overrides the selection (tests, benchmarks). Throws if unavailable.
void set_active_isa(Isa isa);

std::complex<double> oscillatory_sum_scalar(const OscillatorySum& s, std::span<const double> x);
std::complex<double> oscillatory_sum_avx2(const OscillatorySum& s, std::span<const double> x);

/// Dispatches to the active kernel.
std::complex<double> oscillatory_sum(const OscillatorySum& s, std::span<const double> x);

/// e(t) for each t, with the same arithmetic as the AVX2 kernel's per-term
/// evaluation. Exposed for accuracy tests.
void expi_turns_poly(std::span<const double> t, std::span<double> re, std::span<double> im);

}  // namespace decoup::kernels
