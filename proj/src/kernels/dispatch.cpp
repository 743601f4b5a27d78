#include "decoup/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace decoup::kernels {

namespace {

Isa resolve_from_env() {
  const char* env = std::getenv("DECOUP_KERNEL");
  const std::string want = env ? env : "auto";
  if (want == "scalar") return Isa::Scalar;
  if (want == "avx2") {
    if (!isa_available(Isa::Avx2)) throw std::runtime_error("DECOUP_KERNEL=avx2 but the CPU lacks AVX2/FMA");
    return Isa::Avx2;
  }
  if (want != "auto") throw std::runtime_error("DECOUP_KERNEL must be scalar, avx2 or auto");
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int>& active_slot() {
  static std::atomic<int> slot{static_cast<int>(resolve_from_env())};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return static_cast<Isa>(active_slot().load(std::memory_order_relaxed)); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) throw std::runtime_error("kernel " + std::string(isa_name(isa)) + " is not available");
  active_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

std::complex<double> oscillatory_sum(const OscillatorySum& s, std::span<const double> x) {
#if defined(__x86_64__) || defined(__i386__)
  if (active_isa() == Isa::Avx2) return oscillatory_sum_avx2(s, x);
#endif
  return oscillatory_sum_scalar(s, x);
}

}  // namespace decoup::kernels
