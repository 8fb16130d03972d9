#include "semilin/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace semilin::simd {

namespace {

const Kernels kScalar{Isa::scalar, scalar::ring_matvec, scalar::poisson_sum,
                      scalar::complex_mul_add};
const Kernels kAvx2{Isa::avx2, avx2::ring_matvec, avx2::poisson_sum, avx2::complex_mul_add};

const Kernels* pick_default() {
  const char* env = std::getenv("SEMILIN_ISA");
  if (env && std::strcmp(env, "scalar") == 0) return &kScalar;
  return cpu_has_avx2() ? &kAvx2 : &kScalar;
}

std::atomic<const Kernels*>& slot() {
  static std::atomic<const Kernels*> s{pick_default()};
  return s;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels& active() { return *slot().load(std::memory_order_acquire); }

const Kernels& table(Isa isa) { return isa == Isa::avx2 ? kAvx2 : kScalar; }

void select(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2()) isa = Isa::scalar;
  slot().store(&table(isa), std::memory_order_release);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace semilin::simd
