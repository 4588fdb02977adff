#include <atomic>
#include <cstdlib>
#include <string_view>

#include "georeg/error.hpp"
#include "georeg/simd.hpp"

namespace georeg::simd {

namespace {

constexpr Kernels kScalar{Isa::Scalar, "scalar", &detail::dot_scalar, &detail::axpy_scalar};
#if defined(GEOREG_HAVE_AVX2)
constexpr Kernels kAvx2{Isa::Avx2, "avx2", &detail::dot_avx2, &detail::axpy_avx2};
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
constexpr Kernels kNeon{Isa::Neon, "neon", &detail::dot_neon, &detail::axpy_neon};
#endif

bool cpu_has_avx2() noexcept {
#if defined(GEOREG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels* pick_default() noexcept {
  if (const char* env = std::getenv("GEOREG_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && is_available(Isa::Avx2)) return &kernels(Isa::Avx2);
    if (want == "neon" && is_available(Isa::Neon)) return &kernels(Isa::Neon);
  }
  if (is_available(Isa::Avx2)) return &kernels(Isa::Avx2);
  if (is_available(Isa::Neon)) return &kernels(Isa::Neon);
  return &kScalar;
}

std::atomic<const Kernels*>& current() noexcept {
  static std::atomic<const Kernels*> table{pick_default()};
  return table;
}

}  // namespace

bool is_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2: return cpu_has_avx2();
    case Isa::Neon:
#if defined(__aarch64__) || defined(__ARM_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels(Isa isa) {
  if (!is_available(isa)) fail(ErrorCode::InvalidArgument, std::string("ISA not available: ") + to_string(isa));
  switch (isa) {
#if defined(GEOREG_HAVE_AVX2)
    case Isa::Avx2: return kAvx2;
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
    case Isa::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const Kernels& active() noexcept { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) { current().store(&kernels(isa), std::memory_order_relaxed); }

const char* to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace georeg::simd
