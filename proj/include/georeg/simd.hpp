#pragma once

#include <cstddef>

// Runtime-dispatched double-precision inner loops. Every hot loop in the
// library (circular correlation along the orientation axis, dense and
// convolution layers of the learned extractor) reduces to these two
// primitives, so each ISA only has to implement them once. The scalar table is the reference that every
// vector variant is equivalence-tested against.

namespace georeg::simd {

enum class Isa { Scalar, Avx2, Neon };

struct Kernels {
  Isa isa;
  const char* name;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

bool is_available(Isa isa) noexcept;

/// Kernel table for a specific ISA; throws InvalidArgument if the ISA is
/// not compiled in or not supported by the running CPU.
const Kernels& kernels(Isa isa);

/// Table used by the library. Picked once from the CPU feature set; the
/// environment variable GEOREG_SIMD=scalar|avx2|neon overrides it.
const Kernels& active() noexcept;

/// Forces a specific ISA for the rest of the process (tests, benchmarks).
void select(Isa isa);

const char* to_string(Isa isa) noexcept;

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
#if defined(GEOREG_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
#endif
}  // namespace detail

}  // namespace georeg::simd
