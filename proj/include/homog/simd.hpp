#pragma once

// Data-parallel inner loops used by the grid solvers. Every kernel has a
// scalar reference implementation; wider variants are selected at runtime
// from the host CPU and must agree with the reference (bit-for-bit for
// elementwise kernels, to reassociation error for reductions).

#include <cstddef>
#include <string_view>
#include <vector>

namespace homog::simd {

enum class Isa { scalar, avx2 };

struct Kernels {
  Isa isa;
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = x + beta * y
  void (*xpby)(const double* x, double beta, double* y, std::size_t n);
  // out = a * b
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out = max(a, b)
  void (*max)(const double* a, const double* b, double* out, std::size_t n);
  // out += scale * (ap * (u - up) + am * (u - um)); one axis of the weighted
  // Laplacian with the neighbour values and face weights pre-offset.
  void (*stencil_axis)(double scale, const double* u, const double* up, const double* um,
                       const double* ap, const double* am, double* out, std::size_t n);
};

bool isa_supported(Isa isa);
const Kernels& kernels_for(Isa isa);

/// Active kernel table. Chosen on first use from HOMOG_SIMD
/// ("scalar" | "avx2" | "auto", default auto) and the host CPU.
const Kernels& kernels();
Isa active_isa();
void set_active_isa(Isa isa);

Isa parse_isa(std::string_view name);
const char* isa_name(Isa isa);
std::vector<Isa> supported_isas();

namespace detail {
extern const Kernels scalar_kernels;
#if defined(HOMOG_HAVE_AVX2_TU)
extern const Kernels avx2_kernels;
#endif
}  // namespace detail

}  // namespace homog::simd
