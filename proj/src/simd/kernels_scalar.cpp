#include "homog/simd.hpp"

namespace homog::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void max(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

void stencil_axis(double scale, const double* u, const double* up, const double* um,
                  const double* ap, const double* am, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] += scale * (ap[i] * (u[i] - up[i]) + am[i] * (u[i] - um[i]));
  }
}

}  // namespace

const Kernels scalar_kernels{Isa::scalar, "scalar", dot, sum, axpy, xpby, mul, max, stencil_axis};

}  // namespace homog::simd::detail
