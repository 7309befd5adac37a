#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "homog/corrector.hpp"
#include "homog/maximal.hpp"
#include "homog/simd.hpp"

using namespace homog;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Restores the active kernel table after a test changes it.
struct IsaGuard {
  simd::Isa saved = simd::active_isa();
  ~IsaGuard() { simd::set_active_isa(saved); }
};

}  // namespace

TEST_CASE("the scalar table is always available") {
  CHECK(simd::isa_supported(simd::Isa::scalar));
  CHECK(simd::kernels_for(simd::Isa::scalar).isa == simd::Isa::scalar);
  CHECK(simd::parse_isa("avx2") == simd::Isa::avx2);
  CHECK_THROWS(simd::parse_isa("sse9"));
}

TEST_CASE("wide kernels agree with the scalar reference") {
  const auto& ref = simd::kernels_for(simd::Isa::scalar);
  for (simd::Isa isa : simd::supported_isas()) {
    const auto& k = simd::kernels_for(isa);
    CAPTURE(k.name);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 31u, 64u, 1001u}) {
      CAPTURE(n);
      const auto a = random_vector(n, 1 + n), b = random_vector(n, 2 + n);
      const auto c = random_vector(n, 3 + n), e = random_vector(n, 4 + n, 0.1, 2.0);
      const auto f = random_vector(n, 5 + n, 0.1, 2.0);

      const double dr = ref.dot(a.data(), b.data(), n), dk = k.dot(a.data(), b.data(), n);
      CHECK(std::abs(dr - dk) <= 1e-13 * (1.0 + std::abs(dr)) * std::sqrt(static_cast<double>(n) + 1.0));
      const double sr = ref.sum(a.data(), n), sk = k.sum(a.data(), n);
      CHECK(std::abs(sr - sk) <= 1e-13 * (1.0 + static_cast<double>(n)));

      auto y1 = b, y2 = b;
      ref.axpy(0.37, a.data(), y1.data(), n);
      k.axpy(0.37, a.data(), y2.data(), n);
      CHECK(same_bits(y1, y2));

      y1 = b;
      y2 = b;
      ref.xpby(a.data(), -1.25, y1.data(), n);
      k.xpby(a.data(), -1.25, y2.data(), n);
      CHECK(same_bits(y1, y2));

      std::vector<double> o1(n), o2(n);
      ref.mul(a.data(), b.data(), o1.data(), n);
      k.mul(a.data(), b.data(), o2.data(), n);
      CHECK(same_bits(o1, o2));

      ref.max(a.data(), b.data(), o1.data(), n);
      k.max(a.data(), b.data(), o2.data(), n);
      CHECK(same_bits(o1, o2));

      std::vector<double> s1 = c, s2 = c;
      if (n >= 2) {
        ref.stencil_axis(3.0, a.data() + 1, a.data(), b.data(), e.data(), f.data(), s1.data(), n - 1);
        k.stencil_axis(3.0, a.data() + 1, a.data(), b.data(), e.data(), f.data(), s2.data(), n - 1);
      }
      CHECK(same_bits(s1, s2));
    }
  }
}

TEST_CASE("max kernels treat signed zeros and NaN identically") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> a{0.0, -0.0, nan, 1.0, -0.0, nan, 2.0, 0.0};
  const std::vector<double> b{-0.0, 0.0, 1.0, nan, -0.0, nan, 2.0, 0.0};
  const auto& ref = simd::kernels_for(simd::Isa::scalar);
  std::vector<double> o1(a.size()), o2(a.size());
  ref.max(a.data(), b.data(), o1.data(), a.size());
  for (simd::Isa isa : simd::supported_isas()) {
    simd::kernels_for(isa).max(a.data(), b.data(), o2.data(), a.size());
    CHECK(same_bits(o1, o2));
  }
}

TEST_CASE("operator application and maximal function do not depend on the kernel set") {
  IsaGuard guard;
  PotentialSpec spec;
  spec.preset = Preset::separable_cosine;
  for (int dim : {1, 2, 3}) {
    const TorusGrid grid(dim, dim == 3 ? 12 : 24);
    const ScalarField v = sample_potential(spec, grid);
    const WeightedOperator op = assemble_operator(v);
    const auto u = random_vector(grid.total_cells(), 99);
    const ScalarField ev = exp_field(v, +1);

    simd::set_active_isa(simd::Isa::scalar);
    const auto ref = op.apply(u);
    const auto mref = maximal_function(ev, {});
    for (simd::Isa isa : simd::supported_isas()) {
      simd::set_active_isa(isa);
      CHECK(same_bits(ref, op.apply(u)));
      const auto m = maximal_function(ev, {});
      CHECK(std::equal(m.values().begin(), m.values().end(), mref.values().begin()));
    }
  }
}
