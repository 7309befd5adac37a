#include <atomic>
#include <cstdlib>
#include <string>

#include "homog/error.hpp"
#include "homog/simd.hpp"

namespace homog::simd {
namespace {

bool cpu_has_avx2() {
#if defined(HOMOG_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa best_isa() { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

Isa initial_isa() {
  const char* env = std::getenv("HOMOG_SIMD");
  if (env == nullptr || std::string_view(env).empty() || std::string_view(env) == "auto") {
    return best_isa();
  }
  Isa requested = parse_isa(env);
  return isa_supported(requested) ? requested : Isa::scalar;
}

std::atomic<const Kernels*> g_active{nullptr};

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw ConfigError("HOMOG_SIMD", std::string("instruction set not supported on this host: ") +
                                        isa_name(isa));
  }
#if defined(HOMOG_HAVE_AVX2_TU)
  if (isa == Isa::avx2) return detail::avx2_kernels;
#endif
  return detail::scalar_kernels;
}

const Kernels& kernels() {
  const Kernels* k = g_active.load(std::memory_order_acquire);
  if (k == nullptr) {
    const Kernels* chosen = &kernels_for(initial_isa());
    const Kernels* expected = nullptr;
    g_active.compare_exchange_strong(expected, chosen, std::memory_order_acq_rel);
    k = g_active.load(std::memory_order_acquire);
  }
  return *k;
}

Isa active_isa() { return kernels().isa; }

void set_active_isa(Isa isa) { g_active.store(&kernels_for(isa), std::memory_order_release); }

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  throw ConfigError("HOMOG_SIMD", "unknown instruction set '" + std::string(name) +
                                      "' (expected scalar, avx2 or auto)");
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

std::vector<Isa> supported_isas() {
  std::vector<Isa> out{Isa::scalar};
  if (isa_supported(Isa::avx2)) out.push_back(Isa::avx2);
  return out;
}

}  // namespace homog::simd
