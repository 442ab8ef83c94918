#include <atomic>
#include <stdexcept>
#include <string>

#include "lsde/simd/kernels.hpp"

namespace lsde::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(LSDE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelSet& kernels_for(Isa isa) {
  if (!isa_available(isa))
    throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
#if defined(LSDE_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::kAvx2Kernels;
#endif
  return detail::kScalarKernels;
}

namespace {
std::atomic<const KernelSet*> g_active{nullptr};
}

const KernelSet& active_kernels() {
  const KernelSet* k = g_active.load(std::memory_order_acquire);
  if (k) return *k;
  k = isa_available(Isa::avx2) ? &kernels_for(Isa::avx2) : &detail::kScalarKernels;
  g_active.store(k, std::memory_order_release);
  return *k;
}

void force_isa(Isa isa) { g_active.store(&kernels_for(isa), std::memory_order_release); }

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::scalar};
  if (isa_available(Isa::avx2)) out.push_back(Isa::avx2);
  return out;
}

}  // namespace lsde::simd
