#include <atomic>
#include <cstdlib>
#include <string>

#include "neuron/errors.hpp"
#include "neuron/kernels.hpp"

namespace neuron::kernels {
namespace {

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &scalar_table();
    case Isa::Avx2:
      return avx2_table();
    case Isa::Neon:
      return neon_table();
  }
  return nullptr;
}

const KernelTable* detect() {
  if (const char* forced = std::getenv("NEURON_SIMD")) {
    const std::string name(forced);
    if (name == "scalar") return &scalar_table();
    if (name == "avx2" && cpu_supports(Isa::Avx2)) return avx2_table();
    if (name == "neon" && cpu_supports(Isa::Neon)) return neon_table();
  }
  if (cpu_supports(Isa::Avx2)) return avx2_table();
  if (cpu_supports(Isa::Neon)) return neon_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return avx2_table() != nullptr && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
      // Advanced SIMD is mandatory on AArch64.
      return neon_table() != nullptr;
  }
  return false;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr || !cpu_supports(isa)) throw ConfigError("requested SIMD variant is not available on this CPU");
  current().store(t, std::memory_order_relaxed);
}

}  // namespace neuron::kernels
