#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision inner loops. Each instruction-set variant fills a
// KernelTable; the table in use is picked once at first call from the CPU's
// capabilities, or forced with NEURON_SIMD=scalar|avx2|neon.
//
// Variants may reassociate sums, so they agree with the scalar reference to
// rounding, not bit for bit. A process always uses a single table, which keeps
// every run on one machine reproducible.
namespace neuron::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  std::string_view name;
  // a . b
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += W x, W row-major rows x cols
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
  // x += W^T g
  void (*gemv_t)(const double* w, std::size_t rows, std::size_t cols, const double* g, double* x);
  // W += g x^T
  void (*ger)(double* w, std::size_t rows, std::size_t cols, const double* g, const double* x);
};

const KernelTable& scalar_table();
// nullptr when the variant was not compiled for this target.
const KernelTable* avx2_table();
const KernelTable* neon_table();

bool cpu_supports(Isa isa);

// Table used by the library.
const KernelTable& active();

// Overrides the selection; throws ConfigError if the ISA is unavailable.
// Intended for tests and benchmarks; not thread-safe against concurrent use.
void select(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) { return active().dot(a.data(), b.data(), a.size()); }
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) { active().axpy(alpha, x.data(), y.data(), x.size()); }

}  // namespace neuron::kernels
