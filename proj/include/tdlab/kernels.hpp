#pragma once

#include <cstddef>

// Dense double-precision kernels used by the inner loops of training and
// evaluation (trace decay, weight updates, forward passes). A scalar
// reference implementation always exists; AVX2 and NEON variants are
// selected at runtime when the CPU supports them. The variants are
// equivalence-tested against the scalar reference. Elementwise kernels
// (axpy, add, scale, relu) are bit-identical across variants; reductions
// (dot, sum_sq, sq_dist) may differ in the last bits due to reassociation.

namespace tdlab::kernels {

enum class Isa { scalar = 0, avx2 = 1, neon = 2 };

struct Ops {
  // y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y += x
  void (*add)(const double* x, double* y, std::size_t n);
  // x *= a
  void (*scale)(double a, double* x, std::size_t n);
  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y = max(0, x)
  void (*relu)(const double* x, double* y, std::size_t n);
  // sum_i x[i]^2
  double (*sum_sq)(const double* x, std::size_t n);
  // sum_i (a[i]-b[i])^2
  double (*sq_dist)(const double* a, const double* b, std::size_t n);
};

bool available(Isa isa);
const Ops& ops(Isa isa);  // throws std::invalid_argument if unavailable

// Variant used by the convenience wrappers below. Defaults to the best
// available one; the TDLAB_KERNELS environment variable (scalar|avx2|neon)
// overrides the automatic choice.
Isa active();
void force(Isa isa);
const char* isa_name(Isa isa);

inline void axpy(double a, const double* x, double* y, std::size_t n) { ops(active()).axpy(a, x, y, n); }
inline void add(const double* x, double* y, std::size_t n) { ops(active()).add(x, y, n); }
inline void scale(double a, double* x, std::size_t n) { ops(active()).scale(a, x, n); }
inline double dot(const double* a, const double* b, std::size_t n) { return ops(active()).dot(a, b, n); }
inline void relu(const double* x, double* y, std::size_t n) { ops(active()).relu(x, y, n); }
inline double sum_sq(const double* x, std::size_t n) { return ops(active()).sum_sq(x, n); }
inline double sq_dist(const double* a, const double* b, std::size_t n) { return ops(active()).sq_dist(a, b, n); }

}  // namespace tdlab::kernels
