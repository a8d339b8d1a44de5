#pragma once

#include <cstddef>

// Dense double-precision kernels used by every scoring and training loop.
// Each kernel has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vectorized variant. The active implementation is chosen at
// startup by CPU probe and exposed through function pointers, so callers
// never branch on the instruction set themselves.

namespace ncal::kern {

enum class Backend { scalar, avx2 };

// Active implementations (initialized to the best supported backend).
extern double (*dot)(const double* a, const double* b, std::size_t n);
extern double (*nrm2sq)(const double* a, std::size_t n);
extern double (*l2sq)(const double* a, const double* b, std::size_t n);
extern void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
extern void (*scal)(double alpha, double* x, std::size_t n);
extern void (*relu)(const double* x, double* out, std::size_t n);

// Scalar reference kernels; ground truth for backend equivalence tests.
double dot_ref(const double* a, const double* b, std::size_t n);
double nrm2sq_ref(const double* a, std::size_t n);
double l2sq_ref(const double* a, const double* b, std::size_t n);
void axpy_ref(double alpha, const double* x, double* y, std::size_t n);
void scal_ref(double alpha, double* x, std::size_t n);
void relu_ref(const double* x, double* out, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
double nrm2sq_avx2(const double* a, std::size_t n);
double l2sq_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scal_avx2(double alpha, double* x, std::size_t n);
void relu_avx2(const double* x, double* out, std::size_t n);
#endif

Backend active_backend();
bool backend_supported(Backend backend);

// Swaps every kernel pointer; returns false (and changes nothing) if the
// backend is not supported on this CPU. Intended for tests.
bool select_backend(Backend backend);

}  // namespace ncal::kern
