#include "ncal/kernels.hpp"

namespace ncal::kern {

double dot_ref(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double nrm2sq_ref(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

double l2sq_ref(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy_ref(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_ref(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void relu_ref(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

decltype(dot) dot = dot_ref;
decltype(nrm2sq) nrm2sq = nrm2sq_ref;
decltype(l2sq) l2sq = l2sq_ref;
decltype(axpy) axpy = axpy_ref;
decltype(scal) scal = scal_ref;
decltype(relu) relu = relu_ref;

namespace {

Backend g_active = Backend::scalar;

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

void apply_backend(Backend backend) {
    switch (backend) {
        case Backend::scalar:
            dot = dot_ref;
            nrm2sq = nrm2sq_ref;
            l2sq = l2sq_ref;
            axpy = axpy_ref;
            scal = scal_ref;
            relu = relu_ref;
            break;
        case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            dot = dot_avx2;
            nrm2sq = nrm2sq_avx2;
            l2sq = l2sq_avx2;
            axpy = axpy_avx2;
            scal = scal_avx2;
            relu = relu_avx2;
#endif
            break;
    }
    g_active = backend;
}

struct DispatchInit {
    DispatchInit() {
        if (cpu_has_avx2()) apply_backend(Backend::avx2);
    }
};

DispatchInit g_dispatch_init;

}  // namespace

Backend active_backend() { return g_active; }

bool backend_supported(Backend backend) {
    if (backend == Backend::scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
    return cpu_has_avx2();
#else
    return false;
#endif
}

bool select_backend(Backend backend) {
    if (!backend_supported(backend)) return false;
    apply_backend(backend);
    return true;
}

}  // namespace ncal::kern
