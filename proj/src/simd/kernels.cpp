#include "qmr/simd/kernels.hpp"

#include <stdexcept>

namespace qmr::simd {
namespace {

using detail::Ops;

Backend detect_backend() {
#if defined(__aarch64__)
    return Backend::neon;
#elif defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::avx2;
    return Backend::scalar;
#else
    return Backend::scalar;
#endif
}

const Ops* ops_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &detail::scalar_ops();
        case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &detail::avx2_ops();
#endif
            return nullptr;
        case Backend::neon:
#if defined(__aarch64__)
            return &detail::neon_ops();
#else
            return nullptr;
#endif
    }
    return nullptr;
}

struct State {
    Backend backend;
    const Ops* ops;
    State() : backend(detect_backend()), ops(ops_for(backend)) {}
};

State& state() {
    static State s;
    return s;
}

}  // namespace

Backend active_backend() { return state().backend; }

void force_backend(Backend b) {
    const Ops* ops = ops_for(b);
    if (ops == nullptr) throw std::runtime_error("simd backend not available on this CPU");
    state().backend = b;
    state().ops = ops;
}

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

double dot(const double* a, const double* b, std::size_t n) { return state().ops->dot(a, b, n); }
double dot_diff(const double* a, const double* b, const double* c, std::size_t n) {
    return state().ops->dot_diff(a, b, c, n);
}
double dot3(const double* a, const double* b, const double* c, std::size_t n) {
    return state().ops->dot3(a, b, c, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) { state().ops->axpy(alpha, x, y, n); }
double sum_sq(const double* a, std::size_t n) { return state().ops->sum_sq(a, n); }

}  // namespace qmr::simd
