#pragma once

#include <cstddef>

namespace qmr::simd {

enum class Backend { scalar, avx2, neon };

/// Currently active backend (chosen once at startup from CPU features).
Backend active_backend();

/// Force a specific backend; throws if unavailable on this CPU. Intended for
/// equivalence tests and benchmarking.
void force_backend(Backend b);

const char* backend_name(Backend b);

/// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

/// sum_i a[i] * (b[i] - c[i])
double dot_diff(const double* a, const double* b, const double* c, std::size_t n);

/// sum_i a[i] * b[i] * c[i]
double dot3(const double* a, const double* b, const double* c, std::size_t n);

/// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// sum_i a[i]^2
double sum_sq(const double* a, std::size_t n);

namespace detail {
struct Ops {
    double (*dot)(const double*, const double*, std::size_t);
    double (*dot_diff)(const double*, const double*, const double*, std::size_t);
    double (*dot3)(const double*, const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*sum_sq)(const double*, std::size_t);
};
const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif
}  // namespace detail

}  // namespace qmr::simd
