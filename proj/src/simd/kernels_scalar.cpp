#include "qmr/simd/kernels.hpp"

namespace qmr::simd::detail {
namespace {

double s_dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double s_dot_diff(const double* a, const double* b, const double* c, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * (b[i] - c[i]);
    return acc;
}

double s_dot3(const double* a, const double* b, const double* c, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i] * c[i];
    return acc;
}

void s_axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double s_sum_sq(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{s_dot, s_dot_diff, s_dot3, s_axpy, s_sum_sq};
    return ops;
}

}  // namespace qmr::simd::detail
