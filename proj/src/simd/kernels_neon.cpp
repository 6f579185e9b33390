#if defined(__aarch64__)

#include <arm_neon.h>

#include "qmr/simd/kernels.hpp"

namespace qmr::simd::detail {
namespace {

double v_dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double v_dot_diff(const double* a, const double* b, const double* c, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(b + i), vld1q_f64(c + i));
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), d);
    }
    double acc = vaddvq_f64(acc0);
    for (; i < n; ++i) acc += a[i] * (b[i] - c[i]);
    return acc;
}

double v_dot3(const double* a, const double* b, const double* c, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t ab = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc0 = vfmaq_f64(acc0, ab, vld1q_f64(c + i));
    }
    double acc = vaddvq_f64(acc0);
    for (; i < n; ++i) acc += a[i] * b[i] * c[i];
    return acc;
}

void v_axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double v_sum_sq(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(a + i);
        acc0 = vfmaq_f64(acc0, v, v);
    }
    double acc = vaddvq_f64(acc0);
    for (; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

}  // namespace

const Ops& neon_ops() {
    static const Ops ops{v_dot, v_dot_diff, v_dot3, v_axpy, v_sum_sq};
    return ops;
}

}  // namespace qmr::simd::detail

#endif
