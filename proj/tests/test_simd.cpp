#include <cstring>
#include <random>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "qmr/simd/kernels.hpp"

using namespace qmr::simd;

namespace {

struct BackendGuard {
    Backend prev = active_backend();
    ~BackendGuard() { force_backend(prev); }
};

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> norm;
    std::vector<double> v(n);
    for (double& x : v) x = norm(rng);
    return v;
}

}  // namespace

TEST_CASE("backend names") {
    CHECK(std::strcmp(backend_name(Backend::scalar), "scalar") == 0);
    CHECK(std::strcmp(backend_name(active_backend()), "") != 0);
}

TEST_CASE("forcing the scalar backend always works") {
    BackendGuard guard;
    force_backend(Backend::scalar);
    CHECK(active_backend() == Backend::scalar);
}

TEST_CASE("forcing a foreign backend throws") {
    BackendGuard guard;
#if defined(__x86_64__) || defined(_M_X64)
    CHECK_THROWS_AS(force_backend(Backend::neon), std::runtime_error);
#elif defined(__aarch64__)
    CHECK_THROWS_AS(force_backend(Backend::avx2), std::runtime_error);
#endif
}

TEST_CASE("vector backends agree with scalar reference") {
    BackendGuard guard;
    const Backend best = guard.prev;
    std::mt19937_64 rng(21);
    // sizes straddling vector widths, including remainders and empty
    for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{4},
                          std::size_t{7}, std::size_t{8}, std::size_t{13}, std::size_t{64},
                          std::size_t{257}}) {
        auto a = random_vec(rng, n), b = random_vec(rng, n), c = random_vec(rng, n);
        force_backend(Backend::scalar);
        const double d0 = dot(a.data(), b.data(), n);
        const double dd0 = dot_diff(a.data(), b.data(), c.data(), n);
        const double d30 = dot3(a.data(), b.data(), c.data(), n);
        const double s0 = sum_sq(a.data(), n);
        auto y0 = c;
        axpy(0.7, a.data(), y0.data(), n);

        force_backend(best);
        const double tol = 1e-12 * (1.0 + static_cast<double>(n));
        CHECK(dot(a.data(), b.data(), n) == doctest::Approx(d0).epsilon(tol));
        CHECK(dot_diff(a.data(), b.data(), c.data(), n) == doctest::Approx(dd0).epsilon(tol));
        CHECK(dot3(a.data(), b.data(), c.data(), n) == doctest::Approx(d30).epsilon(tol));
        CHECK(sum_sq(a.data(), n) == doctest::Approx(s0).epsilon(tol));
        auto y1 = c;
        axpy(0.7, a.data(), y1.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y0[i]).epsilon(1e-13));
    }
}

TEST_CASE("scalar kernels match plain loops exactly") {
    BackendGuard guard;
    force_backend(Backend::scalar);
    std::mt19937_64 rng(22);
    const std::size_t n = 37;
    auto a = random_vec(rng, n), b = random_vec(rng, n), c = random_vec(rng, n);
    double d = 0.0, dd = 0.0, d3 = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d += a[i] * b[i];
        dd += a[i] * (b[i] - c[i]);
        d3 += a[i] * b[i] * c[i];
        ss += a[i] * a[i];
    }
    CHECK(dot(a.data(), b.data(), n) == doctest::Approx(d).epsilon(1e-15));
    CHECK(dot_diff(a.data(), b.data(), c.data(), n) == doctest::Approx(dd).epsilon(1e-15));
    CHECK(dot3(a.data(), b.data(), c.data(), n) == doctest::Approx(d3).epsilon(1e-15));
    CHECK(sum_sq(a.data(), n) == doctest::Approx(ss).epsilon(1e-15));
}
