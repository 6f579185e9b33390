#include <cmath>
#include <random>

#include <doctest.h>

#include "qmr/nystrom.hpp"
#include "qmr/volterra.hpp"

using namespace qmr;

namespace {

PathSet sampled(const TimeGrid& g, double (*f)(double)) {
    PathSet p(g, 1);
    for (int i = 0; i <= g.steps(); ++i) p.at(0, i) = f(g.node(i));
    return p;
}

double adjoint_gap(int n) {
    TimeGrid g(1.0, n);
    auto m = build_nystrom({0.5, 1.0, 0.6}, g);
    auto u = sampled(g, +[](double t) { return std::sin(3.0 * t) + 0.4; });
    auto v = sampled(g, +[](double t) { return std::cos(2.0 * t) - 0.1 * t; });
    PathSet lu(g, 1), mv(g, 1);
    DeterministicCondExp ce;
    apply_forward(m, u, lu);
    apply_adjoint(m, v, ce, mv);
    return std::abs(inner_product(lu, v) - inner_product(u, mv));
}

}  // namespace

TEST_CASE("forward operator basics") {
    TimeGrid g(1.0, 50);
    DeterministicCondExp ce;
    SUBCASE("zero matrix gives zero output") {
        NystromMatrices zero;
        zero.n = g.steps();
        zero.forward.assign(static_cast<std::size_t>(zero.n) * zero.n, 0.0);
        zero.adjoint = zero.forward;
        PathSet u(g, 2, 1.5), out(g, 2);
        apply_forward(zero, u, out);
        for (int m = 0; m < 2; ++m)
            for (int i = 0; i <= g.steps(); ++i) CHECK(out.at(m, i) == 0.0);
    }
    SUBCASE("constant kernel integrates a unit rate to elapsed time") {
        auto mat = build_nystrom({1.0, 0.0, 0.5}, g);
        PathSet u(g, 3, 1.0), out(g, 3);
        apply_forward(mat, u, out);
        for (int i = 0; i < g.steps(); ++i)
            CHECK(out.at(1, i) == doctest::Approx(g.node(i)).epsilon(1e-12));
        CHECK(out.at(0, 0) == 0.0);
    }
}

TEST_CASE("forward operator reproduces the square root convolution") {
    TimeGrid g(2.0, 200);
    auto mat = build_nystrom({0.0, 1.0, 0.5}, g);
    PathSet u(g, 1), out(g, 1);
    for (int i = 0; i <= g.steps(); ++i) u.at(0, i) = g.node(i) < 1.0 ? 0.3 : 0.0;
    apply_forward(mat, u, out);
    // int_0^1 0.3 (1-s)^{-1/2} ds = 0.6
    CHECK(out.at(0, 100) == doctest::Approx(0.6).epsilon(0.02));
}

TEST_CASE("adjoint operator basics") {
    TimeGrid g(1.0, 100);
    DeterministicCondExp ce;
    auto mat = build_nystrom({1.0, 0.0, 0.5}, g);
    SUBCASE("constant kernel gives remaining time") {
        PathSet u(g, 1, 1.0), out(g, 1);
        apply_adjoint(mat, u, ce, out);
        for (int i = 0; i < g.steps(); ++i) {
            CHECK(out.at(0, i) == doctest::Approx(g.horizon() - g.node(i)).epsilon(1e-10));
        }
    }
    SUBCASE("zero input gives zero output") {
        PathSet u(g, 2), out(g, 2, 3.0);
        apply_adjoint(mat, u, ce, out);
        for (int i = 0; i <= g.steps(); ++i) CHECK(out.at(0, i) == 0.0);
    }
}

TEST_CASE("forward and adjoint are numerically adjoint pairs") {
    double prev = adjoint_gap(50);
    for (int n : {100, 200, 400}) {
        const double gap = adjoint_gap(n);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 0.01);
}

TEST_CASE("discrete inner product") {
    TimeGrid g(1.0, 100);
    SUBCASE("unit functions") {
        PathSet f(g, 4, 1.0);
        CHECK(inner_product(f, f) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(discrete_norm(f) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("left rectangle sum of t") {
        PathSet f(g, 1, 1.0), t(g, 1);
        for (int i = 0; i <= g.steps(); ++i) t.at(0, i) = g.node(i);
        // sum_i i delta^2 = N(N-1)/2 * delta^2
        CHECK(inner_product(f, t) == doctest::Approx(0.495).epsilon(1e-13));
    }
    SUBCASE("antisymmetric pairing vanishes") {
        PathSet f(g, 1), s(g, 1);
        for (int i = 0; i <= g.steps(); ++i) {
            f.at(0, i) = (i % 2 == 0) ? 1.0 : -1.0;
            s.at(0, i) = (i % 2 == 0) ? -1.0 : 1.0;
        }
        CHECK(inner_product(f, s) == doctest::Approx(-1.0).epsilon(1e-13));
        CHECK(inner_product(f, f) + inner_product(f, s) == doctest::Approx(0.0).epsilon(1e-13));
    }
}

TEST_CASE("forward operator is linear and causal") {
    TimeGrid g(1.0, 60);
    auto mat = build_nystrom({0.3, 0.8, 0.7}, g);
    std::mt19937_64 rng(33);
    std::normal_distribution<double> norm;
    PathSet u(g, 1), v(g, 1), w(g, 1);
    for (int i = 0; i <= g.steps(); ++i) {
        u.at(0, i) = norm(rng);
        v.at(0, i) = norm(rng);
        w.at(0, i) = 2.0 * u.at(0, i) - 0.5 * v.at(0, i);
    }
    PathSet fu(g, 1), fv(g, 1), fw(g, 1);
    apply_forward(mat, u, fu);
    apply_forward(mat, v, fv);
    apply_forward(mat, w, fw);
    for (int i = 0; i < g.steps(); ++i)
        CHECK(fw.at(0, i) ==
              doctest::Approx(2.0 * fu.at(0, i) - 0.5 * fv.at(0, i)).epsilon(1e-12));

    // tampering with u after t_k leaves output through t_k untouched
    const int k = 30;
    PathSet u2 = u;
    for (int i = k; i <= g.steps(); ++i) u2.at(0, i) = 99.0;
    PathSet fu2(g, 1);
    apply_forward(mat, u2, fu2);
    for (int i = 0; i <= k; ++i) CHECK(fu2.at(0, i) == fu.at(0, i));
}
