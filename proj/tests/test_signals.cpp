#include <cmath>

#include <doctest.h>

#include "qmr/signals.hpp"

using namespace qmr;

TEST_CASE("drift simulation with zero noise follows the ODE") {
    OUParams p{10.0, 1.0, 0.0, 1.0};
    TimeGrid g(1.0, 100);
    auto mu = simulate_mu(p, g, 3, 7);
    const double d = g.delta();
    CHECK(mu.at(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mu.at(0, 1) ==
          doctest::Approx(std::exp(-d) + 10.0 * (1.0 - std::exp(-d))).epsilon(1e-12));
    CHECK(mu.at(0, 1) == doctest::Approx(1.089551).epsilon(1e-5));
    // all paths identical without noise
    for (int i = 0; i <= g.steps(); ++i) {
        CHECK(mu.at(1, i) == mu.at(0, i));
        CHECK(mu.at(2, i) == mu.at(0, i));
    }
    // Euler refinement oracle for one coarse step
    double x = 1.0;
    const int sub = 20000;
    for (int k = 0; k < sub; ++k) x += (10.0 - x) * (d / sub);
    CHECK(mu.at(0, 1) == doctest::Approx(x).epsilon(1e-6));
}

TEST_CASE("stationary start stays put") {
    OUParams p{10.0, 2.0, 0.0, 5.0};
    TimeGrid g(1.0, 50);
    auto mu = simulate_mu(p, g, 1, 1);
    for (int i = 0; i <= g.steps(); ++i) CHECK(mu.at(0, i) == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("noisy simulation matches the closed-form mean") {
    OUParams p{10.0, 1.0, 1.0, 1.0};
    TimeGrid g(1.0, 20);
    const int paths = 100000;
    auto mu = simulate_mu(p, g, paths, 99);
    double mean = 0.0, sq = 0.0;
    for (int m = 0; m < paths; ++m) {
        const double v = mu.at(m, g.steps());
        mean += v;
        sq += v * v;
    }
    mean /= paths;
    const double sd = std::sqrt(sq / paths - mean * mean);
    const double target = p.mu0 * std::exp(-1.0) + (p.eta / p.kappa) * (1.0 - std::exp(-1.0));
    CHECK(std::abs(mean - target) <= 3.0 * sd / std::sqrt(static_cast<double>(paths)));
}

TEST_CASE("simulation is reproducible and per path stable") {
    OUParams p{10.0, 1.0, 1.0, 1.0};
    TimeGrid g(1.0, 30);
    auto a = simulate_mu(p, g, 8, 5);
    auto b = simulate_mu(p, g, 8, 5);
    auto c = simulate_mu(p, g, 3, 5);
    for (int m = 0; m < 8; ++m)
        for (int i = 0; i <= g.steps(); ++i) CHECK(a.at(m, i) == b.at(m, i));
    for (int m = 0; m < 3; ++m)
        for (int i = 0; i <= g.steps(); ++i) CHECK(a.at(m, i) == c.at(m, i));
    auto d = simulate_mu(p, g, 8, 6);
    CHECK(d.at(0, g.steps()) != a.at(0, g.steps()));
}

TEST_CASE("signal closed form") {
    OUParams p{10.0, 1.0, 0.0, 1.0};
    TimeGrid g(2.0, 200);
    PathSet mu(g, 1, 1.0);
    auto alpha = alpha_closed_form(p, mu);
    CHECK(alpha.at(0, g.steps()) == doctest::Approx(0.0).epsilon(1e-14));
    // T - t = 1 at the midpoint: -9(1 - e^{-1}) + 10
    CHECK(alpha.at(0, 100) == doctest::Approx(4.31088).epsilon(1e-4));

    OUParams fast{0.0, 100.0, 0.0, 1.0};
    auto small = alpha_closed_form(fast, mu);
    CHECK(std::abs(small.at(0, 100)) <= 0.011);
}

TEST_CASE("signal equals the integrated future drift when noise is off") {
    OUParams p{10.0, 1.5, 0.0, 0.3};
    TimeGrid g(1.0, 4000);
    auto mu = simulate_mu(p, g, 1, 1);
    auto alpha = alpha_closed_form(p, mu);
    double riemann = 0.0;
    for (int i = 0; i < g.steps(); ++i) riemann += mu.at(0, i) * g.delta();
    CHECK(alpha.at(0, 0) == doctest::Approx(riemann).epsilon(1e-3));
}

TEST_CASE("laguerre basis polynomials") {
    CHECK(laguerre(0, 3.7) == 1.0);
    CHECK(laguerre(1, 2.0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(laguerre(2, 2.0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(laguerre(2, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("feature construction") {
    OUParams p{10.0, 1.0, 0.0, 1.0};
    TimeGrid g(1.0, 100);
    SUBCASE("zero signal gives zero raw features") {
        PathSet alpha(g, 2);
        auto f = build_features(p, alpha);
        for (int k = 0; k < FeatureSet::raw_count; ++k)
            for (int i = 0; i <= g.steps(); ++i) CHECK(f.raw[static_cast<std::size_t>(k)].at(0, i) == 0.0);
    }
    SUBCASE("unit signal integrates to elapsed time and a discounted window") {
        PathSet alpha(g, 1, 1.0);
        auto f = build_features(p, alpha);
        for (int i = 0; i <= g.steps(); ++i)
            CHECK(f.raw[1].at(0, i) == doctest::Approx(g.node(i)).epsilon(1e-12));
        CHECK(f.raw[2].at(0, g.steps()) ==
              doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.02));
    }
    SUBCASE("features are causal under truncation") {
        TimeGrid gg(1.0, 40);
        OUParams q{10.0, 1.0, 1.0, 1.0};
        auto mu = simulate_mu(q, gg, 1, 3);
        auto alpha = alpha_closed_form(q, mu);
        auto f = build_features(q, alpha);
        const int cut = 25;
        PathSet trunc = alpha;
        for (int i = cut + 1; i <= gg.steps(); ++i) trunc.at(0, i) = 77.0;
        auto ft = build_features(q, trunc);
        for (int k = 0; k < FeatureSet::raw_count; ++k)
            for (int i = 0; i <= cut; ++i)
                CHECK(ft.raw[static_cast<std::size_t>(k)].at(0, i) ==
                      f.raw[static_cast<std::size_t>(k)].at(0, i));
    }
}
