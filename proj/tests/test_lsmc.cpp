#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "qmr/lsmc.hpp"

using namespace qmr;

TEST_CASE("ridge regression on the normal equations") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> norm;
    SUBCASE("constant target with intercept is fit exactly") {
        Eigen::MatrixXd x(50, 2);
        for (int m = 0; m < 50; ++m) {
            x(m, 0) = 1.0;
            x(m, 1) = norm(rng);
        }
        Eigen::VectorXd y = Eigen::VectorXd::Constant(50, 3.0);
        auto beta = fit_cond_exp(x, y, 0.0);
        auto pred = predict(x, beta);
        for (int m = 0; m < 50; ++m) CHECK(pred(m) == doctest::Approx(3.0).epsilon(1e-10));
    }
    SUBCASE("huge penalty shrinks to zero") {
        Eigen::MatrixXd x(40, 2);
        for (int m = 0; m < 40; ++m) {
            x(m, 0) = 1.0;
            x(m, 1) = norm(rng);
        }
        Eigen::VectorXd y = x.col(1) * 2.0;
        auto beta = fit_cond_exp(x, y, 1e12);
        CHECK(beta.norm() <= 1e-9);
        CHECK(predict(x, beta).norm() <= 1e-8);
    }
    SUBCASE("recovers a known coefficient under small noise") {
        const int m = 2000;
        Eigen::MatrixXd x(m, 1);
        Eigen::VectorXd y(m);
        std::normal_distribution<double> noise(0.0, 0.1);
        for (int i = 0; i < m; ++i) {
            x(i, 0) = norm(rng);
            y(i) = 2.0 * x(i, 0) + noise(rng);
        }
        auto beta = fit_cond_exp(x, y, 1e-5);
        CHECK(beta(0) == doctest::Approx(2.0).epsilon(0.025));
    }
    SUBCASE("fewer samples than regressors is an error") {
        Eigen::MatrixXd x(3, 5);
        x.setOnes();
        Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
        CHECK_THROWS(fit_cond_exp(x, y, 1e-5));
    }
    SUBCASE("zero coefficients predict zero") {
        Eigen::MatrixXd x(10, 3);
        x.setRandom();
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(3);
        CHECK(predict(x, beta).norm() == 0.0);
    }
}

namespace {

struct Setup {
    OUParams p{10.0, 1.0, 1.0, 1.0};
    TimeGrid grid{1.0, 40};
    int paths = 2000;
    PathSet mu;
    PathSet alpha;
    FeatureSet features;

    Setup()
        : mu(simulate_mu(p, grid, paths, 17)),
          alpha(alpha_closed_form(p, mu)),
          features(build_features(p, alpha)) {}
};

}  // namespace

TEST_CASE("regression conditional expectations") {
    Setup s;
    RegressionCondExp ce(s.features, 1e-5);
    CHECK_FALSE(ce.is_deterministic());

    SUBCASE("constant targets are reproduced") {
        std::vector<double> y(static_cast<std::size_t>(s.paths), 4.25);
        std::vector<double> out(static_cast<std::size_t>(s.paths));
        ce.estimate(7, y, out);
        for (double v : out) CHECK(v == doctest::Approx(4.25).epsilon(1e-6));
    }

    SUBCASE("tower sanity against the OU conditional mean") {
        std::mt19937_64 rng(5);
        std::uniform_int_distribution<int> pick(1, s.grid.steps() - 2);
        const double mean_level = s.p.eta / s.p.kappa;
        for (int rep = 0; rep < 5; ++rep) {
            int p = pick(rng), k = pick(rng);
            if (p > k) std::swap(p, k);
            if (p == k) k = p + 1;
            std::vector<double> y(static_cast<std::size_t>(s.paths));
            std::vector<double> est(static_cast<std::size_t>(s.paths));
            s.alpha.gather_node(k, y);
            ce.estimate(p, y, est);
            const double lag = s.grid.node(k) - s.grid.node(p);
            const double rem = s.grid.horizon() - s.grid.node(k);
            const double decay = std::exp(-s.p.kappa * lag);
            double mean_d = 0.0, sq_d = 0.0, sq_c = 0.0, mean_c = 0.0;
            for (int m = 0; m < s.paths; ++m) {
                const double mu_cond =
                    s.mu.at(m, p) * decay + mean_level * (1.0 - decay);
                const double closed = (mu_cond - mean_level) *
                                          (1.0 - std::exp(-s.p.kappa * rem)) / s.p.kappa +
                                      mean_level * rem;
                const double d = est[static_cast<std::size_t>(m)] - closed;
                mean_d += d;
                sq_d += d * d;
                mean_c += closed;
                sq_c += closed * closed;
            }
            mean_d /= s.paths;
            mean_c /= s.paths;
            const double sd_c = std::sqrt(std::max(sq_c / s.paths - mean_c * mean_c, 0.0));
            const double sd_d = std::sqrt(std::max(sq_d / s.paths - mean_d * mean_d, 1e-30));
            // basis bias small relative to the target's level and spread
            CHECK(std::abs(mean_d) <= 0.01 * (std::abs(mean_c) + sd_c));
            CHECK(std::sqrt(sq_d / s.paths) <= 0.25 * sd_c + 1e-8);
        }
    }

    SUBCASE("normal equation residuals stay small") {
        std::vector<double> y(static_cast<std::size_t>(s.paths));
        std::vector<double> out(static_cast<std::size_t>(s.paths));
        for (int p = 1; p < s.grid.steps() - 1; p += 7)
            for (int k = p + 1; k < s.grid.steps(); k += 5) {
                s.alpha.gather_node(k, y);
                ce.estimate(p, y, out);
            }
        CHECK(ce.max_normal_eq_residual() <= 1e-8);
    }
}

TEST_CASE("identical paths collapse the regression to the common value") {
    OUParams p{10.0, 1.0, 0.0, 1.0};
    TimeGrid grid(1.0, 20);
    auto mu = simulate_mu(p, grid, 500, 1);
    auto alpha = alpha_closed_form(p, mu);
    auto features = build_features(p, alpha);
    RegressionCondExp ce(features, 1e-5);
    std::vector<double> y(500);
    alpha.gather_node(15, y);
    std::vector<double> out(500);
    ce.estimate(4, y, out);
    for (double v : out) CHECK(v == doctest::Approx(y[0]).epsilon(1e-8));
}
