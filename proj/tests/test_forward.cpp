#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fbsde/forward.hpp"
#include "fbsde/model.hpp"

using namespace fbsde;

namespace {

CoefficientSet simple_coeffs(DriftFn b, DiffusionFn s, JumpSizeFn beta) {
    CoefficientSet c;
    c.b = std::move(b);
    c.sigma = std::move(s);
    c.beta = std::move(beta);
    c.f = [](double, double, double, double, double) { return 0.0; };
    c.g = [](double x) { return x; };
    c.beta_identically_zero = false;
    return c;
}

}  // namespace

TEST_CASE("increment moments match the grid spacing") {
    TimeGrid g = TimeGrid::uniform(1.0, 4);
    Matrix dW = simulate_increments(g, 100000, 3);
    double m = 0, v = 0;
    for (const auto& row : dW) {
        m += row[1];
        v += row[1] * row[1];
    }
    m /= dW.size();
    v = v / dW.size() - m * m;
    REQUIRE(std::abs(m) <= 5.0 * std::sqrt(0.25 / dW.size()));
    REQUIRE(v == Catch::Approx(0.25).epsilon(0.01));
}

TEST_CASE("increments are deterministic given the seed") {
    TimeGrid g = TimeGrid::uniform(1.0, 8);
    REQUIRE(simulate_increments(g, 10, 42) == simulate_increments(g, 10, 42));
    REQUIRE(simulate_increments(g, 10, 42) != simulate_increments(g, 10, 43));
}

TEST_CASE("euler_x0: pure random walk") {
    TimeGrid g = TimeGrid::uniform(1.0, 4);
    auto c = simple_coeffs([](double, double) { return 0.0; }, [](double) { return 1.0; },
                           [](double, double) { return 0.0; });
    std::vector<double> dW{0.1, -0.2, 0.3, 0.05};
    auto x = euler_x0_path(c, g, dW, 1.0);
    double run = 1.0;
    for (int i = 1; i <= 4; ++i) {
        run += dW[i - 1];
        REQUIRE(x[i] == Catch::Approx(run).epsilon(1e-14));
    }
}

TEST_CASE("euler_x0: deterministic drift hand recursion") {
    TimeGrid g = TimeGrid::uniform(1.0, 2);
    auto c = simple_coeffs([](double, double) { return 1.0; }, [](double) { return 0.0; },
                           [](double, double) { return 0.0; });
    auto x = euler_x0_path(c, g, {0.0, 0.0}, 0.0);
    REQUIRE(x[1] == 0.5);
    REQUIRE(x[2] == 1.0);

    TimeGrid g1 = TimeGrid::uniform(1.0, 1);
    auto ca = simple_coeffs([](double, double x0) { return 0.7 * x0; }, [](double) { return 0.0; },
                            [](double, double) { return 0.0; });
    auto xa = euler_x1_path(ca, g1, {0.0}, 2.0, 1);  // beta = 0, jump irrelevant for values
    REQUIRE(euler_x0_path(ca, g1, {0.0}, 2.0)[1] == Catch::Approx(2.0 * 1.7).epsilon(1e-14));
    (void)xa;
}

TEST_CASE("euler_x1 equals euler_x0 when beta vanishes") {
    TimeGrid g = TimeGrid::uniform(1.0, 6);
    auto c = simple_coeffs([](double, double x) { return 0.2 * x; }, [](double) { return 0.5; },
                           [](double, double) { return 0.0; });
    Matrix dW = simulate_increments(g, 20, 5);
    for (int k = 0; k <= 6; ++k)
        for (int p = 0; p < 20; ++p) REQUIRE(euler_x1_path(c, g, dW[p], 0.3, k) ==
                                             euler_x0_path(c, g, dW[p], 0.3));
}

TEST_CASE("euler_x1: initial jump for k = 0") {
    TimeGrid g = TimeGrid::uniform(1.0, 3);
    auto c = simple_coeffs([](double, double) { return 0.0; }, [](double) { return 0.0; },
                           [](double, double) { return 1.0; });
    auto x = euler_x1_path(c, g, {0.0, 0.0, 0.0}, 0.0, 0);
    for (int i = 0; i <= 3; ++i) REQUIRE(x[i] == 1.0);
}

TEST_CASE("euler_x1 agrees with euler_x0 strictly before the jump index") {
    TimeGrid g = TimeGrid::uniform(1.0, 5);
    auto c = simple_coeffs([](double, double x) { return x; }, [](double) { return 1.0; },
                           [](double t, double x) { return 0.5 + 0.1 * t + 0.05 * x; });
    Matrix dW = simulate_increments(g, 10, 11);
    for (int k = 1; k <= 5; ++k)
        for (int p = 0; p < 10; ++p) {
            auto x0 = euler_x0_path(c, g, dW[p], 0.2);
            auto x1 = euler_x1_path(c, g, dW[p], 0.2, k);
            for (int i = 0; i < k; ++i) REQUIRE(x1[i] == x0[i]);
            REQUIRE(x1[k] != x0[k]);
        }
}

TEST_CASE("jump times may exceed the horizon") {
    JumpModel cox{CoxConstantIntensity{1.0}};
    REQUIRE(sample_jump_time(cox, std::exp(-2.0)) == Catch::Approx(2.0).epsilon(1e-13));
    TimeGrid g = TimeGrid::uniform(1.0, 4);
    CoefficientSet c = make_preset("zero").coeffs;
    PathBundle b = PathBundle::build(c, cox, g, 0.0, 500, 17);
    bool some_survive = false, some_jump = false;
    for (int p = 0; p < b.n_paths(); ++p) {
        if (b.jump_index(p) < 0) {
            some_survive = true;
            REQUIRE(b.tau[p] > 1.0);
        } else {
            some_jump = true;
            REQUIRE(g.node(b.jump_index(p)) <= b.tau[p]);
        }
    }
    REQUIRE(some_survive);
    REQUIRE(some_jump);
}

TEST_CASE("recombined process switches branch at tau") {
    TimeGrid g = TimeGrid::uniform(1.0, 4);
    auto c = simple_coeffs([](double, double) { return 0.0; }, [](double) { return 1.0; },
                           [](double, double) { return 10.0; });
    JumpModel uni{IndependentDensity{0.0, 1.0}};
    PathBundle b = PathBundle::build(c, uni, g, 0.0, 50, 23);
    RecombinedX X(c, b);
    for (int p = 0; p < b.n_paths(); ++p) {
        int k = b.jump_index(p);
        auto x1 = k >= 0 ? b.x1_path(c, p, k) : std::vector<double>{};
        for (int i = 0; i <= 4; ++i) {
            double t = g.node(i);
            if (t < b.tau[p] || k < 0)
                REQUIRE(X(p, t) == b.x0_paths[p][i]);
            else
                REQUIRE(X(p, t) == x1[i]);
        }
    }
}

TEST_CASE("beta == 0 collapses the recombined process") {
    TimeGrid g = TimeGrid::uniform(1.0, 4);
    CoefficientSet c = make_preset("cole_hopf").coeffs;
    JumpModel uni{IndependentDensity{0.0, 1.0}};
    PathBundle b = PathBundle::build(c, uni, g, 0.0, 30, 29);
    RecombinedX X(c, b);
    for (int p = 0; p < b.n_paths(); ++p)
        for (int i = 0; i <= 4; ++i) REQUIRE(X(p, g.node(i)) == b.x0_paths[p][i]);
}

TEST_CASE("coarse increments from fine block sums stay coupled") {
    // strong-coupling sanity: E sup |X_coarse - X_fine|^2 = O(mesh)
    auto c = simple_coeffs([](double, double x) { return -x; }, [](double) { return 1.0; },
                           [](double, double) { return 0.0; });
    auto sup_err = [&](int n) {
        TimeGrid fine = TimeGrid::uniform(1.0, 256);
        TimeGrid coarse = TimeGrid::uniform(1.0, n);
        int r = 256 / n;
        Matrix dWf = simulate_increments(fine, 4000, 31);
        double acc = 0;
        for (const auto& rowf : dWf) {
            std::vector<double> rowc(n, 0.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < r; ++j) rowc[i] += rowf[i * r + j];
            auto xf = euler_x0_path(c, fine, rowf, 1.0);
            auto xc = euler_x0_path(c, coarse, rowc, 1.0);
            double worst = 0;
            for (int i = 0; i <= n; ++i)
                worst = std::max(worst, std::abs(xc[i] - xf[i * r]));
            acc += worst * worst;
        }
        return acc / dWf.size();
    };
    double e8 = sup_err(8), e64 = sup_err(64);
    REQUIRE(e64 < e8);
    REQUIRE(e8 / e64 > 3.0);  // about 8x for a first-order scheme
}

TEST_CASE("empirical compensator of the jump indicator is centered") {
    JumpModel cox{CoxConstantIntensity{0.7}};
    const int n = 200000;
    double s = 0.8, mean = 0, var = 0;
    for (int p = 0; p < n; ++p) {
        double tau = cox.sample(rng::uniform(101, rng::kJumpStream, p, 0));
        double h = tau <= s ? 1.0 : 0.0;
        double comp = 0.7 * std::min(tau, s);
        double d = h - comp;
        mean += d;
        var += d * d;
    }
    mean /= n;
    var = var / n - mean * mean;
    REQUIRE(std::abs(mean) <= 5.0 * std::sqrt(var / n));
}
