#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fbsde/bounds.hpp"
#include "fbsde/config.hpp"
#include "fbsde/model.hpp"
#include "fbsde/quadrature.hpp"
#include "fbsde/validate.hpp"

using namespace fbsde;

TEST_CASE("intensity of the uniform density is its hazard rate") {
    JumpModel m{IndependentDensity{0.0, 2.0}};
    REQUIRE(m.intensity(1.0, true) == Catch::Approx(1.0).epsilon(1e-14));
    REQUIRE(m.intensity(1.0, false) == 0.0);
    REQUIRE(m.intensity(0.0, true) == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("cox intensity is constant while alive") {
    JumpModel m{CoxConstantIntensity{0.5}};
    REQUIRE(m.intensity(0.123, true) == 0.5);
    REQUIRE(m.intensity(0.9, true) == 0.5);
    REQUIRE(m.intensity(0.9, false) == 0.0);
}

TEST_CASE("degenerate survival raises") {
    JumpModel m{IndependentDensity{0.0, 1.0}};
    REQUIRE_THROWS_AS(m.intensity(1.0, true), DegenerateModelError);
}

TEST_CASE("jump sampling by inverse cdf") {
    JumpModel uni{IndependentDensity{0.0, 1.0}};
    REQUIRE(uni.sample(0.3) == Catch::Approx(0.3).epsilon(1e-14));
    JumpModel cox{CoxConstantIntensity{1.0}};
    REQUIRE(cox.sample(std::exp(-2.0)) == Catch::Approx(2.0).epsilon(1e-13));
    REQUIRE(cox.sample(std::exp(-2.0)) > 1.0);  // may exceed the horizon
}

TEST_CASE("survival identity of the uniform density") {
    // int_0^s lambda_t P[tau > t] dt + P[tau > s] = 1 inside the support
    IndependentDensity d{0.0, 2.0};
    JumpModel m{d};
    for (double s : {0.5, 1.0, 1.5, 1.9}) {
        double integral = simpson(
            [&](double t) { return m.intensity(t, true) * d.survival(t); }, 0.0, s, 2000);
        REQUIRE(integral + d.survival(s) == Catch::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("presets construct and validate") {
    for (const char* id : {"zero", "cole_hopf", "linear_jump", "quadratic_z", "cubic_z"}) {
        ProblemSpec spec = make_preset(id);
        REQUIRE(spec.coeffs.preset_id == id);
        spec.consts.validate();
    }
    REQUIRE_THROWS_AS(make_preset("no_such_preset"), Error);
}

TEST_CASE("config round trip preserves the problem instance") {
    ProblemSpec spec = make_preset("linear_jump", {{"a_y", 0.5}, {"a_u", 0.3}});
    nlohmann::json j = to_json(spec);
    ProblemSpec back = spec_from_json(j);
    REQUIRE(back.coeffs.preset_id == spec.coeffs.preset_id);
    REQUIRE(back.consts.K_a == spec.consts.K_a);
    REQUIRE(back.consts.m_y == spec.consts.m_y);
    REQUIRE(back.coeffs.f(0.1, 0.0, 2.0, 0.0, 1.0) == spec.coeffs.f(0.1, 0.0, 2.0, 0.0, 1.0));
    REQUIRE(std::get<CoxConstantIntensity>(back.jump.variant).lambda0 ==
            std::get<CoxConstantIntensity>(spec.jump.variant).lambda0);
}

TEST_CASE("config overrides constants and horizon") {
    nlohmann::json j = to_json(make_preset("cole_hopf"));
    j["horizon"] = 0.5;
    j["constants"]["K_g"] = 2.0;
    ProblemSpec spec = spec_from_json(j);
    REQUIRE(spec.consts.T == 0.5);
    REQUIRE(spec.consts.K_g == 2.0);
}

TEST_CASE("non-finite coefficient evaluation is rejected") {
    CoefficientSet c = make_preset("zero").coeffs;
    c.g = [](double) { return std::nan(""); };
    REQUIRE_THROWS_AS(c.eval_g(0.0), InvalidPresetError);
}

// bound-catalog hand values

TEST_CASE("gradient bounds: degenerate constants") {
    AssumptionConstants c{.M_g = 1.0, .K_g = 1.0, .m_y = 1.0};
    BoundCatalog b = gradient_bound_catalog(c);
    REQUIRE(b.grad_x0 == 1.0);
    REQUIRE(b.grad_y1_theta == 1.0);
    REQUIRE(b.grad_y0 == 1.0);
}

TEST_CASE("gradient bounds: L_a = ln 2") {
    AssumptionConstants c{.L_a = std::log(2.0), .M_g = 1.0, .m_y = 1.0};
    BoundCatalog b = gradient_bound_catalog(c);
    REQUIRE(b.grad_x0 == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(b.grad_x1_x == Catch::Approx((1.0 + 2.0 * std::log(2.0)) * 2.0).epsilon(1e-12));
}

TEST_CASE("truncation radius hand values") {
    AssumptionConstants a{.K_a = 3.0, .M_g = 2.0, .K_g = 2.0, .m_y = 2.0};
    REQUIRE(truncation_radius(a) == Catch::Approx(6.0).epsilon(1e-12));

    AssumptionConstants b{.K_a = 1.0, .L_a = std::log(2.0), .M_g = 1.0, .K_g = 1.0, .m_y = 1.0};
    REQUIRE(truncation_radius(b) == Catch::Approx(4.0).epsilon(1e-12));

    AssumptionConstants z{.m_y = 0.0};
    REQUIRE(truncation_radius(z) == 0.0);
}

TEST_CASE("bounds are monotone in each constant") {
    AssumptionConstants base{.K_a = 1.0, .L_a = 0.3, .M_g = 1.0, .K_g = 0.7, .K_q = 0.2,
                             .K_f = 0.4, .m_y = 2.0};
    auto fields = [](const BoundCatalog& b) {
        return std::vector<double>{b.grad_x0, b.grad_x1_theta, b.grad_x1_x, b.grad_y1_theta,
                                   b.grad_y1_diag, b.grad_y0, b.z1_bound, b.z0_bound};
    };
    auto lo = fields(gradient_bound_catalog(base));
    for (int which = 0; which < 4; ++which) {
        AssumptionConstants bumped = base;
        (which == 0 ? bumped.K_a : which == 1 ? bumped.L_a : which == 2 ? bumped.K_g
                                                                        : bumped.K_f) += 0.5;
        auto hi = fields(gradient_bound_catalog(bumped));
        for (std::size_t i = 0; i < lo.size(); ++i) REQUIRE(hi[i] >= lo[i]);
    }
}

TEST_CASE("clip behaves like the projection") {
    REQUIRE(clip(0.5, 1.0) == 0.5);
    REQUIRE(clip(-3.0, 1.0) == -1.0);
    REQUIRE(clip(1.0, 1.0) == 1.0);
    REQUIRE(clip(clip(7.3, 2.0), 2.0) == clip(7.3, 2.0));
}

TEST_CASE("clipped generator agrees inside the radius") {
    GeneratorFn f = [](double, double, double, double z, double) { return 0.5 * z * z; };
    GeneratorFn ft = lipschitzized_generator(f, 2.0);
    REQUIRE(ft(0, 0, 0, 1.0, 0) == 0.5);
    REQUIRE(ft(0, 0, 0, 10.0, 0) == 2.0);
    GeneratorFn f0 = lipschitzized_generator(f, 0.0);
    REQUIRE(f0(0, 0, 0, 5.0, 0) == 0.0);
}

// assumption probes

TEST_CASE("all shipped presets pass validation") {
    for (const char* id : {"zero", "cole_hopf", "linear_jump", "quadratic_z"}) {
        ProblemSpec spec = make_preset(id);
        ProbePlan plan;
        auto report = validate_assumptions(spec.coeffs, spec.consts, plan);
        INFO(id);
        for (const auto& c : report.checks) {
            INFO(c.name << " ratio " << c.worst_ratio);
            REQUIRE(c.pass);
        }
    }
}

TEST_CASE("cubic generator is rejected with a witness") {
    ProblemSpec spec = make_preset("cubic_z");
    ProbePlan plan;
    auto report = validate_assumptions(spec.coeffs, spec.consts, plan);
    REQUIRE_FALSE(report.all_pass());
    bool witnessed = false;
    for (const auto& c : report.checks)
        if (!c.pass && c.witness) witnessed = true;
    REQUIRE(witnessed);
}

TEST_CASE("validation is monotone in the constants") {
    ProblemSpec spec = make_preset("quadratic_z");
    ProbePlan plan;
    auto before = validate_assumptions(spec.coeffs, spec.consts, plan);
    AssumptionConstants bigger = spec.consts;
    bigger.K_a += 1;
    bigger.K_q += 1;
    bigger.K_g += 1;
    bigger.L_fz += 1;
    auto after = validate_assumptions(spec.coeffs, bigger, plan);
    for (std::size_t i = 0; i < before.checks.size(); ++i) {
        REQUIRE(after.checks[i].worst_ratio <= before.checks[i].worst_ratio + 1e-12);
        if (before.checks[i].pass) REQUIRE(after.checks[i].pass);
    }
}

TEST_CASE("convexity probe accepts convex-in-z generators") {
    ProblemSpec spec = make_preset("cole_hopf");
    ProbePlan plan;
    plan.probe_convexity = true;
    auto report = validate_assumptions(spec.coeffs, spec.consts, plan);
    REQUIRE(report.all_pass());
}
