#ifndef FBSDE_MODEL_HPP
#define FBSDE_MODEL_HPP

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <variant>

#include "fbsde/common.hpp"
#include "fbsde/constants.hpp"

namespace fbsde {

using DriftFn = std::function<double(double, double)>;      // (t, x)
using DiffusionFn = std::function<double(double)>;          // (t), deterministic
using JumpSizeFn = std::function<double(double, double)>;   // (t, x)
using GeneratorFn = std::function<double(double, double, double, double, double)>;  // (t,x,y,z,u)
using TerminalFn = std::function<double(double)>;           // (x)

// Evaluable coefficients (b, sigma, beta, f, g) of a problem instance.
// preset_id + params make the set round-trippable through config files;
// arbitrary closures never cross the serialization boundary.
struct CoefficientSet {
    DriftFn b;
    DiffusionFn sigma;
    JumpSizeFn beta;
    GeneratorFn f;
    TerminalFn g;
    std::string preset_id;
    std::map<std::string, double> params;
    // Set by presets whose beta is structurally zero: the X1 family then
    // collapses onto X0 and the post-jump sweep is shared across jump dates.
    bool beta_identically_zero = false;

    double eval_b(double t, double x) const { return require_finite(b(t, x), "b"); }
    double eval_sigma(double t) const { return require_finite(sigma(t), "sigma"); }
    double eval_beta(double t, double x) const { return require_finite(beta(t, x), "beta"); }
    double eval_f(double t, double x, double y, double z, double u) const {
        return require_finite(f(t, x, y, z, u), "f");
    }
    double eval_g(double x) const { return require_finite(g(x), "g"); }
};

// Jump-time law with a positive bounded density, independent of the
// Brownian motion. Restricted to a named family so configs round-trip.
struct IndependentDensity {
    // uniform density on [a, b]
    double a = 0.0;
    double b = 1.0;

    double density(double theta) const {
        return (theta >= a && theta <= b) ? 1.0 / (b - a) : 0.0;
    }
    double survival(double t) const {
        if (t <= a) return 1.0;
        if (t >= b) return 0.0;
        return (b - t) / (b - a);
    }
    double inverse_cdf(double u) const { return a + u * (b - a); }
};

// Constant-intensity Cox construction: tau = -ln(u)/lambda0.
struct CoxConstantIntensity {
    double lambda0 = 1.0;
};

// Both variants satisfy the density hypothesis, the bounded-intensity
// hypothesis and the martingale-invariance hypothesis by construction.
struct JumpModel {
    std::variant<IndependentDensity, CoxConstantIntensity> variant;

    JumpModel() : variant(CoxConstantIntensity{1.0}) {}
    explicit JumpModel(IndependentDensity d) : variant(d) {}
    explicit JumpModel(CoxConstantIntensity c) : variant(c) {}

    void validate(double lambda_max) const {
        if (auto* d = std::get_if<IndependentDensity>(&variant)) {
            require(d->b > d->a && d->a >= 0, "density support must be a nonempty interval in [0,inf)");
        } else {
            const auto& c = std::get<CoxConstantIntensity>(variant);
            require(c.lambda0 > 0, "Cox intensity must be positive");
            require(c.lambda0 <= lambda_max, "Cox intensity exceeds lambda_max");
        }
    }

    // Intensity of the jump indicator process; zero once the jump occurred.
    double intensity(double t, bool survived) const {
        if (!survived) return 0.0;
        if (auto* d = std::get_if<IndependentDensity>(&variant)) {
            double surv = d->survival(t);
            if (surv <= 0.0)
                throw DegenerateModelError("survival probability is 0, density exhausted at t");
            return d->density(t) / surv;
        }
        return std::get<CoxConstantIntensity>(variant).lambda0;
    }

    // Inverse-CDF draw from a uniform u in (0,1). May exceed any horizon.
    double sample(double u) const {
        if (auto* d = std::get_if<IndependentDensity>(&variant)) {
            if (d->b <= d->a) throw DegenerateModelError("degenerate density support");
            return d->inverse_cdf(u);
        }
        return -std::log(u) / std::get<CoxConstantIntensity>(variant).lambda0;
    }
};

// A full problem instance: coefficients, constants, jump law, initial state.
struct ProblemSpec {
    CoefficientSet coeffs;
    AssumptionConstants consts;
    JumpModel jump;
    double x0 = 0.0;
};

// ---------------------------------------------------------------------------
// Preset registry

namespace detail {
inline double param(const std::map<std::string, double>& p, const std::string& k, double dflt) {
    auto it = p.find(k);
    return it == p.end() ? dflt : it->second;
}
}  // namespace detail

// Named functional forms. Constants are defaults consistent with the
// preset's coefficients; configs may override them.
inline ProblemSpec make_preset(const std::string& id, std::map<std::string, double> params = {}) {
    using detail::param;
    ProblemSpec spec;
    CoefficientSet& c = spec.coeffs;
    c.preset_id = id;

    if (id == "zero") {
        double s = param(params, "sigma", 1.0);
        spec.x0 = param(params, "x0", 0.0);
        c.b = [](double, double) { return 0.0; };
        c.sigma = [s](double) { return s; };
        c.beta = [](double, double) { return 0.0; };
        c.f = [](double, double, double, double, double) { return 0.0; };
        c.g = [](double) { return 0.0; };
        c.beta_identically_zero = true;
        spec.consts = {.K_a = std::max(1.0, std::abs(s)), .T = 1.0, .lambda_max = 1.0, .m_y = 0.0};
    } else if (id == "cole_hopf") {
        // b = 0, sigma const, beta = 0, f = z^2/2, g = sin(x).
        double s = param(params, "sigma", 1.0);
        spec.x0 = param(params, "x0", 0.0);
        c.b = [](double, double) { return 0.0; };
        c.sigma = [s](double) { return s; };
        c.beta = [](double, double) { return 0.0; };
        c.f = [](double, double, double, double z, double) { return 0.5 * z * z; };
        c.g = [](double x) { return std::sin(x); };
        c.beta_identically_zero = true;
        spec.consts = {.K_a = std::abs(s), .L_a = 0.0, .M_g = 1.0, .K_g = 1.0, .K_q = 0.5,
                       .K_f = 0.0, .L_fz = 0.5, .K_t = 0.0, .T = 1.0, .lambda_max = 1.0,
                       .m_y = 1.0};
    } else if (id == "linear_jump") {
        // f = a_y*y + a_u*u, g const, beta const, b = 0, sigma const.
        double a_y = param(params, "a_y", 0.5);
        double a_u = param(params, "a_u", 0.3);
        double cc = param(params, "c", 1.0);
        double beta0 = param(params, "beta0", 1.0);
        double s = param(params, "sigma", 0.2);
        spec.x0 = param(params, "x0", 0.0);
        c.b = [](double, double) { return 0.0; };
        c.sigma = [s](double) { return s; };
        c.beta = [beta0](double, double) { return beta0; };
        c.f = [a_y, a_u](double, double, double y, double, double u) { return a_y * y + a_u * u; };
        c.g = [cc](double) { return cc; };
        c.beta_identically_zero = (beta0 == 0.0);
        double kf = std::max(std::abs(a_y), std::abs(a_u));
        double my = std::abs(cc) * std::exp((std::abs(a_y) + std::abs(a_u)) * 1.0) * 2.0;
        spec.consts = {.K_a = std::abs(beta0) + std::abs(s), .L_a = 0.0, .M_g = std::abs(cc),
                       .K_g = 0.0, .K_q = kf, .K_f = kf, .L_fz = 0.0, .K_t = 0.0, .T = 1.0,
                       .lambda_max = 1.0, .m_y = my};
        spec.jump = JumpModel(CoxConstantIntensity{param(params, "lambda0", 0.5)});
    } else if (id == "quadratic_z") {
        double s = param(params, "sigma", 1.0);
        spec.x0 = param(params, "x0", 0.0);
        c.b = [](double, double) { return 0.0; };
        c.sigma = [s](double) { return s; };
        c.beta = [](double, double) { return 0.0; };
        c.f = [](double, double, double, double z, double) { return z * z; };
        c.g = [](double x) { return std::cos(x); };
        c.beta_identically_zero = true;
        spec.consts = {.K_a = std::abs(s), .M_g = 1.0, .K_g = 1.0, .K_q = 1.0, .K_f = 0.0,
                       .L_fz = 1.0, .T = 1.0, .lambda_max = 1.0, .m_y = 1.0};
    } else if (id == "cubic_z") {
        // Violates the quadratic-growth assumption; kept for the validator.
        double s = param(params, "sigma", 1.0);
        spec.x0 = param(params, "x0", 0.0);
        c.b = [](double, double) { return 0.0; };
        c.sigma = [s](double) { return s; };
        c.beta = [](double, double) { return 0.0; };
        c.f = [](double, double, double, double z, double) { return z * z * z; };
        c.g = [](double x) { return std::sin(x); };
        c.beta_identically_zero = true;
        spec.consts = {.K_a = std::abs(s), .M_g = 1.0, .K_g = 1.0, .K_q = 1.0, .K_f = 0.0,
                       .L_fz = 1.0, .T = 1.0, .lambda_max = 1.0, .m_y = 1.0};
    } else {
        throw Error("unknown preset: " + id);
    }

    c.params = std::move(params);
    spec.consts.validate();
    return spec;
}

}  // namespace fbsde

#endif
