#ifndef FBSDE_ORACLES_HPP
#define FBSDE_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>

#include "fbsde/grid.hpp"
#include "fbsde/model.hpp"
#include "fbsde/quadrature.hpp"

namespace fbsde {

struct OracleResult {
    double y0 = 0.0;
    double z0 = 0.0;
    bool has_z = false;
    std::string description;
};

// ---------------------------------------------------------------------------
// Exhaustive tree evaluation of the discrete scheme under the two-point
// increment law (+-sqrt(dt), probability 1/2 each). Written directly from
// the recursion, with no shared machinery with the production solvers, so
// it can vouch for them. Exponential in n; capped accordingly.
//
// Scenario/prefix encoding matches lexicographic sign order: bit 0 means a
// "+" increment, bit 1 a "-", most recent increment in the lowest bit.
class TreeOracle {
  public:
    TreeOracle(const CoefficientSet& coeffs, const TimeGrid& grid, double x0,
               double fp_tol = 1e-14, int fp_maxit = 200)
        : c_(coeffs), g_(grid), x0_(x0), tol_(fp_tol), maxit_(fp_maxit), n_(grid.steps()) {
        require(n_ <= 6, "tree oracle limited to n <= 6");
    }

    // No-jump state at node i given the sign prefix (length i).
    double x0_state(int i, std::uint64_t bits) const {
        double x = x0_;
        for (int j = 1; j <= i; ++j) {
            double t = g_.node(j - 1);
            x += c_.eval_b(t, x) * g_.dt(j) + c_.eval_sigma(t) * dw(j, i, bits);
        }
        return x;
    }

    // Jumped state, jump-size term applied at step k (initial node for k=0).
    double x1_state(int k, int i, std::uint64_t bits) const {
        double x = x0_ + (k == 0 ? c_.eval_beta(g_.node(0), x0_) : 0.0);
        for (int j = 1; j <= i; ++j) {
            double t = g_.node(j - 1);
            double xp = x;
            x += c_.eval_b(t, xp) * g_.dt(j) + c_.eval_sigma(t) * dw(j, i, bits);
            if (j == k) x += c_.eval_beta(t, xp);
        }
        return x;
    }

    // Post-jump branch value at node i, jump index k, prefix of length i.
    double y1(int k, int i, std::uint64_t bits) {
        auto key = std::make_tuple(k, i, bits);
        if (auto it = memo_y1_.find(key); it != memo_y1_.end()) return it->second;
        double y;
        if (i == n_) {
            y = c_.eval_g(x1_state(k, n_, bits));
        } else {
            double yp = y1(k, i + 1, bits << 1);
            double ym = y1(k, i + 1, (bits << 1) | 1);
            double z = z_from_children(yp, ym, i);
            double x = x1_state(k, i, bits);
            y = solve_implicit(0.5 * (yp + ym), z, x, g_.node(i), g_.dt(i + 1), 0.0, false);
        }
        memo_y1_[key] = y;
        return y;
    }

    double z1(int k, int i, std::uint64_t bits) {
        require(i < n_, "no martingale part at the terminal node");
        return z_from_children(y1(k, i + 1, bits << 1), y1(k, i + 1, (bits << 1) | 1), i);
    }

    // Family diagonal at node i along a no-jump prefix.
    double diag(int i, std::uint64_t bits) { return y1(i, i, bits); }

    // No-jump branch value; the generator consumes diag - y.
    double y0(int i, std::uint64_t bits) {
        auto key = std::make_tuple(0, i, bits);
        if (auto it = memo_y0_.find(key); it != memo_y0_.end()) return it->second;
        double y;
        if (i == n_) {
            y = c_.eval_g(x0_state(n_, bits));
        } else {
            double yp = y0(i + 1, bits << 1);
            double ym = y0(i + 1, (bits << 1) | 1);
            double z = z_from_children(yp, ym, i);
            double x = x0_state(i, bits);
            y = solve_implicit(0.5 * (yp + ym), z, x, g_.node(i), g_.dt(i + 1), diag(i, bits),
                               true);
        }
        memo_y0_[key] = y;
        return y;
    }

    double z0(int i, std::uint64_t bits) {
        require(i < n_, "no martingale part at the terminal node");
        return z_from_children(y0(i + 1, bits << 1), y0(i + 1, (bits << 1) | 1), i);
    }

  private:
    double dw(int j, int i, std::uint64_t bits) const {
        bool minus = (bits >> (i - j)) & 1;
        return (minus ? -1.0 : 1.0) * std::sqrt(g_.dt(j));
    }

    double z_from_children(double yp, double ym, int i) const {
        double dt = g_.dt(i + 1), sd = std::sqrt(dt);
        return 0.5 * (yp * sd / dt + ym * (-sd) / dt);
    }

    double solve_implicit(double ey, double z, double x, double t, double dt, double d,
                          bool coupled) const {
        double y = ey;
        for (int it = 0; it < maxit_; ++it) {
            double u = coupled ? d - y : 0.0;
            double next = ey + c_.eval_f(t, x, y, z, u) * dt;
            if (std::abs(next - y) <= tol_) return next;
            y = next;
        }
        throw ConvergenceFailureError("tree oracle fixed point did not converge");
    }

    const CoefficientSet& c_;
    TimeGrid g_;
    double x0_, tol_;
    int maxit_, n_;
    std::map<std::tuple<int, int, std::uint64_t>, double> memo_y1_, memo_y0_;
};

// ---------------------------------------------------------------------------
// Closed-form references.

// For f = (gamma/2) z^2, b = 0, sigma deterministic, no jump dependence:
// exp(gamma Y) is a martingale, so
//   Y(t, x) = (1/gamma) log E[exp(gamma g(x + N(0, var)))],
// var = integral of sigma^2 over [t, T]. High-order quadrature makes this
// an independent reference for the solvers.
inline double exponential_transform_value(const TerminalFn& g, double gamma, double x,
                                          double variance, int order = 64) {
    require(gamma != 0.0, "transform undefined for gamma = 0");
    GaussHermiteRule rule(order);
    double sd = std::sqrt(variance);
    double m = rule.mean([&](double xi) { return std::exp(gamma * g(x + sd * xi)); });
    return std::log(m) / gamma;
}

// Matching slope in x (the martingale-integrand value at (t, x) is
// sigma times this derivative).
inline double exponential_transform_slope(const TerminalFn& g, const TerminalFn& g_prime,
                                          double gamma, double x, double variance,
                                          int order = 64) {
    GaussHermiteRule rule(order);
    double sd = std::sqrt(variance);
    double num = rule.mean(
        [&](double xi) { return std::exp(gamma * g(x + sd * xi)) * g_prime(x + sd * xi); });
    double den = rule.mean([&](double xi) { return std::exp(gamma * g(x + sd * xi)); });
    return num / den;
}

// f = a_y y + a_u u, g constant c, deterministic coefficients: both branches
// solve the same linear ODE and Y(t) = c exp(a_y (T - t)) on either side of
// the jump, with Z = U = 0. (The u-coupling cancels: the post-jump value
// equals the pre-jump value because the terminal condition ignores x.)
inline double linear_jump_value(double a_y, double c, double T, double t) {
    return c * std::exp(a_y * (T - t));
}

// Reference values for the named presets with known solutions.
inline OracleResult oracle_for_preset(const std::string& id,
                                      std::map<std::string, double> params = {}) {
    ProblemSpec spec = make_preset(id, std::move(params));
    OracleResult r;
    if (id == "zero") {
        r.y0 = 0.0;
        r.z0 = 0.0;
        r.has_z = true;
        r.description = "trivial instance, everything vanishes";
    } else if (id == "cole_hopf") {
        double s = spec.coeffs.eval_sigma(0.0);
        double var = s * s * spec.consts.T;
        r.y0 = exponential_transform_value(spec.coeffs.g, 1.0, spec.x0, var);
        r.z0 = s * exponential_transform_slope(spec.coeffs.g, [](double x) { return std::cos(x); },
                                               1.0, spec.x0, var);
        r.has_z = true;
        r.description = "log-transform of a Gaussian expectation, 64-point quadrature";
    } else if (id == "quadratic_z") {
        double s = spec.coeffs.eval_sigma(0.0);
        double var = s * s * spec.consts.T;
        r.y0 = exponential_transform_value(spec.coeffs.g, 2.0, spec.x0, var);
        r.z0 = s * exponential_transform_slope(spec.coeffs.g, [](double x) { return -std::sin(x); },
                                               2.0, spec.x0, var);
        r.has_z = true;
        r.description = "log-transform with gamma = 2, 64-point quadrature";
    } else if (id == "linear_jump") {
        double a_y = detail::param(spec.coeffs.params, "a_y", 0.5);
        double c = detail::param(spec.coeffs.params, "c", 1.0);
        r.y0 = linear_jump_value(a_y, c, spec.consts.T, 0.0);
        r.z0 = 0.0;
        r.has_z = true;
        r.description = "linear ODE closed form, jump coupling cancels";
    } else {
        throw Error("no reference solution known for preset: " + id);
    }
    return r;
}

}  // namespace fbsde

#endif
