#ifndef FBSDE_VALIDATE_HPP
#define FBSDE_VALIDATE_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fbsde/constants.hpp"
#include "fbsde/model.hpp"
#include "fbsde/rng.hpp"

namespace fbsde {

// Sampling plan for the assumption probes: bounded boxes and a count.
// Points come from a Halton grid plus seeded random refinement, so a plan
// is deterministic and the probes are reproducible.
struct ProbePlan {
    double t_lo = 0.0, t_hi = 1.0;
    double x_lo = -10.0, x_hi = 10.0;
    double y_lo = -5.0, y_hi = 5.0;
    double z_lo = -10.0, z_hi = 10.0;
    double u_lo = -5.0, u_hi = 5.0;
    int samples = 2000;
    std::uint64_t seed = 0;
    bool probe_convexity = false;
};

struct Witness {
    double t = 0, x = 0, y = 0, z = 0, u = 0;
    double t2 = 0, x2 = 0, y2 = 0, z2 = 0, u2 = 0;
    std::string detail;
};

struct CheckResult {
    std::string name;
    bool pass = true;
    double worst_ratio = 0.0;  // observed / allowed; > 1 means violation
    std::optional<Witness> witness;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

struct ProbePoint {
    double t, x, y, z, u;
};

inline std::vector<ProbePoint> probe_points(const ProbePlan& p) {
    std::vector<ProbePoint> pts;
    pts.reserve(p.samples);
    int n_halton = p.samples / 2;
    for (int i = 0; i < p.samples; ++i) {
        double c0, c1, c2, c3, c4;
        if (i < n_halton) {
            c0 = halton(i + 1, 2);
            c1 = halton(i + 1, 3);
            c2 = halton(i + 1, 5);
            c3 = halton(i + 1, 7);
            c4 = halton(i + 1, 11);
        } else {
            c0 = rng::uniform(p.seed, 7, i, 0);
            c1 = rng::uniform(p.seed, 7, i, 1);
            c2 = rng::uniform(p.seed, 7, i, 2);
            c3 = rng::uniform(p.seed, 7, i, 3);
            c4 = rng::uniform(p.seed, 7, i, 4);
        }
        pts.push_back({p.t_lo + c0 * (p.t_hi - p.t_lo), p.x_lo + c1 * (p.x_hi - p.x_lo),
                       p.y_lo + c2 * (p.y_hi - p.y_lo), p.z_lo + c3 * (p.z_hi - p.z_lo),
                       p.u_lo + c4 * (p.u_hi - p.u_lo)});
    }
    return pts;
}

// Tracks the worst observed/allowed ratio and its witness.
struct RatioTracker {
    double worst = 0.0;
    Witness witness;
    void observe(double observed, double allowed, const Witness& w) {
        // allowed == 0 with observed == 0 is a pass; observed > 0 is a hard fail
        double ratio;
        if (allowed > 0)
            ratio = observed / allowed;
        else
            ratio = (observed > 0) ? std::numeric_limits<double>::infinity() : 0.0;
        if (ratio > worst) {
            worst = ratio;
            witness = w;
        }
    }
    CheckResult result(const std::string& name) const {
        CheckResult r;
        r.name = name;
        r.worst_ratio = worst;
        r.pass = worst <= 1.0 + 1e-9;
        if (!r.pass) r.witness = witness;
        return r;
    }
};

}  // namespace detail

// Sampled probes of the standing assumptions: Lipschitz bounds on the
// forward coefficients, boundedness of g, quadratic growth and local
// z-Lipschitz continuity of f, Hoelder time regularity. Monotone in the
// constants: enlarging any constant can only lower the observed ratios.
inline ValidationReport validate_assumptions(const CoefficientSet& coeffs,
                                             const AssumptionConstants& consts,
                                             const ProbePlan& plan) {
    auto pts = detail::probe_points(plan);
    const int n = static_cast<int>(pts.size());

    detail::RatioTracker bound_a, lip_a, bound_g, lip_g, lip_y, growth_f, hbqd, hfd;
    detail::RatioTracker convexity;

    for (int i = 0; i < n; ++i) {
        const auto& p = pts[i];
        const auto& q = pts[(i + n / 2) % n];  // deterministic pairing
        Witness w{p.t, p.x, p.y, p.z, p.u, q.t, q.x, q.y, q.z, q.u, ""};

        // (HF): |b(t,0)| + |sigma(t)| + |beta(t,0)| <= K_a
        double a0 = std::abs(coeffs.eval_b(p.t, 0.0)) + std::abs(coeffs.eval_sigma(p.t)) +
                    std::abs(coeffs.eval_beta(p.t, 0.0));
        bound_a.observe(a0, consts.K_a, w);

        // (HF): Lipschitz in x of b and beta
        double dx = std::abs(p.x - q.x);
        if (dx > 1e-12) {
            double db = std::abs(coeffs.eval_b(p.t, p.x) - coeffs.eval_b(p.t, q.x));
            double dbeta = std::abs(coeffs.eval_beta(p.t, p.x) - coeffs.eval_beta(p.t, q.x));
            lip_a.observe(db + dbeta, consts.L_a * dx, w);
        }

        // (HBQ): |g| <= M_g and g Lipschitz
        bound_g.observe(std::abs(coeffs.eval_g(p.x)), consts.M_g, w);
        if (dx > 1e-12) {
            lip_g.observe(std::abs(coeffs.eval_g(p.x) - coeffs.eval_g(q.x)), consts.K_g * dx, w);
        }

        // (HBQ): Lipschitz in y, uniformly in the other arguments
        double dy = std::abs(p.y - q.y);
        if (dy > 1e-12) {
            double df = std::abs(coeffs.eval_f(p.t, p.x, p.y, p.z, p.u) -
                                 coeffs.eval_f(p.t, p.x, q.y, p.z, p.u));
            lip_y.observe(df, consts.K_q * dy, w);
        }

        // (HBQ): |f| <= K_q (1 + |y| + |z|^2 + |u|)
        double fv = std::abs(coeffs.eval_f(p.t, p.x, p.y, p.z, p.u));
        growth_f.observe(fv, consts.K_q * (1.0 + std::abs(p.y) + p.z * p.z + std::abs(p.u)), w);

        // (HBQD): full local Lipschitz bound with the (1+|z|+|z'|)|z-z'| term
        {
            double df = std::abs(coeffs.eval_f(p.t, p.x, p.y, p.z, p.u) -
                                 coeffs.eval_f(q.t, q.x, q.y, q.z, q.u));
            double allowed =
                consts.K_f * (std::abs(p.x - q.x) + dy + std::abs(p.u - q.u) +
                              std::sqrt(std::abs(p.t - q.t))) +
                consts.L_fz * (1.0 + std::abs(p.z) + std::abs(q.z)) * std::abs(p.z - q.z);
            if (allowed > 0 || df > 0) hbqd.observe(df, allowed, w);
        }

        // (HFD): Hoelder-1/2 in t for b and sigma, Lipschitz in t for beta
        double dt = std::abs(p.t - q.t);
        if (dt > 1e-12) {
            double db = std::abs(coeffs.eval_b(p.t, p.x) - coeffs.eval_b(q.t, p.x)) +
                        std::abs(coeffs.eval_sigma(p.t) - coeffs.eval_sigma(q.t));
            hfd.observe(db, consts.K_t * std::sqrt(dt), w);
            double dbeta = std::abs(coeffs.eval_beta(p.t, p.x) - coeffs.eval_beta(q.t, p.x)) +
                           std::abs(coeffs.eval_sigma(p.t) - coeffs.eval_sigma(q.t));
            hfd.observe(dbeta, consts.K_t * dt, w);
        }

        // optional: convexity of z -> f(.,z,.) on sampled midpoints
        if (plan.probe_convexity) {
            double zm = 0.5 * (p.z + q.z);
            double fm = coeffs.eval_f(p.t, p.x, p.y, zm, p.u);
            double favg = 0.5 * (coeffs.eval_f(p.t, p.x, p.y, p.z, p.u) +
                                 coeffs.eval_f(p.t, p.x, p.y, q.z, p.u));
            // midpoint value must not exceed the chord (tolerate roundoff)
            convexity.observe(fm, favg + 1e-9 * (1.0 + std::abs(favg)), w);
        }
    }

    ValidationReport report;
    report.checks.push_back(bound_a.result("HF.bound_at_origin"));
    report.checks.push_back(lip_a.result("HF.lipschitz_x"));
    report.checks.push_back(bound_g.result("HBQ.terminal_bound"));
    report.checks.push_back(lip_g.result("HBQ.terminal_lipschitz"));
    report.checks.push_back(lip_y.result("HBQ.lipschitz_y"));
    report.checks.push_back(growth_f.result("HBQ.quadratic_growth"));
    report.checks.push_back(hbqd.result("HBQD.local_lipschitz_z"));
    report.checks.push_back(hfd.result("HFD.time_regularity"));
    if (plan.probe_convexity) report.checks.push_back(convexity.result("HBQ.convexity_z"));
    return report;
}

}  // namespace fbsde

#endif
