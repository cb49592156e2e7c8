#ifndef FBSDE_BOUNDS_HPP
#define FBSDE_BOUNDS_HPP

#include <cmath>

#include "fbsde/constants.hpp"
#include "fbsde/model.hpp"

namespace fbsde {

// Closed-form gradient and Z bounds evaluated from the constants.
struct BoundCatalog {
    double grad_x0 = 0;        // |dX0/dx|
    double grad_x1_theta = 0;  // |dX1(theta)/dX1_theta|
    double grad_x1_x = 0;      // |dX1(theta)/dx|
    double grad_y1_theta = 0;  // |dY1(theta)/dX1_theta|
    double grad_y1_diag = 0;   // |dY1_t(t)/dx|
    double grad_y0 = 0;        // |dY0/dx|
    double z1_bound = 0;       // uniform bound on |Z1|
    double z0_bound = 0;       // uniform bound on |Z0|
};

inline BoundCatalog gradient_bound_catalog(const AssumptionConstants& c) {
    c.validate();
    BoundCatalog b;
    const double T = c.T, La = c.L_a, Kf = c.K_f, Kg = c.K_g, Ka = c.K_a;
    b.grad_x0 = std::exp(La * T);
    b.grad_x1_theta = std::exp(La * T);
    b.grad_x1_x = (1.0 + La * std::exp(La * T)) * std::exp(La * T);
    b.grad_y1_theta = std::exp((La + Kf) * T) * (Kg + T * Kf);
    b.grad_y1_diag = (1.0 + La * std::exp(La * T)) * b.grad_y1_theta;
    b.grad_y0 = std::exp((2.0 * Kf + La) * T) * (Kg + Kf * T) *
                (1.0 + T * Kf * std::exp(Kf * T) * (1.0 + La * std::exp(La * T)));
    b.z1_bound = std::exp((2.0 * La + Kf) * T) * (Kg + T * Kf) * Ka;
    b.z0_bound = std::exp(2.0 * (Kf + La) * T) * (Kg + Kf * T) *
                 (1.0 + T * Kf * std::exp(Kf * T) * (1.0 + La * std::exp(La * T))) * Ka;
    return b;
}

// Truncation radius: the larger of the two uniform Z bounds.
inline double truncation_radius(const AssumptionConstants& c) {
    BoundCatalog b = gradient_bound_catalog(c);
    return std::max(b.z1_bound, b.z0_bound);
}

// Projection onto [-M, M]. 1-Lipschitz, idempotent, identity on |z| <= M.
inline double clip(double z, double M) {
    if (z > M) return M;
    if (z < -M) return -M;
    return z;
}

// f~(t,x,y,z,u) = f(t,x,y,clip(z,M),u): agrees with f on |z| <= M and is
// globally Lipschitz in z whenever f satisfies the local z-Lipschitz bound.
inline GeneratorFn lipschitzized_generator(GeneratorFn f, double M) {
    require(M >= 0, "truncation radius must be nonnegative");
    return [f = std::move(f), M](double t, double x, double y, double z, double u) {
        return f(t, x, y, clip(z, M), u);
    };
}

}  // namespace fbsde

#endif
