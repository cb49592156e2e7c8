#ifndef FBSDE_CONSTANTS_HPP
#define FBSDE_CONSTANTS_HPP

#include <cmath>

#include "fbsde/common.hpp"

namespace fbsde {

// Structural constants of the problem instance. They drive the closed-form
// gradient/Z bounds, the truncation radius and the assumption probes.
struct AssumptionConstants {
    double K_a = 0.0;         // bound on |b(t,0)|+|sigma(t)|+|beta(t,0)|
    double L_a = 0.0;         // Lipschitz constant of b, beta in x
    double M_g = 0.0;         // bound on |g|
    double K_g = 0.0;         // Lipschitz constant of g
    double K_q = 0.0;         // quadratic-growth / Lipschitz-in-y constant of f
    double K_f = 0.0;         // Lipschitz constant of f in (x,y,u,sqrt t)
    double L_fz = 0.0;        // locally-Lipschitz-in-z constant of f
    double K_t = 0.0;         // time regularity of b, sigma, beta
    double T = 1.0;           // horizon
    double lambda_max = 1.0;  // bound on the intensity
    double m_y = 0.0;         // uniform bound on |Y0|, |Y1(theta)|

    void validate() const {
        require(K_a >= 0 && L_a >= 0 && M_g >= 0 && K_g >= 0 && K_q >= 0 && K_f >= 0 &&
                    L_fz >= 0 && K_t >= 0 && lambda_max >= 0,
                "assumption constants must be nonnegative");
        require(T > 0, "horizon T must be positive");
        require(std::isfinite(m_y) && m_y >= M_g, "m_y must be finite and >= M_g");
    }
};

// Conservative explicit Y-bound: fixed point of
//   m -> e^{K_q T} (M_g + K_q T (2 + m)).
// The iteration contracts only when e^{K_q T} K_q T < 1; otherwise the
// closed form has no finite fixed point and a user-supplied bound is needed.
inline double solve_m_y(double K_q, double T, double M_g) {
    double a = std::exp(K_q * T);
    double contraction = a * K_q * T;
    if (contraction >= 1.0)
        throw Error("m_y fixed point diverges (e^{K_q T} K_q T >= 1); supply m_y explicitly");
    return a * (M_g + 2.0 * K_q * T) / (1.0 - contraction);
}

}  // namespace fbsde

#endif
