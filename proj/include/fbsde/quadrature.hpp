#ifndef FBSDE_QUADRATURE_HPP
#define FBSDE_QUADRATURE_HPP

#include <cmath>
#include <vector>

#include "fbsde/common.hpp"

namespace fbsde {

// Gauss-Hermite rule normalized for standard-normal expectations:
// E[v(xi)] ~= sum_j w_j v(x_j) with xi ~ N(0,1), sum_j w_j = 1.
// Exact for polynomials of degree <= 2q-1.
struct GaussHermiteRule {
    std::vector<double> points;   // already scaled by sqrt(2)
    std::vector<double> weights;  // already divided by sqrt(pi)

    explicit GaussHermiteRule(int q) {
        require(q >= 1, "quadrature order must be >= 1");
        std::vector<double> x(q), w(q);
        physicists_rule(q, x, w);
        points.resize(q);
        weights.resize(q);
        const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
        for (int j = 0; j < q; ++j) {
            points[j] = std::sqrt(2.0) * x[j];
            weights[j] = w[j] * inv_sqrt_pi;
        }
    }

    template <class F>
    double mean(F&& v) const {
        double s = 0.0;
        for (std::size_t j = 0; j < points.size(); ++j) s += weights[j] * v(points[j]);
        return s;
    }

  private:
    // Newton iteration on the scaled Hermite recurrence (roots of H_n).
    static void physicists_rule(int n, std::vector<double>& x, std::vector<double>& w) {
        const double eps = 1e-14;
        const double pim4 = 0.7511255444649425;  // pi^{-1/4}
        const int maxit = 100;
        int m = (n + 1) / 2;
        double z = 0.0;
        for (int i = 0; i < m; ++i) {
            if (i == 0)
                z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
            else if (i == 1)
                z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
            else if (i == 2)
                z = 1.86 * z - 0.86 * x[0];
            else if (i == 3)
                z = 1.91 * z - 0.91 * x[1];
            else
                z = 2.0 * z - x[i - 2];

            double pp = 0.0;
            int its = 0;
            for (; its < maxit; ++its) {
                double p1 = pim4, p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    double p3 = p2;
                    p2 = p1;
                    p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
                }
                pp = std::sqrt(2.0 * n) * p2;
                double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) <= eps) break;
            }
            require(its < maxit, "Gauss-Hermite Newton iteration failed to converge");
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
    }
};

// Composite Simpson on [a, b].
template <class F>
double simpson(F&& f, double a, double b, int intervals) {
    require(intervals >= 2, "need at least two Simpson intervals");
    if (intervals % 2) ++intervals;
    double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace fbsde

#endif
