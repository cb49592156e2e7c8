#ifndef FBSDE_CONDEXP_HPP
#define FBSDE_CONDEXP_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "fbsde/forward.hpp"

#include "fbsde/model.hpp"
#include "fbsde/quadrature.hpp"
#include "fbsde/value_table.hpp"

namespace fbsde {

// ---------------------------------------------------------------------------
// Quadrature backend: one-step conditional expectations through the Markov
// transition x -> x + b(t,x) dt + sigma(t) sqrt(dt) xi, xi standard normal.

// E[v_next(x')] per table node.
inline ValueFunctionTable quadrature_condexp(const ValueFunctionTable& v_next,
                                             const CoefficientSet& coeffs, double t, double dt,
                                             const GaussHermiteRule& rule) {
    const auto& xs = v_next.nodes();
    std::vector<double> out(xs.size());
    double s = coeffs.eval_sigma(t) * std::sqrt(dt);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        double m = xs[j] + coeffs.eval_b(t, xs[j]) * dt;
        out[j] = rule.mean([&](double xi) { return v_next(m + s * xi); });
    }
    return ValueFunctionTable(xs, std::move(out));
}

inline ValueFunctionTable quadrature_condexp(const ValueFunctionTable& v_next,
                                             const CoefficientSet& coeffs, double t, double dt,
                                             int order) {
    return quadrature_condexp(v_next, coeffs, t, dt, GaussHermiteRule(order));
}

// (1/dt) E[v_next(x') dW] per table node.
inline ValueFunctionTable quadrature_weighted_condexp(const ValueFunctionTable& v_next,
                                                      const CoefficientSet& coeffs, double t,
                                                      double dt, const GaussHermiteRule& rule) {
    const auto& xs = v_next.nodes();
    std::vector<double> out(xs.size());
    double sig = coeffs.eval_sigma(t);
    double s = sig * std::sqrt(dt);
    double inv_sqrt_dt = 1.0 / std::sqrt(dt);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        double m = xs[j] + coeffs.eval_b(t, xs[j]) * dt;
        out[j] = rule.mean([&](double xi) { return v_next(m + s * xi) * xi; }) * inv_sqrt_dt;
    }
    return ValueFunctionTable(xs, std::move(out));
}

inline ValueFunctionTable quadrature_weighted_condexp(const ValueFunctionTable& v_next,
                                                      const CoefficientSet& coeffs, double t,
                                                      double dt, int order) {
    return quadrature_weighted_condexp(v_next, coeffs, t, dt, GaussHermiteRule(order));
}

// ---------------------------------------------------------------------------
// Regression (LSMC) backend.

struct RegressionBasis {
    enum class Family { Poly, PiecewiseLinear };
    Family family = Family::Poly;
    int degree = 3;    // polynomial degree (Poly)
    int bins = 16;     // knot intervals (PiecewiseLinear)
    double ridge = 1e-10;  // trace-scaled ridge regularizer

    int dimension() const {
        return family == Family::Poly ? degree + 1 : bins + 1;
    }
};

namespace detail {

// Dense SPD solve (Cholesky), small systems only.
inline std::vector<double> solve_spd(std::vector<double> A, std::vector<double> rhs, int n) {
    for (int j = 0; j < n; ++j) {
        double d = A[j * n + j];
        for (int k = 0; k < j; ++k) d -= A[j * n + k] * A[j * n + k];
        if (d <= 0.0) throw EstimatorDegenerateError("regression design is rank deficient");
        d = std::sqrt(d);
        A[j * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            double s = A[i * n + j];
            for (int k = 0; k < j; ++k) s -= A[i * n + k] * A[j * n + k];
            A[i * n + j] = s / d;
        }
    }
    for (int i = 0; i < n; ++i) {
        double s = rhs[i];
        for (int k = 0; k < i; ++k) s -= A[i * n + k] * rhs[k];
        rhs[i] = s / A[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = rhs[i];
        for (int k = i + 1; k < n; ++k) s -= A[k * n + i] * rhs[k];
        rhs[i] = s / A[i * n + i];
    }
    return rhs;
}

}  // namespace detail

// Least-squares fit of samples onto basis functions of the state. The
// features are built on a standardized variable for conditioning; the fit
// is linear in the targets, so conditional-expectation estimates inherit
// exact linearity.
class RegressionFit {
  public:
    RegressionFit() = default;

    RegressionFit(std::span<const double> x, std::span<const double> v, const RegressionBasis& basis)
        : basis_(basis) {
        require(x.size() == v.size() && !x.empty(), "sample arrays must match and be nonempty");
        int dim = basis.dimension();
        require(static_cast<int>(x.size()) >= dim, "fewer samples than basis functions");

        double mean = 0, m2 = 0;
        for (double xi : x) mean += xi;
        mean /= static_cast<double>(x.size());
        for (double xi : x) m2 += (xi - mean) * (xi - mean);
        shift_ = mean;
        scale_ = std::sqrt(m2 / static_cast<double>(x.size()));
        if (scale_ < 1e-12) scale_ = 1.0;  // degenerate states: intercept carries the fit

        if (basis.family == RegressionBasis::Family::PiecewiseLinear) {
            double lo = *std::min_element(x.begin(), x.end());
            double hi = *std::max_element(x.begin(), x.end());
            if (hi <= lo) hi = lo + 1.0;
            knots_.resize(basis.bins + 1);
            for (int j = 0; j <= basis.bins; ++j)
                knots_[j] = lo + (hi - lo) * static_cast<double>(j) / basis.bins;
        }

        std::vector<double> gram(dim * dim, 0.0), rhs(dim, 0.0), phi(dim);
        for (std::size_t s = 0; s < x.size(); ++s) {
            features(x[s], phi);
            for (int i = 0; i < dim; ++i) {
                rhs[i] += phi[i] * v[s];
                for (int j = 0; j <= i; ++j) gram[i * dim + j] += phi[i] * phi[j];
            }
        }
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) gram[i * dim + j] = gram[j * dim + i];

        double trace = 0;
        for (int i = 0; i < dim; ++i) trace += gram[i * dim + i];
        double eps = basis.ridge * trace / dim;
        for (int i = 0; i < dim; ++i) gram[i * dim + i] += eps;

        coeffs_ = detail::solve_spd(std::move(gram), std::move(rhs), dim);
    }

    double operator()(double x) const {
        std::vector<double> phi(basis_.dimension());
        features(x, phi);
        double s = 0;
        for (std::size_t i = 0; i < phi.size(); ++i) s += coeffs_[i] * phi[i];
        return s;
    }

    // Coefficients in the raw monomial basis 1, x, x^2, ... (Poly only).
    std::vector<double> monomial_coefficients() const {
        require(basis_.family == RegressionBasis::Family::Poly,
                "monomial coefficients only defined for the polynomial family");
        int d = basis_.degree;
        // expand sum_k c_k ((x - shift)/scale)^k via binomials
        std::vector<double> out(d + 1, 0.0);
        for (int k = 0; k <= d; ++k) {
            double ck = coeffs_[k] / std::pow(scale_, k);
            // expand (x - shift)^k by repeated multiplication
            std::vector<double> binom(k + 1, 0.0);
            binom[0] = 1.0;
            for (int m = 0; m < k; ++m) {
                for (int j = k; j >= 1; --j) binom[j] = binom[j - 1] + binom[j] * (-shift_);
                binom[0] *= -shift_;
            }
            for (int j = 0; j <= k; ++j) out[j] += ck * binom[j];
        }
        return out;
    }

    const std::vector<double>& raw_coefficients() const { return coeffs_; }

  private:
    void features(double x, std::vector<double>& phi) const {
        if (basis_.family == RegressionBasis::Family::Poly) {
            double z = (x - shift_) / scale_;
            double p = 1.0;
            for (int k = 0; k < basis_.dimension(); ++k) {
                phi[k] = p;
                p *= z;
            }
        } else {
            // hat functions on the knot vector, clamped outside
            std::fill(phi.begin(), phi.end(), 0.0);
            if (x <= knots_.front()) {
                phi[0] = 1.0;
                return;
            }
            if (x >= knots_.back()) {
                phi[basis_.bins] = 1.0;
                return;
            }
            auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
            int j = static_cast<int>(it - knots_.begin()) - 1;
            double w = (x - knots_[j]) / (knots_[j + 1] - knots_[j]);
            phi[j] = 1.0 - w;
            phi[j + 1] = w;
        }
    }

    RegressionBasis basis_;
    double shift_ = 0.0, scale_ = 1.0;
    std::vector<double> knots_;
    std::vector<double> coeffs_;
};

// E[v | x_prev] by least-squares projection.
inline RegressionFit lsmc_condexp(std::span<const double> x_prev, std::span<const double> v,
                                  const RegressionBasis& basis) {
    return RegressionFit(x_prev, v, basis);
}

// (1/dt) E[v dW | x_prev]: regression of v dW/dt on the basis.
inline RegressionFit lsmc_weighted_condexp(std::span<const double> x_prev,
                                           std::span<const double> v, std::span<const double> dW,
                                           double dt, const RegressionBasis& basis) {
    require(v.size() == dW.size(), "sample arrays must match");
    std::vector<double> target(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) target[i] = v[i] * dW[i] / dt;
    return RegressionFit(x_prev, target, basis);
}

// ---------------------------------------------------------------------------
// Pathwise conditional-expectation estimators used by the backward solver.

class PathCondExp {
  public:
    virtual ~PathCondExp() = default;
    // E[v | F_{i-1}] per path; x_prev are the states at t_{i-1}.
    virtual std::vector<double> cond_mean(std::span<const double> x_prev,
                                          std::span<const double> v, int step) = 0;
    // (1/dt) E[v dW_i | F_{i-1}] per path.
    virtual std::vector<double> cond_weighted(std::span<const double> x_prev,
                                              std::span<const double> v,
                                              std::span<const double> dW, double dt, int step) = 0;
};

class LsmcCondExp final : public PathCondExp {
  public:
    explicit LsmcCondExp(RegressionBasis basis) : basis_(basis) {}

    std::vector<double> cond_mean(std::span<const double> x_prev, std::span<const double> v,
                                  int) override {
        RegressionFit fit(x_prev, v, basis_);
        std::vector<double> out(x_prev.size());
        for (std::size_t p = 0; p < x_prev.size(); ++p) out[p] = fit(x_prev[p]);
        return out;
    }

    std::vector<double> cond_weighted(std::span<const double> x_prev, std::span<const double> v,
                                      std::span<const double> dW, double dt, int) override {
        RegressionFit fit = lsmc_weighted_condexp(x_prev, v, dW, dt, basis_);
        std::vector<double> out(x_prev.size());
        for (std::size_t p = 0; p < x_prev.size(); ++p) out[p] = fit(x_prev[p]);
        return out;
    }

  private:
    RegressionBasis basis_;
};

// Exact conditional expectations for the two-point increment law: paths are
// the full scenario tree in lexicographic sign order, so conditioning on
// the first i-1 increments means averaging over contiguous blocks.
class EnumerationCondExp final : public PathCondExp {
  public:
    explicit EnumerationCondExp(int n_steps) : n_(n_steps) {}

    std::vector<double> cond_mean(std::span<const double>, std::span<const double> v,
                                  int step) override {
        return block_average(v, step, nullptr, 0.0);
    }

    std::vector<double> cond_weighted(std::span<const double>, std::span<const double> v,
                                      std::span<const double> dW, double dt, int step) override {
        return block_average(v, step, &dW, dt);
    }

  private:
    std::vector<double> block_average(std::span<const double> v, int step,
                                      const std::span<const double>* dW, double dt) const {
        std::size_t total = v.size();
        require(total == (std::size_t{1} << n_), "enumeration estimator needs 2^n scenarios");
        // conditioning on F_{step-1}: blocks of size 2^{n-step+1}
        std::size_t block = std::size_t{1} << (n_ - step + 1);
        std::vector<double> out(total);
        for (std::size_t b = 0; b < total; b += block) {
            double s = 0;
            for (std::size_t p = b; p < b + block; ++p)
                s += dW ? v[p] * (*dW)[p] / dt : v[p];
            s /= static_cast<double>(block);
            for (std::size_t p = b; p < b + block; ++p) out[p] = s;
        }
        return out;
    }

    int n_;
};

// Scenario tree for the two-point law (+-sqrt(dt) with probability 1/2):
// all 2^n sign sequences in lexicographic order (+ before -).
inline Matrix two_point_increments(const TimeGrid& grid) {
    int n = grid.steps();
    require(n <= 20, "two-point enumeration limited to small n");
    std::size_t count = std::size_t{1} << n;
    Matrix dW(count, std::vector<double>(n));
    for (std::size_t p = 0; p < count; ++p)
        for (int i = 0; i < n; ++i) {
            bool plus = ((p >> (n - 1 - i)) & 1) == 0;
            dW[p][i] = (plus ? 1.0 : -1.0) * std::sqrt(grid.dt(i + 1));
        }
    return dW;
}

}  // namespace fbsde

#endif
