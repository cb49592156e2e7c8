#ifndef FBSDE_BACKWARD_HPP
#define FBSDE_BACKWARD_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "fbsde/bounds.hpp"
#include "fbsde/condexp.hpp"
#include "fbsde/forward.hpp"
#include "fbsde/grid.hpp"
#include "fbsde/model.hpp"
#include "fbsde/value_table.hpp"

namespace fbsde {

// ---------------------------------------------------------------------------
// Implicit step: solve y = E_y + f(t, x, y, z, u(y)) dt by fixed point.

struct ImplicitStepOptions {
    double kq = 0.0;  // Lipschitz-in-y constant, contraction precheck
    double tol = 1e-12;
    int maxit = 50;
};

template <class UFn>
double implicit_step_coupled(double E_y, double z, double x, double t, double dt,
                             const GeneratorFn& f, UFn&& u_of_y, const ImplicitStepOptions& opt) {
    if (opt.kq * dt >= 1.0)
        throw MeshTooCoarseError("K_q * dt >= 1: implicit step is not a contraction");
    double y = E_y;
    for (int it = 0; it < opt.maxit; ++it) {
        double next = E_y + f(t, x, y, z, u_of_y(y)) * dt;
        if (!std::isfinite(next)) throw InvalidPresetError("non-finite generator in implicit step");
        if (std::abs(next - y) <= opt.tol) return next;
        y = next;
    }
    double residual = std::abs(E_y + f(t, x, y, z, u_of_y(y)) * dt - y);
    throw ConvergenceFailureError("implicit step did not converge, residual " +
                                  std::to_string(residual));
}

inline double implicit_step(double E_y, double z, double x, double t, double dt,
                            const GeneratorFn& f, double u_input,
                            const ImplicitStepOptions& opt) {
    return implicit_step_coupled(E_y, z, x, t, dt, f, [u_input](double) { return u_input; }, opt);
}

// ---------------------------------------------------------------------------
// Spatial domain shared by the value tables.

struct SpatialDomain {
    double lo = 0.0, hi = 0.0;    // base domain for the no-jump tables
    double beta_pad = 0.0;        // extra reach of the jumped state
};

inline SpatialDomain make_domain(const CoefficientSet& coeffs, const TimeGrid& grid, double x0,
                                 double c) {
    SpatialDomain d;
    double sigma_bar = 0.0;
    for (double t : grid.nodes()) sigma_bar = std::max(sigma_bar, std::abs(coeffs.eval_sigma(t)));
    double half = c * sigma_bar * std::sqrt(grid.horizon());
    if (half <= 0.0) half = 1.0;  // degenerate diffusion still needs a domain
    d.lo = x0 - half;
    d.hi = x0 + half;
    for (double t : grid.nodes())
        for (int j = 0; j <= 16; ++j) {
            double x = d.lo + (d.hi - d.lo) * j / 16.0;
            d.beta_pad = std::max(d.beta_pad, std::abs(coeffs.eval_beta(t, x)));
        }
    return d;
}

// ---------------------------------------------------------------------------
// Quadrature (table) backend.

struct TableSolverConfig {
    int m_nodes = 200;
    double domain_c = 6.0;
    int gh_order = 16;
    double kq = 0.0;
    double fp_tol = 1e-12;
    int fp_maxit = 50;
};

// Post-jump value functions. The recursion behind the family is identical
// for every jump index (the jump-size term only moves the state, never the
// dynamics after it), so one table per time step serves all indices.
struct TableFamilySolution {
    std::vector<ValueFunctionTable> y1;  // i = 0..n, functions of the post-jump state
    std::vector<ValueFunctionTable> z1;  // i = 0..n-1
};

struct TableScheme {
    TableFamilySolution family;
    std::vector<ValueFunctionTable> y0;  // i = 0..n
    std::vector<ValueFunctionTable> z0;  // i = 0..n-1

    // Diagonal value at time t_i seen from the no-jump state x. The jumped
    // state is approximated by x + beta(t_i, x); pathwise backends use the
    // exact two-state expression instead.
    double diag(const CoefficientSet& coeffs, const TimeGrid& grid, int i, double x) const {
        return family.y1[i](x + coeffs.eval_beta(grid.node(i), x));
    }
};

// Backward sweep of the post-jump scheme on value tables. The generator is
// always called with u = 0 after the jump.
inline TableFamilySolution solve_y1_family_tables(const CoefficientSet& coeffs,
                                                  const TimeGrid& grid, const SpatialDomain& dom,
                                                  const TableSolverConfig& cfg) {
    int n = grid.steps();
    GaussHermiteRule rule(cfg.gh_order);
    ImplicitStepOptions opt{cfg.kq, cfg.fp_tol, cfg.fp_maxit};

    auto nodes = ValueFunctionTable::uniform_nodes(dom.lo - dom.beta_pad, dom.hi + dom.beta_pad,
                                                   cfg.m_nodes);
    TableFamilySolution sol;
    sol.y1.resize(n + 1);
    sol.z1.resize(n);

    std::vector<double> terminal(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) terminal[j] = coeffs.eval_g(nodes[j]);
    sol.y1[n] = ValueFunctionTable(nodes, std::move(terminal));

    for (int i = n; i >= 1; --i) {
        double t = grid.node(i - 1), dt = grid.dt(i);
        sol.z1[i - 1] = quadrature_weighted_condexp(sol.y1[i], coeffs, t, dt, rule);
        ValueFunctionTable ey = quadrature_condexp(sol.y1[i], coeffs, t, dt, rule);
        std::vector<double> vals(nodes.size());
        for (std::size_t j = 0; j < nodes.size(); ++j)
            vals[j] = implicit_step(ey.values()[j], sol.z1[i - 1].values()[j], nodes[j], t, dt,
                                    coeffs.f, 0.0, opt);
        sol.y1[i - 1] = ValueFunctionTable(nodes, std::move(vals));
    }
    return sol;
}

// Backward sweep of the no-jump scheme; the generator consumes the family
// diagonal through u = diag - y.
inline TableScheme solve_y0_tables(const CoefficientSet& coeffs, const TimeGrid& grid,
                                   const SpatialDomain& dom, const TableSolverConfig& cfg,
                                   TableFamilySolution family) {
    int n = grid.steps();
    GaussHermiteRule rule(cfg.gh_order);
    ImplicitStepOptions opt{cfg.kq, cfg.fp_tol, cfg.fp_maxit};

    TableScheme scheme;
    scheme.family = std::move(family);
    scheme.y0.resize(n + 1);
    scheme.z0.resize(n);

    auto nodes = ValueFunctionTable::uniform_nodes(dom.lo, dom.hi, cfg.m_nodes);
    std::vector<double> terminal(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) terminal[j] = coeffs.eval_g(nodes[j]);
    scheme.y0[n] = ValueFunctionTable(nodes, std::move(terminal));

    for (int i = n; i >= 1; --i) {
        double t = grid.node(i - 1), dt = grid.dt(i);
        scheme.z0[i - 1] = quadrature_weighted_condexp(scheme.y0[i], coeffs, t, dt, rule);
        ValueFunctionTable ey = quadrature_condexp(scheme.y0[i], coeffs, t, dt, rule);
        std::vector<double> vals(nodes.size());
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            double d = scheme.diag(coeffs, grid, i - 1, nodes[j]);
            vals[j] = implicit_step_coupled(ey.values()[j], scheme.z0[i - 1].values()[j], nodes[j],
                                            t, dt, coeffs.f, [d](double y) { return d - y; }, opt);
        }
        scheme.y0[i - 1] = ValueFunctionTable(nodes, std::move(vals));
    }
    return scheme;
}

inline TableScheme solve_tables(const CoefficientSet& coeffs, const TimeGrid& grid,
                                const SpatialDomain& dom, const TableSolverConfig& cfg) {
    return solve_y0_tables(coeffs, grid, dom, cfg, solve_y1_family_tables(coeffs, grid, dom, cfg));
}

// ---------------------------------------------------------------------------
// Pathwise backend (regression or exact enumeration).

struct PathSolverOptions {
    double kq = 0.0;
    double fp_tol = 1e-12;
    int fp_maxit = 50;
    // Record the post-jump branch along each path's own jump index (needed
    // for recombination and error metrics; off for value-only runs).
    bool record_post_jump = true;
};

struct PathScheme {
    Matrix y0, z0;           // [path][i]; z0 has n entries per path
    Matrix diag;             // [i][path]: family diagonal at every node
    Matrix y1_own, z1_own;   // [path][i], valid for i >= k (own jump index)
    std::vector<int> k_index;  // pi(tau) index per path, -1 if tau > T
};

// Family sweeps over all jump indices followed by the no-jump sweep. The
// conditional expectations come from the injected estimator, so the same
// code path runs regression (LSMC) and exact two-point enumeration.
inline PathScheme solve_paths(const CoefficientSet& coeffs, const TimeGrid& grid, const Matrix& dW,
                              const std::vector<double>& tau, double x0, PathCondExp& estimator,
                              const PathSolverOptions& opt) {
    int n = grid.steps();
    int np = static_cast<int>(dW.size());
    ImplicitStepOptions fp{opt.kq, opt.fp_tol, opt.fp_maxit};

    PathScheme s;
    s.k_index.resize(np);
    for (int p = 0; p < np; ++p)
        s.k_index[p] = (tau[p] > grid.horizon()) ? -1 : grid.index_left_of(tau[p]);
    s.diag.assign(n + 1, std::vector<double>(np));
    if (opt.record_post_jump) {
        s.y1_own.assign(np, std::vector<double>(n + 1, 0.0));
        s.z1_own.assign(np, std::vector<double>(n, 0.0));
    }

    // column views of the increments per step
    auto dw_col = [&](int i) {
        std::vector<double> col(np);
        for (int p = 0; p < np; ++p) col[p] = dW[p][i - 1];
        return col;
    };

    // Post-jump family. With beta identically zero every sweep coincides,
    // so a single full-range sweep serves all jump indices.
    int k_hi = coeffs.beta_identically_zero ? 0 : n;
    for (int k = 0; k <= k_hi; ++k) {
        Matrix x1(np);
        for (int p = 0; p < np; ++p) x1[p] = euler_x1_path(coeffs, grid, dW[p], x0, k);

        std::vector<double> y(np);
        for (int p = 0; p < np; ++p) y[p] = coeffs.eval_g(x1[p][n]);

        auto record = [&](int i, const std::vector<double>& yv, const std::vector<double>* zv) {
            for (int p = 0; p < np; ++p) {
                bool own = coeffs.beta_identically_zero ? true : (s.k_index[p] == k);
                if (opt.record_post_jump && own && (coeffs.beta_identically_zero || i >= k)) {
                    s.y1_own[p][i] = yv[p];
                    if (zv && i < n) s.z1_own[p][i] = (*zv)[p];
                }
            }
        };

        if (coeffs.beta_identically_zero) {
            for (int p = 0; p < np; ++p) s.diag[n][p] = y[p];
        }
        if (opt.record_post_jump) record(n, y, nullptr);

        // sweep down to the jump node; the family is only defined from there
        for (int i = n; i >= k + 1; --i) {
            double t = grid.node(i - 1), dt = grid.dt(i);
            std::vector<double> x_prev(np);
            for (int p = 0; p < np; ++p) x_prev[p] = x1[p][i - 1];
            std::vector<double> dw = dw_col(i);
            std::vector<double> ey = estimator.cond_mean(x_prev, y, i);
            std::vector<double> z = estimator.cond_weighted(x_prev, y, dw, dt, i);
            for (int p = 0; p < np; ++p)
                y[p] = implicit_step(ey[p], z[p], x_prev[p], t, dt, coeffs.f, 0.0, fp);
            if (opt.record_post_jump) record(i - 1, y, &z);
            if (coeffs.beta_identically_zero) {
                for (int p = 0; p < np; ++p) s.diag[i - 1][p] = y[p];
            }
        }
        if (!coeffs.beta_identically_zero) {
            // after the sweep y sits at node k: the diagonal sample, pathwise exact
            for (int p = 0; p < np; ++p) s.diag[k][p] = y[p];
        }
    }

    // No-jump sweep with the coupled generator.
    Matrix x0p(np);
    for (int p = 0; p < np; ++p) x0p[p] = euler_x0_path(coeffs, grid, dW[p], x0);
    s.y0.assign(np, std::vector<double>(n + 1));
    s.z0.assign(np, std::vector<double>(n));
    std::vector<double> y(np);
    for (int p = 0; p < np; ++p) {
        y[p] = coeffs.eval_g(x0p[p][n]);
        s.y0[p][n] = y[p];
    }
    for (int i = n; i >= 1; --i) {
        double t = grid.node(i - 1), dt = grid.dt(i);
        std::vector<double> x_prev(np);
        for (int p = 0; p < np; ++p) x_prev[p] = x0p[p][i - 1];
        std::vector<double> dw = dw_col(i);
        std::vector<double> ey = estimator.cond_mean(x_prev, y, i);
        std::vector<double> z = estimator.cond_weighted(x_prev, y, dw, dt, i);
        for (int p = 0; p < np; ++p) {
            double d = s.diag[i - 1][p];
            y[p] = implicit_step_coupled(ey[p], z[p], x_prev[p], t, dt, coeffs.f,
                                         [d](double yy) { return d - yy; }, fp);
            s.y0[p][i - 1] = y[p];
            s.z0[p][i - 1] = z[p];
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Recombination: indicator pasting of the two branches along each path.
// Conventions at t = tau copied exactly: Y switches (strict t < tau keeps
// the no-jump branch), Z and U use the weak inequality.

struct SchemeTrajectory {
    std::vector<double> y0, z0;  // z0 has n entries
    std::vector<double> diag;    // n+1 entries
    std::vector<double> y1, z1;  // valid from index k on; empty when k < 0
    int k = -1;
    double tau = 0.0;

    double Y(const TimeGrid& grid, double t) const {
        int i = grid.index_left_of(t);
        if (k >= 0 && t >= tau) return y1[i];
        return y0[i];
    }
    // Z is a left-open node quantity; defined for t < T.
    double Z(const TimeGrid& grid, double t) const {
        int i = std::min(grid.index_left_of(t), grid.steps() - 1);
        if (k >= 0 && t > tau) return z1[i];
        return z0[i];
    }
    double U(const TimeGrid& grid, double t) const {
        if (t > tau) return 0.0;
        int i = grid.index_left_of(t);
        return diag[i] - y0[i];
    }
};

inline SchemeTrajectory trajectory_from_tables(const TableScheme& scheme,
                                               const CoefficientSet& coeffs, const TimeGrid& grid,
                                               const std::vector<double>& dW,
                                               const std::vector<double>& x0_path, double x_init,
                                               double tau) {
    int n = grid.steps();
    SchemeTrajectory tr;
    tr.tau = tau;
    tr.k = (tau > grid.horizon()) ? -1 : grid.index_left_of(tau);
    tr.y0.resize(n + 1);
    tr.z0.resize(n);
    tr.diag.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        tr.y0[i] = scheme.y0[i](x0_path[i]);
        if (i < n) tr.z0[i] = scheme.z0[i](x0_path[i]);
        tr.diag[i] = scheme.diag(coeffs, grid, i, x0_path[i]);
    }
    if (tr.k >= 0) {
        auto x1 = euler_x1_path(coeffs, grid, dW, x_init, tr.k);
        tr.y1.resize(n + 1);
        tr.z1.resize(n);
        for (int i = tr.k; i <= n; ++i) {
            tr.y1[i] = scheme.family.y1[i](x1[i]);
            if (i < n) tr.z1[i] = scheme.family.z1[i](x1[i]);
        }
    }
    return tr;
}

inline SchemeTrajectory trajectory_from_tables(const TableScheme& scheme,
                                               const CoefficientSet& coeffs,
                                               const PathBundle& paths, int path) {
    return trajectory_from_tables(scheme, coeffs, paths.grid, paths.dW[path],
                                  paths.x0_paths[path], paths.x_init, paths.tau[path]);
}

// Swap the generator for its z-clipped version; everything else unchanged.
inline CoefficientSet with_truncated_generator(CoefficientSet coeffs, double radius) {
    coeffs.f = lipschitzized_generator(std::move(coeffs.f), radius);
    return coeffs;
}

inline SchemeTrajectory trajectory_from_paths(const PathScheme& scheme, const TimeGrid& grid,
                                              double tau, int path) {
    int n = grid.steps();
    SchemeTrajectory tr;
    tr.tau = tau;
    tr.k = scheme.k_index[path];
    tr.y0 = scheme.y0[path];
    tr.z0 = scheme.z0[path];
    tr.diag.resize(n + 1);
    for (int i = 0; i <= n; ++i) tr.diag[i] = scheme.diag[i][path];
    if (tr.k >= 0) {
        tr.y1 = scheme.y1_own[path];
        tr.z1 = scheme.z1_own[path];
    }
    return tr;
}

}  // namespace fbsde

#endif
