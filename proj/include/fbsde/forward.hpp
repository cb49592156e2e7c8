#ifndef FBSDE_FORWARD_HPP
#define FBSDE_FORWARD_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "fbsde/grid.hpp"
#include "fbsde/model.hpp"
#include "fbsde/rng.hpp"

namespace fbsde {

using Matrix = std::vector<std::vector<double>>;  // [path][...]

// i.i.d. Gaussian increments, variance dt_i, one row per path. Entry
// (path, step) is a pure function of (seed, path, step).
inline Matrix simulate_increments(const TimeGrid& grid, int n_paths, std::uint64_t seed) {
    require(n_paths >= 1, "need at least one path");
    int n = grid.steps();
    Matrix dW(n_paths, std::vector<double>(n));
    for (int p = 0; p < n_paths; ++p)
        for (int i = 1; i <= n; ++i)
            dW[p][i - 1] = std::sqrt(grid.dt(i)) * rng::normal(seed, rng::kBrownianStream, p, i);
    return dW;
}

// Euler scheme for the no-jump forward state, one path.
inline std::vector<double> euler_x0_path(const CoefficientSet& coeffs, const TimeGrid& grid,
                                         const std::vector<double>& dW, double x0) {
    int n = grid.steps();
    std::vector<double> x(n + 1);
    x[0] = x0;
    for (int i = 1; i <= n; ++i) {
        double t = grid.node(i - 1);
        x[i] = x[i - 1] + coeffs.eval_b(t, x[i - 1]) * grid.dt(i) + coeffs.eval_sigma(t) * dW[i - 1];
    }
    return x;
}

inline Matrix euler_x0(const CoefficientSet& coeffs, const TimeGrid& grid, const Matrix& dW,
                       double x0) {
    Matrix out(dW.size());
    for (std::size_t p = 0; p < dW.size(); ++p) out[p] = euler_x0_path(coeffs, grid, dW[p], x0);
    return out;
}

// Euler scheme for the jumped forward state X1(t_k): same increments, same
// drift/diffusion, plus the jump-size term applied exactly at step k
// (at the initial node when k = 0).
inline std::vector<double> euler_x1_path(const CoefficientSet& coeffs, const TimeGrid& grid,
                                         const std::vector<double>& dW, double x0, int k) {
    int n = grid.steps();
    require(k >= 0 && k <= n, "jump index out of range");
    std::vector<double> x(n + 1);
    x[0] = x0 + (k == 0 ? coeffs.eval_beta(grid.node(0), x0) : 0.0);
    for (int i = 1; i <= n; ++i) {
        double t = grid.node(i - 1);
        double xi = x[i - 1] + coeffs.eval_b(t, x[i - 1]) * grid.dt(i) +
                    coeffs.eval_sigma(t) * dW[i - 1];
        if (i == k) xi += coeffs.eval_beta(t, x[i - 1]);
        x[i] = xi;
    }
    return x;
}

inline Matrix euler_x1(const CoefficientSet& coeffs, const TimeGrid& grid, const Matrix& dW,
                       double x0, int k) {
    Matrix out(dW.size());
    for (std::size_t p = 0; p < dW.size(); ++p) out[p] = euler_x1_path(coeffs, grid, dW[p], x0, k);
    return out;
}

// Jump times by inverse CDF from per-path uniforms; values may exceed the
// horizon, meaning "no jump before T".
inline std::vector<double> sample_jump_times(const JumpModel& jump, int n_paths,
                                             std::uint64_t seed) {
    std::vector<double> tau(n_paths);
    for (int p = 0; p < n_paths; ++p)
        tau[p] = jump.sample(rng::uniform(seed, rng::kJumpStream, p, 0));
    return tau;
}

inline double sample_jump_time(const JumpModel& jump, double u) { return jump.sample(u); }

// Simulated forward data for a set of paths. The X1 family is generated on
// demand (per jump index) to keep memory linear in n.
struct PathBundle {
    TimeGrid grid;
    Matrix dW;
    Matrix x0_paths;
    std::vector<double> tau;
    double x_init = 0.0;
    std::uint64_t seed = 0;

    static PathBundle build(const CoefficientSet& coeffs, const JumpModel& jump,
                            const TimeGrid& grid, double x0, int n_paths, std::uint64_t seed) {
        PathBundle b{grid, simulate_increments(grid, n_paths, seed), {}, {}, x0, seed};
        b.x0_paths = euler_x0(coeffs, grid, b.dW, x0);
        b.tau = sample_jump_times(jump, n_paths, seed);
        return b;
    }

    int n_paths() const { return static_cast<int>(dW.size()); }

    // Grid index of pi(tau), or -1 when the jump misses the horizon.
    int jump_index(int path) const {
        if (tau[path] > grid.horizon()) return -1;
        return grid.index_left_of(tau[path]);
    }

    std::vector<double> x1_path(const CoefficientSet& coeffs, int path, int k) const {
        return euler_x1_path(coeffs, grid, dW[path], x_init, k);
    }
};

// Recombined forward process: the no-jump state before tau, the family
// member indexed by pi(tau) from tau on (inclusive). Evaluable at any t.
class RecombinedX {
  public:
    RecombinedX(const CoefficientSet& coeffs, const PathBundle& paths)
        : grid_(paths.grid), x0_(paths.x0_paths), tau_(paths.tau) {
        x1_.resize(paths.n_paths());
        for (int p = 0; p < paths.n_paths(); ++p) {
            int k = paths.jump_index(p);
            if (k >= 0) x1_[p] = paths.x1_path(coeffs, p, k);
        }
    }

    double operator()(int path, double t) const {
        int i = grid_.index_left_of(t);
        if (t < tau_[path] || x1_[path].empty()) return x0_[path][i];
        return x1_[path][i];
    }

  private:
    TimeGrid grid_;
    Matrix x0_;
    Matrix x1_;  // empty when tau > T
    std::vector<double> tau_;
};

}  // namespace fbsde

#endif
