#ifndef FBSDE_VALUE_TABLE_HPP
#define FBSDE_VALUE_TABLE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "fbsde/common.hpp"

namespace fbsde {

// Spatial representation of a one-step value function: cubic Hermite
// interpolation through strictly increasing nodes with an overshoot clamp
// on the slopes, constant (edge-value) extrapolation outside the domain.
//
// The slope rule is the three-point difference, clamped so the interpolant
// never leaves the local node value range: where the neighbouring secants
// disagree in sign the slope is zero, otherwise it is limited to three
// times the smaller secant. On uniform nodes the clamp is inactive for
// quadratic data, which the interpolant then reproduces exactly.
class ValueFunctionTable {
  public:
    ValueFunctionTable() = default;

    ValueFunctionTable(std::vector<double> nodes, std::vector<double> values)
        : x_(std::move(nodes)), v_(std::move(values)) {
        require(x_.size() == v_.size(), "node/value size mismatch");
        require(x_.size() >= 2, "table needs at least two nodes");
        for (std::size_t i = 1; i < x_.size(); ++i)
            require(x_[i] > x_[i - 1], "table nodes must be strictly increasing");
        build_slopes();
    }

    double operator()(double x) const {
        if (x <= x_.front()) return v_.front();
        if (x >= x_.back()) return v_.back();
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t j = static_cast<std::size_t>(it - x_.begin()) - 1;
        if (x == x_[j]) return v_[j];  // node values are exact
        double h = x_[j + 1] - x_[j];
        double s = (x - x_[j]) / h;
        double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        double h10 = s * (1 - s) * (1 - s);
        double h01 = s * s * (3 - 2 * s);
        double h11 = s * s * (s - 1);
        return h00 * v_[j] + h10 * h * d_[j] + h01 * v_[j + 1] + h11 * h * d_[j + 1];
    }

    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& values() const { return v_; }
    double min_value() const { return *std::min_element(v_.begin(), v_.end()); }
    double max_value() const { return *std::max_element(v_.begin(), v_.end()); }

    static std::vector<double> uniform_nodes(double lo, double hi, int m) {
        require(m >= 2 && hi > lo, "bad table domain");
        std::vector<double> xs(m);
        for (int i = 0; i < m; ++i) xs[i] = lo + (hi - lo) * static_cast<double>(i) / (m - 1);
        return xs;
    }

  private:
    void build_slopes() {
        std::size_t m = x_.size();
        d_.assign(m, 0.0);
        std::vector<double> sec(m - 1);
        for (std::size_t i = 0; i + 1 < m; ++i) sec[i] = (v_[i + 1] - v_[i]) / (x_[i + 1] - x_[i]);

        if (m == 2) {
            d_[0] = d_[1] = sec[0];
            return;
        }
        for (std::size_t i = 1; i + 1 < m; ++i) {
            double sl = sec[i - 1], sr = sec[i];
            if (sl * sr <= 0.0) {
                d_[i] = 0.0;
            } else {
                // three-point difference, then overshoot clamp
                double d = (sl * (x_[i + 1] - x_[i]) + sr * (x_[i] - x_[i - 1])) /
                           (x_[i + 1] - x_[i - 1]);
                double lim = 3.0 * std::min(std::abs(sl), std::abs(sr));
                d_[i] = clamp_signed(d, sl > 0 ? lim : -lim);
            }
        }
        // one-sided second-order end slopes, clamped against the edge secant
        d_[0] = end_slope(x_[0], x_[1], x_[2], v_[0], v_[1], v_[2], sec[0]);
        d_[m - 1] = end_slope(x_[m - 1], x_[m - 2], x_[m - 3], v_[m - 1], v_[m - 2], v_[m - 3],
                              sec[m - 2]);
    }

    static double clamp_signed(double d, double lim) {
        if (lim >= 0) return std::clamp(d, 0.0, lim);
        return std::clamp(d, lim, 0.0);
    }

    static double end_slope(double x0, double x1, double x2, double v0, double v1, double v2,
                            double edge_secant) {
        double h0 = x1 - x0, h1 = x2 - x1;
        double s0 = (v1 - v0) / h0, s1 = (v2 - v1) / h1;
        double d = ((2 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d * edge_secant <= 0.0) return 0.0;
        if (std::abs(d) > 3.0 * std::abs(edge_secant)) return 3.0 * edge_secant;
        return d;
    }

    std::vector<double> x_, v_, d_;
};

}  // namespace fbsde

#endif
