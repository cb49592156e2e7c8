#ifndef FBSDE_GRID_HPP
#define FBSDE_GRID_HPP

#include <algorithm>
#include <vector>

#include "fbsde/common.hpp"

namespace fbsde {

// Discretization grid pi = {t_0 = 0 < ... < t_n = T} with the left-node
// projection pi(t) = max{t_i <= t}.
class TimeGrid {
  public:
    static TimeGrid uniform(double T, int n) {
        require(n >= 1, "grid needs at least one step");
        require(T > 0, "horizon must be positive");
        std::vector<double> nodes(n + 1);
        for (int i = 0; i <= n; ++i) nodes[i] = T * static_cast<double>(i) / n;
        nodes[n] = T;
        return TimeGrid(std::move(nodes));
    }

    static TimeGrid custom(std::vector<double> nodes) { return TimeGrid(std::move(nodes)); }

    int steps() const { return static_cast<int>(nodes_.size()) - 1; }
    double node(int i) const { return nodes_[i]; }
    double horizon() const { return nodes_.back(); }
    double dt(int i) const { return nodes_[i] - nodes_[i - 1]; }  // i in 1..n
    const std::vector<double>& nodes() const { return nodes_; }

    double mesh() const {
        double m = 0.0;
        for (int i = 1; i <= steps(); ++i) m = std::max(m, dt(i));
        return m;
    }

    // Index of the largest node <= t.
    int index_left_of(double t) const {
        require(t >= nodes_.front(), "time before grid start");
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
        return static_cast<int>(it - nodes_.begin()) - 1;
    }

    double pi(double t) const { return nodes_[std::min(index_left_of(t), steps())]; }

  private:
    explicit TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        require(nodes_.size() >= 2, "grid needs at least two nodes");
        require(nodes_.front() == 0.0, "grid must start at 0");
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            require(nodes_[i] > nodes_[i - 1], "grid nodes must be strictly increasing");
        require(mesh() <= 1.0, "grid mesh must not exceed 1");
    }

    std::vector<double> nodes_;
};

}  // namespace fbsde

#endif
