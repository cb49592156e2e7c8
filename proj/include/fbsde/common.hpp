#ifndef FBSDE_COMMON_HPP
#define FBSDE_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbsde {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Coefficient returned a NaN/Inf for finite inputs.
struct InvalidPresetError : Error {
    using Error::Error;
};

// K_q * dt >= 1, the implicit step is not a contraction.
struct MeshTooCoarseError : Error {
    using Error::Error;
};

struct ConvergenceFailureError : Error {
    using Error::Error;
};

struct DegenerateModelError : Error {
    using Error::Error;
};

struct EstimatorDegenerateError : Error {
    using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

inline double require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InvalidPresetError(std::string("non-finite evaluation of ") + what);
    return v;
}

// Sum that does not depend on the order of the inputs: sort, then Neumaier.
inline double stable_sum(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

// Running Neumaier accumulator for streaming sums.
class KahanAccumulator {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

  private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

}  // namespace fbsde

#endif
