#pragma once

#include "hypograph/error.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hypograph {

/// Per-degree scaling of the algebra lift: level m of lift(x) is c_m x^{(x)m}.
/// c_0 is pinned to 1 so the lift always hits the algebra unit at degree 0.
class LiftCoefficients {
public:
    LiftCoefficients() : coeffs_{1.0} {}

    /// Tensor-exponential coefficients 1/m! for m = 0..max_degree.
    static LiftCoefficients exponential(std::size_t max_degree) {
        LiftCoefficients c;
        c.coeffs_.resize(max_degree + 1);
        double fact = 1.0;
        for (std::size_t m = 0; m <= max_degree; ++m) {
            if (m > 0) fact *= static_cast<double>(m);
            c.coeffs_[m] = 1.0 / fact;
        }
        return c;
    }

    static LiftCoefficients from(std::vector<double> coeffs) {
        detail::require(!coeffs.empty(), "lift coefficients: need at least c_0");
        detail::require(coeffs[0] == 1.0, "lift coefficients: c_0 must equal 1");
        LiftCoefficients c;
        c.coeffs_ = std::move(coeffs);
        return c;
    }

    std::size_t max_degree() const { return coeffs_.size() - 1; }
    double operator[](std::size_t m) const { return coeffs_.at(m); }
    std::span<const double> values() const { return coeffs_; }

    bool operator==(const LiftCoefficients&) const = default;

private:
    std::vector<double> coeffs_;
};

/// Selects the sequence feature map variation and the diffusion sizes.
///
/// diff       multiply lifts of increments f(j) - f(i) instead of raw values f(j)
/// zero_start prepend the start-point factor lift(f(B_0))
/// time_param append the step index as a leading coordinate (dimension d + 1)
struct FeatureConfig {
    bool diff = true;
    bool zero_start = true;
    bool time_param = false;
    std::size_t walk_length = 1;
    std::size_t max_degree = 2;
    std::size_t rank = 1;
    /// Empty means the exponential default 1/m!.
    std::vector<double> coefficients;

    LiftCoefficients lift_coefficients() const {
        if (coefficients.empty()) return LiftCoefficients::exponential(max_degree);
        detail::require(coefficients.size() == max_degree + 1,
                        "feature config: need max_degree + 1 coefficients");
        return LiftCoefficients::from(coefficients);
    }

    /// Dimension of the vectors being lifted for attribute width d.
    std::size_t lift_dim(std::size_t attr_dim) const { return attr_dim + (time_param ? 1 : 0); }

    void validate() const {
        detail::require(max_degree >= 1, "feature config: max_degree must be >= 1");
        detail::require(rank >= 1, "feature config: rank must be >= 1");
        (void)lift_coefficients();
    }

    std::string flags_string() const {
        std::string s;
        s += diff ? "diff" : "nodiff";
        s += zero_start ? "+zs" : "+nozs";
        s += time_param ? "+tp" : "+notp";
        return s;
    }

    bool operator==(const FeatureConfig&) const = default;
};

} // namespace hypograph
