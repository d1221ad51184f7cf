#pragma once

// Truncated free tensor algebra over R^d.
//
// An element is a sequence of dense tensors (v_0, v_1, ..., v_M) with v_m in
// (R^d)^{(x)m}. The product is the graded convolution
//     (v w)_m = sum_{i=0}^{m} v_i (x) w_{m-i},
// so every identity holds exactly on the retained degrees <= M.

#include "hypograph/config.hpp"
#include "hypograph/error.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hypograph {

inline std::size_t ipow(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) r *= base;
    return r;
}

/// Dense degree-m tensor over R^d in row-major multi-index order.
class DenseTensor {
public:
    DenseTensor() : DenseTensor(0, 1) {}

    DenseTensor(std::size_t degree, std::size_t dims)
        : degree_(degree), dims_(dims), entries_(ipow(dims, degree), 0.0) {
        detail::require_dims(dims >= 1, "DenseTensor: dims must be >= 1");
    }

    DenseTensor(std::size_t degree, std::size_t dims, std::vector<double> entries)
        : degree_(degree), dims_(dims), entries_(std::move(entries)) {
        detail::require_dims(dims >= 1, "DenseTensor: dims must be >= 1");
        detail::require_dims(entries_.size() == ipow(dims, degree),
                             "DenseTensor: entry count must equal d^m");
    }

    static DenseTensor scalar(double value, std::size_t dims) {
        return DenseTensor(0, dims, {value});
    }

    static DenseTensor vector(std::span<const double> x) {
        return DenseTensor(1, x.size(), std::vector<double>(x.begin(), x.end()));
    }

    std::size_t degree() const { return degree_; }
    std::size_t dims() const { return dims_; }
    std::size_t size() const { return entries_.size(); }

    std::span<const double> entries() const { return entries_; }
    std::span<double> entries() { return entries_; }

    double operator[](std::size_t flat) const { return entries_[flat]; }
    double& operator[](std::size_t flat) { return entries_[flat]; }

    /// Entry at a multi-index (i_1, ..., i_m), 0-based.
    double at(std::span<const std::size_t> index) const {
        detail::require_dims(index.size() == degree_, "DenseTensor::at: wrong index arity");
        std::size_t flat = 0;
        for (std::size_t i : index) {
            detail::require_dims(i < dims_, "DenseTensor::at: index out of range");
            flat = flat * dims_ + i;
        }
        return entries_[flat];
    }

    bool all_finite() const {
        for (double v : entries_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    DenseTensor& operator+=(const DenseTensor& o) {
        check_same(o);
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
        return *this;
    }

    DenseTensor& operator-=(const DenseTensor& o) {
        check_same(o);
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
        return *this;
    }

    DenseTensor& operator*=(double s) {
        for (double& v : entries_) v *= s;
        return *this;
    }

    bool operator==(const DenseTensor&) const = default;

private:
    void check_same(const DenseTensor& o) const {
        detail::require_dims(degree_ == o.degree_ && dims_ == o.dims_,
                             "DenseTensor: shape mismatch");
    }

    std::size_t degree_;
    std::size_t dims_;
    std::vector<double> entries_;
};

/// Outer product; output multi-index (i_1..i_p, j_1..j_q) = a(i) * b(j).
inline DenseTensor tensor_product(const DenseTensor& a, const DenseTensor& b) {
    detail::require_dims(a.dims() == b.dims(), "tensor_product: dimension mismatch");
    DenseTensor out(a.degree() + b.degree(), a.dims());
    const std::size_t nb = b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = a[i];
        double* row = out.entries().data() + i * nb;
        for (std::size_t j = 0; j < nb; ++j) row[j] = ai * b[j];
    }
    return out;
}

/// Entry-wise dot product of two tensors of equal shape.
inline double tensor_dot(const DenseTensor& a, const DenseTensor& b) {
    detail::require_dims(a.degree() == b.degree() && a.dims() == b.dims(),
                         "tensor_dot: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Element of the free tensor algebra truncated at degree M.
class TensorSeq {
public:
    TensorSeq() : TensorSeq(1, 0) {}

    /// The zero element.
    TensorSeq(std::size_t dims, std::size_t max_degree) {
        levels_.reserve(max_degree + 1);
        for (std::size_t m = 0; m <= max_degree; ++m) levels_.emplace_back(m, dims);
    }

    explicit TensorSeq(std::vector<DenseTensor> levels) : levels_(std::move(levels)) {
        detail::require_dims(!levels_.empty(), "TensorSeq: need at least degree 0");
        for (std::size_t m = 0; m < levels_.size(); ++m) {
            detail::require_dims(levels_[m].degree() == m, "TensorSeq: levels[m] must have degree m");
            detail::require_dims(levels_[m].dims() == levels_[0].dims(), "TensorSeq: mixed dims");
        }
    }

    static TensorSeq zero(std::size_t dims, std::size_t max_degree) {
        return TensorSeq(dims, max_degree);
    }

    static TensorSeq unit(std::size_t dims, std::size_t max_degree) {
        TensorSeq s(dims, max_degree);
        s.levels_[0][0] = 1.0;
        return s;
    }

    std::size_t dims() const { return levels_[0].dims(); }
    std::size_t max_degree() const { return levels_.size() - 1; }

    const DenseTensor& level(std::size_t m) const { return levels_.at(m); }
    DenseTensor& level(std::size_t m) { return levels_.at(m); }

    bool same_shape(const TensorSeq& o) const {
        return dims() == o.dims() && max_degree() == o.max_degree();
    }

    bool all_finite() const {
        for (const auto& l : levels_)
            if (!l.all_finite()) return false;
        return true;
    }

    TensorSeq& operator+=(const TensorSeq& o) {
        detail::require_dims(same_shape(o), "TensorSeq: shape mismatch");
        for (std::size_t m = 0; m < levels_.size(); ++m) levels_[m] += o.levels_[m];
        return *this;
    }

    TensorSeq& operator-=(const TensorSeq& o) {
        detail::require_dims(same_shape(o), "TensorSeq: shape mismatch");
        for (std::size_t m = 0; m < levels_.size(); ++m) levels_[m] -= o.levels_[m];
        return *this;
    }

    TensorSeq& operator*=(double s) {
        for (auto& l : levels_) l *= s;
        return *this;
    }

    friend TensorSeq operator+(TensorSeq a, const TensorSeq& b) { return a += b; }
    friend TensorSeq operator-(TensorSeq a, const TensorSeq& b) { return a -= b; }
    friend TensorSeq operator*(double s, TensorSeq a) { return a *= s; }

    bool operator==(const TensorSeq&) const = default;

private:
    std::vector<DenseTensor> levels_;
};

/// Product in the truncated algebra; degrees above M are discarded.
inline TensorSeq algebra_mul(const TensorSeq& v, const TensorSeq& w) {
    detail::require_dims(v.same_shape(w), "algebra_mul: shape mismatch");
    const std::size_t d = v.dims();
    const std::size_t M = v.max_degree();
    TensorSeq out(d, M);
    for (std::size_t m = 0; m <= M; ++m) {
        DenseTensor& target = out.level(m);
        for (std::size_t i = 0; i <= m; ++i) {
            const DenseTensor& a = v.level(i);
            const DenseTensor& b = w.level(m - i);
            const std::size_t nb = b.size();
            for (std::size_t p = 0; p < a.size(); ++p) {
                const double ap = a[p];
                if (ap == 0.0) continue;
                double* row = target.entries().data() + p * nb;
                for (std::size_t q = 0; q < nb; ++q) row[q] += ap * b[q];
            }
        }
    }
    return out;
}

inline double inner_product(const TensorSeq& v, const TensorSeq& w) {
    detail::require_dims(v.same_shape(w), "inner_product: shape mismatch");
    double s = 0.0;
    for (std::size_t m = 0; m <= v.max_degree(); ++m) s += tensor_dot(v.level(m), w.level(m));
    return s;
}

/// Level m equals c_m x^{(x)m}; with exponential coefficients this is the
/// truncated tensor exponential.
inline TensorSeq lift(std::span<const double> x, const LiftCoefficients& c, std::size_t max_degree) {
    detail::require_dims(!x.empty(), "lift: empty vector");
    detail::require(c.max_degree() >= max_degree, "lift: not enough coefficients for max_degree");
    const std::size_t d = x.size();
    std::vector<DenseTensor> levels;
    levels.reserve(max_degree + 1);
    levels.push_back(DenseTensor::scalar(1.0, d));
    // power holds x^{(x)m} without the coefficient
    DenseTensor power = DenseTensor::scalar(1.0, d);
    const DenseTensor xv = DenseTensor::vector(x);
    for (std::size_t m = 1; m <= max_degree; ++m) {
        power = tensor_product(power, xv);
        DenseTensor scaled = power;
        scaled *= c[m];
        levels.push_back(std::move(scaled));
    }
    TensorSeq out(std::move(levels));
    if (!out.all_finite()) throw NumericError("lift: non-finite entries");
    return out;
}

inline TensorSeq lift(std::span<const double> x, std::size_t max_degree) {
    return lift(x, LiftCoefficients::exponential(max_degree), max_degree);
}

// Elements fed to the lift for a walk step i -> j and for the start point.
//
//   diff on:   step = f(j) - f(i)       start = f(i)
//   diff off:  step = f(j)              start = f(i)
//   time_param prepends the time coordinate: 1 for every step, 0 for the start.
//
// With time_param and raw values, the time coordinate still enters through its
// unit increment, which keeps the transition operator time-homogeneous.

inline std::vector<double> step_element(std::span<const double> from, std::span<const double> to,
                                        const FeatureConfig& cfg) {
    detail::require_dims(from.size() == to.size(), "step_element: dimension mismatch");
    std::vector<double> out;
    out.reserve(to.size() + 1);
    if (cfg.time_param) out.push_back(1.0);
    for (std::size_t a = 0; a < to.size(); ++a) out.push_back(cfg.diff ? to[a] - from[a] : to[a]);
    return out;
}

inline std::vector<double> start_element(std::span<const double> at, const FeatureConfig& cfg) {
    std::vector<double> out;
    out.reserve(at.size() + 1);
    if (cfg.time_param) out.push_back(0.0);
    out.insert(out.end(), at.begin(), at.end());
    return out;
}

/// Product of lifts along a sequence: optional start factor, then one factor
/// per consecutive pair.
inline TensorSeq sequence_feature(std::span<const std::vector<double>> xs, const FeatureConfig& cfg) {
    if (xs.empty()) throw ArgumentError("sequence_feature: empty sequence");
    const std::size_t d = xs[0].size();
    for (const auto& x : xs) detail::require_dims(x.size() == d, "sequence_feature: ragged sequence");
    const std::size_t M = cfg.max_degree;
    const LiftCoefficients c = cfg.lift_coefficients();
    const std::size_t lift_d = cfg.lift_dim(d);

    TensorSeq acc = TensorSeq::unit(lift_d, M);
    if (cfg.zero_start) acc = lift(start_element(xs[0], cfg), c, M);
    for (std::size_t i = 1; i < xs.size(); ++i)
        acc = algebra_mul(acc, lift(step_element(xs[i - 1], xs[i], cfg), c, M));
    return acc;
}

} // namespace hypograph
