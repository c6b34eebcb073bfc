// numeric.hpp
//
// Small numerical kernels shared by the boundary, mixture and simulation
// code: constants, compensated summation, bracketed bisection and an
// adaptive Gauss-Kronrod (G10/K21) integrator.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace lil {

inline constexpr double kE = std::numbers::e;
inline constexpr double kE2 = kE * kE;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when an adaptive integration exhausts its subdivision budget.
class quadrature_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Kahan-Babuska (Neumaier) compensated running sum.
class KahanSum {
public:
    KahanSum() = default;
    explicit KahanSum(double init) : sum_(init) {}

    KahanSum& operator+=(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        return *this;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct BisectionResult {
    double lo;  // f(lo) <= 0
    double hi;  // f(hi) > 0
    int iterations;
};

// Bisection for an increasing function with f(lo) <= 0 < f(hi). The bracket
// shrinks until hi - lo <= rel_tol * hi or max_iter is reached.
template <class F>
BisectionResult bisect_increasing(F&& f, double lo, double hi,
                                  double rel_tol = 1e-13, int max_iter = 200) {
    int it = 0;
    for (; it < max_iter && hi - lo > rel_tol * std::abs(hi); ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return {lo, hi, it};
}

struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_subdivisions = 10000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("quadrature tolerances must be positive");
        if (max_subdivisions < 1)
            throw std::invalid_argument("max_subdivisions must be >= 1");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    int subdivisions = 0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208067609203, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd-indexed Kronrod nodes 1,3,5,7,9.
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk21(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kronrod = kWgk[10] * f(center);
    double gauss = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        const double dx = half * kXgk[i];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kWgk[i] * pair;
        if (i % 2 == 1) gauss += kWg[i / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

// Adaptive G10/K21 integration over [breaks.front(), breaks.back()], starting
// from the given breakpoints. The error estimate is the raw |K21 - G10|
// difference summed over segments. Throws quadrature_error when the budget
// runs out before max(abs_tol, rel_tol * |value|) is met.
template <class F>
QuadratureResult integrate(F&& f, std::vector<double> breaks,
                           const QuadratureSpec& spec = {}) {
    spec.validate();
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    if (breaks.size() < 2) return {};

    std::priority_queue<detail::Segment> heap;
    KahanSum value, error;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        auto seg = detail::gk21(f, breaks[i], breaks[i + 1]);
        value += seg.value;
        error += seg.error;
        heap.push(seg);
    }

    int splits = 0;
    auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(value.value())); };
    while (error.value() > tolerance()) {
        if (splits >= spec.max_subdivisions)
            throw quadrature_error("adaptive quadrature: subdivision budget of " +
                                   std::to_string(spec.max_subdivisions) +
                                   " exhausted (error " + std::to_string(error.value()) + ")");
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            throw quadrature_error("adaptive quadrature: interval collapsed below machine precision");
        auto left = detail::gk21(f, worst.a, mid);
        auto right = detail::gk21(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++splits;
    }

    // Re-sum from the segments to shed the drift of incremental updates.
    KahanSum v, e;
    while (!heap.empty()) {
        v += heap.top().value;
        e += heap.top().error;
        heap.pop();
    }
    return {v.value(), e.value(), splits};
}

template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    return integrate(std::forward<F>(f), std::vector<double>{a, b}, spec);
}

}  // namespace lil
