// simulation.hpp
//
// Monte Carlo boundary-crossing experiments: the upper and lower stopping
// times applied to simulated paths, coverage estimates with Wilson
// intervals, optional-stopping moment estimates, and a deterministic
// parallel driver.
//
// Determinism: path i draws from a stream seeded by path_seed(master_seed, i)
// and its outcome is stored at index i; aggregation then runs sequentially
// in path order. Reports are therefore identical for every worker count.
#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "lil/boundaries.hpp"
#include "lil/mixtures.hpp"
#include "lil/numeric.hpp"
#include "lil/processes.hpp"
#include "lil/random.hpp"

namespace lil {

/// Raised when an experiment exceeds its configured step budget.
class budget_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Direction { upper, lower };

// Which upper-direction event is watched.
//   two_clause      : from U >= tau0 threshold, |M| > lambda0 U or the iterated-log clause fails
//   lln_only        : from U >= (2/lambda0^2) ln(2/delta), |M| > lambda0 U
//   initial_segment : while U < (2/lambda0^2) ln(2/delta), |M| > (2/lambda0) ln(2/delta)
enum class UpperRule { two_clause, lln_only, initial_segment };

// Which part of the stopping event fired.
enum class Fired { linear, iterated_log, initial_segment };

inline std::string_view to_string(Direction d) { return d == Direction::upper ? "upper" : "lower"; }

inline Direction direction_from_string(std::string_view s) {
    if (s == "upper") return Direction::upper;
    if (s == "lower") return Direction::lower;
    throw std::invalid_argument("unknown direction: " + std::string(s));
}

inline std::string_view to_string(UpperRule r) {
    switch (r) {
        case UpperRule::two_clause: return "two_clause";
        case UpperRule::lln_only: return "lln_only";
        case UpperRule::initial_segment: return "initial_segment";
    }
    return "?";
}

inline UpperRule upper_rule_from_string(std::string_view s) {
    for (auto r : {UpperRule::two_clause, UpperRule::lln_only, UpperRule::initial_segment})
        if (to_string(r) == s) return r;
    throw std::invalid_argument("unknown upper rule: " + std::string(s));
}

// ---------------------------------------------------------------------------
// Upper stopping time

// Streaming evaluator of the upper stopping event. observe() is called with
// the state after each step and returns the clause that fired, if any.
class UpperStopper {
public:
    UpperStopper(const BoundarySpec& spec, UpperRule rule) : spec_(spec), rule_(rule) {
        spec_.validate();
        if (spec_.family == Family::anti)
            throw std::invalid_argument("upper stopping time: the anti family belongs to the lower direction");
        lambda0_ = lambda0(spec_);
        tau0_u_ = tau0_threshold(spec_);
        lln_u_ = lln_threshold(spec_);
        initial_ = initial_segment_bound(spec_);
        // For families whose rhs(lambda0 u)^2 / u is scale-free and whose rhs
        // decreases in m, |M|^2 <= coef * u with |M| <= lambda0 u rules out an
        // iterated-log violation without evaluating logs.
        if (spec_.family != Family::sharper) {
            auto r = lil_rhs(spec_, 1.0, lambda0_);
            if (r) precheck_coef_ = (*r) * (*r) * (1.0 - 1e-12);
        }
    }

    std::optional<Fired> observe(const PathState& s) const {
        const double u = s.u();
        const double a = std::abs(s.m());
        switch (rule_) {
            case UpperRule::initial_segment:
                if (u < lln_u_ && a > initial_) return Fired::initial_segment;
                return std::nullopt;
            case UpperRule::lln_only:
                if (u >= lln_u_ && a > lambda0_ * u) return Fired::linear;
                return std::nullopt;
            case UpperRule::two_clause:
                if (u < tau0_u_) return std::nullopt;
                if (a > lambda0_ * u) return Fired::linear;
                if (!(a > 0.0) || a * a <= precheck_coef_ * u) return std::nullopt;
                if (boundary_residual(spec_, {u, s.t()}, a) > 0.0) return Fired::iterated_log;
                return std::nullopt;
        }
        return std::nullopt;
    }

    /// True once no later step can fire (initial-segment rule past its window).
    bool finished(const PathState& s) const { return rule_ == UpperRule::initial_segment && s.u() >= lln_u_; }

    double tau0_u() const { return tau0_u_; }

private:
    BoundarySpec spec_;
    UpperRule rule_;
    double lambda0_ = 0.0;
    double tau0_u_ = 0.0;
    double lln_u_ = 0.0;
    double initial_ = 0.0;
    double precheck_coef_ = 0.0;
};

struct StopEvent {
    std::int64_t t = 0;
    Fired clause = Fired::linear;
};

/// First violating time of a given increment sequence (E[xi^2 | past] taken as xi^2).
inline std::optional<StopEvent> upper_stopping_time(std::span<const double> increments, const BoundarySpec& spec,
                                                    UpperRule rule = UpperRule::two_clause,
                                                    ProxyFlavor flavor = ProxyFlavor::time) {
    const UpperStopper stopper(spec, rule);
    PathState s;
    for (double xi : increments) {
        s = update_state(s, xi, xi * xi, flavor, std::abs(xi));
        if (auto f = stopper.observe(s)) return StopEvent{s.t(), *f};
        if (stopper.finished(s)) break;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Lower stopping time

struct LowerParams {
    std::int64_t horizon = 0;
    double delta = 0.05;
    double c1 = kDefaultC1;
    double k = 1.0 / 3.0;
};

// Streaming evaluator of the lower-direction stopping time: the first t in
// [sigma_delta, T) with |M_t| > (2k/e^2) U_t or |M_t| above the
// anti-concentration radius, else T. A negative radicand makes the radius
// 0, and a log-log argument at or below e (where the radius is undefined)
// is treated the same way.
class LowerStopper {
public:
    explicit LowerStopper(const LowerParams& p) : p_(p) {
        if (!(p_.delta > 0.0 && p_.delta < 1.0)) throw std::invalid_argument("lower stopping time: delta must lie in (0, 1)");
        if (!(p_.k > 0.0 && p_.k < 1.0)) throw std::invalid_argument("lower stopping time: k must lie in (0, 1)");
        if (!(p_.c1 > 0.0)) throw std::invalid_argument("lower stopping time: c1 must be > 0");
        sigma_ = sigma_delta(p_.delta, p_.k);
        if (!(static_cast<double>(p_.horizon) > sigma_))
            throw std::invalid_argument("lower stopping time: horizon T = " + std::to_string(p_.horizon) +
                                        " must exceed sigma_delta = " + std::to_string(sigma_));
    }

    /// Clause violated at this state (only meaningful for sigma_delta <= t < T).
    std::optional<Fired> violated(double m, double u) const {
        const double a = std::abs(m);
        if (a > anti_clause_cap(u, p_.k)) return Fired::linear;
        const auto r = anti_rhs(u, p_.delta, a, p_.c1, p_.k);
        if (a > r.value_or(0.0)) return Fired::iterated_log;
        return std::nullopt;
    }

    std::optional<Fired> observe(const PathState& s) const {
        const double t = static_cast<double>(s.t());
        if (t < sigma_ || s.t() >= p_.horizon) return std::nullopt;
        return violated(s.m(), s.u());
    }

    double sigma() const { return sigma_; }
    const LowerParams& params() const { return p_; }

private:
    LowerParams p_;
    double sigma_ = 0.0;
};

/// tau(T) for a given increment sequence (at least T - 1 increments needed).
inline std::int64_t lower_stopping_time(std::span<const double> increments, const LowerParams& p) {
    const LowerStopper stopper(p);
    PathState s;
    for (double xi : increments) {
        if (s.t() + 1 >= p.horizon) break;
        s = update_state(s, xi, xi * xi, ProxyFlavor::time, std::abs(xi));
        if (stopper.observe(s)) return s.t();
    }
    if (s.t() + 1 < p.horizon)
        throw std::invalid_argument("lower_stopping_time: path shorter than T - 1 steps without stopping");
    return p.horizon;
}

// ---------------------------------------------------------------------------
// Experiments

struct CrossingExperiment {
    BoundarySpec boundary;
    IncrementModel model;
    ProxyFlavor flavor = ProxyFlavor::time;
    std::int64_t horizon_T = 100000;
    std::int64_t n_paths = 2000;
    std::uint64_t master_seed = 1;
    Direction direction = Direction::upper;
    UpperRule upper_rule = UpperRule::two_clause;
    double step_budget = 1e12;  // cap on n_paths * horizon_T

    void validate() const {
        boundary.validate();
        model.validate();
        if (horizon_T < 1) throw std::invalid_argument("horizon_T must be >= 1, got " + std::to_string(horizon_T));
        if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1, got " + std::to_string(n_paths));
        if (flavor == ProxyFlavor::sum_c_sq && model.kind == ModelKind::moment_family)
            throw std::invalid_argument("flavor sum_c_sq needs a bounded increment model");
        if (direction == Direction::lower) {
            if (model.kind != ModelKind::rademacher || flavor != ProxyFlavor::time)
                throw std::invalid_argument("lower direction is defined for Rademacher walks with U_t = t");
            const double sigma = sigma_delta(boundary.delta, boundary.k);
            if (!(static_cast<double>(horizon_T) > sigma))
                throw std::invalid_argument("lower direction needs horizon_T > sigma_delta = " + std::to_string(sigma));
        }
        if (static_cast<double>(n_paths) * static_cast<double>(horizon_T) > step_budget)
            throw budget_error("n_paths * horizon_T = " +
                               std::to_string(static_cast<double>(n_paths) * static_cast<double>(horizon_T)) +
                               " exceeds the step budget " + std::to_string(step_budget));
    }
};

struct HistogramBucket {
    std::int64_t t_bucket = 0;  // lower edge, a power of two; bucket covers [t_bucket, 2 t_bucket)
    std::int64_t count = 0;
    bool operator==(const HistogramBucket&) const = default;
};

// Pathwise checks of the lower-direction lemmas.
struct LowerLemmaStats {
    // G at tau(T) versus G at tau(T) - 1.
    std::int64_t ratio_checked = 0;
    std::int64_t ratio_skipped = 0;  // a log argument was <= 1
    std::int64_t ratio_violations = 0;
    double max_ratio = 0.0;          // max G_tau / G_{tau-1}
    // 1/sqrt(delta ln(2kU/(|M| + 2 sqrt(kU)))) at T - 1 on paths with tau(T) = T.
    std::int64_t endpoint_qualifying = 0;
    std::int64_t endpoint_violations = 0;
    double max_endpoint_lhs = 0.0;
    bool operator==(const LowerLemmaStats&) const = default;
};

struct CrossingReport {
    CrossingExperiment experiment;
    std::int64_t n_paths = 0;
    std::int64_t n_crossed = 0;
    double crossing_fraction = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    std::vector<HistogramBucket> first_crossing_histogram;
    bool truncated = true;
    std::int64_t fired_linear = 0;
    std::int64_t fired_iterated_log = 0;
    std::int64_t fired_initial_segment = 0;
    double start_threshold = 0.0;  // U-threshold (upper) or sigma_delta (lower) where watching starts
    std::optional<LowerLemmaStats> lower_stats;
};

/// Wilson score interval for x successes out of n at normal quantile z (99% by default).
inline std::pair<double, double> wilson_interval(std::int64_t x, std::int64_t n, double z = kZ99) {
    if (n < 1 || x < 0 || x > n) throw std::invalid_argument("wilson_interval: requires 0 <= x <= n, n >= 1");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(x) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// Lower edge of the power-of-two bucket holding t >= 1.
inline std::int64_t pow2_bucket(std::int64_t t) {
    return std::int64_t{1} << (std::bit_width(static_cast<std::uint64_t>(t)) - 1);
}

// Runs body(i) for i in [0, n) on `threads` workers (0 = hardware
// concurrency). The first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(std::int64_t n, unsigned threads, Body&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::int64_t>(threads, std::max<std::int64_t>(n, 1)));
    if (threads <= 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::int64_t i = next++; i < n; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = n;
                    }
                }
            });
    }
    if (error) std::rethrow_exception(error);
}

namespace detail {

struct PathOutcome {
    std::int64_t tau = 0;  // crossing time; 0 = none (upper) — for lower, tau(T)
    Fired clause = Fired::linear;
    bool crossed = false;
    // Lower direction: (m, u) at tau and tau - 1.
    double m_tau = 0.0, u_tau = 0.0, m_prev = 0.0, u_prev = 0.0;
};

inline PathOutcome simulate_upper(const CrossingExperiment& e, const UpperStopper& stopper, std::int64_t i) {
    RandomStream stream(path_seed(e.master_seed, static_cast<std::uint64_t>(i)));
    PathState s;
    PathOutcome out;
    for (std::int64_t t = 1; t <= e.horizon_T; ++t) {
        s = update_state(s, draw_step(e.model, t, stream), e.flavor);
        if (auto f = stopper.observe(s)) {
            out.crossed = true;
            out.tau = t;
            out.clause = *f;
            break;
        }
        if (stopper.finished(s)) break;
    }
    return out;
}

inline PathOutcome simulate_lower(const CrossingExperiment& e, const LowerStopper& stopper, std::int64_t i) {
    RandomStream stream(path_seed(e.master_seed, static_cast<std::uint64_t>(i)));
    PathState s;
    PathOutcome out;
    double m_prev = 0.0, u_prev = 0.0;
    for (std::int64_t t = 1; t <= e.horizon_T; ++t) {
        m_prev = s.m();
        u_prev = s.u();
        s = update_state(s, draw_step(e.model, t, stream), e.flavor);
        if (t == e.horizon_T) break;
        if (auto f = stopper.observe(s)) {
            out.crossed = true;
            out.clause = *f;
            break;
        }
    }
    out.tau = s.t();
    out.m_tau = s.m();
    out.u_tau = s.u();
    out.m_prev = m_prev;
    out.u_prev = u_prev;
    return out;
}

// log G at (m, u), or nullopt when its log argument is <= 1.
inline std::optional<double> log_g_if_defined(double m, double u, double k) {
    if (!(u > 0.0)) return std::nullopt;
    try {
        return log_g_upper({m, u, k});
    } catch (const std::domain_error&) {
        return std::nullopt;
    }
}

inline void accumulate_lower(LowerLemmaStats& st, const PathOutcome& o, const CrossingExperiment& e) {
    const double k = e.boundary.k;
    const auto g_tau = log_g_if_defined(o.m_tau, o.u_tau, k);
    const auto g_prev = log_g_if_defined(o.m_prev, o.u_prev, k);
    if (g_tau && g_prev) {
        const double ratio = std::exp(*g_tau - *g_prev);
        ++st.ratio_checked;
        st.max_ratio = std::max(st.max_ratio, ratio);
        if (ratio > 14.0 / 11.0) ++st.ratio_violations;
    } else {
        ++st.ratio_skipped;
    }
    if (!o.crossed) {
        // Within {tau(T) = T}: needs delta >= 4 / ln(k U_{T-1}).
        const double ku = k * o.u_prev;
        if (ku > 1.0 && e.boundary.delta >= 4.0 / std::log(ku)) {
            const double arg = 2.0 * ku / (std::abs(o.m_prev) + 2.0 * std::sqrt(ku));
            const double inner = e.boundary.delta * std::log(arg);
            const double lhs = inner > 0.0 ? 1.0 / std::sqrt(inner) : kInf;
            ++st.endpoint_qualifying;
            st.max_endpoint_lhs = std::max(st.max_endpoint_lhs, lhs);
            if (lhs > 1.0) ++st.endpoint_violations;
        }
    }
}

}  // namespace detail

/// Simulates every path of the experiment and aggregates the outcomes.
inline CrossingReport run_crossing(const CrossingExperiment& e, unsigned threads = 1) {
    e.validate();
    std::vector<detail::PathOutcome> outcomes(static_cast<std::size_t>(e.n_paths));
    CrossingReport r;
    r.experiment = e;
    r.n_paths = e.n_paths;

    if (e.direction == Direction::upper) {
        const UpperStopper stopper(e.boundary, e.upper_rule);
        r.start_threshold = e.upper_rule == UpperRule::two_clause ? tau0_threshold(e.boundary)
                                                                 : lln_threshold(e.boundary);
        parallel_for(e.n_paths, threads, [&](std::int64_t i) {
            outcomes[static_cast<std::size_t>(i)] = detail::simulate_upper(e, stopper, i);
        });
    } else {
        const LowerStopper stopper({e.horizon_T, e.boundary.delta, e.boundary.c1, e.boundary.k});
        r.start_threshold = stopper.sigma();
        parallel_for(e.n_paths, threads, [&](std::int64_t i) {
            outcomes[static_cast<std::size_t>(i)] = detail::simulate_lower(e, stopper, i);
        });
        r.lower_stats = LowerLemmaStats{};
    }

    std::map<std::int64_t, std::int64_t> hist;
    for (const auto& o : outcomes) {
        if (r.lower_stats) detail::accumulate_lower(*r.lower_stats, o, e);
        if (!o.crossed) continue;
        ++r.n_crossed;
        ++hist[pow2_bucket(o.tau)];
        switch (o.clause) {
            case Fired::linear: ++r.fired_linear; break;
            case Fired::iterated_log: ++r.fired_iterated_log; break;
            case Fired::initial_segment: ++r.fired_initial_segment; break;
        }
    }
    for (const auto& [b, c] : hist) r.first_crossing_histogram.push_back({b, c});
    r.crossing_fraction = static_cast<double>(r.n_crossed) / static_cast<double>(r.n_paths);
    std::tie(r.wilson_lo, r.wilson_hi) = wilson_interval(r.n_crossed, r.n_paths);
    r.truncated = true;
    return r;
}

/// Replays path `index` of the experiment over the full horizon and writes
/// one CSV row per step. The increments match the ones run_crossing draws.
inline void dump_path(const CrossingExperiment& e, std::int64_t index, std::ostream& os) {
    e.validate();
    if (index < 0 || index >= e.n_paths)
        throw std::invalid_argument("dump_path: index must lie in [0, n_paths)");
    RandomStream stream(path_seed(e.master_seed, static_cast<std::uint64_t>(index)));
    PathDumpWriter writer(os);
    PathState s;
    for (std::int64_t t = 1; t <= e.horizon_T; ++t) {
        const Step step = draw_step(e.model, t, stream);
        s = update_state(s, step, e.flavor);
        writer.row(s, step.xi);
    }
}

// ---------------------------------------------------------------------------
// Optional stopping

enum class TauKind { constant, hitting, horizon };

inline std::string_view to_string(TauKind k) {
    switch (k) {
        case TauKind::constant: return "constant";
        case TauKind::hitting: return "hitting";
        case TauKind::horizon: return "horizon";
    }
    return "?";
}

struct TauSpec {
    TauKind kind = TauKind::constant;
    std::int64_t time = 0;  // constant
    double level = 0.0;     // hitting: first t with |M_t| >= level

    static TauSpec constant(std::int64_t t) { return {TauKind::constant, t, 0.0}; }
    static TauSpec hitting(double level) { return {TauKind::hitting, 0, level}; }
    static TauSpec at_horizon() { return {TauKind::horizon, 0, 0.0}; }
};

struct MomentEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;  // 99%
    double ci_hi = 0.0;
    std::int64_t n_paths = 0;
    bool pass = false;   // estimate - 3 se <= 2
};

// Monte Carlo estimate of E[exp(lambda |M_{tau ^ T}| - lambda^2 U_{tau ^ T} / 2)].
inline MomentEstimate optional_stopping_estimate(const IncrementModel& model, const TauSpec& tau, double lambda,
                                                 std::int64_t n_paths, std::int64_t horizon, std::uint64_t seed,
                                                 ProxyFlavor flavor = ProxyFlavor::time, unsigned threads = 1) {
    model.validate();
    if (n_paths < 2) throw std::invalid_argument("optional_stopping_estimate: n_paths must be >= 2");
    if (horizon < 0) throw std::invalid_argument("optional_stopping_estimate: horizon must be >= 0");
    if (tau.kind == TauKind::constant && tau.time < 0)
        throw std::invalid_argument("optional_stopping_estimate: constant time must be >= 0");
    const std::int64_t cap = tau.kind == TauKind::constant ? std::min(tau.time, horizon) : horizon;

    std::vector<double> values(static_cast<std::size_t>(n_paths));
    parallel_for(n_paths, threads, [&](std::int64_t i) {
        RandomStream stream(path_seed(seed, static_cast<std::uint64_t>(i)));
        PathState s;
        while (s.t() < cap) {
            if (tau.kind == TauKind::hitting && std::abs(s.m()) >= tau.level) break;
            s = update_state(s, draw_step(model, s.t() + 1, stream), flavor);
        }
        values[static_cast<std::size_t>(i)] = std::exp(lambda * std::abs(s.m()) - lambda * lambda * s.u() / 2.0);
    });

    KahanSum sum, sum_sq;
    for (double x : values) {
        sum += x;
        sum_sq += x * x;
    }
    const double n = static_cast<double>(n_paths);
    MomentEstimate out;
    out.n_paths = n_paths;
    out.estimate = sum.value() / n;
    const double var = std::max(0.0, (sum_sq.value() - n * out.estimate * out.estimate) / (n - 1.0));
    out.std_error = std::sqrt(var / n);
    out.ci_lo = out.estimate - kZ99 * out.std_error;
    out.ci_hi = out.estimate + kZ99 * out.std_error;
    out.pass = out.estimate - 3.0 * out.std_error <= 2.0;
    return out;
}

// Exact E[exp(lambda |M_t| - lambda^2 t / 2)] for a Rademacher walk at a fixed
// time t, by summing over the binomial law of the number of +1 steps.
// Integer binomial coefficients are used for t <= 62, lgamma above.
inline double exact_constant_moment(std::int64_t t, double lambda) {
    if (t < 0) throw std::invalid_argument("exact_constant_moment: t must be >= 0");
    KahanSum sum;
    const double penalty = lambda * lambda * static_cast<double>(t) / 2.0;
    if (t <= 62) {
        std::uint64_t c = 1;  // C(t, j)
        for (std::int64_t j = 0; j <= t; ++j) {
            const double m = static_cast<double>(2 * j - t);
            sum += std::ldexp(static_cast<double>(c), static_cast<int>(-t)) * std::exp(lambda * std::abs(m) - penalty);
            if (j < t) c = c / static_cast<std::uint64_t>(j + 1) * static_cast<std::uint64_t>(t - j) +
                           c % static_cast<std::uint64_t>(j + 1) * static_cast<std::uint64_t>(t - j) /
                               static_cast<std::uint64_t>(j + 1);
        }
        return sum.value();
    }
    const double td = static_cast<double>(t);
    for (std::int64_t j = 0; j <= t; ++j) {
        const double jd = static_cast<double>(j);
        const double log_p = std::lgamma(td + 1.0) - std::lgamma(jd + 1.0) - std::lgamma(td - jd + 1.0) - td * std::log(2.0);
        sum += std::exp(log_p + lambda * std::abs(2.0 * jd - td) - penalty);
    }
    return sum.value();
}

}  // namespace lil
