// processes.hpp
//
// Martingale increment models, running path statistics, the exponential
// super/submartingale constructions with their algebraic certificates, and a
// streaming confidence-sequence tracker built on the boundaries module.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lil/boundaries.hpp"
#include "lil/numeric.hpp"
#include "lil/random.hpp"

namespace lil {

// ---------------------------------------------------------------------------
// Increment models

enum class ModelKind { rademacher, bounded_schedule, bounded_e2, moment_family };

inline std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::rademacher: return "rademacher";
        case ModelKind::bounded_schedule: return "bounded_schedule";
        case ModelKind::bounded_e2: return "bounded_e2";
        case ModelKind::moment_family: return "moment_family";
    }
    return "?";
}

inline ModelKind model_kind_from_string(std::string_view s) {
    for (auto k : {ModelKind::rademacher, ModelKind::bounded_schedule, ModelKind::bounded_e2,
                   ModelKind::moment_family})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown increment model: " + std::string(s));
}

// An immutable description of a mean-zero increment distribution.
//   rademacher        : +-1 with probability 1/2
//   bounded_schedule  : +-c_t with probability 1/2 (the last c repeats), E[xi^2] = c_t^2
//   bounded_e2        : Uniform[-a, a] with a <= e^2, E[xi^2] = a^2/3
//   moment_family     : Laplace(0, b) with b <= e^2/2, E[xi^2] = 2b^2; satisfies
//                       E[xi^k] <= (1/2) k! (e/sqrt2)^{2(k-2)} E[xi^2] for k >= 3
struct IncrementModel {
    ModelKind kind = ModelKind::rademacher;
    std::vector<double> schedule;  // bounded_schedule only
    double scale = 1.0;            // a for bounded_e2, b for moment_family
    std::uint64_t rng_seed = 0;

    static IncrementModel rademacher(std::uint64_t seed = 0) { return {ModelKind::rademacher, {}, 1.0, seed}; }
    static IncrementModel bounded_schedule(std::vector<double> c, std::uint64_t seed = 0) {
        IncrementModel m{ModelKind::bounded_schedule, std::move(c), 1.0, seed};
        m.validate();
        return m;
    }
    static IncrementModel bounded_e2(double a = kE2, std::uint64_t seed = 0) {
        IncrementModel m{ModelKind::bounded_e2, {}, a, seed};
        m.validate();
        return m;
    }
    static IncrementModel moment_family(double b = 1.0, std::uint64_t seed = 0) {
        IncrementModel m{ModelKind::moment_family, {}, b, seed};
        m.validate();
        return m;
    }

    void validate() const {
        switch (kind) {
            case ModelKind::rademacher: break;
            case ModelKind::bounded_schedule:
                if (schedule.empty()) throw std::invalid_argument("bounded_schedule: schedule must be non-empty");
                for (double c : schedule)
                    if (!(c >= 0.0) || !std::isfinite(c))
                        throw std::invalid_argument("bounded_schedule: every c_t must be finite and >= 0");
                break;
            case ModelKind::bounded_e2:
                if (!(scale >= 0.0 && scale <= kE2))
                    throw std::invalid_argument("bounded_e2: half-width must lie in [0, e^2]");
                break;
            case ModelKind::moment_family:
                if (!(scale > 0.0 && scale <= kE2 / 2.0))
                    throw std::invalid_argument("moment_family: Laplace scale must lie in (0, e^2/2]");
                break;
        }
    }

    /// c_t for step t >= 1 (bounded_schedule).
    double schedule_at(std::int64_t t) const {
        const auto i = static_cast<std::size_t>(std::max<std::int64_t>(t - 1, 0));
        return schedule[std::min(i, schedule.size() - 1)];
    }
};

/// One increment with its declared conditional variance and almost-sure range.
struct Step {
    double xi = 0.0;
    double cond_var = 0.0;
    double range = 0.0;  // bound on |xi|; +inf when unbounded
};

/// Draws step number t (t >= 1) of the model from the path's private stream.
inline Step draw_step(const IncrementModel& model, std::int64_t t, RandomStream& stream) {
    switch (model.kind) {
        case ModelKind::rademacher: return {static_cast<double>(stream.sign()), 1.0, 1.0};
        case ModelKind::bounded_schedule: {
            const double c = model.schedule_at(t);
            return {c * stream.sign(), c * c, c};
        }
        case ModelKind::bounded_e2: {
            const double a = model.scale;
            return {a * (2.0 * stream.uniform01() - 1.0), a * a / 3.0, a};
        }
        case ModelKind::moment_family: {
            const double b = model.scale;
            const double e = -b * std::log(stream.uniform_open());
            return {stream.sign() * e, 2.0 * b * b, kInf};
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Path state

enum class ProxyFlavor { time, sum_c_sq, bernstein, hoeffding_q, relaxed };

inline std::string_view to_string(ProxyFlavor f) {
    switch (f) {
        case ProxyFlavor::time: return "time";
        case ProxyFlavor::sum_c_sq: return "sum_c_sq";
        case ProxyFlavor::bernstein: return "bernstein";
        case ProxyFlavor::hoeffding_q: return "hoeffding_q";
        case ProxyFlavor::relaxed: return "relaxed";
    }
    return "?";
}

inline ProxyFlavor flavor_from_string(std::string_view s) {
    for (auto f : {ProxyFlavor::time, ProxyFlavor::sum_c_sq, ProxyFlavor::bernstein, ProxyFlavor::hoeffding_q,
                   ProxyFlavor::relaxed})
        if (to_string(f) == s) return f;
    throw std::invalid_argument("unknown proxy flavor: " + std::string(s));
}

// Running statistics of one path. m, v, q and sum c_t^2 are carried in
// compensated sums.
class PathState {
public:
    std::int64_t t() const { return t_; }
    double m() const { return m_.value(); }
    double v() const { return v_.value(); }
    double q() const { return q_.value(); }
    double sum_c_sq() const { return c2_.value(); }
    double u() const { return u_; }

    friend PathState update_state(PathState s, double xi, double cond_var, ProxyFlavor flavor,
                                  std::optional<double> range);

private:
    std::int64_t t_ = 0;
    KahanSum m_, v_, q_, c2_;
    double u_ = 0.0;
};

inline double proxy_value(const PathState& s, ProxyFlavor flavor) {
    switch (flavor) {
        case ProxyFlavor::time: return static_cast<double>(s.t());
        case ProxyFlavor::sum_c_sq: return s.sum_c_sq();
        case ProxyFlavor::bernstein: return bernstein_proxy(s.v());
        case ProxyFlavor::hoeffding_q: return (2.0 * s.v() + s.q()) / 3.0;
        case ProxyFlavor::relaxed: return 2.0 * s.v();
    }
    return 0.0;
}

// Advances the state by one increment. `range` is the a.s. bound c_t on
// |xi|; it is required for the sum_c_sq flavor and ignored otherwise.
inline PathState update_state(PathState s, double xi, double cond_var, ProxyFlavor flavor,
                              std::optional<double> range = std::nullopt) {
    if (!std::isfinite(xi)) throw std::invalid_argument("update_state: increment must be finite");
    if (!(cond_var >= 0.0)) throw std::invalid_argument("update_state: conditional second moment must be >= 0");
    if (flavor == ProxyFlavor::sum_c_sq && !(range && std::isfinite(*range) && *range >= 0.0))
        throw std::invalid_argument("update_state: flavor sum_c_sq needs a finite range c_t");
    ++s.t_;
    s.m_ += xi;
    s.v_ += cond_var;
    s.q_ += xi * xi;
    if (range && std::isfinite(*range)) s.c2_ += *range * *range;
    s.u_ = proxy_value(s, flavor);
    return s;
}

inline PathState update_state(PathState s, const Step& step, ProxyFlavor flavor) {
    return update_state(std::move(s), step.xi, step.cond_var, flavor, step.range);
}

/// Draws the next increment for a path currently in `state`.
inline double next_increment(const IncrementModel& model, const PathState& state, RandomStream& stream) {
    return draw_step(model, state.t() + 1, stream).xi;
}

// Optional path dump: CSV with columns t, xi, m, v, q, u.
class PathDumpWriter {
public:
    explicit PathDumpWriter(std::ostream& os) : os_(os) {
        os_ << "t,xi,m,v,q,u\n" << std::setprecision(17);
    }
    void row(const PathState& s, double xi) {
        os_ << s.t() << ',' << xi << ',' << s.m() << ',' << s.v() << ',' << s.q() << ',' << s.u() << '\n';
    }

private:
    std::ostream& os_;
};

// ---------------------------------------------------------------------------
// Exponential constructions

enum class Construction { hoeffding_half, bernstein, quad, relaxed, sub_k };

inline std::string_view to_string(Construction c) {
    switch (c) {
        case Construction::hoeffding_half: return "hoeffding_half";
        case Construction::bernstein: return "bernstein";
        case Construction::quad: return "quad";
        case Construction::relaxed: return "relaxed";
        case Construction::sub_k: return "sub_k";
    }
    return "?";
}

inline bool is_submartingale(Construction c) { return c == Construction::sub_k; }

/// Throws std::domain_error when lambda lies outside the construction's range.
inline void check_lambda(Construction c, double lambda) {
    const double lim = 1.0 / kE2;
    const double a = std::abs(lambda);
    if (!std::isfinite(lambda)) throw std::domain_error("lambda must be finite");
    switch (c) {
        case Construction::hoeffding_half:
        case Construction::quad: return;
        case Construction::bernstein:
        case Construction::sub_k:
            if (a > lim) throw std::domain_error(std::string(to_string(c)) + ": requires |lambda| <= e^-2");
            return;
        case Construction::relaxed:
            if (!(a < lim)) throw std::domain_error("relaxed: requires |lambda| < e^-2");
            return;
    }
}

// Exponent lambda*M - penalty for the construction, given the running
// quantities (m, u, v, q).
inline double construction_exponent(Construction c, double lambda, double m, double u, double v, double q,
                                    double k) {
    const double l2 = lambda * lambda;
    switch (c) {
        case Construction::hoeffding_half: return lambda * m - l2 * u / 2.0;
        case Construction::bernstein: return lambda * m - l2 * (kE - 2.0) * v;
        case Construction::quad: return lambda * m - l2 / 6.0 * (2.0 * v + q);
        case Construction::relaxed: return lambda * m - l2 * v;
        case Construction::sub_k: return lambda * m - k * l2 * u;
    }
    return 0.0;
}

inline double log_exp_process_value(const PathState& s, double lambda, Construction c, double k = 1.0 / 3.0) {
    check_lambda(c, lambda);
    if (lambda == 0.0) return 0.0;
    return construction_exponent(c, lambda, s.m(), s.u(), s.v(), s.q(), k);
}

inline double exp_process_value(const PathState& s, double lambda, Construction c, double k = 1.0 / 3.0) {
    return std::exp(log_exp_process_value(s, lambda, c, k));
}

// One-step ratio X_{t+1}/X_t produced by a single increment, with the U
// increment of hoeffding_half taken as c_t^2 and that of sub_k as E[xi^2].
inline double one_step_ratio(Construction c, double lambda, const Step& step, double k = 1.0 / 3.0) {
    const double du = c == Construction::hoeffding_half ? step.range * step.range : step.cond_var;
    if (c == Construction::hoeffding_half && !std::isfinite(du))
        throw std::domain_error("hoeffding_half: requires bounded increments");
    return std::exp(construction_exponent(c, lambda, step.xi, du, step.cond_var, step.xi * step.xi, k));
}

/// Exact E[X_{t+1}/X_t] for a Rademacher increment: cosh(lambda) times the penalty.
inline double exact_rademacher_one_step_ratio(Construction c, double lambda, double k = 1.0 / 3.0) {
    check_lambda(c, lambda);
    return std::cosh(lambda) * std::exp(construction_exponent(c, lambda, 0.0, 1.0, 1.0, 1.0, k));
}

inline constexpr double kZ99 = 2.5758293035489004;

struct MonteCarloVerdict {
    bool pass = false;
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;  // 99% normal interval
    double ci_hi = 0.0;
    std::int64_t n_samples = 0;
};

// Monte Carlo estimate of E[X_{t+1}/X_t] over fresh increments of `model`
// (drawn as step 1). Supermartingale constructions pass when
// estimate <= 1 + 3 se; sub_k passes when estimate >= 1 - 3 se.
inline MonteCarloVerdict check_one_step_supermart(const IncrementModel& model, double lambda, Construction c,
                                                  std::int64_t n_samples, std::uint64_t seed,
                                                  double k = 1.0 / 3.0) {
    if (n_samples < 1000) throw std::invalid_argument("check_one_step_supermart: n_samples must be >= 1000");
    model.validate();
    check_lambda(c, lambda);
    RandomStream stream(path_seed(seed, 0));
    KahanSum sum, sum_sq;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const double r = one_step_ratio(c, lambda, draw_step(model, 1, stream), k);
        sum += r;
        sum_sq += r * r;
    }
    const double n = static_cast<double>(n_samples);
    const double mean = sum.value() / n;
    const double var = std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1.0));
    MonteCarloVerdict out;
    out.n_samples = n_samples;
    out.estimate = mean;
    out.std_error = std::sqrt(var / n);
    out.ci_lo = mean - kZ99 * out.std_error;
    out.ci_hi = mean + kZ99 * out.std_error;
    out.pass = is_submartingale(c) ? mean >= 1.0 - 3.0 * out.std_error : mean <= 1.0 + 3.0 * out.std_error;
    return out;
}

// ---------------------------------------------------------------------------
// Algebraic inequality certificates

enum class Inequality {
    cosh_vs_expk,     // e^{k x^2} <= cosh x on [-e^-2, e^-2], k = 1/3
    exp_linear_quad,  // e^x <= 1 + x + (e-2) x^2 for x <= 1
    exp_upper_quad,   // e^{x - x^2/6} <= 1 + x + x^2/3 for all x
};

inline std::string_view to_string(Inequality w) {
    switch (w) {
        case Inequality::cosh_vs_expk: return "cosh_vs_expk";
        case Inequality::exp_linear_quad: return "exp_linear_quad";
        case Inequality::exp_upper_quad: return "exp_upper_quad";
    }
    return "?";
}

/// Default sampling interval for each inequality.
inline std::pair<double, double> inequality_domain(Inequality w) {
    switch (w) {
        case Inequality::cosh_vs_expk: return {-1.0 / kE2, 1.0 / kE2};
        case Inequality::exp_linear_quad: return {-50.0, 1.0};
        case Inequality::exp_upper_quad: return {-50.0, 50.0};
    }
    return {0.0, 0.0};
}

/// (smaller side, larger side) of the inequality at x.
inline std::pair<double, double> inequality_sides(Inequality w, double x) {
    switch (w) {
        case Inequality::cosh_vs_expk: return {std::exp(x * x / 3.0), std::cosh(x)};
        case Inequality::exp_linear_quad: return {std::exp(x), 1.0 + x + (kE - 2.0) * x * x};
        case Inequality::exp_upper_quad: return {std::exp(x - x * x / 6.0), 1.0 + x + x * x / 3.0};
    }
    return {0.0, 0.0};
}

struct InequalityVerdict {
    Inequality which = Inequality::cosh_vs_expk;
    std::int64_t points = 0;
    std::int64_t violations = 0;
    double min_rel_slack = kInf;  // min over the grid of (larger - smaller) / |larger|
    double worst_x = 0.0;
    bool pass() const { return violations == 0; }
};

// Evaluates the inequality on an evenly spaced grid of n points over
// [lo, hi] (both ends included, plus x = 0 when it lies inside). A point
// violates only if smaller > larger by more than rel_slack * |larger|.
inline InequalityVerdict inequality_grid_check(Inequality w, std::int64_t n = 100000,
                                               std::optional<std::pair<double, double>> range = std::nullopt,
                                               double rel_slack = 1e-15) {
    if (n < 2) throw std::invalid_argument("inequality_grid_check: need at least 2 points");
    const auto [lo, hi] = range.value_or(inequality_domain(w));
    const auto dom = inequality_domain(w);
    if (w != Inequality::exp_upper_quad && (lo < dom.first - 1e-15 || hi > dom.second + 1e-15))
        throw std::domain_error(std::string(to_string(w)) + ": grid outside the inequality's domain");
    if (!(hi > lo)) throw std::invalid_argument("inequality_grid_check: requires lo < hi");

    InequalityVerdict out;
    out.which = w;
    auto visit = [&](double x) {
        const auto [small, large] = inequality_sides(w, x);
        const double slack = (large - small) / std::abs(large);
        ++out.points;
        if (slack < out.min_rel_slack) {
            out.min_rel_slack = slack;
            out.worst_x = x;
        }
        if (small - large > rel_slack * std::abs(large)) ++out.violations;
    };
    for (std::int64_t i = 0; i < n; ++i) visit(i == n - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    if (lo < 0.0 && hi > 0.0) visit(0.0);
    return out;
}

struct MomentConditionRow {
    int k = 0;
    double moment = 0.0;  // E[xi^k] for a Rademacher increment
    double bound = 0.0;   // (1/2) k! (e/sqrt2)^{2(k-2)} E[xi^2]
    bool holds = false;
};

/// Moment condition of the relaxed construction for Rademacher increments, k = 3..k_max.
inline std::vector<MomentConditionRow> rademacher_moment_condition(int k_max = 20) {
    std::vector<MomentConditionRow> rows;
    for (int k = 3; k <= k_max; ++k) {
        MomentConditionRow r;
        r.k = k;
        r.moment = k % 2 == 0 ? 1.0 : 0.0;
        r.bound = 0.5 * std::tgamma(k + 1.0) * std::pow(kE2 / 2.0, k - 2);
        r.holds = r.moment <= r.bound;
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Streaming confidence sequence

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double radius() const { return 0.5 * (hi - lo); }
};

// Anytime-valid interval for a running martingale. Observations must obey
// the declared bound |xi| <= range and carry the declared conditional second
// moment; the radius is the stitched boundary at the current proxy value.
class ConfidenceState {
public:
    ConfidenceState(BoundarySpec spec, ProxyFlavor flavor, double range, double cond_var)
        : spec_(spec), flavor_(flavor), range_(range), cond_var_(cond_var) {
        spec_.validate();
        if (!(range_ > 0.0)) throw std::invalid_argument("ConfidenceState: declared range must be > 0");
        if (!(cond_var_ >= 0.0 && cond_var_ <= range_ * range_))
            throw std::invalid_argument("ConfidenceState: conditional second moment must lie in [0, range^2]");
    }

    static ConfidenceState rademacher(BoundarySpec spec, ProxyFlavor flavor = ProxyFlavor::time) {
        return ConfidenceState(spec, flavor, 1.0, 1.0);
    }

    Interval interval() const {
        const double r = stitched_boundary(spec_, {state_.u(), state_.t()});
        return {state_.m() - r, state_.m() + r};
    }

    Interval update(double observation) {
        if (!std::isfinite(observation) || std::abs(observation) > range_)
            throw std::invalid_argument("ConfidenceState: observation " + std::to_string(observation) +
                                        " outside the declared range [-" + std::to_string(range_) + ", " +
                                        std::to_string(range_) + "]");
        state_ = update_state(state_, observation, cond_var_, flavor_, range_);
        return interval();
    }

    const PathState& state() const { return state_; }
    const BoundarySpec& spec() const { return spec_; }

private:
    BoundarySpec spec_;
    ProxyFlavor flavor_;
    double range_;
    double cond_var_;
    PathState state_;
};

}  // namespace lil
