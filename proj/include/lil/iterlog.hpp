// iterlog.hpp
//
// Iterated logarithms and exponentials: log_v = log o ... o log (v times),
// exp_v likewise, and the clamped log_v^+(x) = log_v(max(exp_v(1), x)).
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace lil {

inline double iter_log(int v, double x) {
    if (v < 0) throw std::domain_error("iter_log: v must be >= 0");
    for (int i = 0; i < v; ++i) {
        if (!(x > 0.0))
            throw std::domain_error("iter_log: logarithm of non-positive value at depth " +
                                    std::to_string(i + 1));
        x = std::log(x);
    }
    return x;
}

inline double iter_exp(int v, double x) {
    if (v < 0) throw std::domain_error("iter_exp: v must be >= 0");
    for (int i = 0; i < v; ++i) x = std::exp(x);
    return x;
}

// exp_v(1) overflows for v >= 4, so the floor is returned directly instead
// of evaluating log_v(exp_v(1)).
inline double iter_log_plus(int v, double x) {
    if (v < 0) throw std::domain_error("iter_log_plus: v must be >= 0");
    if (!(x > iter_exp(v, 1.0))) return v == 0 ? iter_exp(0, 1.0) : 1.0;
    return iter_log(v, x);
}

}  // namespace lil
