#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace sax {

// Digamma function. Recurrence up to x >= 10 followed by the asymptotic series; negative
// arguments go through the reflection formula. Returns NaN at the poles 0, -1, -2, ...
template <typename T>
T digamma(T x) {
    const T pi = std::numbers::pi_v<T>;
    if (x <= T(0)) {
        if (x == std::floor(x)) return std::numeric_limits<T>::quiet_NaN();
        // Reduce the cotangent argument to (-1/2, 1/2] before evaluating.
        const T r = x - std::round(x);
        return digamma(T(1) - x) - pi / std::tan(pi * r);
    }
    T acc = T(0);
    while (x < T(10)) {
        acc -= T(1) / x;
        x += T(1);
    }
    const T inv2 = T(1) / (x * x);
    // Bernoulli terms B_2k / (2k x^2k), k = 1..7
    const T series =
        inv2 * (T(1) / 12 -
                inv2 * (T(1) / 120 -
                        inv2 * (T(1) / 252 -
                                inv2 * (T(1) / 240 -
                                        inv2 * (T(1) / 132 -
                                                inv2 * (T(691) / 32760 - inv2 * (T(1) / 12)))))));
    return acc + std::log(x) - T(0.5) / x - series;
}

// digamma(1 + xi) - ln|xi| - 1/(2 xi) - digamma(1) - digamma(2). Poles at xi = 0, -1, -2, ...
// For xi < 0 its zeros give the l = 0 Coulomb levels of the L = infinity extension.
template <typename T>
T f_tilde(T xi) {
    constexpr T euler_gamma = std::numbers::egamma_v<T>;
    if (xi == T(0)) return std::numeric_limits<T>::quiet_NaN();
    return digamma(T(1) + xi) - std::log(std::abs(xi)) - T(0.5) / xi + T(2) * euler_gamma - T(1);
}

}  // namespace sax
