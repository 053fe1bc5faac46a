#pragma once

// Closed-form references shared by the unit tests. Nothing here calls into
// the library.

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double pi = 3.14159265358979323846;

inline double log_add(double a, double b) {
    if (a == -inf) return b;
    if (b == -inf) return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// ln of the k-fold Laplace(b=1) convolution at x > 0:
// a^{*k}(x) = x^{k-1/2} K_{k-1/2}(x) / (sqrt(pi) Gamma(k) 2^{k-1/2}),
// K_{n+1/2}(z) = sqrt(pi/2z) e^{-z} sum_j (n+j)!/(j!(n-j)!) (2z)^{-j}.
inline double laplace_log_power(long k, double x) {
    long n = k - 1;
    double acc = -inf;
    for (long j = 0; j <= n; ++j)
        acc = log_add(acc, std::lgamma(n + j + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) -
                               j * std::log(2.0 * x));
    double lK = 0.5 * std::log(pi / (2.0 * x)) - x + acc;
    return (k - 0.5) * std::log(x) + lK - 0.5 * std::log(pi) - std::lgamma(double(k)) - (k - 0.5) * std::log(2.0);
}

inline double laplace_log_v(double x, double t) {
    x = std::abs(x);
    double acc = -inf;
    for (long k = 1; k < 2000; ++k) {
        double term = -t + k * std::log(t) - std::lgamma(k + 1.0) + laplace_log_power(k, x);
        acc = log_add(acc, term);
        if (k > t + 10 && term < acc - 40) break;
    }
    return acc;
}

// Gaussian family: a^{*k} is N(0, 2k) per coordinate.
inline double gaussian_log_v(double r, double t, int d) {
    double acc = -inf;
    for (long k = 1; k < 20000; ++k) {
        double term = -t + k * std::log(t) - std::lgamma(k + 1.0) - 0.5 * d * std::log(4.0 * pi * k) -
                      r * r / (4.0 * k);
        acc = log_add(acc, term);
        if (k > t + 10 && term < acc - 40) break;
    }
    return acc;
}

}  // namespace oracle
