#include <doctest.h>

#include "nlheat/ldp.hpp"

#include <cmath>
#include <random>

using namespace nlheat;

namespace {

// Laplace(b=1): L(g) = -ln(1 - g^2), so L'(g) = s gives g = (sqrt(1 + s^2) - 1)/s.
double laplace_rate(double s) {
    s = std::abs(s);
    if (s == 0.0) return 0.0;
    double g = (std::sqrt(1.0 + s * s) - 1.0) / s;
    return g * s + std::log(1.0 - g * g);
}

// Phi(r) = min_{z > 0} [ z ln z - z + 1 + z I(r/z) ]: the exponent of the
// Poisson-weighted k = z t term. Golden-section search on ln z.
template <class Rate>
double phi_by_minimization(double r, Rate I) {
    auto f = [&](double lz) {
        double z = std::exp(lz);
        return z * lz - z + 1.0 + z * I(r / z);
    };
    double a = -30.0, b = 30.0;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 300; ++i) {
        if (fc < fd) {
            b = d, d = c, fd = fc, c = b - g * (b - a), fc = f(c);
        } else {
            a = c, c = d, fc = fd, d = a + g * (b - a), fd = f(d);
        }
    }
    return f(0.5 * (a + b));
}

}  // namespace

TEST_SUITE("ldp") {

TEST_CASE("gaussian rate function") {
    RateFunction I1(KernelFamily::gaussian(1));
    for (double r : {0.0, 0.3, 2.0, 17.0}) {
        auto res = I1.evaluate(vec1(r));
        CHECK(res.value == doctest::Approx(r * r / 4.0).epsilon(1e-12));
        CHECK(res.gradient[0] == doctest::Approx(r / 2.0).epsilon(1e-12));
    }
    RateFunction I2(KernelFamily::gaussian(2));
    auto res = I2.evaluate(vec2(1.0, -3.0));
    CHECK(res.value == doctest::Approx(10.0 / 4.0).epsilon(1e-12));
    CHECK(res.gradient[1] == doctest::Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("laplace rate function") {
    RateFunction I(KernelFamily::laplace(1.0));
    for (double s : {0.01, 0.5, 3.0, 40.0, 1000.0}) {
        CAPTURE(s);
        CHECK(I.rate(vec1(s)) == doctest::Approx(laplace_rate(s)).epsilon(1e-11));
        CHECK(I.rate(vec1(-s)) == doctest::Approx(laplace_rate(s)).epsilon(1e-11));
    }
    // I(s) ~ s for large s when b = 1
    CHECK(I.rate(vec1(1e4)) / 1e4 == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("compact support: infinite rate outside the hull") {
    RateFunction I(KernelFamily::compact_support(1, 1.0, Profile::Tent));
    auto out = I.evaluate(vec1(1.5));
    CHECK(out.infinite);
    CHECK(out.value == kInf);
    auto edge = I.evaluate(vec1(1.0 - 1e-8));
    CHECK(edge.boundary);
    auto in = I.evaluate(vec1(0.5));
    CHECK(std::isfinite(in.value));
    CHECK(in.value > 0.0);
}

TEST_CASE("envelope identity at random tilts") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (const auto& fam : {KernelFamily::laplace(1.0), KernelFamily::stretched_exp(1, 1.0, 1.5)}) {
        RateFunction I(fam);
        const auto& L = I.cumulant();
        for (int i = 0; i < 20; ++i) {
            double g = fam.tail_class() == TailClass::StretchedExp && fam.p() == 1.0 ? u(rng) : 3.0 * u(rng);
            Vec gam = vec1(g);
            Vec s = L.gradient(gam);
            double want = g * s[0] - L.value(gam);
            CHECK(I.rate(s) == doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("closed gaussian Phi") {
    auto g = phi_gaussian(1.0);
    CHECK(g.phi == doctest::Approx(0.2270855212200287).epsilon(1e-14));
    // xi^2 ln xi = r^2/4 and Phi = 1 + 2 xi ln xi - xi
    CHECK(g.xi_hat * g.xi_hat * std::log(g.xi_hat) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(phi_gaussian(0.0).phi == 0.0);
    CHECK_THROWS_AS(phi_gaussian(-1.0), DomainError);
    CHECK_THROWS_AS(phi_gaussian(std::nan("")), DomainError);
}

TEST_CASE("generic Phi: gaussian matches the closed route") {
    PhiExponent P(KernelFamily::gaussian(1));
    for (double r : {0.1, 1.0, 5.0, 30.0}) {
        CAPTURE(r);
        CHECK(P.phi(vec1(r)) == doctest::Approx(phi_gaussian(r).phi).epsilon(1e-9));
        CHECK(P.xi_solve(vec1(r)) == doctest::Approx(1.0 / phi_gaussian(r).xi_hat).epsilon(1e-8));
    }
}

TEST_CASE("generic Phi: laplace against direct minimization") {
    PhiExponent P(KernelFamily::laplace(1.0));
    for (double r : {0.2, 1.0, 4.0, 50.0}) {
        CAPTURE(r);
        double ref = phi_by_minimization(r, laplace_rate);
        CHECK(P.phi(vec1(r)) == doctest::Approx(ref).epsilon(1e-8));
    }
    // Phi(r)/r -> 1 slowly; below one at moderate r
    double q = P.phi(vec1(200.0)) / 200.0;
    CHECK(q > 0.85);
    CHECK(q < 1.0);
}

TEST_CASE("chernoff constants") {
    auto lb = ChernoffBound::make(KernelFamily::laplace(1.0));
    // E e^{mX} = 1/(1 - m^2) and -ln(1 - m^2)/m^2 increases on (0, 1/2]
    double h = -std::log(0.75) / 0.25;
    CHECK(lb.h == doctest::Approx(h).epsilon(1e-9));
    CHECK(lb.kappa == doctest::Approx(0.25));
    CHECK(lb.alpha == doctest::Approx(1.0 / (2.0 * h)).epsilon(1e-9));

    auto gb = ChernoffBound::make(KernelFamily::gaussian(1));
    // L(m) = m^2, q = 2: c4 = 1, kappa = 1/4, alpha = 1/4
    CHECK(gb.c4 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(gb.kappa == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(gb.alpha == doctest::Approx(0.25).epsilon(1e-9));
    // exact Gaussian tail P{S_k > x} = erfc(x / (2 sqrt k)) / 2
    for (long k : {1L, 3L, 10L}) {
        double x = 4.0 * k;
        CHECK(0.5 * std::erfc(x / (2.0 * std::sqrt(double(k)))) <= gb.tail(k, x));
    }
    CHECK_THROWS_AS(gb.tail(100, 1.0), DomainError);
    CHECK_THROWS_AS(ChernoffBound::make(KernelFamily::compact_support(1, 1.0, Profile::Tent)), ConfigError);
}

}
