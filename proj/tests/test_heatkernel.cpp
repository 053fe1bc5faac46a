#include <doctest.h>

#include "nlheat/heatkernel.hpp"
#include "nlheat/parallel.hpp"
#include "oracles.hpp"

#include <boost/math/distributions/poisson.hpp>

#include <cmath>

using namespace nlheat;

using oracle::laplace_log_power;
using oracle::laplace_log_v;

namespace {

double gaussian_log_v_oracle(double r, double t, int d) { return oracle::gaussian_log_v(r, t, d); }

}  // namespace

TEST_SUITE("heatkernel") {

TEST_CASE("oracle sanity: k = 1 Laplace power is the density") {
    CHECK(laplace_log_power(1, 2.0) == doctest::Approx(std::log(0.5) - 2.0).epsilon(1e-14));
}

TEST_CASE("poisson truncation") {
    for (double t : {0.5, 5.0, 80.0}) {
        long K = poisson_k_max(t, std::log(1e-12));
        boost::math::poisson_distribution<> P(t);
        CHECK(boost::math::cdf(boost::math::complement(P, double(K))) < 1e-12);
        CHECK(K >= long(t));
    }
}

TEST_CASE("gaussian closed form against the brute-force series") {
    for (double t : {0.5, 5.0, 50.0})
        for (double r : {0.0, 1.0, 10.0, 80.0}) {
            CAPTURE(t);
            CAPTURE(r);
            CHECK(gaussian_log_v(r, t, 1) == doctest::Approx(gaussian_log_v_oracle(r, t, 1)).epsilon(1e-12));
            CHECK(gaussian_log_v(r, t, 2) == doctest::Approx(gaussian_log_v_oracle(r, t, 2)).epsilon(1e-12));
        }
}

// Each accepted point carries its own relative error estimate; where it is
// small the value must be accurate, and elsewhere it must bound the error
// up to a modest factor.
TEST_CASE("laplace series route against the Bessel oracle") {
    auto fam = KernelFamily::laplace(1.0);
    auto lat = Lattice::make(1, 4096, 64.0);
    for (double t : {2.0, 10.0}) {
        auto res = v_series(fam, lat, t, 1e-12);
        double worst_tight = 0.0, worst_ratio = 0.0;
        std::size_t tight = 0;
        for (std::size_t j = 0; j < lat.n; ++j) {
            double x = lat.coord(j);
            double lv = res.log_v.values[j];
            if (x == 0.0 || std::abs(x) > 40.0 || lv == -kInf) continue;
            double err = std::abs(lv - laplace_log_v(x, t));
            if (res.rel_error[j] < 1e-9) {
                worst_tight = std::max(worst_tight, err);
                ++tight;
            }
            worst_ratio = std::max(worst_ratio, err / (res.rel_error[j] + 1e-8));
        }
        CAPTURE(t);
        CHECK(tight > 1500);
        CHECK(worst_tight < 1e-7);
        CHECK(worst_ratio < 10.0);
    }
}

TEST_CASE("gaussian spectral route against the closed form") {
    auto fam = KernelFamily::gaussian(1);
    auto lat = Lattice::make(1, 1024, 100.0);
    const double t = 8.0;
    auto res = v_spectral(fam, lat, t);
    double worst_tight = 0.0, worst_ratio = 0.0;
    std::size_t tight = 0;
    for (std::size_t j = 0; j < lat.n; ++j) {
        double lv = res.log_v.values[j];
        if (lv == -kInf) continue;
        double err = std::abs(lv - gaussian_log_v_oracle(std::abs(lat.coord(j)), t, 1));
        if (res.rel_error[j] < 1e-9) {
            worst_tight = std::max(worst_tight, err);
            ++tight;
        }
        worst_ratio = std::max(worst_ratio, err / (res.rel_error[j] + 1e-8));
    }
    CHECK(tight > 500);
    CHECK(worst_tight < 1e-7);
    CHECK(worst_ratio < 10.0);
    CHECK(res.log_atom_weight == -t);
}

TEST_CASE("mass identity and symmetry") {
    // raised cosine is C^1, so the trapezoid sum converges fast
    auto fam = KernelFamily::compact_support(1, 1.0, Profile::RaisedCosine);
    auto lat = Lattice::make(1, 512, 16.0);
    const double t = 2.0;
    auto s = v_series(fam, lat, t, 1e-12);
    CHECK(s.mass() == doctest::Approx(1.0 - std::exp(-t)).epsilon(1e-7));
    for (std::size_t j = 1; j < lat.n / 2; ++j) {
        double a = s.log_v.values[j], b = s.log_v.values[lat.n - j];
        if (a == -kInf || b == -kInf) continue;
        // mirror points may come from different frames
        CHECK(std::abs(a - b) <= 2.0 * (s.rel_error[j] + s.rel_error[lat.n - j]) + 1e-10);
    }
}

TEST_CASE("2-D gaussian spectral route") {
    auto fam = KernelFamily::gaussian(2);
    // the Poisson mixture has much heavier tails than N(0, 2t)
    auto lat = Lattice::make(2, 256, 48.0);
    const double t = 3.0;
    auto res = v_spectral(fam, lat, t);
    CHECK(res.mass() == doctest::Approx(1.0 - std::exp(-t)).epsilon(1e-8));
    double x = lat.coord(128 + 5), y = lat.coord(128 - 3);
    double lv = res.log_v_at(vec2(x, y));
    CHECK(lv == doctest::Approx(gaussian_log_v_oracle(std::hypot(x, y), t, 2)).epsilon(1e-6));
}

TEST_CASE("convolution power against the Bessel oracle") {
    auto fam = KernelFamily::laplace(1.0);
    for (long k : {2L, 5L, 40L})
        for (double x : {0.5, 8.0, 60.0}) {
            CAPTURE(k);
            CAPTURE(x);
            CHECK(log_convolution_power(fam, k, x) == doctest::Approx(laplace_log_power(k, x)).epsilon(1e-8));
        }
}

TEST_CASE("dominant term sits at the largest exact term") {
    auto fam = KernelFamily::laplace(1.0);
    const double t = 20.0, x = 60.0;
    long best = 1;
    double bv = -kInf;
    for (long k = 1; k < 400; ++k) {
        double v = k * std::log(t) - std::lgamma(k + 1.0) + laplace_log_power(k, x);
        if (v > bv) bv = v, best = k;
    }
    auto dg = dominant_term(fam, vec1(x), t);
    CHECK(std::abs(dg.k_hat - best) <= 1);
    CHECK(dg.unimodal);
    CHECK(dg.stirling_constant == 1.0);
}

TEST_CASE("errors") {
    auto fam = KernelFamily::gaussian(1);
    auto lat = Lattice::make(1, 256, 30.0);
    CHECK_THROWS_AS(v_spectral(fam, lat, -1.0), DomainError);
    CHECK_THROWS_AS(v_series(fam, lat, -1.0, 1e-12), DomainError);
    HeatKernelOptions o;
    o.k_ceiling = 10;
    CHECK_THROWS_AS(v_series(KernelFamily::laplace(1.0), Lattice::make(1, 256, 60.0), 50.0, 1e-12, o),
                    ResourceError);
    // tent symbol decays like p^-2: a coarse lattice leaves too much at Nyquist
    auto tent = KernelFamily::compact_support(1, 1.0, Profile::Tent);
    CHECK_THROWS_AS(v_spectral(tent, Lattice::make(1, 16, 64.0), 2.0), ConfigError);
    CHECK_THROWS_AS(v_spectral(KernelFamily::gaussian(2), lat, 1.0), ConfigError);
}

TEST_CASE("results do not depend on the worker count") {
    auto fam = KernelFamily::laplace(1.0);
    auto lat = Lattice::make(1, 2048, 48.0);
    set_max_workers(1);
    auto a = v_series(fam, lat, 5.0, 1e-12);
    set_max_workers(3);
    auto b = v_series(fam, lat, 5.0, 1e-12);
    set_max_workers(0);
    CHECK(a.log_v.values == b.log_v.values);
}

}
