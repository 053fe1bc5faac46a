#include <doctest.h>

#include "nlheat/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

using namespace nlheat;

namespace {

// composite Simpson on [a, b], n even
double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    double h = (b - a) / n, s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// adaptive Gauss-Kronrod on [0, edge], edge = support radius or inf
double gk(const std::function<double(double)>& f, double edge) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, edge, 15, 1e-14);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("1-D families integrate to one") {
    std::vector<KernelFamily> fams = {
        KernelFamily::gaussian(1),
        KernelFamily::laplace(1.0),
        KernelFamily::laplace(2.5),
        KernelFamily::stretched_exp(1, 1.0, 1.5),
        KernelFamily::stretched_exp(1, 0.7, 3.0),
        KernelFamily::compact_support(1, 2.0, Profile::Tent),
        KernelFamily::compact_support(1, 1.0, Profile::Epanechnikov),
        KernelFamily::compact_support(1, 1.5, Profile::RaisedCosine),
    };
    for (const auto& k : fams) {
        CAPTURE(k.name());
        double m = 2.0 * gk([&](double x) { return k.radial(x); }, k.mu());
        CHECK(m == doctest::Approx(1.0).epsilon(1e-10));
        double var = 2.0 * gk([&](double x) { return x * x * k.radial(x); }, k.mu());
        CHECK(k.sigma1() == doctest::Approx(var).epsilon(1e-8));
    }
}

TEST_CASE("2-D families integrate to one radially") {
    std::vector<KernelFamily> fams = {
        KernelFamily::gaussian(2),
        KernelFamily::stretched_exp(2, 1.0, 1.5),
        KernelFamily::compact_support(2, 1.0, Profile::Epanechnikov),
    };
    for (const auto& k : fams) {
        CAPTURE(k.name());
        double m = gk([&](double s) { return 2.0 * kPi * s * k.radial(s); }, k.mu());
        CHECK(m == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("closed-form symbols") {
    auto g = KernelFamily::gaussian(1);
    auto l = KernelFamily::laplace(1.0);
    auto l2 = KernelFamily::laplace(2.0);
    auto tent = KernelFamily::compact_support(1, 1.0, Profile::Tent);
    for (double p : {0.0, 0.3, 1.0, 2.7, 9.0}) {
        CHECK(g.fourier(p) == doctest::Approx(std::exp(-p * p)).epsilon(1e-13));
        CHECK(l.fourier(p) == doctest::Approx(1.0 / (1.0 + p * p)).epsilon(1e-13));
        CHECK(l2.fourier(p) == doctest::Approx(4.0 / (4.0 + p * p)).epsilon(1e-13));
        double sinc = p == 0.0 ? 1.0 : std::sin(p / 2) / (p / 2);
        CHECK(tent.fourier(p) == doctest::Approx(sinc * sinc).epsilon(1e-10));
    }
    auto g2 = KernelFamily::gaussian(2);
    CHECK(g2.fourier(vec2(0.6, -1.1)) == doctest::Approx(std::exp(-(0.36 + 1.21))).epsilon(1e-13));
}

TEST_CASE("symbols agree with direct cosine quadrature") {
    std::vector<KernelFamily> fams = {
        KernelFamily::stretched_exp(1, 1.0, 1.5),
        KernelFamily::compact_support(1, 1.0, Profile::Epanechnikov),
        KernelFamily::compact_support(1, 2.0, Profile::RaisedCosine),
    };
    for (const auto& k : fams) {
        for (double p : {0.0, 0.5, 2.0, 6.0}) {
            CAPTURE(k.name());
            CAPTURE(p);
            double ref = 2.0 * simpson([&](double x) { return std::cos(p * x) * k.radial(x); }, 0.0, 40.0, 80000);
            CHECK(std::abs(k.fourier(p) - ref) < 1e-9);
        }
    }
}

TEST_CASE("tilted symbol matches quadrature of the tilted density") {
    auto k = KernelFamily::laplace(1.0);
    const double gam = 0.4;
    const double Lam = 1.0 / (1.0 - gam * gam);
    for (double p : {0.0, 0.7, 3.0}) {
        auto re = [&](double x) { return std::cos(p * x) * std::exp(gam * x) * k.radial(std::abs(x)) / Lam; };
        auto im = [&](double x) { return std::sin(p * x) * std::exp(gam * x) * k.radial(std::abs(x)) / Lam; };
        double r = simpson(re, -80, 0) + simpson(re, 0, 80);
        double i = simpson(im, -80, 0) + simpson(im, 0, 80);
        auto s = k.tilted_symbol(vec1(p), vec1(gam));
        CHECK(std::abs(s.real() - r) < 1e-9);
        CHECK(std::abs(s.imag() - i) < 1e-9);
    }
}

TEST_CASE("ray cumulant: closed forms and finite differences") {
    auto l = KernelFamily::laplace(1.0);
    for (double g : {0.1, 0.5, 0.9}) {
        auto rc = l.ray_cumulant(g);
        CHECK(rc.value == doctest::Approx(-std::log(1 - g * g)).epsilon(1e-12));
        CHECK(rc.d1 == doctest::Approx(2 * g / (1 - g * g)).epsilon(1e-12));
    }
    CHECK(l.gamma_bound() == doctest::Approx(1.0));
    auto gs = KernelFamily::gaussian(1);
    CHECK(gs.ray_cumulant(1.3).value == doctest::Approx(1.69).epsilon(1e-13));
    CHECK(gs.gamma_bound() == kInf);

    auto se = KernelFamily::stretched_exp(1, 1.0, 1.5);
    for (double g : {0.2, 1.0, 2.5}) {
        const double h = 1e-4;
        auto c = se.ray_cumulant(g), up = se.ray_cumulant(g + h), dn = se.ray_cumulant(g - h);
        CHECK(c.d1 == doctest::Approx((up.value - dn.value) / (2 * h)).epsilon(1e-6));
        CHECK(c.d2 == doctest::Approx((up.d1 - dn.d1) / (2 * h)).epsilon(1e-5));
        // against direct quadrature of E e^{gX}
        double mgf = 2.0 * simpson([&](double x) { return std::cosh(g * x) * se.radial(x); }, 0.0, 80.0, 100000);
        CHECK(c.value == doctest::Approx(std::log(mgf)).epsilon(1e-9));
    }
}

TEST_CASE("tilted mean") {
    auto l = KernelFamily::laplace(1.0);
    auto m = l.mean_tilted(vec1(0.5));
    CHECK(m[0] == doctest::Approx(2 * 0.5 / 0.75).epsilon(1e-12));
    auto tk = l.tilt(vec1(0.5));
    CHECK(tk.log_mgf() == doctest::Approx(-std::log(0.75)));
    double mass = simpson([&](double x) { return tk.density(vec1(x)); }, -80, 0) +
                  simpson([&](double x) { return tk.density(vec1(x)); }, 0, 80);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("scaled Bessel functions") {
    for (int nu : {0, 1, 2})
        for (double z : {0.0, 0.3, 5.0, 40.0, 300.0}) {
            double ref = boost::math::cyl_bessel_i(nu, z) * std::exp(-z);
            CHECK(bessel_i_scaled(nu, z) == doctest::Approx(ref).epsilon(1e-12));
        }
}

TEST_CASE("descriptor round trip and validation") {
    auto k = KernelFamily::stretched_exp(2, 0.8, 1.5);
    auto k2 = KernelFamily::from_json(k.to_json());
    CHECK(k2.dimension() == 2);
    CHECK(k2.b() == 0.8);
    CHECK(k2.p() == 1.5);
    CHECK(k2.radial(0.9) == k.radial(0.9));

    CHECK_THROWS_AS(KernelFamily::stretched_exp(1, -1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(KernelFamily::stretched_exp(1, 1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(KernelFamily::compact_support(1, 0.0, Profile::Tent), ConfigError);
    CHECK_THROWS_AS(KernelFamily::from_json(nlohmann::json{{"tail_class", "nope"}}), ConfigError);
    CHECK_THROWS_AS(profile_from_string("square"), ConfigError);
}

TEST_CASE("condition flags") {
    CHECK(KernelFamily::laplace().conditions().A1);
    CHECK_FALSE(KernelFamily::gaussian().conditions().A1);
    CHECK(KernelFamily::gaussian().conditions().Ap);
    CHECK(KernelFamily::stretched_exp(1, 1, 1.5).conditions().Ap);
}

TEST_CASE("tabulated kernel from csv") {
    std::string path = "nlheat_test_tab.csv";
    {
        std::ofstream o(path);
        o << "x,a\n";
        // unnormalized tent on [-1, 1]
        for (int i = -100; i <= 100; ++i) {
            double x = i / 100.0;
            o << x << "," << 3.0 * (1.0 - std::abs(x)) << "\n";
        }
    }
    auto k = KernelFamily::tabulated_csv(path);
    std::remove(path.c_str());
    CHECK(k.tail_class() == TailClass::Tabulated);
    CHECK(k.radial(0.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(k.radial(0.5) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(k.radial(0.99) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK_THROWS_AS(k.radial(1.5), DomainError);
    CHECK(k.sigma1() == doctest::Approx(1.0 / 6.0).epsilon(1e-4));
    CHECK_THROWS_AS(KernelFamily::tabulated_csv("/nonexistent/k.csv"), ConfigError);
}

}
