#include <doctest.h>

#include "nlheat/mcsim.hpp"
#include "nlheat/parallel.hpp"
#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace nlheat;

namespace {

// P{X(t) > x} for the Gaussian family: S_k ~ N(0, 2k)
double gaussian_tail(double t, double x) {
    double p = 0.0;
    for (long k = 1; k < 2000; ++k)
        p += std::exp(-t + k * std::log(t) - std::lgamma(k + 1.0)) * 0.5 * std::erfc(x / (2.0 * std::sqrt(double(k))));
    return p;
}

// mean of the tilted 1-D density by quadrature
double tilted_mean_quad(const KernelFamily& k, double g) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto w = [&](double x) { return std::exp(g * x) * k.radial(std::abs(x)); };
    double hi = k.bounded_support() ? k.mu() : 80.0;
    double z = GK::integrate(w, -hi, 0.0, 15, 1e-13) + GK::integrate(w, 0.0, hi, 15, 1e-13);
    auto xw = [&](double x) { return x * w(x); };
    double m = GK::integrate(xw, -hi, 0.0, 15, 1e-13) + GK::integrate(xw, 0.0, hi, 15, 1e-13);
    return m / z;
}

}  // namespace

TEST_SUITE("mcsim") {

TEST_CASE("poisson sampler moments") {
    std::mt19937_64 rng(3);
    for (double mean : {0.7, 3.0, 50.0, 1000.0}) {
        const int n = 200000;
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            double k = double(sample_poisson(mean, rng));
            s += k;
            s2 += k * k;
        }
        double m = s / n, v = s2 / n - m * m;
        CAPTURE(mean);
        CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / n));
        CHECK(v == doctest::Approx(mean).epsilon(0.03));
    }
    CHECK(sample_poisson(0.0, rng) == 0);
}

TEST_CASE("tilted jump samplers reproduce the tilted mean") {
    std::mt19937_64 rng(5);
    struct Case {
        KernelFamily k;
        double g;
    };
    std::vector<Case> cases = {
        {KernelFamily::gaussian(1), 0.8},
        {KernelFamily::laplace(1.0), 0.5},
        {KernelFamily::laplace(1.0), 0.0},
        {KernelFamily::stretched_exp(1, 1.0, 1.5), 1.2},
        {KernelFamily::stretched_exp(1, 1.0, 1.5), 0.0},
        {KernelFamily::compact_support(1, 1.0, Profile::Tent), 2.0},
        {KernelFamily::compact_support(1, 1.0, Profile::Epanechnikov), 0.7},
    };
    for (const auto& c : cases) {
        CAPTURE(c.k.name());
        CAPTURE(c.g);
        JumpSampler js(c.k, vec1(c.g));
        const int n = 100000;
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            double x = js(rng)[0];
            s += x;
            s2 += x * x;
        }
        double m = s / n, sd = std::sqrt(s2 / n - m * m);
        CHECK(std::abs(m - tilted_mean_quad(c.k, c.g)) < 5.0 * sd / std::sqrt(double(n)));
        if (c.g == 0.0) CHECK(sd * sd == doctest::Approx(c.k.sigma1()).epsilon(0.03));
    }
}

TEST_CASE("2-D gaussian jumps") {
    std::mt19937_64 rng(9);
    JumpSampler js(KernelFamily::gaussian(2), vec2(0.5, -0.25));
    const int n = 50000;
    Vec s = Vec::Zero(2);
    for (int i = 0; i < n; ++i) s += js(rng);
    s /= n;
    // tilted mean 2 gamma, variance 2 per coordinate
    CHECK(std::abs(s[0] - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(s[1] + 0.5) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("config validation and round trip") {
    SimConfig c;
    c.family = KernelFamily::laplace(1.0);
    c.t = 3.0;
    c.paths = 1000;
    c.seed = 42;
    c.estimator = EstimatorKind::Tail;
    c.thresholds = {1.0, 2.0};
    c.tilt = vec1(0.3);
    auto c2 = SimConfig::from_json(c.to_json());
    CHECK(c2.to_json() == c.to_json());

    auto bad = c;
    bad.paths = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.batches = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.tilt = vec1(1.5);
    CHECK_THROWS_AS(bad.validate(), DomainError);
    auto j = c.to_json();
    j["estimator"] = "kde";
    CHECK_THROWS_AS(SimConfig::from_json(j), ConfigError);
    CHECK_THROWS_AS(SimConfig::from_json(nlohmann::json{{"t", 1.0}}), ConfigError);
}

TEST_CASE("same seed gives identical reports for any worker count") {
    SimConfig c;
    c.family = KernelFamily::laplace(1.0);
    c.t = 4.0;
    c.paths = 20000;
    c.seed = 123;
    set_max_workers(1);
    auto a = sample_paths(c);
    set_max_workers(4);
    auto b = sample_paths(c);
    set_max_workers(0);
    CHECK(a.to_json() == b.to_json());
    c.seed = 124;
    CHECK(sample_paths(c).to_json() != a.to_json());
}

TEST_CASE("histogram, atom and moments against the gaussian series") {
    SimConfig c;
    c.family = KernelFamily::gaussian(1);
    c.t = 4.0;
    c.paths = 100000;
    c.seed = 77;
    c.bin_width = 0.5;
    auto r = sample_paths(c);
    CHECK(std::abs(r.atom_fraction.value - std::exp(-4.0)) < 4.0 * r.atom_fraction.se);
    CHECK(std::abs(r.mean.value) < 4.0 * r.mean.se);
    CHECK(std::abs(r.variance.value - 8.0) < 4.0 * r.variance.se);
    // bin averages of v from the exact tail function
    std::size_t ok = 0;
    for (std::size_t i = 0; i < r.bin_centers.size(); ++i) {
        double x = r.bin_centers[i][0], h = 0.5 * r.bin_width;
        double lo = x - h, hi = x + h;
        // P{lo < X <= hi, N >= 1} / width
        double want = (gaussian_tail(4.0, lo) - gaussian_tail(4.0, hi)) / r.bin_width;
        if (std::abs(r.density[i].value - want) <= 3.0 * r.density[i].se + 1e-12) ++ok;
    }
    CHECK(double(ok) >= 0.95 * double(r.bin_centers.size()));
    CHECK(r.ess == doctest::Approx(double(c.paths)));
}

TEST_CASE("tilted tail estimate of a rare event") {
    SimConfig c;
    c.family = KernelFamily::gaussian(1);
    c.t = 5.0;
    c.paths = 40000;
    c.seed = 99;
    c.thresholds = {25.0};
    // the tilted walk drifts at t e^{g^2} 2g; aim it at x = 25
    c.tilt = vec1(1.0);
    auto r = tilted_tail(c);
    double want = gaussian_tail(5.0, 25.0);
    REQUIRE(r.tail.size() == 1);
    CAPTURE(want);
    CAPTURE(r.tail[0].value);
    CHECK(want < 1e-8);
    CHECK(std::abs(r.tail[0].value - want) < 4.0 * r.tail[0].se);
    CHECK(r.tail[0].se < 0.1 * want);
    SimConfig no_thr = c;
    no_thr.thresholds.clear();
    CHECK_THROWS_AS(tilted_tail(no_thr), ConfigError);
}

TEST_CASE("laplace deep tail against the Bessel series") {
    // P{X(20) > 40} = sum_k Pois(k; 20) int_40^inf a^{*k}; exact ln P = -16.3450...
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double t = 20.0, x0 = 40.0;
    double P = 0.0;
    for (long k = 1; k < 300; ++k) {
        double lw = -t + k * std::log(t) - std::lgamma(k + 1.0);
        double tail = GK::integrate([&](double x) { return std::exp(lw + oracle::laplace_log_power(k, x)); }, x0,
                                    x0 + 400.0, 15, 1e-12);
        P += tail;
        if (k > 60 && tail < 1e-20 * P) break;
    }
    CHECK(std::log(P) == doctest::Approx(-16.3450059902275).epsilon(1e-9));

    SimConfig c;
    c.family = KernelFamily::laplace(1.0);
    c.t = t;
    c.paths = 100000;
    c.seed = 2024;
    c.thresholds = {x0};
    c.tilt = vec1(0.5249);  // e^{ell} ell' = 2: the tilted walk drifts to x0
    auto r = tilted_tail(c);
    CAPTURE(r.tail[0].value);
    CHECK(std::abs(r.tail[0].value - P) < 4.0 * r.tail[0].se);
    CHECK(r.tail[0].se < 0.05 * P);
}

TEST_CASE("sums of exactly k laplace jumps") {
    // S_1 tail e^{-x}/2, S_2 density (1 + |x|) e^{-|x|}/4 with tail (2 + x) e^{-x}/4
    auto r1 = sample_sums(KernelFamily::laplace(1.0), 1, {1.0, 3.0}, 100000, 8);
    CHECK(std::abs(r1.tail[0].value - 0.5 * std::exp(-1.0)) < 4.0 * r1.tail[0].se);
    CHECK(std::abs(r1.tail[1].value - 0.5 * std::exp(-3.0)) < 4.0 * r1.tail[1].se);
    auto r2 = sample_sums(KernelFamily::laplace(1.0), 2, {2.0}, 100000, 8);
    CHECK(std::abs(r2.tail[0].value - 4.0 * std::exp(-2.0) / 4.0) < 4.0 * r2.tail[0].se);
}

TEST_CASE("csv and json output") {
    SimConfig c;
    c.paths = 2000;
    c.thresholds = {0.5};
    auto r = sample_paths(c);
    std::string path = "nlheat_test_mc.csv";
    r.write_csv(path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "bin_center,estimate,se");
    std::remove(path.c_str());
    auto j = r.to_json();
    CHECK(j.contains("atom_fraction"));
    CHECK(j["paths"] == 2000);
}

}
