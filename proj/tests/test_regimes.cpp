#include <doctest.h>

#include "nlheat/ldp.hpp"
#include "nlheat/regimes.hpp"
#include "oracles.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

using namespace nlheat;

TEST_SUITE("regimes") {

TEST_CASE("classification boundaries at t = 100, band 2") {
    const double t = 100.0;
    CHECK(classify(0.0, t) == Region::Standard);
    CHECK(classify(20.0, t) == Region::Standard);
    CHECK(classify(-20.0, t) == Region::Standard);
    CHECK(classify(20.5, t) == Region::Moderate);
    CHECK(classify(49.9, t) == Region::Moderate);
    CHECK(classify(50.0, t) == Region::Large);
    CHECK(classify(200.0, t) == Region::Large);
    CHECK(classify(200.5, t) == Region::ExtraLarge);
    CHECK(classify(vec2(30.0, 40.0), t) == Region::Large);
    CHECK_THROWS_AS(classify(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(classify(1.0, 10.0, 0.0), DomainError);
}

TEST_CASE("effective delta") {
    // |x| = t^{(1 + delta)/2}
    CHECK(delta_effective(std::pow(100.0, 0.75), 100.0) == doctest::Approx(0.5));
    CHECK(delta_effective(100.0, 100.0) == doctest::Approx(1.0));
    CHECK(std::isnan(delta_effective(0.0, 100.0)));
}

TEST_CASE("predictors for the gaussian family") {
    auto g = KernelFamily::gaussian(1);
    const double t = 100.0;
    // sigma = 2: local limit is the N(0, 2t) density
    auto p = predict_log_v(g, vec1(10.0), t);
    CHECK(p.kind == PredictorKind::LocalLimit);
    CHECK(p.log_v == doctest::Approx(-0.5 * std::log(4.0 * kPi * t) - 100.0 / (4.0 * t)).epsilon(1e-14));
    p = predict_log_v(g, vec1(30.0), t);
    CHECK(p.kind == PredictorKind::Quadratic);
    CHECK(p.log_v == doctest::Approx(-900.0 / 400.0));
    p = predict_log_v(g, vec1(100.0), t, 2.0, true);
    CHECK(p.kind == PredictorKind::RateExponent);
    CHECK(p.log_v == doctest::Approx(-0.2270855212200287 * t).epsilon(1e-12));
    auto generic = predict_log_v(g, vec1(100.0), t);
    CHECK(generic.log_v == doctest::Approx(p.log_v).epsilon(1e-8));
    p = predict_log_v(g, vec1(1000.0), t);
    CHECK(p.kind == PredictorKind::GaussianExtraLarge);
    CHECK(p.log_v == doctest::Approx(-1000.0 * std::sqrt(std::log(10.0))));
    CHECK_FALSE(p.bound_only);
}

TEST_CASE("extra-large predictors for other tails are bounds") {
    const double t = 50.0, x = 500.0;
    auto se = predict_log_v(KernelFamily::laplace(1.0), vec1(x), t);
    CHECK(se.kind == PredictorKind::StretchedExpBound);
    CHECK(se.bound_only);
    CHECK(se.log_v == doctest::Approx(-x));  // p = 1: (ln t)^0
    auto cs = predict_log_v(KernelFamily::compact_support(1, 2.0, Profile::Tent), vec1(x), t);
    CHECK(cs.kind == PredictorKind::CompactSupportBound);
    CHECK(cs.log_v == doctest::Approx(-(x / 2.0) * std::log(x / t)));
}

TEST_CASE("regime report ratio and bound bookkeeping") {
    auto g = KernelFamily::gaussian(1);
    const double t = 200.0, x = 100.0;
    double lv = gaussian_log_v(x, t, 1);
    auto r = regime_report(g, vec1(x), t, lv);
    CHECK(r.region == Region::Large);
    CHECK(r.ratio == doctest::Approx(lv / (-phi_gaussian(0.5).phi * t)).epsilon(1e-8));

    auto l = KernelFamily::laplace(1.0);
    auto b = regime_report(l, vec1(1000.0), t, -2000.0);
    CHECK(b.bound_only);
    CHECK(std::isnan(b.ratio));
    CHECK(b.bound_holds);
    auto v = regime_report(l, vec1(1000.0), t, -10.0);
    CHECK_FALSE(v.bound_holds);
}

// ln v(100, 10) = -66.8 for Laplace sits above the unit-constant bound -100;
// the bound is only structural, so the report has to say it failed
TEST_CASE("laplace bound at t = 10, |x| = 100 is flagged as violated") {
    const double t = 10.0, x = 100.0;
    double lv = oracle::laplace_log_v(x, t);
    CHECK(lv == doctest::Approx(-66.80).epsilon(1e-3));
    auto r = regime_report(KernelFamily::laplace(1.0), vec1(x), t, lv);
    CHECK(r.bound_only);
    CHECK(r.predicted_log_v == doctest::Approx(-x));
    CHECK_FALSE(r.bound_holds);
}

TEST_CASE("gaussian sweep writes one row per point") {
    auto rows = regime_sweep(KernelFamily::gaussian(1), {50.0, 100.0}, {5.0, 30.0, 80.0});
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].log_v == doctest::Approx(gaussian_log_v(5.0, 50.0, 1)));
    std::string path = "nlheat_test_sweep.csv";
    write_sweep_csv(rows, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,abs_x,region,ln_v,predicted,ratio,predictor,bound_only,bound_holds");
    int n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    CHECK(n == 6);
    std::remove(path.c_str());
}

}
