#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nlheat {

// Every tolerance the suite uses, in one place. Defaults are the published
// acceptance levels; overriding them is recorded in the manifest.
struct Tolerances {
    double mass = 1e-8;              // |int v - (1 - e^{-t})|
    double route = 1e-6;             // |ln v_series - ln v_spectral|
    double route_floor = -200.0;     // compare only where ln v > floor
    double region_i = 0.02;          // |v sqrt(4 pi t) e^{x^2/4t} - 1|
    double region_ii_lo = 0.9, region_ii_hi = 1.1;
    double second_order_lo = -1.5, second_order_hi = -0.5;
    double region_iii = 0.02;        // relative, extrapolated s(t) vs Phi_G(1)
    double golden = 1e-12;           // phi_gaussian vs in-suite bisection
    double phi_match = 1e-6;         // generic Phi vs closed Gaussian Phi
    double phi_laplace_lo = 0.85, phi_laplace_hi = 1.0;
    double envelope = 1e-8;          // I(grad L(g)) vs g.grad L(g) - L(g), relative to max(1, I)
    double i0_lo = 0.999, i0_hi = 1.001;
    double iinf_lo = 0.95, iinf_hi = 1.0;
    double region_iv_lo = 0.8, region_iv_hi = 1.2;
    double chernoff_se = 4.0;
    double hist_se = 3.0, hist_fraction = 0.95;
    double atom_se = 4.0;
    double deep_tail = 0.15;

    nlohmann::json to_json() const;
    static Tolerances from_json(const nlohmann::json& j);
};

struct SuiteConfig {
    std::uint64_t seed = 20261015;
    long mc_paths = 100000;
    unsigned workers = 0;
    Tolerances tol;

    nlohmann::json to_json() const;
    static SuiteConfig from_json(const nlohmann::json& j);
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CriterionResult {
    int id = 0;
    std::string key;
    std::string title;
    bool pass = false;
    std::vector<Check> checks;
    nlohmann::ordered_json measured;  // numbers as 17-digit strings
    double runtime_s = 0.0;
    double runtime_limit_s = 0.0;     // 0 = no budget

    std::string line() const;
};

struct SuiteReport {
    std::string suite;
    bool pass = false;
    std::vector<CriterionResult> criteria;
    SuiteConfig config;

    nlohmann::ordered_json to_json() const;
};

// "all", or one of the criterion keys: mass, routes, region_i, region_ii,
// region_iii, phi, rate, region_iv, chernoff, mc, repro.
const std::vector<std::string>& suite_names();
SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg);

// Collects the measured numbers of a report, keyed "key.name", for exact comparison.
nlohmann::ordered_json measured_numbers(const SuiteReport& r);

}  // namespace nlheat
